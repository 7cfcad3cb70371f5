#ifndef GQMECH_POLY_HPP
#define GQMECH_POLY_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gqm {

// Sparse multivariate polynomial with exact coefficient algebra.
// Products and partial derivatives stay closed in this class, which is what
// makes Poisson brackets of polynomial observables exact to roundoff.
class Polynomial {
 public:
  struct Term {
    double coeff = 0.0;
    std::vector<std::uint8_t> exps;  // one exponent per variable
  };

  Polynomial() : nvars_(0) {}
  explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}

  static Polynomial constant(std::size_t nvars, double c);
  static Polynomial variable(std::size_t nvars, std::size_t index);
  // Single monomial c * prod x_i^e_i.
  static Polynomial monomial(std::size_t nvars, double c,
                             std::span<const std::uint8_t> exps);

  std::size_t nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t degree() const;
  const std::vector<Term>& terms() const { return terms_; }

  double eval(std::span<const double> x) const;
  Polynomial derivative(std::size_t var) const;

  // Produces an equal polynomial on a larger variable set; old variable i
  // becomes variable map[i].
  Polynomial remap(std::size_t new_nvars, std::span<const std::size_t> map) const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);
  Polynomial operator-() const;

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  std::string to_string(std::span<const std::string> names = {}) const;

 private:
  void add_term(double c, std::span<const std::uint8_t> exps);
  void normalize();

  std::size_t nvars_;
  std::vector<Term> terms_;  // sorted by exponent vector, coefficients nonzero
};

}  // namespace gqm

#endif  // GQMECH_POLY_HPP
