#ifndef GQMECH_EXPR_HPP
#define GQMECH_EXPR_HPP

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace gqm {

// Small expression language for configuration-defined scalar fields:
// numbers, named variables, + - * / ^, unary minus, parentheses, and the
// elementary functions sin cos tan sinh cosh tanh exp log sqrt abs
// asin acos atan. Differentiation is symbolic, so config-defined fields
// carry analytic first derivatives.
class Expression {
 public:
  Expression();  // constant 0

  static Expression parse(const std::string& text,
                          std::span<const std::string> variables);
  static Expression constant(double c);

  double eval(std::span<const double> x) const;
  Expression derivative(std::size_t var) const;

  std::size_t nvars() const { return nvars_; }
  bool is_constant_zero() const;
  std::string to_string(std::span<const std::string> names) const;

  struct Node;

 private:
  Expression(std::shared_ptr<const Node> root, std::size_t nvars);

  std::shared_ptr<const Node> root_;
  std::size_t nvars_;
};

}  // namespace gqm

#endif  // GQMECH_EXPR_HPP
