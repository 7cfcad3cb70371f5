#include "gqmech/poly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "gqmech/errors.hpp"

namespace gqm {

Polynomial Polynomial::constant(std::size_t nvars, double c) {
  Polynomial p(nvars);
  std::vector<std::uint8_t> e(nvars, 0);
  p.add_term(c, e);
  p.normalize();
  return p;
}

Polynomial Polynomial::variable(std::size_t nvars, std::size_t index) {
  if (index >= nvars) throw DimensionMismatch("Polynomial::variable: index out of range");
  Polynomial p(nvars);
  std::vector<std::uint8_t> e(nvars, 0);
  e[index] = 1;
  p.add_term(1.0, e);
  p.normalize();
  return p;
}

Polynomial Polynomial::monomial(std::size_t nvars, double c,
                                std::span<const std::uint8_t> exps) {
  if (exps.size() != nvars) throw DimensionMismatch("Polynomial::monomial: exponent size");
  Polynomial p(nvars);
  p.add_term(c, exps);
  p.normalize();
  return p;
}

std::size_t Polynomial::degree() const {
  std::size_t d = 0;
  for (const Term& t : terms_) {
    std::size_t td = 0;
    for (auto e : t.exps) td += e;
    d = std::max(d, td);
  }
  return d;
}

double Polynomial::eval(std::span<const double> x) const {
  if (x.size() != nvars_) throw DimensionMismatch("Polynomial::eval: point size");
  double s = 0.0;
  for (const Term& t : terms_) {
    double m = t.coeff;
    for (std::size_t i = 0; i < nvars_; ++i) {
      for (std::uint8_t k = 0; k < t.exps[i]; ++k) m *= x[i];
    }
    s += m;
  }
  return s;
}

Polynomial Polynomial::derivative(std::size_t var) const {
  if (var >= nvars_) throw DimensionMismatch("Polynomial::derivative: variable index");
  Polynomial out(nvars_);
  for (const Term& t : terms_) {
    if (t.exps[var] == 0) continue;
    std::vector<std::uint8_t> e = t.exps;
    double c = t.coeff * static_cast<double>(e[var]);
    e[var] -= 1;
    out.add_term(c, e);
  }
  out.normalize();
  return out;
}

Polynomial Polynomial::remap(std::size_t new_nvars,
                             std::span<const std::size_t> map) const {
  if (map.size() != nvars_) throw DimensionMismatch("Polynomial::remap: map size");
  Polynomial out(new_nvars);
  for (const Term& t : terms_) {
    std::vector<std::uint8_t> e(new_nvars, 0);
    for (std::size_t i = 0; i < nvars_; ++i) {
      if (map[i] >= new_nvars) throw DimensionMismatch("Polynomial::remap: target index");
      e[map[i]] = static_cast<std::uint8_t>(e[map[i]] + t.exps[i]);
    }
    out.add_term(t.coeff, e);
  }
  out.normalize();
  return out;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (nvars_ != o.nvars_) throw DimensionMismatch("Polynomial::+=: variable count");
  for (const Term& t : o.terms_) add_term(t.coeff, t.exps);
  normalize();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  if (nvars_ != o.nvars_) throw DimensionMismatch("Polynomial::-=: variable count");
  for (const Term& t : o.terms_) add_term(-t.coeff, t.exps);
  normalize();
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  for (Term& t : terms_) t.coeff *= s;
  normalize();
  return *this;
}

Polynomial Polynomial::operator-() const {
  Polynomial out = *this;
  for (Term& t : out.terms_) t.coeff = -t.coeff;
  return out;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.nvars_ != b.nvars_) throw DimensionMismatch("Polynomial::*: variable count");
  Polynomial out(a.nvars_);
  for (const Polynomial::Term& ta : a.terms_) {
    for (const Polynomial::Term& tb : b.terms_) {
      std::vector<std::uint8_t> e(a.nvars_);
      for (std::size_t i = 0; i < a.nvars_; ++i)
        e[i] = static_cast<std::uint8_t>(ta.exps[i] + tb.exps[i]);
      out.add_term(ta.coeff * tb.coeff, e);
    }
  }
  out.normalize();
  return out;
}

void Polynomial::add_term(double c, std::span<const std::uint8_t> exps) {
  Term t;
  t.coeff = c;
  t.exps.assign(exps.begin(), exps.end());
  terms_.push_back(std::move(t));
}

void Polynomial::normalize() {
  std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) {
    return a.exps < b.exps;
  });
  std::vector<Term> merged;
  for (Term& t : terms_) {
    if (!merged.empty() && merged.back().exps == t.exps)
      merged.back().coeff += t.coeff;
    else
      merged.push_back(std::move(t));
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const Term& t) { return t.coeff == 0.0; }),
               merged.end());
  terms_ = std::move(merged);
}

std::string Polynomial::to_string(std::span<const std::string> names) const {
  if (terms_.empty()) return "0";
  std::string s;
  char buf[64];
  for (std::size_t ti = 0; ti < terms_.size(); ++ti) {
    const Term& t = terms_[ti];
    if (ti > 0) s += " + ";
    std::snprintf(buf, sizeof(buf), "%.17g", t.coeff);
    s += buf;
    for (std::size_t i = 0; i < nvars_; ++i) {
      if (t.exps[i] == 0) continue;
      s += "*";
      if (i < names.size())
        s += names[i];
      else {
        std::snprintf(buf, sizeof(buf), "x%zu", i);
        s += buf;
      }
      if (t.exps[i] > 1) {
        std::snprintf(buf, sizeof(buf), "^%d", static_cast<int>(t.exps[i]));
        s += buf;
      }
    }
  }
  return s;
}

}  // namespace gqm
