#include "gqmech/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <utility>

#include "gqmech/errors.hpp"

namespace gqm {

namespace {

enum class Op {
  Const,
  Var,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Neg,
  Sin,
  Cos,
  Tan,
  Sinh,
  Cosh,
  Tanh,
  Exp,
  Log,
  Sqrt,
  Abs,
  Asin,
  Acos,
  Atan,
};

const std::map<std::string, Op>& function_table() {
  static const std::map<std::string, Op> table = {
      {"sin", Op::Sin},   {"cos", Op::Cos},   {"tan", Op::Tan},
      {"sinh", Op::Sinh}, {"cosh", Op::Cosh}, {"tanh", Op::Tanh},
      {"exp", Op::Exp},   {"log", Op::Log},   {"sqrt", Op::Sqrt},
      {"abs", Op::Abs},   {"asin", Op::Asin}, {"acos", Op::Acos},
      {"atan", Op::Atan},
  };
  return table;
}

}  // namespace

struct Expression::Node {
  Op op = Op::Const;
  double value = 0.0;     // Const
  std::size_t var = 0;    // Var
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make_const(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->op = Op::Const;
  n->value = v;
  return n;
}

NodePtr make_var(std::size_t i) {
  auto n = std::make_shared<Expression::Node>();
  n->op = Op::Var;
  n->var = i;
  return n;
}

bool is_const(const NodePtr& n, double v) {
  return n->op == Op::Const && n->value == v;
}

NodePtr make_node(Op op, NodePtr a, NodePtr b = nullptr) {
  // Light constant folding keeps symbolic derivatives small.
  if (op == Op::Add) {
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value + b->value);
  }
  if (op == Op::Sub) {
    if (is_const(b, 0.0)) return a;
    if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value - b->value);
  }
  if (op == Op::Mul) {
    if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value * b->value);
  }
  if (op == Op::Div) {
    if (is_const(a, 0.0)) return make_const(0.0);
    if (is_const(b, 1.0)) return a;
  }
  if (op == Op::Neg && a->op == Op::Const) return make_const(-a->value);
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

double eval_node(const Expression::Node& n, std::span<const double> x) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return x[n.var];
    case Op::Add: return eval_node(*n.a, x) + eval_node(*n.b, x);
    case Op::Sub: return eval_node(*n.a, x) - eval_node(*n.b, x);
    case Op::Mul: return eval_node(*n.a, x) * eval_node(*n.b, x);
    case Op::Div: return eval_node(*n.a, x) / eval_node(*n.b, x);
    case Op::Pow: return std::pow(eval_node(*n.a, x), eval_node(*n.b, x));
    case Op::Neg: return -eval_node(*n.a, x);
    case Op::Sin: return std::sin(eval_node(*n.a, x));
    case Op::Cos: return std::cos(eval_node(*n.a, x));
    case Op::Tan: return std::tan(eval_node(*n.a, x));
    case Op::Sinh: return std::sinh(eval_node(*n.a, x));
    case Op::Cosh: return std::cosh(eval_node(*n.a, x));
    case Op::Tanh: return std::tanh(eval_node(*n.a, x));
    case Op::Exp: return std::exp(eval_node(*n.a, x));
    case Op::Log: return std::log(eval_node(*n.a, x));
    case Op::Sqrt: return std::sqrt(eval_node(*n.a, x));
    case Op::Abs: return std::abs(eval_node(*n.a, x));
    case Op::Asin: return std::asin(eval_node(*n.a, x));
    case Op::Acos: return std::acos(eval_node(*n.a, x));
    case Op::Atan: return std::atan(eval_node(*n.a, x));
  }
  return 0.0;
}

NodePtr diff_node(const NodePtr& n, std::size_t var) {
  switch (n->op) {
    case Op::Const: return make_const(0.0);
    case Op::Var: return make_const(n->var == var ? 1.0 : 0.0);
    case Op::Add: return make_node(Op::Add, diff_node(n->a, var), diff_node(n->b, var));
    case Op::Sub: return make_node(Op::Sub, diff_node(n->a, var), diff_node(n->b, var));
    case Op::Mul:
      return make_node(Op::Add, make_node(Op::Mul, diff_node(n->a, var), n->b),
                       make_node(Op::Mul, n->a, diff_node(n->b, var)));
    case Op::Div:
      // (a/b)' = a'/b - a b' / b^2
      return make_node(
          Op::Sub, make_node(Op::Div, diff_node(n->a, var), n->b),
          make_node(Op::Div, make_node(Op::Mul, n->a, diff_node(n->b, var)),
                    make_node(Op::Mul, n->b, n->b)));
    case Op::Pow: {
      if (n->b->op == Op::Const) {
        // (a^c)' = c a^(c-1) a'
        double c = n->b->value;
        return make_node(
            Op::Mul, make_const(c),
            make_node(Op::Mul, make_node(Op::Pow, n->a, make_const(c - 1.0)),
                      diff_node(n->a, var)));
      }
      // General a^b = exp(b log a).
      NodePtr loga = make_node(Op::Log, n->a);
      NodePtr inner = make_node(
          Op::Add, make_node(Op::Mul, diff_node(n->b, var), loga),
          make_node(Op::Div, make_node(Op::Mul, n->b, diff_node(n->a, var)), n->a));
      return make_node(Op::Mul, make_node(Op::Pow, n->a, n->b), inner);
    }
    case Op::Neg: return make_node(Op::Neg, diff_node(n->a, var));
    case Op::Sin: return make_node(Op::Mul, make_node(Op::Cos, n->a), diff_node(n->a, var));
    case Op::Cos:
      return make_node(Op::Neg,
                       make_node(Op::Mul, make_node(Op::Sin, n->a), diff_node(n->a, var)));
    case Op::Tan: {
      NodePtr sec2 = make_node(Op::Div, make_const(1.0),
                               make_node(Op::Mul, make_node(Op::Cos, n->a),
                                         make_node(Op::Cos, n->a)));
      return make_node(Op::Mul, sec2, diff_node(n->a, var));
    }
    case Op::Sinh:
      return make_node(Op::Mul, make_node(Op::Cosh, n->a), diff_node(n->a, var));
    case Op::Cosh:
      return make_node(Op::Mul, make_node(Op::Sinh, n->a), diff_node(n->a, var));
    case Op::Tanh: {
      NodePtr sech2 = make_node(Op::Div, make_const(1.0),
                                make_node(Op::Mul, make_node(Op::Cosh, n->a),
                                          make_node(Op::Cosh, n->a)));
      return make_node(Op::Mul, sech2, diff_node(n->a, var));
    }
    case Op::Exp: return make_node(Op::Mul, make_node(Op::Exp, n->a), diff_node(n->a, var));
    case Op::Log: return make_node(Op::Div, diff_node(n->a, var), n->a);
    case Op::Sqrt:
      return make_node(Op::Div, diff_node(n->a, var),
                       make_node(Op::Mul, make_const(2.0), make_node(Op::Sqrt, n->a)));
    case Op::Abs:
      // d|a| = sign(a) a' ; expressed as a/|a| * a'
      return make_node(Op::Mul, make_node(Op::Div, n->a, make_node(Op::Abs, n->a)),
                       diff_node(n->a, var));
    case Op::Asin:
      return make_node(Op::Div, diff_node(n->a, var),
                       make_node(Op::Sqrt, make_node(Op::Sub, make_const(1.0),
                                                     make_node(Op::Mul, n->a, n->a))));
    case Op::Acos:
      return make_node(Op::Neg,
                       make_node(Op::Div, diff_node(n->a, var),
                                 make_node(Op::Sqrt,
                                           make_node(Op::Sub, make_const(1.0),
                                                     make_node(Op::Mul, n->a, n->a)))));
    case Op::Atan:
      return make_node(Op::Div, diff_node(n->a, var),
                       make_node(Op::Add, make_const(1.0),
                                 make_node(Op::Mul, n->a, n->a)));
  }
  return make_const(0.0);
}

class Parser {
 public:
  Parser(const std::string& text, std::span<const std::string> variables)
      : text_(text), vars_(variables) {}

  NodePtr parse() {
    NodePtr e = parse_sum();
    skip_ws();
    if (pos_ != text_.size())
      throw ConfigError("expression", "unexpected trailing input at '" +
                                          text_.substr(pos_) + "'");
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  NodePtr parse_sum() {
    NodePtr e = parse_product();
    for (;;) {
      if (consume('+'))
        e = make_node(Op::Add, e, parse_product());
      else if (consume('-'))
        e = make_node(Op::Sub, e, parse_product());
      else
        return e;
    }
  }

  NodePtr parse_product() {
    NodePtr e = parse_unary();
    for (;;) {
      if (consume('*'))
        e = make_node(Op::Mul, e, parse_unary());
      else if (consume('/'))
        e = make_node(Op::Div, e, parse_unary());
      else
        return e;
    }
  }

  NodePtr parse_unary() {
    if (consume('-')) return make_node(Op::Neg, parse_unary());
    if (consume('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (consume('^')) {
      // Right-associative; exponent may itself be signed.
      NodePtr expn = parse_unary();
      return make_node(Op::Pow, base, expn);
    }
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw ConfigError("expression", "unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = parse_sum();
      if (!consume(')')) throw ConfigError("expression", "missing ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
    throw ConfigError("expression", std::string("unexpected character '") + c + "'");
  }

  NodePtr parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
            text_[pos_] == 'e' || text_[pos_] == 'E' ||
            ((text_[pos_] == '+' || text_[pos_] == '-') && pos_ > start &&
             (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
      ++pos_;
    try {
      return make_const(std::stod(text_.substr(start, pos_ - start)));
    } catch (const std::exception&) {
      throw ConfigError("expression", "bad numeric literal '" +
                                          text_.substr(start, pos_ - start) + "'");
    }
  }

  NodePtr parse_name() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string name = text_.substr(start, pos_ - start);
    if (name == "pi") return make_const(3.14159265358979323846);
    auto fit = function_table().find(name);
    if (fit != function_table().end()) {
      if (!consume('(')) throw ConfigError("expression", "expected '(' after " + name);
      NodePtr arg = parse_sum();
      if (!consume(')')) throw ConfigError("expression", "missing ')' after " + name);
      return make_node(fit->second, arg);
    }
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == name) return make_var(i);
    }
    throw ConfigError("expression", "unknown identifier '" + name + "'");
  }

  const std::string& text_;
  std::span<const std::string> vars_;
  std::size_t pos_ = 0;
};

std::string node_to_string(const Expression::Node& n, std::span<const std::string> names) {
  char buf[64];
  auto bin = [&](const char* op) {
    return "(" + node_to_string(*n.a, names) + op + node_to_string(*n.b, names) + ")";
  };
  auto fn = [&](const char* f) { return std::string(f) + "(" + node_to_string(*n.a, names) + ")"; };
  switch (n.op) {
    case Op::Const:
      std::snprintf(buf, sizeof(buf), "%.17g", n.value);
      return buf;
    case Op::Var:
      return n.var < names.size() ? names[n.var] : "x" + std::to_string(n.var);
    case Op::Add: return bin("+");
    case Op::Sub: return bin("-");
    case Op::Mul: return bin("*");
    case Op::Div: return bin("/");
    case Op::Pow: return bin("^");
    case Op::Neg: return "(-" + node_to_string(*n.a, names) + ")";
    case Op::Sin: return fn("sin");
    case Op::Cos: return fn("cos");
    case Op::Tan: return fn("tan");
    case Op::Sinh: return fn("sinh");
    case Op::Cosh: return fn("cosh");
    case Op::Tanh: return fn("tanh");
    case Op::Exp: return fn("exp");
    case Op::Log: return fn("log");
    case Op::Sqrt: return fn("sqrt");
    case Op::Abs: return fn("abs");
    case Op::Asin: return fn("asin");
    case Op::Acos: return fn("acos");
    case Op::Atan: return fn("atan");
  }
  return "?";
}

}  // namespace

Expression::Expression() : root_(make_const(0.0)), nvars_(0) {}

Expression::Expression(std::shared_ptr<const Node> root, std::size_t nvars)
    : root_(std::move(root)), nvars_(nvars) {}

Expression Expression::parse(const std::string& text,
                             std::span<const std::string> variables) {
  Parser p(text, variables);
  return Expression(p.parse(), variables.size());
}

Expression Expression::constant(double c) { return Expression(make_const(c), 0); }

double Expression::eval(std::span<const double> x) const {
  if (x.size() < nvars_) throw DimensionMismatch("Expression::eval: point size");
  return eval_node(*root_, x);
}

Expression Expression::derivative(std::size_t var) const {
  return Expression(diff_node(root_, var), nvars_);
}

bool Expression::is_constant_zero() const { return is_const(root_, 0.0); }

std::string Expression::to_string(std::span<const std::string> names) const {
  return node_to_string(*root_, names);
}

}  // namespace gqm
