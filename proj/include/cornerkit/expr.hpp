#ifndef CORNERKIT_EXPR_HPP
#define CORNERKIT_EXPR_HPP

// Scalar-expression DSL over the chart coordinates x1, x2, x3.
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' factor)?          (right-associative, binds tighter than '-')
//   atom   := number | x1 | x2 | x3 | ident '(' expr ')' | '(' expr ')'
//   ident  := exp | ln | sin | cos | sqrt | abs
//
// Expressions are evaluated as second-order jets (value, gradient, Hessian).

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include "cornerkit/point.hpp"

namespace cornerkit {

using Vec3d = std::array<double, 3>;
using Mat3d = std::array<std::array<double, 3>, 3>;

/// Value, gradient and Hessian of a scalar at a point.
struct Jet2 {
  double value = 0.0;
  Vec3d grad{};
  Mat3d hess{};

  static Jet2 constant(double c) { return Jet2{c, {}, {}}; }
  static Jet2 coordinate(int index, double at) {
    Jet2 j{at, {}, {}};
    j.grad[static_cast<std::size_t>(index)] = 1.0;
    return j;
  }
};

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.value = a.value + b.value;
  for (std::size_t i = 0; i < 3; ++i) {
    r.grad[i] = a.grad[i] + b.grad[i];
    for (std::size_t j = 0; j < 3; ++j) r.hess[i][j] = a.hess[i][j] + b.hess[i][j];
  }
  return r;
}

inline Jet2 operator-(const Jet2& a) {
  Jet2 r;
  r.value = -a.value;
  for (std::size_t i = 0; i < 3; ++i) {
    r.grad[i] = -a.grad[i];
    for (std::size_t j = 0; j < 3; ++j) r.hess[i][j] = -a.hess[i][j];
  }
  return r;
}

inline Jet2 operator-(const Jet2& a, const Jet2& b) { return a + (-b); }

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.value = a.value * b.value;
  for (std::size_t i = 0; i < 3; ++i) r.grad[i] = a.value * b.grad[i] + b.value * a.grad[i];
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i; j < 3; ++j) {
      const double h = a.value * b.hess[i][j] + b.value * a.hess[i][j] + a.grad[i] * b.grad[j] +
                       b.grad[i] * a.grad[j];
      r.hess[i][j] = h;
      r.hess[j][i] = h;
    }
  }
  return r;
}

/// Composes a scalar function f (given f(a), f'(a), f''(a)) with the jet a.
inline Jet2 chain(const Jet2& a, double f0, double f1, double f2) {
  Jet2 r;
  r.value = f0;
  for (std::size_t i = 0; i < 3; ++i) r.grad[i] = f1 * a.grad[i];
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i; j < 3; ++j) {
      const double h = f1 * a.hess[i][j] + f2 * a.grad[i] * a.grad[j];
      r.hess[i][j] = h;
      r.hess[j][i] = h;
    }
  }
  return r;
}

inline Jet2 reciprocal(const Jet2& a) {
  const double inv = 1.0 / a.value;
  return chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * reciprocal(b); }

// ---------------------------------------------------------------------------

enum class UnaryOp { Neg, Exp, Ln, Sin, Cos, Sqrt, Abs };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

enum class ParseErrorKind { Syntax, UnknownIdentifier, Arity };

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, std::size_t offset, const std::string& what)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), kind_(kind),
        offset_(offset) {}

  ParseErrorKind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

 private:
  ParseErrorKind kind_;
  std::size_t offset_;
};

/// Raised when an expression is evaluated outside its domain (ln, sqrt, division, power).
class DomainError : public std::runtime_error {
 public:
  DomainError(const std::string& what, std::string subexpr)
      : std::runtime_error(what + " in '" + subexpr + "'"), subexpr_(std::move(subexpr)) {}

  const std::string& subexpression() const { return subexpr_; }

 private:
  std::string subexpr_;
};

/// Non-fatal evaluation notes.
struct EvalDiagnostics {
  bool abs_kink = false;  // abs() evaluated at exactly 0; its derivatives were taken as 0
};

class ScalarExpr;

namespace detail {

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Variable {
  int index;  // 0-based
};
struct Constant {
  double value;
};
struct Unary {
  UnaryOp op;
  NodePtr arg;
};
struct Binary {
  BinaryOp op;
  NodePtr lhs;
  NodePtr rhs;
};

struct Node {
  std::variant<Variable, Constant, Unary, Binary> data;
};

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (v < 0.0 || (v == 0.0 && std::signbit(v))) return "(" + s + ")";
  return s;
}

inline const char* unary_name(UnaryOp op) {
  switch (op) {
    case UnaryOp::Neg: return "-";
    case UnaryOp::Exp: return "exp";
    case UnaryOp::Ln: return "ln";
    case UnaryOp::Sin: return "sin";
    case UnaryOp::Cos: return "cos";
    case UnaryOp::Sqrt: return "sqrt";
    case UnaryOp::Abs: return "abs";
  }
  return "?";
}

inline char binary_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return '+';
    case BinaryOp::Sub: return '-';
    case BinaryOp::Mul: return '*';
    case BinaryOp::Div: return '/';
    case BinaryOp::Pow: return '^';
  }
  return '?';
}

inline std::string print(const Node& n) {
  return std::visit(
      [](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Variable>) {
          return "x" + std::to_string(d.index + 1);
        } else if constexpr (std::is_same_v<T, Constant>) {
          return format_number(d.value);
        } else if constexpr (std::is_same_v<T, Unary>) {
          if (d.op == UnaryOp::Neg) return "(-" + print(*d.arg) + ")";
          return std::string(unary_name(d.op)) + "(" + print(*d.arg) + ")";
        } else {
          return "(" + print(*d.lhs) + " " + binary_symbol(d.op) + " " + print(*d.rhs) + ")";
        }
      },
      n.data);
}

inline const Constant* as_constant(const NodePtr& n) { return std::get_if<Constant>(&n->data); }

inline double apply_unary(UnaryOp op, double a) {
  switch (op) {
    case UnaryOp::Neg: return -a;
    case UnaryOp::Exp: return std::exp(a);
    case UnaryOp::Ln: return a > 0.0 ? std::log(a) : std::nan("");
    case UnaryOp::Sin: return std::sin(a);
    case UnaryOp::Cos: return std::cos(a);
    case UnaryOp::Sqrt: return a > 0.0 ? std::sqrt(a) : std::nan("");
    case UnaryOp::Abs: return std::fabs(a);
  }
  return std::nan("");
}

inline bool is_integer(double v) { return std::isfinite(v) && std::floor(v) == v; }

inline double apply_binary(BinaryOp op, double a, double b) {
  switch (op) {
    case BinaryOp::Add: return a + b;
    case BinaryOp::Sub: return a - b;
    case BinaryOp::Mul: return a * b;
    case BinaryOp::Div: return b != 0.0 ? a / b : std::nan("");
    case BinaryOp::Pow: return (a > 0.0 || is_integer(b)) ? std::pow(a, b) : std::nan("");
  }
  return std::nan("");
}

inline NodePtr make_constant(double v) { return std::make_shared<const Node>(Node{Constant{v}}); }

// Constant subtrees fold unless the folded value would be non-finite; those are
// left in place so evaluation reports the domain error with its subexpression.
inline NodePtr make_unary(UnaryOp op, NodePtr a) {
  if (const auto* c = as_constant(a)) {
    const double v = apply_unary(op, c->value);
    if (std::isfinite(v)) return make_constant(v);
  }
  return std::make_shared<const Node>(Node{Unary{op, std::move(a)}});
}

inline NodePtr make_binary(BinaryOp op, NodePtr a, NodePtr b) {
  const auto* ca = as_constant(a);
  const auto* cb = as_constant(b);
  if (ca && cb) {
    const double v = apply_binary(op, ca->value, cb->value);
    if (std::isfinite(v)) return make_constant(v);
  }
  return std::make_shared<const Node>(Node{Binary{op, std::move(a), std::move(b)}});
}

struct Evaluator {
  const Point& p;
  EvalDiagnostics* diag;

  Jet2 operator()(const Node& n) const {
    return std::visit([&](const auto& d) { return eval(n, d); }, n.data);
  }

  Jet2 eval(const Node&, const Variable& v) const {
    return Jet2::coordinate(v.index, p[static_cast<std::size_t>(v.index)]);
  }
  Jet2 eval(const Node&, const Constant& c) const { return Jet2::constant(c.value); }

  Jet2 eval(const Node& self, const Unary& u) const {
    const Jet2 a = (*this)(*u.arg);
    const double x = a.value;
    switch (u.op) {
      case UnaryOp::Neg: return -a;
      case UnaryOp::Exp: {
        const double e = std::exp(x);
        return chain(a, e, e, e);
      }
      case UnaryOp::Ln:
        if (!(x > 0.0)) throw DomainError("ln of non-positive value", print(self));
        return chain(a, std::log(x), 1.0 / x, -1.0 / (x * x));
      case UnaryOp::Sin: return chain(a, std::sin(x), std::cos(x), -std::sin(x));
      case UnaryOp::Cos: return chain(a, std::cos(x), -std::sin(x), -std::cos(x));
      case UnaryOp::Sqrt: {
        if (!(x > 0.0)) throw DomainError("sqrt of non-positive value", print(self));
        const double s = std::sqrt(x);
        return chain(a, s, 0.5 / s, -0.25 / (s * x));
      }
      case UnaryOp::Abs:
        if (x == 0.0) {
          if (diag) diag->abs_kink = true;
          return chain(a, 0.0, 0.0, 0.0);
        }
        return chain(a, std::fabs(x), x > 0.0 ? 1.0 : -1.0, 0.0);
    }
    throw DomainError("unknown unary operator", print(self));
  }

  Jet2 eval(const Node& self, const Binary& b) const {
    const Jet2 l = (*this)(*b.lhs);
    if (b.op == BinaryOp::Pow) return power(self, l, b);
    const Jet2 r = (*this)(*b.rhs);
    switch (b.op) {
      case BinaryOp::Add: return l + r;
      case BinaryOp::Sub: return l - r;
      case BinaryOp::Mul: return l * r;
      case BinaryOp::Div:
        if (r.value == 0.0) throw DomainError("division by zero", print(self));
        return l / r;
      case BinaryOp::Pow: break;
    }
    throw DomainError("unknown binary operator", print(self));
  }

  Jet2 power(const Node& self, const Jet2& base, const Binary& b) const {
    if (const auto* c = as_constant(b.rhs)) {
      const double n = c->value;
      const double x = base.value;
      if (n == 0.0) return Jet2::constant(1.0);
      if (is_integer(n)) {
        if (x == 0.0 && n < 0.0) throw DomainError("zero raised to a negative power", print(self));
        // Keep 0 * pow(0, negative) out of the n = 1, 2 derivatives.
        const double f1 = (n == 1.0) ? 1.0 : n * std::pow(x, n - 1.0);
        const double f2 = (n == 1.0 || n == 2.0) ? n * (n - 1.0) : n * (n - 1.0) * std::pow(x, n - 2.0);
        return chain(base, std::pow(x, n), f1, f2);
      }
      if (!(x > 0.0)) throw DomainError("non-integer power of non-positive value", print(self));
      return chain(base, std::pow(x, n), n * std::pow(x, n - 1.0), n * (n - 1.0) * std::pow(x, n - 2.0));
    }
    if (!(base.value > 0.0)) throw DomainError("variable power of non-positive base", print(self));
    const Jet2 ln_base = chain(base, std::log(base.value), 1.0 / base.value,
                               -1.0 / (base.value * base.value));
    const Jet2 expo = (*this)(*b.rhs) * ln_base;
    const double e = std::exp(expo.value);
    return chain(expo, e, e, e);
  }
};

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(ParseErrorKind::Syntax, pos_, what);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) fail(std::string("expected '") + c + "' but reached end of input");
      fail(std::string("expected '") + c + "'");
    }
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = make_binary(BinaryOp::Add, lhs, term());
      else if (accept('-')) lhs = make_binary(BinaryOp::Sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      if (accept('*')) lhs = make_binary(BinaryOp::Mul, lhs, factor());
      else if (accept('/')) lhs = make_binary(BinaryOp::Div, lhs, factor());
      else return lhs;
    }
  }

  NodePtr factor() {
    if (accept('-')) return make_unary(UnaryOp::Neg, factor());
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return make_binary(BinaryOp::Pow, base, factor());
    return base;
  }

  NodePtr atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (accept('(')) {
      NodePtr e = expr();
      expect(')');
      return e;
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t mantissa = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) fail("malformed number");
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) fail("malformed exponent");
    }
    const std::string text(src_.substr(start, pos_ - start));
    return make_constant(std::strtod(text.c_str(), nullptr));
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "x1" || name == "x2" || name == "x3") {
      skip_ws();
      if (pos_ < src_.size() && src_[pos_] == '(')
        throw ParseError(ParseErrorKind::Arity, pos_, "coordinate '" + std::string(name) + "' is not callable");
      return std::make_shared<const Node>(Node{Variable{name[1] - '1'}});
    }
    UnaryOp op;
    if (name == "exp") op = UnaryOp::Exp;
    else if (name == "ln") op = UnaryOp::Ln;
    else if (name == "sin") op = UnaryOp::Sin;
    else if (name == "cos") op = UnaryOp::Cos;
    else if (name == "sqrt") op = UnaryOp::Sqrt;
    else if (name == "abs") op = UnaryOp::Abs;
    else
      throw ParseError(ParseErrorKind::UnknownIdentifier, start,
                       "unknown identifier '" + std::string(name) + "'");
    expect('(');
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == ')')
      throw ParseError(ParseErrorKind::Arity, pos_, std::string(name) + "() takes exactly one argument");
    NodePtr arg = expr();
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == ',')
      throw ParseError(ParseErrorKind::Arity, pos_, std::string(name) + "() takes exactly one argument");
    expect(')');
    return make_unary(op, std::move(arg));
  }
};

} // namespace detail

/// Immutable expression tree; cheap to copy (shared structure).
class ScalarExpr {
 public:
  ScalarExpr() : root_(detail::make_constant(0.0)) {}

  static ScalarExpr constant(double v) { return ScalarExpr(detail::make_constant(v)); }
  /// index is 0-based (x1 is variable(0)).
  static ScalarExpr variable(int index) {
    if (index < 0 || index > 2) throw std::out_of_range("coordinate index must be 0, 1 or 2");
    return ScalarExpr(std::make_shared<const detail::Node>(detail::Node{detail::Variable{index}}));
  }

  Jet2 eval_jet2(const Point& p, EvalDiagnostics* diag = nullptr) const {
    return detail::Evaluator{p, diag}(*root_);
  }
  double eval(const Point& p) const { return eval_jet2(p).value; }

  std::string to_string() const { return detail::print(*root_); }

  bool is_constant() const { return detail::as_constant(root_) != nullptr; }
  std::optional<double> constant_value() const {
    if (const auto* c = detail::as_constant(root_)) return c->value;
    return std::nullopt;
  }

  const detail::Node& root() const { return *root_; }

  friend ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b) {
    return ScalarExpr(detail::make_binary(BinaryOp::Add, a.root_, b.root_));
  }
  friend ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b) {
    return ScalarExpr(detail::make_binary(BinaryOp::Sub, a.root_, b.root_));
  }
  friend ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b) {
    return ScalarExpr(detail::make_binary(BinaryOp::Mul, a.root_, b.root_));
  }
  friend ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b) {
    return ScalarExpr(detail::make_binary(BinaryOp::Div, a.root_, b.root_));
  }
  friend ScalarExpr operator-(const ScalarExpr& a) {
    return ScalarExpr(detail::make_unary(UnaryOp::Neg, a.root_));
  }
  friend ScalarExpr pow(const ScalarExpr& a, const ScalarExpr& b) {
    return ScalarExpr(detail::make_binary(BinaryOp::Pow, a.root_, b.root_));
  }
  friend ScalarExpr apply(UnaryOp op, const ScalarExpr& a) {
    return ScalarExpr(detail::make_unary(op, a.root_));
  }

 private:
  explicit ScalarExpr(detail::NodePtr root) : root_(std::move(root)) {}
  friend ScalarExpr parse(std::string_view src);

  detail::NodePtr root_;
};

inline ScalarExpr parse(std::string_view src) { return ScalarExpr(detail::Parser(src).parse()); }

inline Jet2 eval_jet2(const ScalarExpr& e, const Point& p, EvalDiagnostics* diag = nullptr) {
  return e.eval_jet2(p, diag);
}

} // namespace cornerkit

#endif
