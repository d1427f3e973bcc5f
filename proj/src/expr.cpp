#include "cosym/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <type_traits>

namespace cosym {

struct Expr::Node {
  Op op = Op::Constant;
  double value = 0.0;  // constant value, or folded exponent for Pow
  std::size_t index = 0;
  std::string name;
  std::vector<Expr> kids;
  bool constant = true;
  std::ptrdiff_t max_var = -1;
};

namespace {

std::shared_ptr<const Expr::Node> zero_node() {
  static const auto node = std::make_shared<const Expr::Node>();
  return node;
}

bool is_unary(Op op) {
  return op == Op::Neg || op == Op::Sin || op == Op::Cos || op == Op::Exp || op == Op::Log ||
         op == Op::Sqrt;
}

bool is_binary(Op op) {
  return op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div || op == Op::Pow;
}

const char* function_name(Op op) {
  switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    default: return "";
  }
}

constexpr std::array<std::string_view, 6> kReserved = {"sin", "cos", "exp", "log", "sqrt", "pi"};

}  // namespace

Expr::Expr() : node_(zero_node()) {}

Expr Expr::constant(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("expression constants must be finite");
  auto n = std::make_shared<Node>();
  n->op = Op::Constant;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::pi() {
  auto n = std::make_shared<Node>();
  n->op = Op::Pi;
  n->value = std::numbers::pi;
  return Expr(std::move(n));
}

Expr Expr::variable(std::size_t index, std::string name) {
  auto n = std::make_shared<Node>();
  n->op = Op::Variable;
  n->index = index;
  n->name = std::move(name);
  n->constant = false;
  n->max_var = static_cast<std::ptrdiff_t>(index);
  return Expr(std::move(n));
}

Expr Expr::unary(Op op, Expr operand) {
  if (!is_unary(op)) throw std::invalid_argument("not a unary operator");
  auto n = std::make_shared<Node>();
  n->op = op;
  n->constant = operand.is_constant();
  n->max_var = operand.max_variable_index();
  n->kids.push_back(std::move(operand));
  return Expr(std::move(n));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
  if (op == Op::Pow) return power(std::move(lhs), std::move(rhs));
  if (!is_binary(op)) throw std::invalid_argument("not a binary operator");
  auto n = std::make_shared<Node>();
  n->op = op;
  n->constant = lhs.is_constant() && rhs.is_constant();
  n->max_var = std::max(lhs.max_variable_index(), rhs.max_variable_index());
  n->kids.push_back(std::move(lhs));
  n->kids.push_back(std::move(rhs));
  return Expr(std::move(n));
}

Expr Expr::power(Expr base, Expr exponent) {
  if (!exponent.is_constant()) throw std::invalid_argument("exponent must be a constant expression");
  auto n = std::make_shared<Node>();
  n->op = Op::Pow;
  n->value = exponent.eval({});
  n->constant = base.is_constant();
  n->max_var = base.max_variable_index();
  n->kids.push_back(std::move(base));
  n->kids.push_back(std::move(exponent));
  return Expr(std::move(n));
}

Op Expr::op() const { return node_->op; }
double Expr::constant_value() const { return node_->value; }
std::size_t Expr::variable_index() const { return node_->index; }
const std::string& Expr::variable_name() const { return node_->name; }
const Expr& Expr::lhs() const { return node_->kids.at(0); }
const Expr& Expr::rhs() const { return node_->kids.at(1); }
double Expr::exponent() const { return node_->value; }
bool Expr::is_constant() const { return node_->constant; }
bool Expr::is_zero() const { return node_->op == Op::Constant && node_->value == 0.0; }
bool Expr::is_one() const { return node_->op == Op::Constant && node_->value == 1.0; }
std::ptrdiff_t Expr::max_variable_index() const { return node_->max_var; }

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.op != y.op) return false;
  switch (x.op) {
    case Op::Constant: return x.value == y.value;
    case Op::Pi: return true;
    case Op::Variable: return x.index == y.index && x.name == y.name;
    default: break;
  }
  if (x.kids.size() != y.kids.size()) return false;
  for (std::size_t i = 0; i < x.kids.size(); ++i) {
    if (!(x.kids[i] == y.kids[i])) return false;
  }
  return true;
}

bool is_reserved_word(std::string_view name) {
  return std::find(kReserved.begin(), kReserved.end(), name) != kReserved.end();
}

// ---------------------------------------------------------------------------
// Printing

namespace {

int precedence(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Constant: return 5;
    default: return 5;
  }
}

void format_number(double v, std::string& out) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), res.ptr);
}

void print(const Expr& e, std::string& out);

void print_wrapped(const Expr& e, bool wrap, std::string& out) {
  if (wrap) out += '(';
  print(e, out);
  if (wrap) out += ')';
}

void print(const Expr& e, std::string& out) {
  switch (e.op()) {
    case Op::Constant:
      if (e.constant_value() < 0 || std::signbit(e.constant_value())) {
        out += '(';
        format_number(e.constant_value(), out);
        out += ')';
      } else {
        format_number(e.constant_value(), out);
      }
      return;
    case Op::Pi: out += "pi"; return;
    case Op::Variable: out += e.variable_name(); return;
    case Op::Neg:
      out += '-';
      print_wrapped(e.lhs(), precedence(e.lhs().op()) < precedence(Op::Neg), out);
      return;
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Log:
    case Op::Sqrt:
      out += function_name(e.op());
      print_wrapped(e.lhs(), true, out);
      return;
    case Op::Pow: {
      // base is a primary; exponent is a primary, a negation or a power
      const Op b = e.lhs().op();
      print_wrapped(e.lhs(), b == Op::Neg || precedence(b) < 5, out);
      out += '^';
      const Op x = e.rhs().op();
      print_wrapped(e.rhs(), !(x == Op::Neg || x == Op::Pow || precedence(x) == 5), out);
      return;
    }
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const int p = precedence(e.op());
      print_wrapped(e.lhs(), precedence(e.lhs().op()) < p, out);
      switch (e.op()) {
        case Op::Add: out += " + "; break;
        case Op::Sub: out += " - "; break;
        case Op::Mul: out += '*'; break;
        default: out += '/'; break;
      }
      print_wrapped(e.rhs(), precedence(e.rhs().op()) <= p, out);
      return;
    }
  }
}

}  // namespace

std::string Expr::to_string() const {
  std::string out;
  print(*this, out);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

template <class T>
T lift(double v, std::size_t dim) {
  if constexpr (std::is_same_v<T, double>) {
    (void)dim;
    return v;
  } else {
    return T(v, dim);
  }
}

template <class T>
std::size_t dim_of(std::span<const double> x) {
  return x.size();
}

[[noreturn]] void domain_error(const Expr& e, const std::string& what) {
  const std::string s = e.to_string();
  throw DomainError(s, what + " in '" + s + "'");
}

template <class T>
T apply(const Expr& e, const T& u, double d0, double d1, double d2) {
  if constexpr (!std::is_same_v<T, double>) {
    if (!std::isfinite(d1) || !std::isfinite(d2)) domain_error(e, "derivative does not exist");
  }
  return chain(u, d0, d1, d2);
}

template <class T>
T evaluate(const Expr& e, std::span<const double> x) {
  constexpr bool kPlain = std::is_same_v<T, double>;
  const std::size_t n = x.size();
  switch (e.op()) {
    case Op::Constant:
    case Op::Pi: return lift<T>(e.constant_value(), n);
    case Op::Variable: {
      const std::size_t i = e.variable_index();
      if (i >= n) throw std::out_of_range("point has fewer coordinates than the expression uses");
      if constexpr (kPlain) {
        return x[i];
      } else {
        return T::variable(x[i], n, i);
      }
    }
    case Op::Neg: return -evaluate<T>(e.lhs(), x);
    case Op::Sin: {
      T u = evaluate<T>(e.lhs(), x);
      const double v = value_of(u);
      const double s = std::sin(v);
      return apply(e, u, s, kPlain ? 0.0 : std::cos(v), -s);
    }
    case Op::Cos: {
      T u = evaluate<T>(e.lhs(), x);
      const double v = value_of(u);
      const double c = std::cos(v);
      return apply(e, u, c, kPlain ? 0.0 : -std::sin(v), -c);
    }
    case Op::Exp: {
      T u = evaluate<T>(e.lhs(), x);
      const double ev = std::exp(value_of(u));
      return apply(e, u, ev, ev, ev);
    }
    case Op::Log: {
      T u = evaluate<T>(e.lhs(), x);
      const double v = value_of(u);
      if (!(v > 0.0)) domain_error(e, "log of non-positive value");
      return apply(e, u, std::log(v), 1.0 / v, -1.0 / (v * v));
    }
    case Op::Sqrt: {
      T u = evaluate<T>(e.lhs(), x);
      const double v = value_of(u);
      if (v < 0.0) domain_error(e, "sqrt of negative value");
      const double s = std::sqrt(v);
      if constexpr (kPlain) {
        return s;
      } else {
        if (v == 0.0) domain_error(e, "sqrt is not differentiable at 0");
        return apply(e, u, s, 0.5 / s, -0.25 / (s * v));
      }
    }
    case Op::Add: return evaluate<T>(e.lhs(), x) + evaluate<T>(e.rhs(), x);
    case Op::Sub: return evaluate<T>(e.lhs(), x) - evaluate<T>(e.rhs(), x);
    case Op::Mul: return evaluate<T>(e.lhs(), x) * evaluate<T>(e.rhs(), x);
    case Op::Div: {
      T a = evaluate<T>(e.lhs(), x);
      T b = evaluate<T>(e.rhs(), x);
      const double v = value_of(b);
      if (v == 0.0) domain_error(e, "division by zero");
      if constexpr (kPlain) {
        return a / b;
      } else {
        return a * chain(b, 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
      }
    }
    case Op::Pow: {
      T u = evaluate<T>(e.lhs(), x);
      const double c = e.exponent();
      const double v = value_of(u);
      const bool integral = std::floor(c) == c;
      if (v < 0.0 && !integral) domain_error(e, "non-integer power of negative value");
      if (v == 0.0 && c < 0.0) domain_error(e, "division by zero");
      const double d0 = std::pow(v, c);
      if constexpr (kPlain) {
        return d0;
      } else {
        const double d1 = c == 0.0 ? 0.0 : c * std::pow(v, c - 1.0);
        const double d2 = (c == 0.0 || c == 1.0) ? 0.0 : c * (c - 1.0) * std::pow(v, c - 2.0);
        return apply(e, u, d0, d1, d2);
      }
    }
  }
  throw std::logic_error("unhandled expression node");
}

}  // namespace

double Expr::eval(std::span<const double> x) const { return evaluate<double>(*this, x); }
Jet1 Expr::eval_jet1(std::span<const double> x) const { return evaluate<Jet1>(*this, x); }
Jet2 Expr::eval_jet2(std::span<const double> x) const { return evaluate<Jet2>(*this, x); }

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
 public:
  Parser(std::string_view src, std::span<const std::string> vars) : src_(src), vars_(vars) {}

  Expr run() {
    skip_ws();
    if (pos_ >= src_.size()) fail(pos_, "empty expression");
    Expr e = parse_sum();
    skip_ws();
    if (pos_ < src_.size()) fail(pos_, std::string("unexpected '") + src_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(std::size_t at, const std::string& msg) {
    throw ParseError(ParseError::Kind::Syntax, at,
                     "", "syntax error at offset " + std::to_string(at) + ": " + msg);
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

  Expr parse_sum() {
    Expr e = parse_product();
    for (;;) {
      if (accept('+')) {
        e = Expr::binary(Op::Add, e, parse_product());
      } else if (accept('-')) {
        e = Expr::binary(Op::Sub, e, parse_product());
      } else {
        return e;
      }
    }
  }

  Expr parse_product() {
    Expr e = parse_unary();
    for (;;) {
      if (accept('*')) {
        e = Expr::binary(Op::Mul, e, parse_unary());
      } else if (accept('/')) {
        e = Expr::binary(Op::Div, e, parse_unary());
      } else {
        return e;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return Expr::unary(Op::Neg, parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    skip_ws();
    if (accept('^')) {
      const std::size_t at = pos_;
      Expr exponent = parse_exponent();
      if (!exponent.is_constant()) fail(at, "exponent must be a constant");
      return Expr::power(base, exponent);
    }
    return base;
  }

  Expr parse_exponent() {
    if (accept('-')) return Expr::unary(Op::Neg, parse_exponent());
    return parse_power();
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail(pos_, "expected operand");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      if (!accept(')')) fail(pos_, "expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail(pos_, std::string("unexpected '") + c + "'");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    std::size_t end = pos_;
    auto digits = [&] {
      while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
    };
    digits();
    if (end < src_.size() && src_[end] == '.') {
      ++end;
      digits();
    }
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t k = end + 1;
      if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
      if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
        end = k;
        digits();
      }
    }
    double v = 0.0;
    auto res = std::from_chars(src_.data() + start, src_.data() + end, v);
    if (res.ec != std::errc() || res.ptr != src_.data() + end) fail(start, "malformed number");
    pos_ = end;
    return Expr::constant(v);
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(src_.substr(start, pos_ - start));
    static const std::array<std::pair<std::string_view, Op>, 5> kFunctions = {{
        {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp}, {"log", Op::Log}, {"sqrt", Op::Sqrt},
    }};
    for (const auto& [fname, op] : kFunctions) {
      if (name == fname) {
        if (!accept('(')) fail(pos_, "expected '(' after " + name);
        Expr arg = parse_sum();
        if (!accept(')')) fail(pos_, "expected ')'");
        return Expr::unary(op, arg);
      }
    }
    if (name == "pi") return Expr::pi();
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == name) return Expr::variable(i, name);
    }
    throw ParseError(ParseError::Kind::UnknownIdentifier, start, name,
                     "unknown identifier '" + name + "' at offset " + std::to_string(start));
  }

  std::string_view src_;
  std::span<const std::string> vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view src, std::span<const std::string> variables) {
  return Parser(src, variables).run();
}

// ---------------------------------------------------------------------------
// Symbolic builders

namespace {

// Value of a literal possibly wrapped in a single negation.
bool literal_value(const Expr& e, double& v) {
  if (e.op() == Op::Constant) {
    v = e.constant_value();
    return true;
  }
  if (e.op() == Op::Neg && e.lhs().op() == Op::Constant) {
    v = -e.lhs().constant_value();
    return true;
  }
  return false;
}

}  // namespace

Expr number(double value) {
  if (value < 0.0) return Expr::unary(Op::Neg, Expr::constant(-value));
  return Expr::constant(value == 0.0 ? 0.0 : value);
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  double x = 0, y = 0;
  if (literal_value(a, x) && literal_value(b, y)) return number(x + y);
  return Expr::binary(Op::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  double x = 0, y = 0;
  if (literal_value(a, x) && literal_value(b, y)) return number(x - y);
  return Expr::binary(Op::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr();
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  double x = 0, y = 0;
  if (literal_value(a, x) && literal_value(b, y)) return number(x * y);
  return Expr::binary(Op::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_zero()) throw std::invalid_argument("symbolic division by literal zero");
  if (a.is_zero()) return Expr();
  if (b.is_one()) return a;
  return Expr::binary(Op::Div, a, b);
}

Expr operator-(const Expr& a) {
  if (a.is_zero()) return a;
  if (a.op() == Op::Neg) return a.lhs();
  return Expr::unary(Op::Neg, a);
}

Expr derivative(const Expr& e, std::size_t index) {
  if (e.is_constant()) return Expr();
  switch (e.op()) {
    case Op::Constant:
    case Op::Pi: return Expr();
    case Op::Variable: return e.variable_index() == index ? Expr::constant(1.0) : Expr();
    case Op::Neg: return -derivative(e.lhs(), index);
    case Op::Sin: return Expr::unary(Op::Cos, e.lhs()) * derivative(e.lhs(), index);
    case Op::Cos: return -(Expr::unary(Op::Sin, e.lhs()) * derivative(e.lhs(), index));
    case Op::Exp: return e * derivative(e.lhs(), index);
    case Op::Log: return derivative(e.lhs(), index) / e.lhs();
    case Op::Sqrt: return derivative(e.lhs(), index) / (Expr::constant(2.0) * e);
    case Op::Add: return derivative(e.lhs(), index) + derivative(e.rhs(), index);
    case Op::Sub: return derivative(e.lhs(), index) - derivative(e.rhs(), index);
    case Op::Mul:
      return derivative(e.lhs(), index) * e.rhs() + e.lhs() * derivative(e.rhs(), index);
    case Op::Div: {
      const Expr du = derivative(e.lhs(), index);
      if (e.rhs().is_constant()) return du / e.rhs();
      const Expr dv = derivative(e.rhs(), index);
      return du / e.rhs() - e.lhs() * dv / Expr::power(e.rhs(), Expr::constant(2.0));
    }
    case Op::Pow: {
      const double c = e.exponent();
      const Expr du = derivative(e.lhs(), index);
      if (c == 0.0) return Expr();
      if (c == 1.0) return du;
      const Expr lowered = c == 2.0 ? e.lhs() : Expr::power(e.lhs(), number(c - 1.0));
      return number(c) * lowered * du;
    }
  }
  throw std::logic_error("unhandled expression node");
}

}  // namespace cosym
