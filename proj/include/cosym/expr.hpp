#pragma once

// Arithmetic expression language over chart coordinates.
//
// Expressions are immutable trees shared by pointer; copying an Expr is cheap
// and concurrent evaluation of one Expr from many threads is safe. The grammar
// is documented in docs/GRAMMAR.md.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cosym/jet.hpp"

namespace cosym {

class ParseError : public std::runtime_error {
 public:
  enum class Kind { Syntax, UnknownIdentifier };

  ParseError(Kind kind, std::size_t offset, std::string identifier, const std::string& message)
      : std::runtime_error(message), kind_(kind), offset_(offset), identifier_(std::move(identifier)) {}

  Kind kind() const { return kind_; }
  // Byte offset into the source text.
  std::size_t offset() const { return offset_; }
  // The unresolved name for UnknownIdentifier errors, empty otherwise.
  const std::string& identifier() const { return identifier_; }

 private:
  Kind kind_;
  std::size_t offset_;
  std::string identifier_;
};

// Raised during evaluation: log of a non-positive value, sqrt of a negative
// value, division by zero, or a derivative that does not exist.
class DomainError : public std::runtime_error {
 public:
  DomainError(std::string subexpression, const std::string& message)
      : std::runtime_error(message), subexpression_(std::move(subexpression)) {}
  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

enum class Op : std::uint8_t {
  Constant,
  Pi,
  Variable,
  Neg,
  Sin,
  Cos,
  Exp,
  Log,
  Sqrt,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
};

class Expr {
 public:
  struct Node;

  // The constant 0.
  Expr();

  static Expr constant(double value);
  static Expr pi();
  static Expr variable(std::size_t index, std::string name);
  static Expr unary(Op op, Expr operand);
  static Expr binary(Op op, Expr lhs, Expr rhs);
  // `exponent` must not reference any variable.
  static Expr power(Expr base, Expr exponent);

  Op op() const;
  // Value of a Constant or Pi node.
  double constant_value() const;
  std::size_t variable_index() const;
  const std::string& variable_name() const;
  // Operand of a unary node, left operand of a binary node, base of a power.
  const Expr& lhs() const;
  // Right operand of a binary node, exponent of a power.
  const Expr& rhs() const;
  // Folded numeric exponent of a Pow node.
  double exponent() const;

  // True when no variable occurs in the tree.
  bool is_constant() const;
  // True for a literal Constant node equal to 0 (resp. 1).
  bool is_zero() const;
  bool is_one() const;
  // Largest variable index referenced, or -1 for a constant expression.
  std::ptrdiff_t max_variable_index() const;

  double eval(std::span<const double> x) const;
  Jet1 eval_jet1(std::span<const double> x) const;
  Jet2 eval_jet2(std::span<const double> x) const;

  std::string to_string() const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// Parses `src`, resolving identifiers against `variables` (index = position).
Expr parse(std::string_view src, std::span<const std::string> variables);

inline Jet2 eval_jet2(const Expr& e, std::span<const double> x) { return e.eval_jet2(x); }

// Numeric literal that round-trips through the printer: negative values are
// represented as Neg(Constant).
Expr number(double value);

// Builders with folding of literal 0 and 1 operands and of literal-constant
// arithmetic. No other simplification is attempted.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

// Symbolic partial derivative with respect to variable `index`.
Expr derivative(const Expr& e, std::size_t index);

// Names reserved by the grammar; they cannot be used as coordinate names.
bool is_reserved_word(std::string_view name);

}  // namespace cosym
