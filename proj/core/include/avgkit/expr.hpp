#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "avgkit/errors.hpp"

namespace avgkit {

using Vec = std::vector<double>;

// Variable numbering used throughout: 0 is the time variable t,
// i >= 1 is the state component x_i.
inline constexpr int kVarT = 0;

enum class Fn { Sin, Cos, Tan, Exp, Log, Sqrt, Abs };

namespace detail {
struct Node;
using NodePtr = std::shared_ptr<const Node>;
}  // namespace detail

// Immutable scalar expression in t, x1..xn.
//
// Expr values are cheap to copy, structurally shared, and safe to use from
// multiple threads. eval/diff are pure. Exponents of `^` are restricted to
// constants, so symbolic differentiation never needs a log branch.
class Expr {
 public:
  Expr() = default;

  static Expr constant(double v);
  static Expr variable(int var);  // 0 = t, i >= 1 = x_i

  // Raw constructors (no folding); the parser uses these so the AST
  // mirrors the source text.
  static Expr add(Expr a, Expr b);
  static Expr sub(Expr a, Expr b);
  static Expr mul(Expr a, Expr b);
  static Expr div(Expr a, Expr b);
  static Expr neg(Expr a);
  static Expr pow(Expr base, double exponent);
  static Expr call(Fn fn, Expr arg);

  bool empty() const { return node_ == nullptr; }

  // Arithmetic evaluation with IEEE double semantics. Throws DomainError on
  // division by zero, log <= 0, sqrt < 0, invalid power, or a non-finite
  // result; never returns NaN silently.
  double eval(double t, std::span<const double> x) const;

  // Symbolic partial derivative with respect to `var` (0 = t, i >= 1 = x_i).
  // The result is lightly constant-folded but not otherwise simplified.
  Expr diff(int var) const;

  std::size_t node_count() const;
  int max_x_index() const;    // 0 if no x_i is referenced
  bool depends_on_t() const;
  bool is_constant() const;   // neither t nor any x_i referenced

  // Fully parenthesized text form; reparsing it yields an expression that
  // evaluates identically.
  std::string to_string() const;

 private:
  explicit Expr(detail::NodePtr n) : node_(std::move(n)) {}
  detail::NodePtr node_;
  friend struct ExprAccess;
};

// Parse an expression over t, x1..xn with the grammar documented in
// docs/expr-grammar.md:
//
//   expr     = term { ("+" | "-") term }
//   term     = factor { ("*" | "/") factor }
//   factor   = "-" factor | power
//   power    = atom { "^" exponent }          (left-associative)
//   exponent = "-" exponent | atom            (must be constant)
//   atom     = number | "pi" | variable | function "(" expr ")" | "(" expr ")"
//
// Precedence: ^  >  unary -  >  * /  >  + -.  Throws ParseError with the
// byte offset on any malformed input; rejects x_j with j > n and
// non-constant exponents.
Expr parse_expr(std::string_view source, int n);

}  // namespace avgkit
