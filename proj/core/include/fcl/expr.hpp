#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "fcl/jet.hpp"

namespace fcl::expr {

enum class Func { sin, cos, tan, exp, ln, sqrt, sinh, cosh };

/// Immutable expression tree over coordinates x1..xn.
///
/// Grammar (EBNF, `^` binds tighter than unary minus and is right
/// associative; exponents must be free of variables):
///
///   expr    = term { ("+" | "-") term } ;
///   term    = unary { ("*" | "/") unary } ;
///   unary   = "-" unary | power ;
///   power   = primary [ "^" unary ] ;
///   primary = number | variable | "pi" | func "(" expr ")" | "(" expr ")" ;
///   variable = "x" digit { digit } ;
///   func    = "sin" | "cos" | "tan" | "exp" | "ln" | "sqrt" | "sinh" | "cosh" ;
class Expression {
 public:
  struct Node;

  Expression() = default;
  Expression(std::shared_ptr<const Node> root, int dimension)
      : root_(std::move(root)), dimension_(dimension) {}

  int dimension() const noexcept { return dimension_; }
  const Node& root() const { return *root_; }
  bool empty() const noexcept { return root_ == nullptr; }

  /// Highest variable index referenced (1-based); 0 for constants.
  int max_variable() const;

  /// Text that parses back to a structurally identical tree.
  std::string to_string() const;

  bool structurally_equal(const Expression& other) const;

 private:
  std::shared_ptr<const Node> root_;
  int dimension_ = 0;
};

struct Expression::Node {
  enum class Kind { number, variable, negate, add, subtract, multiply, divide, power, call };

  Kind kind = Kind::number;
  double number = 0.0;
  int variable = 0;  // 0-based
  Func func = Func::sin;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

/// Parses `source` against `dimension` coordinates. Throws ParseError with
/// the byte offset of the problem.
Expression parse(std::string_view source, int dimension);

/// Plain evaluation. Throws DomainError naming the offending subexpression.
double evaluate(const Expression& e, std::span<const double> x);

/// Value, gradient and Hessian at x with respect to x1..xn.
Jet2 eval_jet2(const Expression& e, std::span<const double> x);

/// Largest deviation between the jet's derivatives and central differences
/// with the given step: the gradient is checked against differences of the
/// value, the Hessian against differences of the gradient.
double fd_validate(const Expression& e, std::span<const double> x, double step);

std::string to_string(Func f);

}  // namespace fcl::expr
