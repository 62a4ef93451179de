#pragma once

// Scalar expressions over the state variables x1, x2, x3.
//
// Trees are immutable and shared; the combinators below apply constant
// folding and the 0/1 identities, nothing more. Integer powers only, so the
// derivative of every expression is again an expression of this language.

#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "nonholo/kernels/tape.hpp"

namespace nonholo::field {

enum class Op { Constant, Variable, Neg, Sin, Cos, Exp, Add, Sub, Mul, Div, Pow };

struct Node;

class ScalarExpr {
 public:
  ScalarExpr();  // the constant 0

  static ScalarExpr constant(double value);
  // index 0, 1, 2 for x1, x2, x3
  static ScalarExpr variable(int index);

  Op op() const;
  double constant_value() const;  // Constant only
  int variable_index() const;     // Variable only
  int exponent() const;           // Pow only
  ScalarExpr lhs() const;         // operand of unary ops, left operand of binary ops
  ScalarExpr rhs() const;

  bool is_constant() const { return op() == Op::Constant; }
  bool is_literal(double value) const { return is_constant() && constant_value() == value; }

  // Number of leading variables the expression needs: 0 for constants,
  // 2 when the highest variable used is x2, and so on.
  int arity() const;

  // Throws ValidationError when `point` has fewer than arity() entries.
  double evaluate(std::span<const double> point) const;
  ScalarExpr derivative(int variable) const;

  const kernels::Tape& tape() const;
  std::string to_string() const;

  // Identity of the shared node, for DAG-aware traversals.
  const Node* node() const { return node_.get(); }

 private:
  explicit ScalarExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  friend struct Builder;

  std::shared_ptr<const Node> node_;
};

ScalarExpr operator-(const ScalarExpr& a);
ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b);
ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b);
ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b);
ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b);
ScalarExpr operator*(double a, const ScalarExpr& b);
ScalarExpr pow(const ScalarExpr& base, int exponent);
ScalarExpr sin(const ScalarExpr& a);
ScalarExpr cos(const ScalarExpr& a);
ScalarExpr exp(const ScalarExpr& a);

// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ('-')? atom ('^' integer)?
//   atom   := number | 'x1' | 'x2' | 'x3' | func '(' expr ')' | '(' expr ')'
//   func   := 'sin' | 'cos' | 'exp'
// Throws ParseError carrying the byte offset of the offending token.
ScalarExpr parse_expr(std::string_view text);

// Evaluates over a structure-of-arrays batch through the active kernels;
// constants are filled directly.
void evaluate_batch(const ScalarExpr& e, const kernels::PointBatch& points, std::span<double> out);

}  // namespace nonholo::field
