#pragma once

// Exact-structure normal form for polynomial and rational expressions, used
// only to certify identities such as "this curl is zero". Expressions with
// sin/cos/exp of a non-constant argument have no normal form here.

#include <array>
#include <map>
#include <optional>

#include "nonholo/field/expr.hpp"

namespace nonholo::field {

using Monomial = std::array<int, 3>;

class Polynomial {
 public:
  Polynomial() = default;
  static Polynomial constant(double c);
  static Polynomial variable(int index);

  bool is_zero() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }
  const std::map<Monomial, double>& terms() const { return terms_; }
  double evaluate(std::span<const double> point) const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  Polynomial operator-() const;

 private:
  explicit Polynomial(std::map<Monomial, double> terms) : terms_(std::move(terms)) {}
  struct Accumulator {
    double sum = 0.0;
    double magnitude = 0.0;
  };
  static Polynomial collect(const std::map<Monomial, Accumulator>& acc);

  std::map<Monomial, double> terms_;
};

struct RationalForm {
  Polynomial numerator;
  Polynomial denominator;  // never the zero polynomial
};

std::optional<RationalForm> to_rational(const ScalarExpr& e);

// True only when a normal form exists and its numerator cancels completely.
bool is_symbolically_zero(const ScalarExpr& e);

// True when every first partial derivative is symbolically zero.
bool is_symbolically_constant(const ScalarExpr& e);

}  // namespace nonholo::field
