#pragma once

// Seeded random generators for property tests.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "nonholo/field/expr.hpp"
#include "nonholo/field/vector_field.hpp"

namespace nonholo::testing {

using field::ScalarExpr;

// Random polynomial of total degree <= degree in the first `vars` variables,
// integer-ish coefficients in [-3, 3].
inline ScalarExpr random_polynomial(std::mt19937_64& rng, int vars, int degree) {
  std::uniform_int_distribution<int> coeff(-3, 3);
  ScalarExpr sum = ScalarExpr::constant(0.0);
  for (int a = 0; a <= degree; ++a) {
    for (int b = 0; a + b <= degree && (vars > 1 || b == 0); ++b) {
      for (int c = 0; a + b + c <= degree && (vars > 2 || c == 0); ++c) {
        const int k = coeff(rng);
        if (k == 0) continue;
        ScalarExpr term = ScalarExpr::constant(static_cast<double>(k));
        term = term * pow(ScalarExpr::variable(0), a);
        if (vars > 1) term = term * pow(ScalarExpr::variable(1), b);
        if (vars > 2) term = term * pow(ScalarExpr::variable(2), c);
        sum = sum + term;
      }
    }
  }
  return sum;
}

// Random expression tree over x1..x_vars using every operator of the
// grammar; division uses (1 + square) denominators so it never vanishes.
inline ScalarExpr random_expression(std::mt19937_64& rng, int vars, int depth) {
  std::uniform_int_distribution<int> pick(0, 9);
  std::uniform_real_distribution<double> value(-2.0, 2.0);
  std::uniform_int_distribution<int> var(0, vars - 1);
  if (depth <= 0) {
    return pick(rng) < 4 ? ScalarExpr::constant(std::round(value(rng) * 4.0) / 4.0)
                         : ScalarExpr::variable(var(rng));
  }
  const auto sub = [&] { return random_expression(rng, vars, depth - 1); };
  switch (pick(rng)) {
    case 0: return sub() + sub();
    case 1: return sub() - sub();
    case 2: return sub() * sub();
    case 3: return sub() / (ScalarExpr::constant(1.0) + pow(sub(), 2));
    case 4: return -sub();
    case 5: return sin(sub());
    case 6: return cos(sub());
    case 7: return exp(ScalarExpr::constant(0.25) * sub());
    case 8: return pow(sub(), 2 + static_cast<int>(rng() % 2));
    default: return sub() * ScalarExpr::variable(var(rng));
  }
}

inline field::VectorField random_polynomial_field(std::mt19937_64& rng, int dim, int degree) {
  std::vector<ScalarExpr> comps;
  for (int i = 0; i < dim; ++i) comps.push_back(random_polynomial(rng, dim, degree));
  return field::VectorField(std::move(comps));
}

inline std::vector<double> random_point(std::mt19937_64& rng, int dim, double half_width = 1.5) {
  std::uniform_real_distribution<double> u(-half_width, half_width);
  std::vector<double> p(static_cast<std::size_t>(dim));
  for (auto& x : p) x = u(rng);
  return p;
}

}  // namespace nonholo::testing
