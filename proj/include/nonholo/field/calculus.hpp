#pragma once

#include <array>
#include <span>

#include "nonholo/field/vector_field.hpp"

namespace nonholo::field {

// Scalar in R^2 (only value[0] is meaningful), 3-vector in R^3.
struct CurlValue {
  int dim = 2;
  std::array<double, 3> value{};

  double scalar() const { return value[0]; }
  double magnitude() const;
};

CurlValue curl(const VectorField& f, std::span<const double> p);
double divergence(const VectorField& f, std::span<const double> p);

// Components are the symbolic partials of phi. Throws ValidationError when
// phi uses a variable beyond x_dim.
VectorField gradient_field(const ScalarExpr& phi, int dim);

// f -> H f with H = diag(signs); signs must be +1 or -1.
VectorField signed_flip(const VectorField& f, std::span<const int> signs);

// (dF1/dx1 - dF2/dx2, dF2/dx1 + dF1/dx2) for F = F1 + i F2; zero iff the
// Cauchy-Riemann equations hold at p.
std::array<double, 2> cauchy_riemann_residual(const ComplexFunction& F, std::span<const double> p);
std::array<ScalarExpr, 2> cauchy_riemann_exprs(const ComplexFunction& F);

// Central difference with h = 1e-6 * max(1, |x_v|).
double numeric_partial(const ScalarExpr& e, std::span<const double> p, int variable);

}  // namespace nonholo::field
