#include "nonholo/field/calculus.hpp"

#include <cmath>
#include <vector>

#include "nonholo/error.hpp"

namespace nonholo::field {

double CurlValue::magnitude() const {
  if (dim == 2) return std::fabs(value[0]);
  return std::sqrt(value[0] * value[0] + value[1] * value[1] + value[2] * value[2]);
}

CurlValue curl(const VectorField& f, std::span<const double> p) {
  f.check_domain(p);
  CurlValue out;
  out.dim = f.dimension();
  const auto comps = f.curl_components();
  for (std::size_t i = 0; i < comps.size(); ++i) out.value[i] = comps[i].evaluate(p);
  return out;
}

double divergence(const VectorField& f, std::span<const double> p) {
  f.check_domain(p);
  return f.divergence_expr().evaluate(p);
}

VectorField gradient_field(const ScalarExpr& phi, int dim) {
  if (dim != 2 && dim != 3) throw ValidationError("gradient_field dimension must be 2 or 3");
  if (phi.arity() > dim) throw ValidationError("potential uses a variable beyond x" + std::to_string(dim));
  std::vector<ScalarExpr> comps;
  for (int i = 0; i < dim; ++i) comps.push_back(phi.derivative(i));
  return VectorField(std::move(comps));
}

VectorField signed_flip(const VectorField& f, std::span<const int> signs) {
  if (static_cast<int>(signs.size()) != f.dimension()) {
    throw ValidationError("signed_flip needs one sign per component");
  }
  std::vector<ScalarExpr> comps;
  for (int i = 0; i < f.dimension(); ++i) {
    const int s = signs[static_cast<std::size_t>(i)];
    if (s != 1 && s != -1) throw ValidationError("signed_flip signs must be +1 or -1");
    comps.push_back(s == 1 ? f.component(i) : -f.component(i));
  }
  return VectorField(std::move(comps), f.excluded());
}

std::array<ScalarExpr, 2> cauchy_riemann_exprs(const ComplexFunction& F) {
  return {F.re.derivative(0) - F.im.derivative(1), F.im.derivative(0) + F.re.derivative(1)};
}

std::array<double, 2> cauchy_riemann_residual(const ComplexFunction& F, std::span<const double> p) {
  if (p.size() < 2) throw ValidationError("Cauchy-Riemann residual needs a point in the plane");
  if (F.re.arity() > 2 || F.im.arity() > 2) throw ValidationError("complex function may only use x1 and x2");
  if (F.poles.within_guard(p)) throw DomainError("evaluation at a declared pole");
  const auto exprs = cauchy_riemann_exprs(F);
  return {exprs[0].evaluate(p), exprs[1].evaluate(p)};
}

double numeric_partial(const ScalarExpr& e, std::span<const double> p, int variable) {
  std::vector<double> q(p.begin(), p.end());
  const auto v = static_cast<std::size_t>(variable);
  const double h = 1e-6 * std::max(1.0, std::fabs(q[v]));
  q[v] = p[v] + h;
  const double up = e.evaluate(q);
  q[v] = p[v] - h;
  const double down = e.evaluate(q);
  return (up - down) / (2.0 * h);
}

}  // namespace nonholo::field
