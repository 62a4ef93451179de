#include "nonholo/field/vector_field.hpp"

#include <cmath>
#include <limits>

#include "nonholo/error.hpp"

namespace nonholo::field {

Point::Point(std::initializer_list<double> coords) : Point(std::span<const double>(coords.begin(), coords.size())) {}

Point::Point(std::span<const double> coords) {
  if (coords.size() < 1 || coords.size() > 3) throw ValidationError("point must have 1 to 3 coordinates");
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!std::isfinite(coords[i])) throw ValidationError("point coordinates must be finite");
    coords_[i] = coords[i];
  }
  dim_ = static_cast<int>(coords.size());
}

double ExcludedPoint::distance(std::span<const double> p) const {
  double sq = 0.0;
  for (std::size_t i = 0; i < 3 && i < p.size(); ++i) {
    if (coords[i]) {
      const double d = p[i] - *coords[i];
      sq += d * d;
    }
  }
  return std::sqrt(sq);
}

double ExcludedSet::distance(std::span<const double> p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : points) best = std::min(best, e.distance(p));
  return best;
}

ExcludedSet ExcludedSet::origin() {
  ExcludedSet s;
  s.points.push_back(ExcludedPoint{{0.0, 0.0, std::nullopt}});
  s.note = "origin excluded (x1^2 + x2^2 = 0)";
  return s;
}

ExcludedSet ExcludedSet::merge(const ExcludedSet& a, const ExcludedSet& b) {
  ExcludedSet out = a;
  out.points.insert(out.points.end(), b.points.begin(), b.points.end());
  if (out.note.empty()) {
    out.note = b.note;
  } else if (!b.note.empty() && b.note != out.note) {
    out.note += "; " + b.note;
  }
  return out;
}

struct VectorField::Impl {
  std::vector<ScalarExpr> components;
  std::vector<std::vector<ScalarExpr>> jacobian;  // [i][j] = d f_i / d x_j
  std::vector<ScalarExpr> curl;
  ScalarExpr divergence;
  ExcludedSet excluded;
};

VectorField::VectorField(std::vector<ScalarExpr> components, ExcludedSet excluded) {
  const int dim = static_cast<int>(components.size());
  if (dim != 2 && dim != 3) throw ValidationError("vector field must have 2 or 3 components");
  for (const auto& c : components) {
    if (c.arity() > dim) {
      throw ValidationError("component '" + c.to_string() + "' uses a variable beyond x" + std::to_string(dim));
    }
  }
  auto impl = std::make_shared<Impl>();
  impl->components = std::move(components);
  impl->excluded = std::move(excluded);
  impl->jacobian.resize(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) impl->jacobian[i].push_back(impl->components[i].derivative(j));
  }
  const auto& J = impl->jacobian;
  if (dim == 2) {
    impl->curl = {J[1][0] - J[0][1]};
    impl->divergence = J[0][0] + J[1][1];
  } else {
    impl->curl = {J[2][1] - J[1][2], J[0][2] - J[2][0], J[1][0] - J[0][1]};
    impl->divergence = J[0][0] + J[1][1] + J[2][2];
  }
  impl_ = std::move(impl);
}

VectorField VectorField::parse(std::span<const std::string> components, ExcludedSet excluded) {
  std::vector<ScalarExpr> exprs;
  for (const auto& text : components) exprs.push_back(parse_expr(text));
  return VectorField(std::move(exprs), std::move(excluded));
}

int VectorField::dimension() const { return impl_ ? static_cast<int>(impl_->components.size()) : 0; }

const ScalarExpr& VectorField::component(int i) const { return impl_->components.at(static_cast<std::size_t>(i)); }

const ScalarExpr& VectorField::partial(int i, int j) const {
  return impl_->jacobian.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(j));
}

std::span<const ScalarExpr> VectorField::curl_components() const { return impl_->curl; }

const ScalarExpr& VectorField::divergence_expr() const { return impl_->divergence; }

const ExcludedSet& VectorField::excluded() const {
  static const ExcludedSet none;
  return impl_ ? impl_->excluded : none;
}

void VectorField::check_domain(std::span<const double> p) const {
  if (static_cast<int>(p.size()) < dimension()) {
    throw ValidationError("point dimension " + std::to_string(p.size()) + " does not match field dimension " +
                          std::to_string(dimension()));
  }
  if (impl_->excluded.within_guard(p)) {
    throw DomainError("evaluation inside excluded set" +
                      (impl_->excluded.note.empty() ? std::string() : " (" + impl_->excluded.note + ")"));
  }
}

std::array<double, 3> VectorField::evaluate(std::span<const double> p) const {
  check_domain(p);
  std::array<double, 3> out{};
  for (int i = 0; i < dimension(); ++i) out[i] = impl_->components[i].evaluate(p);
  return out;
}

VectorField VectorField::scaled(double factor) const {
  std::vector<ScalarExpr> comps;
  for (const auto& c : impl_->components) comps.push_back(factor * c);
  return VectorField(std::move(comps), impl_->excluded);
}

VectorField operator+(const VectorField& a, const VectorField& b) {
  if (a.dimension() != b.dimension()) throw ValidationError("cannot add fields of different dimension");
  std::vector<ScalarExpr> comps;
  for (int i = 0; i < a.dimension(); ++i) comps.push_back(a.component(i) + b.component(i));
  return VectorField(std::move(comps), ExcludedSet::merge(a.excluded(), b.excluded()));
}

std::vector<std::string> VectorField::to_strings() const {
  std::vector<std::string> out;
  for (const auto& c : impl_->components) out.push_back(c.to_string());
  return out;
}

ComplexFunction ComplexFunction::parse(const std::string& re, const std::string& im, ExcludedSet poles) {
  ComplexFunction f{parse_expr(re), parse_expr(im), std::move(poles)};
  if (f.re.arity() > 2 || f.im.arity() > 2) throw ValidationError("complex function may only use x1 and x2");
  return f;
}

ComplexFunction ComplexFunction::conj_power(int n) {
  if (n < 0) throw ValidationError("conj_power needs n >= 0");
  // (x1 - i x2)^n = sum_k C(n,k) x1^(n-k) (-i)^k x2^k, with (-i)^k cycling 1, -i, -1, i.
  const ScalarExpr x1 = ScalarExpr::variable(0);
  const ScalarExpr x2 = ScalarExpr::variable(1);
  ScalarExpr re = ScalarExpr::constant(0.0);
  ScalarExpr im = ScalarExpr::constant(0.0);
  double binom = 1.0;
  for (int k = 0; k <= n; ++k) {
    const ScalarExpr term = ScalarExpr::constant(binom) * pow(x1, n - k) * pow(x2, k);
    switch (k % 4) {
      case 0: re = re + term; break;
      case 1: im = im - term; break;
      case 2: re = re - term; break;
      case 3: im = im + term; break;
    }
    binom = binom * static_cast<double>(n - k) / static_cast<double>(k + 1);
  }
  return ComplexFunction{re, im, {}};
}

}  // namespace nonholo::field
