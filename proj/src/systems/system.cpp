#include "nonholo/systems/system.hpp"

#include "nonholo/error.hpp"

namespace nonholo::systems {

using field::ExcludedSet;
using field::ScalarExpr;
using field::VectorField;

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::Classic: return "classic";
    case Variant::GeneralR2: return "general_r2";
    case Variant::GeneralizedRm: return "generalized_rm";
    case Variant::GeneralR3: return "general_r3";
    case Variant::PairwiseRm: return "pairwise_rm";
    case Variant::DriftR3: return "drift_r3";
    case Variant::ComplexPlane: return "complex_plane";
  }
  return "unknown";
}

struct SystemModel::Data {
  Variant variant = Variant::Classic;
  int base_dim = 2;
  std::vector<FiberForm> fibers;
  std::vector<std::pair<int, int>> pairs;
  VectorField field;
  ScalarExpr drift;
  field::ComplexFunction complex;
};

namespace {

ScalarExpr var(int i) { return ScalarExpr::variable(i); }

}  // namespace

const SystemModel::Data& SystemModel::data() const {
  if (!data_) throw ValidationError("system model is empty");
  return *data_;
}

SystemModel SystemModel::classic() {
  auto d = std::make_shared<Data>();
  d->variant = Variant::Classic;
  d->field = VectorField({-var(1), var(0)});
  d->fibers.push_back(FiberForm{d->field, {0, 1, 2}, ScalarExpr(), "x3"});
  return SystemModel(std::move(d));
}

SystemModel SystemModel::general_r2(VectorField f) {
  if (f.dimension() != 2) throw ValidationError("general_r2 needs a planar field");
  auto d = std::make_shared<Data>();
  d->variant = Variant::GeneralR2;
  d->field = f;
  d->fibers.push_back(FiberForm{std::move(f), {0, 1, 2}, ScalarExpr(), "x3"});
  return SystemModel(std::move(d));
}

SystemModel SystemModel::pairwise_rm(int m, std::vector<VectorField> pair_fields) {
  if (m < 2) throw ValidationError("pairwise system needs m >= 2");
  const std::size_t pairs = static_cast<std::size_t>(m * (m - 1) / 2);
  if (pair_fields.size() != pairs) {
    throw ValidationError("pairwise system with m=" + std::to_string(m) + " needs " + std::to_string(pairs) +
                          " pair fields, got " + std::to_string(pair_fields.size()));
  }
  auto d = std::make_shared<Data>();
  d->variant = Variant::PairwiseRm;
  d->base_dim = m;
  std::size_t k = 0;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j, ++k) {
      if (pair_fields[k].dimension() != 2) throw ValidationError("pair fields must be planar");
      d->fibers.push_back(FiberForm{pair_fields[k], {i, j, 0},  ScalarExpr(),
                                    "x" + std::to_string(i + 1) + std::to_string(j + 1)});
      d->pairs.emplace_back(i, j);
    }
  }
  return SystemModel(std::move(d));
}

SystemModel SystemModel::generalized_rm(int m) {
  if (m < 2) throw ValidationError("generalized system needs m >= 2");
  std::vector<VectorField> fields(static_cast<std::size_t>(m * (m - 1) / 2), VectorField({-var(1), var(0)}));
  SystemModel s = pairwise_rm(m, std::move(fields));
  auto d = std::make_shared<Data>(*s.data_);
  d->variant = Variant::GeneralizedRm;
  return SystemModel(std::move(d));
}

SystemModel SystemModel::general_r3(VectorField f) {
  if (f.dimension() != 3) throw ValidationError("general_r3 needs a spatial field");
  auto d = std::make_shared<Data>();
  d->variant = Variant::GeneralR3;
  d->base_dim = 3;
  d->field = f;
  d->fibers.push_back(FiberForm{std::move(f), {0, 1, 2}, ScalarExpr(), "x4"});
  return SystemModel(std::move(d));
}

SystemModel SystemModel::drift_r3(ScalarExpr g, VectorField f) {
  if (f.dimension() != 3) throw ValidationError("drift_r3 needs a spatial field");
  if (g.arity() > 3) throw ValidationError("drift uses a variable beyond x3");
  auto d = std::make_shared<Data>();
  d->variant = Variant::DriftR3;
  d->base_dim = 3;
  d->field = f;
  d->drift = g;
  d->fibers.push_back(FiberForm{std::move(f), {0, 1, 2}, std::move(g), "x4"});
  return SystemModel(std::move(d));
}

SystemModel SystemModel::complex_plane(field::ComplexFunction F) {
  if (F.re.arity() > 2 || F.im.arity() > 2) throw ValidationError("complex function may only use x1 and x2");
  auto d = std::make_shared<Data>();
  d->variant = Variant::ComplexPlane;
  d->complex = F;
  d->fibers.push_back(FiberForm{VectorField({F.re, -F.im}, F.poles), {0, 1, 2}, ScalarExpr(), "w1"});
  d->fibers.push_back(FiberForm{VectorField({F.im, F.re}, F.poles), {0, 1, 2}, ScalarExpr(), "w2"});
  return SystemModel(std::move(d));
}

Variant SystemModel::variant() const { return data().variant; }
int SystemModel::base_dim() const { return data().base_dim; }
int SystemModel::state_dim() const { return data().base_dim + static_cast<int>(data().fibers.size()); }
const std::vector<FiberForm>& SystemModel::fibers() const { return data().fibers; }

const VectorField& SystemModel::field() const {
  const auto& d = data();
  if (d.field.dimension() == 0) {
    throw ValidationError("variant " + std::string(variant_name(d.variant)) + " has no single defining field");
  }
  return d.field;
}

const ScalarExpr& SystemModel::drift() const { return data().drift; }

const field::ComplexFunction& SystemModel::complex_function() const {
  if (data().variant != Variant::ComplexPlane) throw ValidationError("not a complex-plane system");
  return data().complex;
}

std::pair<int, int> SystemModel::pair_of(int fiber) const {
  const auto& d = data();
  if (d.pairs.empty()) throw ValidationError("not a pairwise system");
  return d.pairs.at(static_cast<std::size_t>(fiber));
}

int SystemModel::fiber_of_pair(int i, int j) const {
  const auto& d = data();
  for (std::size_t k = 0; k < d.pairs.size(); ++k) {
    if (d.pairs[k] == std::make_pair(i, j)) return static_cast<int>(k);
  }
  throw ValidationError("no fiber for pair (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
}

void SystemModel::rhs(std::span<const double> x, std::span<const double> u, std::span<double> dx) const {
  const auto& d = data();
  for (int b = 0; b < d.base_dim; ++b) dx[b] = u[b];
  std::size_t out = static_cast<std::size_t>(d.base_dim);
  for (const auto& fib : d.fibers) {
    const int n = fib.dim();
    double p[3] = {0.0, 0.0, 0.0};
    for (int k = 0; k < n; ++k) p[k] = x[fib.base[k]];
    const std::span<const double> local(p, static_cast<std::size_t>(n));
    fib.field.check_domain(local);
    double rate = fib.drift.evaluate(local);
    for (int k = 0; k < n; ++k) rate += fib.field.component(k).evaluate(local) * u[fib.base[k]];
    dx[out++] = rate;
  }
}

std::vector<std::string> SystemModel::state_labels() const {
  std::vector<std::string> out;
  for (int b = 0; b < base_dim(); ++b) out.push_back("x" + std::to_string(b + 1));
  for (const auto& f : fibers()) out.push_back(f.label);
  return out;
}

}  // namespace nonholo::systems
