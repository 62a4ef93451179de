#include "nonholo/controllability/probes.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <limits>
#include <numbers>

#include "nonholo/error.hpp"
#include "nonholo/field/calculus.hpp"

namespace nonholo::controllability {

using field::ExcludedSet;
using field::Point;
using field::ScalarExpr;
using field::VectorField;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kStartPoints = 256;
constexpr std::size_t kMaxPoints = std::size_t{1} << 16;
constexpr double kLoopTol = 1e-10;

// Structure-of-arrays scratch for batch evaluation.
struct Samples {
  std::array<std::vector<double>, 3> x;
  std::array<std::vector<double>, 3> dx;

  void resize(std::size_t n) {
    for (auto& v : x) v.resize(n);
    for (auto& v : dx) v.resize(n);
  }
  kernels::PointBatch batch(int dim) const {
    kernels::PointBatch b;
    b.size = x[0].size();
    for (int k = 0; k < dim; ++k) b.coords[k] = x[k];
    return b;
  }
};

void fill_loop(const Loop& loop, std::size_t first, std::size_t stride, std::size_t count, std::size_t total,
               Samples& out) {
  out.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double s = static_cast<double>(first + i * stride) / static_cast<double>(total);
    const auto p = loop.position(s);
    const auto t = loop.tangent(s);
    for (int k = 0; k < 3; ++k) {
      out.x[k][i] = p[k];
      out.dx[k][i] = t[k];
    }
  }
}

void guard_samples(const ExcludedSet& ex, const Samples& s, int dim) {
  if (ex.empty()) return;
  for (std::size_t i = 0; i < s.x[0].size(); ++i) {
    const double p[3] = {s.x[0][i], s.x[1][i], s.x[2][i]};
    if (ex.within_guard(std::span<const double>(p, static_cast<std::size_t>(dim)))) {
      throw DomainError("contour passes through the excluded set" + (ex.note.empty() ? std::string() : " (" + ex.note + ")"));
    }
  }
}

// Sum and absolute sum of f . dx over the samples.
std::pair<double, double> circulation_sum(const VectorField& f, const Samples& s) {
  const int dim = f.dimension();
  const auto batch = s.batch(dim);
  std::vector<double> comp(batch.size), acc(batch.size, 0.0), mag(batch.size, 0.0);
  for (int k = 0; k < dim; ++k) {
    field::evaluate_batch(f.component(k), batch, comp);
    for (std::size_t i = 0; i < batch.size; ++i) {
      const double term = comp[i] * s.dx[k][i];
      acc[i] += term;
      mag[i] += std::fabs(term);
    }
  }
  double sum = 0.0, abs_sum = 0.0;
  for (std::size_t i = 0; i < batch.size; ++i) {
    sum += acc[i];
    abs_sum += mag[i];
  }
  return {sum, abs_sum};
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return out;
}

// All grid points of the box, coordinate-major.
Samples grid_points(const Box& box, int grid) {
  if (grid < 2) throw ValidationError("grid needs at least 2 points per axis");
  const int dim = box.dim();
  std::array<std::vector<double>, 3> axes;
  std::size_t total = 1;
  for (int k = 0; k < dim; ++k) {
    const auto [lo, hi] = box.ranges[static_cast<std::size_t>(k)];
    if (!(hi > lo)) throw ValidationError("box ranges must have lo < hi");
    axes[k] = linspace(lo, hi, grid);
    total *= static_cast<std::size_t>(grid);
  }
  Samples s;
  s.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rest = i;
    for (int k = dim - 1; k >= 0; --k) {
      s.x[k][i] = axes[k][rest % static_cast<std::size_t>(grid)];
      rest /= static_cast<std::size_t>(grid);
    }
  }
  return s;
}

}  // namespace

Loop::Loop(Point center, double radius, int orientation, std::array<int, 2> plane)
    : center_(center), radius_(radius), orientation_(orientation), plane_(plane) {
  if (center.dim() != 2 && center.dim() != 3) throw ValidationError("loop center must be in R^2 or R^3");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ValidationError("loop radius must be positive");
  if (orientation != 1 && orientation != -1) throw ValidationError("loop orientation must be +1 or -1");
  if (plane[0] == plane[1] || plane[0] < 0 || plane[1] < 0 || plane[0] >= dim() || plane[1] >= dim()) {
    throw ValidationError("loop plane needs two distinct axes of the state space");
  }
}

std::array<double, 3> Loop::position(double s) const {
  std::array<double, 3> p{center_[0], center_[1], dim() > 2 ? center_[2] : 0.0};
  p[plane_[0]] += radius_ * std::cos(kTwoPi * s);
  p[plane_[1]] += orientation_ * radius_ * std::sin(kTwoPi * s);
  return p;
}

std::array<double, 3> Loop::tangent(double s) const {
  std::array<double, 3> t{};
  t[plane_[0]] = -kTwoPi * radius_ * std::sin(kTwoPi * s);
  t[plane_[1]] = orientation_ * kTwoPi * radius_ * std::cos(kTwoPi * s);
  return t;
}

double Loop::distance_to(const ExcludedSet& ex) const {
  double best = std::numeric_limits<double>::infinity();
  const int a = plane_[0], b = plane_[1];
  for (const auto& e : ex.points) {
    double off = 0.0;
    for (int k = 0; k < dim(); ++k) {
      if (k == a || k == b || !e.coords[k]) continue;
      const double d = center_[k] - *e.coords[k];
      off += d * d;
    }
    double in_plane = 0.0;
    if (e.coords[a] && e.coords[b]) {
      in_plane = std::fabs(std::hypot(center_[a] - *e.coords[a], center_[b] - *e.coords[b]) - radius_);
    } else if (e.coords[a]) {
      in_plane = std::max(0.0, std::fabs(center_[a] - *e.coords[a]) - radius_);
    } else if (e.coords[b]) {
      in_plane = std::max(0.0, std::fabs(center_[b] - *e.coords[b]) - radius_);
    }
    best = std::min(best, std::sqrt(in_plane * in_plane + off));
  }
  return best;
}

bool Loop::disk_meets(const ExcludedSet& ex) const {
  const int a = plane_[0], b = plane_[1];
  for (const auto& e : ex.points) {
    bool in_plane = true;
    for (int k = 0; k < dim(); ++k) {
      if (k == a || k == b || !e.coords[k]) continue;
      if (std::fabs(center_[k] - *e.coords[k]) >= field::kGuardRadius) in_plane = false;
    }
    if (!in_plane) continue;
    if (e.coords[a] && e.coords[b]) {
      if (std::hypot(center_[a] - *e.coords[a], center_[b] - *e.coords[b]) < radius_) return true;
    } else if (e.coords[a]) {
      if (std::fabs(center_[a] - *e.coords[a]) < radius_) return true;
    } else if (e.coords[b]) {
      if (std::fabs(center_[b] - *e.coords[b]) < radius_) return true;
    } else {
      return true;
    }
  }
  return false;
}

LoopValue loop_circulation(const VectorField& f, const Loop& loop) {
  if (loop.dim() != f.dimension()) throw ValidationError("loop and field dimensions differ");
  const auto& ex = f.excluded();
  if (loop.distance_to(ex) < field::kGuardRadius) {
    throw DomainError("contour passes through the excluded set" + (ex.note.empty() ? std::string() : " (" + ex.note + ")"));
  }
  Samples s;
  std::size_t n = kStartPoints;
  fill_loop(loop, 0, 1, n, n, s);
  guard_samples(ex, s, f.dimension());
  auto [sum, mag] = circulation_sum(f, s);
  double value = sum / static_cast<double>(n);
  while (n < kMaxPoints) {
    // the new points sit halfway between the old ones
    fill_loop(loop, 1, 2, n, 2 * n, s);
    guard_samples(ex, s, f.dimension());
    const auto [add, add_mag] = circulation_sum(f, s);
    sum += add;
    mag += add_mag;
    n *= 2;
    const double next = sum / static_cast<double>(n);
    const double delta = std::fabs(next - value);
    value = next;
    if (delta < kLoopTol) break;
  }
  return {value, mag / static_cast<double>(n), n};
}

double loop_integral(const VectorField& f, const Loop& loop) { return loop_circulation(f, loop).value; }

StokesResult stokes_check(const VectorField& f, const Loop& loop) {
  StokesResult out;
  out.line = loop_integral(f, loop);
  out.excluded_inside = loop.disk_meets(f.excluded());

  // flux integrand: orientation * (curl f) . (e_a x e_b)
  const auto plane = loop.plane();
  const auto curl = f.curl_components();
  ScalarExpr normal;
  if (f.dimension() == 2) {
    normal = plane[0] == 0 ? curl[0] : -curl[0];
  } else {
    const int other = 3 - plane[0] - plane[1];
    const bool cyclic = (plane[1] - plane[0] + 3) % 3 == 1;
    normal = cyclic ? curl[static_cast<std::size_t>(other)] : -curl[static_cast<std::size_t>(other)];
  }
  if (loop.orientation() < 0) normal = -normal;

  using G = boost::math::quadrature::gauss<double, 20>;
  std::vector<double> rnode, rweight;
  for (std::size_t i = 0; i < G::abscissa().size(); ++i) {
    const double x = G::abscissa()[i], w = G::weights()[i];
    rnode.push_back(x);
    rweight.push_back(w);
    if (x != 0.0) {
      rnode.push_back(-x);
      rweight.push_back(w);
    }
  }

  const auto& ex = f.excluded();
  const double r = loop.radius();
  auto flux = [&](std::size_t panels, std::size_t angles, double& mag, bool& skipped) {
    const std::size_t n = panels * rnode.size() * angles;
    Samples s;
    s.resize(n);
    std::vector<double> weight(n);
    std::size_t idx = 0;
    const double width = r / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      for (std::size_t i = 0; i < rnode.size(); ++i) {
        const double rho = width * (static_cast<double>(p) + 0.5 * (rnode[i] + 1.0));
        const double wr = 0.5 * width * rweight[i] * rho;
        for (std::size_t j = 0; j < angles; ++j, ++idx) {
          const double th = kTwoPi * static_cast<double>(j) / static_cast<double>(angles);
          std::array<double, 3> x{loop.center()[0], loop.center()[1], loop.dim() > 2 ? loop.center()[2] : 0.0};
          x[plane[0]] += rho * std::cos(th);
          x[plane[1]] += rho * std::sin(th);
          for (int k = 0; k < 3; ++k) s.x[k][idx] = x[k];
          weight[idx] = wr * kTwoPi / static_cast<double>(angles);
          if (!ex.empty() && ex.within_guard(std::span<const double>(x.data(), static_cast<std::size_t>(loop.dim())))) {
            weight[idx] = 0.0;
            skipped = true;
            // park the node somewhere harmless for the batch evaluation
            for (int k = 0; k < 3; ++k) s.x[k][idx] = std::numeric_limits<double>::quiet_NaN();
          }
        }
      }
    }
    std::vector<double> val(n);
    field::evaluate_batch(normal, s.batch(loop.dim()), val);
    double sum = 0.0;
    mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (weight[i] == 0.0) continue;
      sum += weight[i] * val[i];
      mag += weight[i] * std::fabs(val[i]);
    }
    return sum;
  };

  bool skipped = false;
  double mag = 0.0;
  std::size_t panels = 1, angles = 64;
  double prev = flux(panels, angles, mag, skipped);
  while (panels < 32) {
    panels *= 2;
    angles *= 2;
    const double cur = flux(panels, angles, mag, skipped);
    const bool done = std::fabs(cur - prev) <= 1e-12 * std::max(mag, 1e-300);
    prev = cur;
    if (done) break;
  }
  out.surface = prev;
  out.excluded_inside = out.excluded_inside || skipped;
  return out;
}

Box Box::cube(int dim, double lo, double hi) {
  Box b;
  b.ranges.assign(static_cast<std::size_t>(dim), {lo, hi});
  return b;
}

CurlScan curl_scan(const VectorField& f, const Box& box, int grid) {
  if (box.dim() != f.dimension()) throw ValidationError("box and field dimensions differ");
  const Samples s = grid_points(box, grid);
  const int dim = f.dimension();
  const auto batch = s.batch(dim);
  const std::size_t n = batch.size;

  std::vector<char> skip(n, 0);
  CurlScan out;
  const auto& ex = f.excluded();
  for (std::size_t i = 0; i < n && !ex.empty(); ++i) {
    const double p[3] = {s.x[0][i], s.x[1][i], s.x[2][i]};
    if (ex.within_guard(std::span<const double>(p, static_cast<std::size_t>(dim)))) {
      skip[i] = 1;
      ++out.skipped;
    }
  }

  std::vector<double> norm2(n, 0.0), tmp(n);
  for (const auto& c : f.curl_components()) {
    field::evaluate_batch(c, batch, tmp);
    for (std::size_t i = 0; i < n; ++i) norm2[i] += tmp[i] * tmp[i];
  }
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      field::evaluate_batch(f.partial(i, j), batch, tmp);
      for (std::size_t k = 0; k < n; ++k) {
        if (!skip[k] && std::isfinite(tmp[k])) out.jacobian_scale = std::max(out.jacobian_scale, std::fabs(tmp[k]));
      }
    }
  }
  std::size_t best = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (skip[i]) continue;
    ++out.probes;
    const double v = std::sqrt(norm2[i]);
    if (best == n || v > out.max_abs) {
      out.max_abs = v;
      best = i;
    }
  }
  if (best < n) {
    const double p[3] = {s.x[0][best], s.x[1][best], s.x[2][best]};
    out.argmax = Point(std::span<const double>(p, static_cast<std::size_t>(dim)));
  }
  return out;
}

std::complex<double> contour_integral(const field::ComplexFunction& F, const Loop& loop) {
  if (loop.dim() != 2) throw ValidationError("contour must lie in the complex plane");
  if (loop.distance_to(F.poles) < field::kGuardRadius) throw DomainError("contour passes through a declared pole");
  // F dz = (re dx1 - im dx2) + i (im dx1 + re dx2): two real circulations
  const VectorField real_part({F.re, -F.im});
  const VectorField imag_part({F.im, F.re});
  const auto plane = loop.plane();
  Loop planar = loop;
  if (plane[0] != 0) planar = Loop(loop.center(), loop.radius(), -loop.orientation(), {0, 1});

  Samples s;
  std::size_t n = kStartPoints;
  fill_loop(planar, 0, 1, n, n, s);
  guard_samples(F.poles, s, 2);
  double re_sum = circulation_sum(real_part, s).first;
  double im_sum = circulation_sum(imag_part, s).first;
  std::complex<double> value(re_sum / n, im_sum / n);
  while (n < kMaxPoints) {
    fill_loop(planar, 1, 2, n, 2 * n, s);
    guard_samples(F.poles, s, 2);
    re_sum += circulation_sum(real_part, s).first;
    im_sum += circulation_sum(imag_part, s).first;
    n *= 2;
    const std::complex<double> next(re_sum / static_cast<double>(n), im_sum / static_cast<double>(n));
    const double delta = std::abs(next - value);
    value = next;
    if (delta < kLoopTol) break;
  }
  return value;
}

HolomorphyResult holomorphy_test(const field::ComplexFunction& F, const Box& box, int grid,
                                 std::optional<Annulus> region) {
  if (box.dim() != 2) throw ValidationError("holomorphy test needs a planar box");
  const Samples s = grid_points(box, grid);
  const auto batch = s.batch(2);
  const std::size_t n = batch.size;
  const auto cr = field::cauchy_riemann_exprs(F);
  std::vector<double> r0(n), r1(n), scale(n, 0.0), tmp(n);
  field::evaluate_batch(cr[0], batch, r0);
  field::evaluate_batch(cr[1], batch, r1);
  for (const auto* e : {&F.re, &F.im}) {
    for (int v = 0; v < 2; ++v) {
      field::evaluate_batch(e->derivative(v), batch, tmp);
      for (std::size_t i = 0; i < n; ++i) scale[i] += std::fabs(tmp[i]);
    }
  }

  HolomorphyResult out;
  out.has_poles = !F.poles.empty();
  double worst_relative = 0.0;
  std::size_t best = n;
  for (std::size_t i = 0; i < n; ++i) {
    const double p[2] = {s.x[0][i], s.x[1][i]};
    bool skip = F.poles.within_guard(p);
    if (region) {
      const double r = std::hypot(p[0] - region->center[0], p[1] - region->center[1]);
      if (r < region->inner || r > region->outer) skip = true;
    }
    if (skip) {
      ++out.skipped;
      continue;
    }
    ++out.probes;
    const double res = std::hypot(r0[i], r1[i]);
    worst_relative = std::max(worst_relative, res / std::max(1.0, scale[i]));
    if (best == n || res > out.max_residual) {
      out.max_residual = res;
      best = i;
    }
  }
  if (best < n) {
    const double p[2] = {s.x[0][best], s.x[1][best]};
    out.witness = Point(std::span<const double>(p, 2));
  }
  out.holomorphic = out.probes > 0 && worst_relative <= 1e-8;
  return out;
}

}  // namespace nonholo::controllability
