#include "nonholo/optimal/extremal.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>

#include "nonholo/error.hpp"
#include "nonholo/field/rational.hpp"

namespace nonholo::optimal {
namespace {

using systems::InputPiece;
using systems::InputSignal;
using systems::Variant;

constexpr double kPi = std::numbers::pi;

// Everything the extremal ODE needs, compiled once per problem.
struct Dynamics {
  int d = 2;
  const systems::FiberForm* form = nullptr;
  std::vector<field::ScalarExpr> curl;
  std::vector<field::ScalarExpr> drift_grad;  // empty without drift
  std::vector<field::ScalarExpr> cost_grad;   // empty for the energy cost
  field::ScalarExpr cost_g;
  bool has_drift = false;
  bool state_cost = false;

  explicit Dynamics(const ExtremalProblem& p) {
    p.validate();
    d = p.system.base_dim();
    form = &p.system.fibers().front();
    const auto comps = form->field.curl_components();
    curl.assign(comps.begin(), comps.end());
    const auto& g = form->drift;
    has_drift = !g.is_literal(0.0);
    if (has_drift) {
      for (int i = 0; i < d; ++i) drift_grad.push_back(g.derivative(i));
    }
    state_cost = p.cost == CostKind::EnergyPlusState;
    if (state_cost) {
      cost_g = p.state_cost_or_default();
      for (int i = 0; i < d; ++i) cost_grad.push_back(cost_g.derivative(i));
    }
  }

  void accel(std::span<const double> x, std::span<const double> v, double lambda, std::span<double> a) const {
    form->field.check_domain(x.first(static_cast<std::size_t>(d)));
    if (d == 2) {
      const double b = curl[0].evaluate(x);
      a[0] = -b * v[1];
      a[1] = b * v[0];
    } else {
      const double B[3] = {curl[0].evaluate(x), curl[1].evaluate(x), curl[2].evaluate(x)};
      a[0] = B[1] * v[2] - B[2] * v[1];
      a[1] = B[2] * v[0] - B[0] * v[2];
      a[2] = B[0] * v[1] - B[1] * v[0];
    }
    for (int i = 0; i < d; ++i) {
      double ai = lambda * a[static_cast<std::size_t>(i)];
      if (has_drift) ai -= lambda * drift_grad[static_cast<std::size_t>(i)].evaluate(x);
      if (state_cost) ai = 0.5 * (ai + cost_grad[static_cast<std::size_t>(i)].evaluate(x));
      a[static_cast<std::size_t>(i)] = ai;
    }
  }

  // Y = (x[d], fiber, v[d])
  void rhs(std::span<const double> Y, double lambda, std::span<double> dY) const {
    const auto ud = static_cast<std::size_t>(d);
    const auto x = Y.first(ud);
    const auto v = Y.subspan(ud + 1, ud);
    double fib = has_drift ? form->drift.evaluate(x) : 0.0;
    for (std::size_t i = 0; i < ud; ++i) {
      dY[i] = v[i];
      fib += form->field.component(static_cast<int>(i)).evaluate(x) * v[i];
    }
    dY[ud] = fib;
    accel(x, v, lambda, dY.subspan(ud + 1, ud));
  }
};

// Fixed-step RK4; calls visit(i, Y) for every sample when given.
template <class Visit>
std::vector<double> propagate(const Dynamics& dyn, std::span<const double> from, double lambda,
                              std::span<const double> u0, std::size_t steps, double T, Visit&& visit) {
  const auto ud = static_cast<std::size_t>(dyn.d);
  const std::size_t n = 2 * ud + 1;
  std::vector<double> Y(n), tmp(n), k1(n), k2(n), k3(n), k4(n);
  for (std::size_t i = 0; i <= ud; ++i) Y[i] = from[i];
  for (std::size_t i = 0; i < ud; ++i) Y[ud + 1 + i] = u0[i];
  const double h = T / static_cast<double>(steps);
  visit(std::size_t{0}, Y);
  for (std::size_t s = 0; s < steps; ++s) {
    dyn.rhs(Y, lambda, k1);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = Y[j] + 0.5 * h * k1[j];
    dyn.rhs(tmp, lambda, k2);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = Y[j] + 0.5 * h * k2[j];
    dyn.rhs(tmp, lambda, k3);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = Y[j] + h * k3[j];
    dyn.rhs(tmp, lambda, k4);
    for (std::size_t j = 0; j < n; ++j) Y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    visit(s + 1, Y);
  }
  return Y;
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool base_fixed(const ExtremalProblem& p) {
  for (int i = 0; i < p.system.base_dim(); ++i) {
    if (p.from[static_cast<std::size_t>(i)] != p.to[static_cast<std::size_t>(i)]) return false;
  }
  return true;
}

// Uniform curl leaves circles through the start free to rotate; the
// direction is then pinned by u1(0) = u2(0).
bool rotation_degenerate(const ExtremalProblem& p, const Dynamics& dyn) {
  return dyn.d == 2 && !dyn.has_drift && !dyn.state_cost && base_fixed(p) &&
         field::is_symbolically_constant(dyn.curl[0]);
}

std::vector<double> endpoint_residual(const ExtremalProblem& p, const Dynamics& dyn, double lambda,
                                      std::span<const double> u0, std::size_t steps) {
  const auto Y = propagate(dyn, p.from, lambda, u0, steps, p.T, [](std::size_t, const std::vector<double>&) {});
  std::vector<double> r(static_cast<std::size_t>(dyn.d) + 1);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = Y[i] - p.to[i];
  return r;
}

struct Guess {
  double lambda = 0.0;
  std::vector<double> u0;
};

// (theta - sin theta) / (8 sin^2(theta/2)): fiber gain of a circular arc over
// its chord, per unit curl and squared chord length, as a function of the
// turning angle theta.
double segment_gain(double theta) {
  const double s = std::sin(0.5 * theta);
  return (theta - std::sin(theta)) / (8.0 * s * s);
}

// Root of segment_gain(theta) = target on [lo, hi] where the gain is monotone.
double solve_turn(double lo, double hi, double target) {
  const bool rising = segment_gain(0.5 * (lo + hi) + 1e-6) > segment_gain(0.5 * (lo + hi) - 1e-6);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((segment_gain(mid) < target) == rising) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Planar seed from a uniform-curl model: with the curl b frozen at the chord
// midpoint the extremal is a circular arc turning through theta, and branch
// k takes theta in (2 pi k, 2 pi (k + 1)) (mirrored for k < 0), on the
// cheaper side of that window.
std::optional<Guess> planar_guess(const ExtremalProblem& p, const Dynamics& dyn, int k) {
  const double dx = p.to[0] - p.from[0], dy = p.to[1] - p.from[1];
  const double L = std::hypot(dx, dy);
  const std::vector<double> mid{p.from[0] + 0.5 * dx, p.from[1] + 0.5 * dy};
  double b = 0.0;
  try {
    b = dyn.curl[0].evaluate(mid);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (!std::isfinite(b) || b == 0.0) return std::nullopt;
  double chord = 0.0;
  if (L > 0.0) {
    try {
      const auto line = systems::InputSignal::constant({dx / p.T, dy / p.T}, p.T);
      chord = systems::fiber_displacement(p.system, line, p.from, p.T)[0];
    } catch (const Error&) {
      return std::nullopt;
    }
  }
  const double G = p.to[2] - p.from[2] - chord;
  Guess g;
  if (L == 0.0) {
    // k full circles through the start enclosing flux G
    if (k == 0 || G == 0.0 || (G > 0.0) != (b * k > 0.0)) return std::nullopt;
    const double theta = 2.0 * kPi * k;
    const double rho = std::sqrt(std::fabs(G) / (std::abs(k) * kPi * std::fabs(b)));
    g.lambda = theta / (b * p.T);
    const double speed = rho * std::fabs(theta) / p.T;
    g.u0 = {speed / std::sqrt(2.0), speed / std::sqrt(2.0)};
    return g;
  }
  const double target = G / (b * L * L);
  const double eps = 1e-9;
  double theta = 0.0;
  if (k == 0) {
    theta = solve_turn(-2.0 * kPi + eps, 2.0 * kPi - eps, target);
  } else {
    const double sign = k > 0 ? 1.0 : -1.0;
    const double lo = 2.0 * kPi * std::abs(k) + eps, hi = 2.0 * kPi * (std::abs(k) + 1) - eps;
    // the gain is U-shaped on the window; find its extremum by golden section
    double a = lo, c = hi;
    for (int i = 0; i < 200; ++i) {
      const double m1 = a + 0.382 * (c - a), m2 = a + 0.618 * (c - a);
      if (std::fabs(segment_gain(m1)) < std::fabs(segment_gain(m2))) {
        c = m2;
      } else {
        a = m1;
      }
    }
    const double bottom = 0.5 * (a + c);
    if (sign * target < std::fabs(segment_gain(bottom))) return std::nullopt;
    theta = sign * solve_turn(lo, bottom, sign * target);
  }
  const double omega = theta / p.T;
  g.lambda = omega / b;
  // the velocity starts turned by -theta/2 from the chord
  const double speed = L * std::fabs(theta / (2.0 * std::sin(0.5 * theta))) / p.T;
  const double c0 = std::cos(-0.5 * theta), s0 = std::sin(-0.5 * theta);
  g.u0 = {speed * (c0 * dx - s0 * dy) / L, speed * (s0 * dx + c0 * dy) / L};
  if (theta == 0.0) g.u0 = {dx / p.T, dy / p.T};
  return g;
}

// Fallback seed: the branch multiplier with the straight-line velocity plus a
// loop sized for the fiber gap.
Guess generic_guess(const ExtremalProblem& p, const Dynamics& dyn, int k) {
  const auto ud = static_cast<std::size_t>(dyn.d);
  Guess g;
  g.lambda = branch_seed(p, k);
  std::vector<double> straight(ud);
  for (std::size_t i = 0; i < ud; ++i) straight[i] = (p.to[i] - p.from[i]) / p.T;
  const double gap = p.to[ud] - p.from[ud];
  double loop_speed = 0.0;
  if (k != 0 && g.lambda != 0.0) {
    const double scale = 2.0 * kPi * std::abs(k) / (p.T * std::fabs(g.lambda));
    const double omega = std::fabs(g.lambda) * scale;
    loop_speed = omega * std::sqrt(std::fabs(gap) / (std::abs(k) * kPi * scale));
  }
  std::vector<double> dir(ud, 0.0);
  const double sn = norm(straight);
  if (sn > 0.0 && ud == 2) {
    dir = {-straight[1] / sn, straight[0] / sn};
  } else if (sn > 0.0) {
    std::size_t smallest = 0;
    for (std::size_t i = 1; i < 3; ++i) {
      if (std::fabs(straight[i]) < std::fabs(straight[smallest])) smallest = i;
    }
    for (std::size_t i = 0; i < 3; ++i) dir[i] = (i == smallest ? 1.0 : 0.0) - straight[smallest] * straight[i] / (sn * sn);
    const double dn = norm(dir);
    for (auto& x : dir) x /= dn;
  } else {
    dir[0] = dir[1] = 1.0 / std::sqrt(2.0);
  }
  g.u0.resize(ud);
  for (std::size_t i = 0; i < ud; ++i) g.u0[i] = straight[i] + loop_speed * dir[i];
  return g;
}

// nullopt when the branch cannot exist: with a constant curl the planar model
// is exact, so an infeasible turning window rules the branch out.
std::optional<Guess> initial_guess(const ExtremalProblem& p, const Dynamics& dyn, int k) {
  if (dyn.d == 2) {
    if (auto g = planar_guess(p, dyn, k)) return g;
    if (!dyn.has_drift && !dyn.state_cost && field::is_symbolically_constant(dyn.curl[0]) &&
        !dyn.curl[0].is_literal(0.0)) {
      return std::nullopt;
    }
  }
  return generic_guess(p, dyn, k);
}

}  // namespace

std::string_view cost_name(CostKind c) {
  switch (c) {
    case CostKind::Energy: return "energy";
    case CostKind::EnergyPlusState: return "energy-plus-state";
  }
  return "unknown";
}

void ExtremalProblem::validate() const {
  const Variant v = system.variant();
  if (v != Variant::Classic && v != Variant::GeneralR2 && v != Variant::GeneralR3 && v != Variant::DriftR3) {
    throw ValidationError("optimal control supports classic, general_r2, general_r3 and drift_r3, got " +
                          std::string(systems::variant_name(v)));
  }
  if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("horizon T must be positive and finite");
  const auto n = static_cast<std::size_t>(system.state_dim());
  if (from.size() != n || to.size() != n) {
    throw ValidationError("boundary states need " + std::to_string(n) + " entries");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(from[i]) || !std::isfinite(to[i])) throw ValidationError("boundary states must be finite");
  }
  if (cost == CostKind::EnergyPlusState) {
    if (!system.fibers().front().drift.is_literal(0.0)) {
      throw ValidationError("the state-cost variant is defined for systems without drift");
    }
    if (state_cost.arity() > system.base_dim()) {
      throw ValidationError("state cost may only use the base coordinates x1..x" + std::to_string(system.base_dim()));
    }
  }
}

field::ScalarExpr ExtremalProblem::state_cost_or_default() const {
  if (!state_cost.is_literal(0.0)) return state_cost;
  field::ScalarExpr g = field::ScalarExpr::constant(0.0);
  for (int i = 0; i < system.base_dim(); ++i) g = g + field::pow(field::ScalarExpr::variable(i), 2);
  return g;
}

std::vector<double> extremal_rhs(const ExtremalProblem& problem, std::span<const double> x, std::span<const double> v,
                                 double lambda) {
  const Dynamics dyn(problem);
  const auto ud = static_cast<std::size_t>(dyn.d);
  if (x.size() < ud || v.size() != ud) {
    throw ValidationError("extremal_rhs needs a base point and a velocity of dimension " + std::to_string(ud));
  }
  std::vector<double> a(ud);
  dyn.accel(x, v, lambda, a);
  return a;
}

Extremal integrate_extremal(const ExtremalProblem& problem, double lambda, std::span<const double> u0, double step) {
  const Dynamics dyn(problem);
  const auto ud = static_cast<std::size_t>(dyn.d);
  if (u0.size() != ud) throw ValidationError("initial velocity needs " + std::to_string(ud) + " entries");
  if (!std::isfinite(lambda)) throw ValidationError("multiplier must be finite");
  const std::size_t steps = systems::checked_step_count(problem.T, step);
  const double h = problem.T / static_cast<double>(steps);

  Extremal out;
  auto& traj = out.trajectory;
  traj.step = h;
  std::vector<std::vector<double>> accel;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  propagate(dyn, problem.from, lambda, u0, steps, problem.T, [&](std::size_t i, const std::vector<double>& Y) {
    traj.times.push_back(i == steps ? problem.T : problem.T * static_cast<double>(i) / static_cast<double>(steps));
    traj.states.emplace_back(Y.begin(), Y.begin() + static_cast<std::ptrdiff_t>(ud + 1));
    std::vector<double> v(Y.begin() + static_cast<std::ptrdiff_t>(ud + 1), Y.end()), a(ud);
    dyn.accel(std::span<const double>(Y).first(ud), v, lambda, a);
    out.velocities.push_back(std::move(v));
    accel.push_back(std::move(a));
  });

  // cubic Hermite pieces through (v, a) at both ends of every step
  std::vector<std::vector<InputPiece>> channels(ud);
  for (std::size_t c = 0; c < ud; ++c) {
    channels[c].reserve(steps);
    for (std::size_t i = 0; i < steps; ++i) {
      const double t0 = traj.times[i], t1 = traj.times[i + 1], dt = t1 - t0;
      const double v0 = out.velocities[i][c], v1 = out.velocities[i + 1][c];
      const double a0 = accel[i][c], a1 = accel[i + 1][c];
      const double c2 = (3.0 * (v1 - v0) / dt - 2.0 * a0 - a1) / dt;
      const double c3 = (2.0 * (v0 - v1) / dt + a0 + a1) / (dt * dt);
      channels[c].push_back(InputPiece::polynomial(t0, t1, {v0, a0, c2, c3}));
    }
  }
  traj.inputs = InputSignal(std::move(channels), problem.T);
  return out;
}

double branch_seed(const ExtremalProblem& problem, int k) {
  if (k == 0) return 0.0;
  const Dynamics dyn(problem);
  std::array<double, 3> lo{}, hi{};
  for (int i = 0; i < dyn.d; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    lo[ui] = std::min(problem.from[ui], problem.to[ui]) - 1.0;
    hi[ui] = std::max(problem.from[ui], problem.to[ui]) + 1.0;
  }
  constexpr int kGrid = 9;
  double scale = 0.0;
  std::array<double, 3> p{};
  const int total = dyn.d == 2 ? kGrid * kGrid : kGrid * kGrid * kGrid;
  for (int idx = 0; idx < total; ++idx) {
    int rest = idx;
    for (int i = 0; i < dyn.d; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      p[ui] = lo[ui] + (hi[ui] - lo[ui]) * (rest % kGrid) / (kGrid - 1);
      rest /= kGrid;
    }
    const std::span<const double> pt(p.data(), static_cast<std::size_t>(dyn.d));
    if (dyn.form->field.excluded().distance(pt) < 1e-6) continue;
    double sq = 0.0;
    for (const auto& c : dyn.curl) {
      const double v = c.evaluate(pt);
      sq += v * v;
    }
    if (std::isfinite(sq)) scale = std::max(scale, std::sqrt(sq));
  }
  if (scale == 0.0) return 0.0;
  return 2.0 * kPi * k / (problem.T * scale);
}

OptimalSolution shoot_branch(const ExtremalProblem& problem, int k, const ShootOptions& opts) {
  const Dynamics dyn(problem);
  const auto ud = static_cast<std::size_t>(dyn.d);
  const std::size_t steps = systems::checked_step_count(problem.T, opts.step);
  const bool reduced = rotation_degenerate(problem, dyn);

  const std::size_t np = reduced ? 2 : ud + 1;
  Eigen::VectorXd p(static_cast<Eigen::Index>(np));
  const auto seeded = initial_guess(problem, dyn, k);
  if (!seeded) {
    OptimalSolution none;
    none.branch = k;
    none.residual = std::numeric_limits<double>::infinity();
    return none;
  }
  const Guess& guess = *seeded;
  p[0] = guess.lambda;
  if (reduced) {
    p[1] = std::sqrt(0.5 * (guess.u0[0] * guess.u0[0] + guess.u0[1] * guess.u0[1]));
  } else {
    for (std::size_t i = 0; i < ud; ++i) p[static_cast<Eigen::Index>(i + 1)] = guess.u0[i];
  }
  auto unpack = [&](const Eigen::VectorXd& q) {
    std::vector<double> u(ud);
    for (std::size_t i = 0; i < ud; ++i) u[i] = reduced ? q[1] : q[static_cast<Eigen::Index>(i + 1)];
    return u;
  };
  const auto m = static_cast<Eigen::Index>(ud + 1);
  auto residual = [&](const Eigen::VectorXd& q, Eigen::VectorXd& r) -> bool {
    try {
      const auto res = endpoint_residual(problem, dyn, q[0], unpack(q), steps);
      r.resize(m);
      for (Eigen::Index i = 0; i < m; ++i) r[i] = res[static_cast<std::size_t>(i)];
      return r.allFinite();
    } catch (const DomainError&) {
      return false;
    }
  };

  Eigen::VectorXd r;
  double rn = std::numeric_limits<double>::infinity();
  if (residual(p, r)) rn = r.norm();
  double mu = 1e-3;
  const double target = 1e-2 * opts.tolerance;
  std::vector<double> history;
  for (int it = 0; it < opts.max_iterations && std::isfinite(rn) && rn > target; ++it) {
    // give up on a branch that stopped making progress
    history.push_back(rn);
    if (history.size() > 10 && rn > 0.5 * history[history.size() - 11]) break;
    Eigen::MatrixXd J(m, static_cast<Eigen::Index>(np));
    bool ok = true;
    for (std::size_t j = 0; j < np && ok; ++j) {
      Eigen::VectorXd q = p, rq;
      const double hj = 1e-7 * std::max(1.0, std::fabs(p[static_cast<Eigen::Index>(j)]));
      q[static_cast<Eigen::Index>(j)] += hj;
      ok = residual(q, rq);
      if (ok) J.col(static_cast<Eigen::Index>(j)) = (rq - r) / hj;
    }
    if (!ok) break;
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    bool accepted = false;
    for (int tries = 0; tries < 12 && !accepted; ++tries) {
      Eigen::MatrixXd damped = A;
      for (Eigen::Index j = 0; j < damped.rows(); ++j) damped(j, j) += mu * std::max(A(j, j), 1e-12);
      const Eigen::VectorXd delta = damped.ldlt().solve(-g);
      if (!delta.allFinite()) {
        mu *= 4.0;
        continue;
      }
      Eigen::VectorXd q = p + delta, rq;
      if (residual(q, rq) && rq.norm() < rn) {
        const bool stalled = delta.norm() <= 1e-15 * (1.0 + p.norm());
        p = q;
        r = rq;
        rn = rq.norm();
        mu = std::max(mu / 3.0, 1e-12);
        accepted = !stalled;
        if (stalled) tries = 12;
      } else {
        mu *= 4.0;
      }
    }
    if (!accepted) break;
  }

  OptimalSolution sol;
  sol.branch = k;
  sol.lambda = p[0];
  sol.u0 = unpack(p);
  if (!std::isfinite(rn)) {
    sol.residual = rn;
    return sol;
  }
  try {
    sol.path = integrate_extremal(problem, sol.lambda, sol.u0, opts.step);
  } catch (const DomainError&) {
    sol.residual = std::numeric_limits<double>::infinity();
    return sol;
  }
  const auto& end = sol.path.trajectory.final_state();
  double sq = 0.0;
  for (std::size_t i = 0; i <= ud; ++i) sq += (end[i] - problem.to[i]) * (end[i] - problem.to[i]);
  sol.residual = std::sqrt(sq);
  sol.cost = energy_cost(sol.path.trajectory, problem);
  sol.converged = sol.residual <= opts.tolerance;
  return sol;
}

OptimalSolution shoot(const ExtremalProblem& problem, const ShootOptions& opts) {
  const Dynamics dyn(problem);
  if (opts.branches < 0) throw ValidationError("branch count must be non-negative");
  if (!(opts.tolerance > 0.0)) throw ValidationError("shooting tolerance must be positive");
  if (problem.from == problem.to && !dyn.has_drift && !dyn.state_cost) {
    OptimalSolution zero;
    zero.u0.assign(static_cast<std::size_t>(dyn.d), 0.0);
    zero.path = integrate_extremal(problem, 0.0, zero.u0, opts.step);
    zero.converged = true;
    return zero;
  }
  std::optional<OptimalSolution> best;
  double best_residual = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= 2 * opts.branches; ++j) {
    const int k = j == 0 ? 0 : (j % 2 ? (j + 1) / 2 : -j / 2);
    auto sol = shoot_branch(problem, k, opts);
    best_residual = std::min(best_residual, sol.residual);
    if (!sol.converged) continue;
    auto key = [](const OptimalSolution& s) { return std::tuple(s.cost, std::abs(s.branch), s.branch); };
    // costs equal to rounding are ties, broken by the smaller branch
    if (!best || sol.cost < best->cost * (1.0 - 1e-9) ||
        (sol.cost <= best->cost * (1.0 + 1e-9) && key(sol) < key(*best))) {
      best = std::move(sol);
    }
  }
  if (!best) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", best_residual);
    throw TaskError("shooting did not converge on any of " + std::to_string(2 * opts.branches + 1) +
                    " branches; best residual " + buf);
  }
  return *best;
}

double energy_cost(const systems::Trajectory& trajectory, const ExtremalProblem& problem) {
  const std::size_t n = trajectory.times.size();
  if (n < 2) return 0.0;
  const int channels = trajectory.inputs.channels();
  if (channels != problem.system.base_dim()) {
    throw ValidationError("trajectory inputs do not match the system's base dimension");
  }
  field::ScalarExpr g;
  const bool state = problem.cost == CostKind::EnergyPlusState;
  if (state) g = problem.state_cost_or_default();
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = trajectory.times[i];
    double s = 0.0;
    for (int c = 0; c < channels; ++c) {
      const double u = trajectory.inputs.value(c, t);
      s += u * u;
    }
    if (state) s += g.evaluate(trajectory.states[i]);
    f[i] = s;
  }
  const double h = (trajectory.times.back() - trajectory.times.front()) / static_cast<double>(n - 1);
  const std::size_t intervals = n - 1;
  if (intervals == 1) return 0.5 * h * (f[0] + f[1]);
  // Simpson on an even number of intervals, Simpson 3/8 on the last three
  // when the count is odd.
  const std::size_t even = intervals % 2 == 0 ? intervals : intervals - 3;
  double sum = 0.0;
  for (std::size_t i = 0; i + 2 <= even; i += 2) sum += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
  if (even != intervals) {
    const std::size_t i = even;
    sum += 3.0 * h / 8.0 * (f[i] + 3.0 * f[i + 1] + 3.0 * f[i + 2] + f[i + 3]);
  }
  return sum;
}

io::Json to_json(const OptimalSolution& solution) {
  io::Json j = io::Json::object();
  j["lambda"] = io::number(solution.lambda);
  j["u0"] = io::numbers(solution.u0);
  j["cost"] = io::number(solution.cost);
  j["residual"] = io::number(solution.residual);
  j["branch"] = solution.branch;
  return j;
}

}  // namespace nonholo::optimal
