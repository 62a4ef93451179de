#include "nonholo/optimal/oscillator.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "nonholo/error.hpp"
#include "nonholo/field/rational.hpp"

namespace nonholo::optimal {
namespace {

constexpr double kPi = std::numbers::pi;

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v, double mu) {
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(v.size()));
}

// The map always works with a positive multiplier: for lambda_osc < 0 the
// mirrored motion y -> -y has multiplier -lambda_osc and constant -c.
struct Effective {
  double lambda, c;
};

Effective effective(const OscillatorReduction& red) {
  return red.lambda_osc < 0.0 ? Effective{-red.lambda_osc, -red.c} : Effective{red.lambda_osc, red.c};
}

}  // namespace

OscillatorReduction reduce_oscillator(const OptimalSolution& solution, const ExtremalProblem& problem) {
  problem.validate();
  if (problem.system.base_dim() != 2 || problem.cost != CostKind::Energy ||
      !problem.system.fibers().front().drift.is_literal(0.0)) {
    throw ValidationError("the oscillator reduction needs a planar energy-cost problem");
  }
  const auto x1 = field::ScalarExpr::variable(0), x2 = field::ScalarExpr::variable(1);
  const auto& curl = problem.system.fibers().front().field.curl_components()[0];
  if (!field::is_symbolically_zero(curl + 2.0 * (x1 + x2))) {
    throw ValidationError("the oscillator reduction needs curl f = -2(x1 + x2), as for f = (x2^2, -x1^2)");
  }
  const auto& traj = solution.path.trajectory;
  const auto& vel = solution.path.velocities;
  if (traj.states.empty() || vel.size() != traj.states.size()) {
    throw ValidationError("solution carries no extremal trajectory");
  }

  OscillatorReduction red;
  red.lambda_osc = 2.0 * solution.lambda;
  const std::size_t n = traj.states.size();
  std::vector<double> energy(n), cval(n), yd(n), zd(n);
  red.times = traj.times;
  red.y.resize(n);
  red.z.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    red.y[i] = traj.states[i][0] - traj.states[i][1];
    red.z[i] = traj.states[i][0] + traj.states[i][1];
    yd[i] = vel[i][0] - vel[i][1];
    zd[i] = vel[i][0] + vel[i][1];
    energy[i] = yd[i] * yd[i] + zd[i] * zd[i];
    cval[i] = yd[i] - 0.5 * red.lambda_osc * red.z[i] * red.z[i];
  }
  const double r2 = mean(energy);
  red.r = std::sqrt(r2);
  red.c = mean(cval);
  red.r_spread = stddev(energy, r2);
  red.c_spread = stddev(cval, red.c);
  if (red.r_spread > 1e-5 * std::max(r2, 1e-300) || red.c_spread > 1e-5 * std::max(red.r, 1e-300)) {
    throw TaskError("conservation of yd^2 + zd^2 or yd - lambda z^2/2 violated; integration failed");
  }

  const auto eff = effective(red);
  if (red.lambda_osc == 0.0) {
    red.degenerate = true;
    red.note = "zero multiplier: straight-line motion, r = |c| edge of the reduction";
  } else if (!(red.r > std::fabs(red.c) * (1.0 + 1e-12))) {
    red.degenerate = true;
    red.note = "r <= |c|: the modulus kappa is not a real number in [0, 1)";
  }
  if (red.r > 0.0 && red.r + eff.c > 0.0 && red.r >= eff.c) {
    red.kappa = std::sqrt((red.r - eff.c) / (red.r + eff.c));
    red.m = red.kappa * red.kappa / (1.0 + red.kappa * red.kappa);
  }
  if (red.degenerate) return red;

  // z = A sin(theta) with theta increasing, so cos(theta) has the sign of zd
  const double A = std::sqrt(2.0 * (red.r - eff.c) / eff.lambda);
  red.theta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::clamp(red.z[i] / A, -1.0, 1.0);
    const double rate = std::sqrt(0.5 * eff.lambda * (red.r + eff.c) * (1.0 + red.kappa * red.kappa * s * s));
    double th = std::atan2(s, zd[i] / (A * rate));
    if (i > 0) {
      th += 2.0 * kPi * std::round((red.theta[i - 1] - th) / (2.0 * kPi));
    }
    red.theta[i] = th;
  }
  return red;
}

double elliptic_f(double psi, double m) {
  if (!(m < 1.0)) throw ValidationError("elliptic parameter m must be below 1");
  if (!std::isfinite(psi)) throw ValidationError("elliptic amplitude must be finite");
  if (psi == 0.0) return 0.0;
  auto f = [m](double t) {
    const double s = std::sin(t);
    return 1.0 / std::sqrt(1.0 - m * s * s);
  };
  // one quarter period per panel keeps the adaptive refinement shallow
  const int panels = std::max(1, static_cast<int>(std::ceil(std::fabs(psi) / (kPi / 2.0))));
  double sum = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double a = psi * i / panels, b = psi * (i + 1) / panels;
    sum += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-12);
  }
  return sum;
}

double elliptic_time_map(const OscillatorReduction& red, double theta) {
  if (red.degenerate || red.theta.empty()) {
    throw ValidationError("elliptic time map needs lambda != 0 and r > |c|" +
                          (red.note.empty() ? std::string() : ": " + red.note));
  }
  const auto eff = effective(red);
  const double theta0 = red.theta.front();
  const double scale = std::sqrt(eff.lambda * red.r);
  return std::fabs(elliptic_f(kPi / 2.0 - theta0, red.m) - elliptic_f(kPi / 2.0 - theta, red.m)) / scale;
}

}  // namespace nonholo::optimal
