#include "nonholo/systems/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "detail.hpp"
#include "nonholo/error.hpp"

namespace nonholo::systems {
namespace detail {

void check_run(const SystemModel& sys, const InputSignal& u, std::span<const double> x0, double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("duration must be positive");
  if (static_cast<int>(x0.size()) != sys.state_dim()) {
    throw ValidationError("initial state has " + std::to_string(x0.size()) + " entries, system needs " +
                          std::to_string(sys.state_dim()));
  }
  for (double v : x0) {
    if (!std::isfinite(v)) throw ValidationError("initial state must be finite");
  }
  if (u.channels() != sys.base_dim()) {
    throw ValidationError("input has " + std::to_string(u.channels()) + " channels, system needs " +
                          std::to_string(sys.base_dim()));
  }
  if (std::fabs(u.duration() - T) > 1e-12 * std::max(1.0, T)) {
    throw ValidationError("input is defined on [0, " + std::to_string(u.duration()) + "], not [0, T]");
  }
}

}  // namespace detail

std::size_t checked_step_count(double T, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw ValidationError("step must be positive");
  const double ratio = T / step;
  const double n = std::round(ratio);
  if (n < 1.0 || std::fabs(n * step - T) > 1e-12 * std::max(1.0, T)) {
    throw ValidationError("step " + std::to_string(step) + " does not divide T = " + std::to_string(T));
  }
  return static_cast<std::size_t>(n);
}

Trajectory simulate(const SystemModel& sys, const InputSignal& u, std::span<const double> x0, double T, double step) {
  detail::check_run(sys, u, x0, T);
  const std::size_t steps = checked_step_count(T, step);
  const double h = T / static_cast<double>(steps);
  const std::size_t n = static_cast<std::size_t>(sys.state_dim());
  const int channels = u.channels();

  Trajectory traj;
  traj.inputs = u;
  traj.step = h;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.times.push_back(0.0);
  traj.states.emplace_back(x0.begin(), x0.end());

  std::vector<double> x(x0.begin(), x0.end()), tmp(n), k1(n), k2(n), k3(n), k4(n), uv(static_cast<std::size_t>(channels));
  std::vector<std::size_t> piece(static_cast<std::size_t>(channels));
  auto inputs_at = [&](double t) {
    for (int c = 0; c < channels; ++c) uv[static_cast<std::size_t>(c)] = u.value_in(c, piece[c], t);
  };
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = T * static_cast<double>(i) / static_cast<double>(steps);
    for (int c = 0; c < channels; ++c) piece[static_cast<std::size_t>(c)] = u.locate(c, t + 0.5 * h);

    inputs_at(t);
    sys.rhs(x, uv, k1);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = x[j] + 0.5 * h * k1[j];
    inputs_at(t + 0.5 * h);
    sys.rhs(tmp, uv, k2);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = x[j] + 0.5 * h * k2[j];
    sys.rhs(tmp, uv, k3);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = x[j] + h * k3[j];
    inputs_at(t + h);
    sys.rhs(tmp, uv, k4);
    for (std::size_t j = 0; j < n; ++j) x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);

    traj.times.push_back(i + 1 == steps ? T : T * static_cast<double>(i + 1) / static_cast<double>(steps));
    traj.states.push_back(x);
  }
  return traj;
}

std::vector<double> base_position(const SystemModel& sys, const InputSignal& u, std::span<const double> x0, double t) {
  std::vector<double> out(static_cast<std::size_t>(sys.base_dim()));
  for (int b = 0; b < sys.base_dim(); ++b) out[static_cast<std::size_t>(b)] = x0[b] + u.integral(b, t);
  return out;
}

void write_csv(std::ostream& os, const Trajectory& traj) {
  const std::size_t n = traj.states.empty() ? 0 : traj.states.front().size();
  os << "t";
  for (std::size_t i = 0; i < n; ++i) os << ",x" << (i + 1);
  os << '\n';
  char buf[40];
  for (std::size_t r = 0; r < traj.states.size(); ++r) {
    std::snprintf(buf, sizeof buf, "%.17g", traj.times[r]);
    os << buf;
    for (double v : traj.states[r]) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << ',' << buf;
    }
    os << '\n';
  }
}

}  // namespace nonholo::systems
