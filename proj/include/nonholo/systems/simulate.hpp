#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "nonholo/systems/input.hpp"
#include "nonholo/systems/system.hpp"

namespace nonholo::systems {

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  InputSignal inputs;
  double step = 0.0;

  const std::vector<double>& final_state() const { return states.back(); }
};

// round(T / step), after checking that step divides T to 1e-12 relative.
// Throws ValidationError otherwise.
std::size_t checked_step_count(double T, double step);

// Classical RK4 with fixed step. Within a step every stage uses the input
// piece that contains the step midpoint, so steps straddling a breakpoint
// never mix two pieces.
Trajectory simulate(const SystemModel& sys, const InputSignal& u, std::span<const double> x0, double T, double step);

// Fiber increments x_fiber(T) - x_fiber(0), one per fiber coordinate, from
// composite 5-point Gauss-Legendre quadrature along the analytic base path.
// Panels double until successive sums agree to 1e-13 relative.
std::vector<double> fiber_displacement(const SystemModel& sys, const InputSignal& u, std::span<const double> x0,
                                       double T);

// Base coordinates at time t: x0 + integral of u.
std::vector<double> base_position(const SystemModel& sys, const InputSignal& u, std::span<const double> x0, double t);

// Header t,x1,...,xn then one row per sample at 17 significant digits.
void write_csv(std::ostream& os, const Trajectory& traj);

}  // namespace nonholo::systems
