#pragma once

// Minimum-energy transfers for the single-fiber systems. Extremals are the
// paths of a charged particle: the base velocity turns under the magnetic
// field B = curl f scaled by a constant multiplier lambda, plus an electric
// term when the system has drift or the cost penalizes the state.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nonholo/field/expr.hpp"
#include "nonholo/io/json.hpp"
#include "nonholo/systems/simulate.hpp"
#include "nonholo/systems/system.hpp"

namespace nonholo::optimal {

enum class CostKind {
  Energy,           // integral of |u|^2
  EnergyPlusState,  // integral of |u|^2 + g(x)
};

std::string_view cost_name(CostKind c);

struct ExtremalProblem {
  systems::SystemModel system;  // Classic, GeneralR2, GeneralR3 or DriftR3
  std::vector<double> from;
  std::vector<double> to;
  double T = 1.0;
  CostKind cost = CostKind::Energy;
  // g for EnergyPlusState over the base coordinates; left at the constant 0
  // it means the sum of squares of the base coordinates.
  field::ScalarExpr state_cost;

  // Throws ValidationError for unsupported variants, mismatched boundary
  // dimensions, a non-positive horizon, or a state cost combined with drift.
  void validate() const;
  field::ScalarExpr state_cost_or_default() const;
};

// Acceleration of the base coordinates at base point x with velocity v:
//   energy, no drift:   xdd = lambda B x xd
//   energy with drift:  xdd = lambda B x xd - lambda grad g
//   state cost:        2xdd = grad g + lambda B x xd
// In the plane B x v is b (-v2, v1) with b the scalar curl.
std::vector<double> extremal_rhs(const ExtremalProblem& problem, std::span<const double> x, std::span<const double> v,
                                 double lambda);

struct Extremal {
  // States are the full system state (base then fiber). The inputs are the
  // base velocities as piecewise cubic Hermite interpolants, one piece per
  // step, so `simulate` can replay them.
  systems::Trajectory trajectory;
  std::vector<std::vector<double>> velocities;
};

// RK4 on (x, fiber, v) from problem.from with xd(0) = u0. `step` must
// divide T.
Extremal integrate_extremal(const ExtremalProblem& problem, double lambda, std::span<const double> u0, double step);

struct ShootOptions {
  double step = 1e-3;
  double tolerance = 1e-8;  // endpoint residual for a converged shot
  int max_iterations = 60;
  int branches = 5;  // branch seeds k = 0, +-1, ..., +-branches
};

struct OptimalSolution {
  double lambda = 0.0;
  std::vector<double> u0;
  Extremal path;
  double cost = 0.0;
  double residual = 0.0;
  int branch = 0;
  bool converged = false;
};

// Multiplier seed of branch k: 2 pi k / (T |B|), with |B| the largest curl
// magnitude over a grid on the box spanned by the boundary points (padded by
// 1), i.e. k full turns of the velocity over the horizon.
double branch_seed(const ExtremalProblem& problem, int k);

// Levenberg-Marquardt on (lambda, u0) from the branch-k seed. Never throws
// for lack of convergence; check `converged`.
OptimalSolution shoot_branch(const ExtremalProblem& problem, int k, const ShootOptions& opts = {});

// Scans every branch and returns the cheapest converged shot. A transfer to
// the start state without drift returns the zero solution directly. Throws
// TaskError, quoting the best residual, when no branch converges.
OptimalSolution shoot(const ExtremalProblem& problem, const ShootOptions& opts = {});

// Composite Simpson over the (uniform) sample grid of |u|^2, plus g(x) for
// the state-cost tag. Inputs are read from trajectory.inputs.
double energy_cost(const systems::Trajectory& trajectory, const ExtremalProblem& problem);

// {lambda, u0[], cost, residual, branch}
io::Json to_json(const OptimalSolution& solution);

}  // namespace nonholo::optimal
