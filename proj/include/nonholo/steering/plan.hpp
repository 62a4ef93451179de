#pragma once

// Input plans that steer the integrator family between states. Every plan is
// a sequence of phases, each with its own local clock starting at 0.

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nonholo/io/json.hpp"
#include "nonholo/systems/input.hpp"
#include "nonholo/systems/simulate.hpp"
#include "nonholo/systems/system.hpp"

namespace nonholo::steering {

enum class Method { SinusoidClassic, TwoPhase, LoopScaling, ResidueChain };

std::string_view method_name(Method m);

struct PlanPhase {
  double duration = 0.0;
  systems::InputSignal inputs;
  std::string rationale;
};

struct SteeringPlan {
  Method method = Method::SinusoidClassic;
  std::vector<PlanPhase> phases;
  std::vector<double> predicted_endpoint;

  double total_duration() const;
  // All phases laid end to end on [0, total_duration()].
  systems::InputSignal concatenated() const;
};

struct PlanOptions {
  double tolerance = 1e-8;  // |fiber(T) - target| required of the amplitude root-find
  double amplitude_cap = 1e3;
  // Refuse systems that classify as uncontrollable before searching.
  bool check_controllability = true;
};

// Classic system, origin -> (0, 0, a). One full rotation of u(0) at rate
// c = 2 pi / T (reversed for a < 0); a = 0 gives a zero-input plan.
SteeringPlan plan_sinusoid_classic(double a, double T);

// Classic or GeneralR2, origin -> (0, 0, a) with u1 = c1 cos(2 pi t / T),
// u2 = c2 sin(2 pi t / T), (c1, c2) = s (+-1, +-1) and s found by bracketing,
// bisection and secant polish. Throws TaskError when no amplitude up to the
// cap brackets the target.
SteeringPlan plan_loop_scaling(const systems::SystemModel& sys, double a, double T, const PlanOptions& opts = {});

// Classic, GeneralR2 or GeneralR3. Constant inputs carry the base from -> to
// in T/2, then a closed loop anchored at the target base point closes the
// fiber gap in the remaining T/2.
SteeringPlan plan_two_phase(const systems::SystemModel& sys, std::span<const double> from, std::span<const double> to,
                            double T, const PlanOptions& opts = {});

// Complex-plane system for zbar^n, origin -> (0, 0, a, b), n >= 2. Phase 1 is
// a circle around center r1 > 0 on the real axis (unit time), phase 2 a
// circle around r2 e^{i pi/n} (time 2n); both pass through the origin.
SteeringPlan plan_residue_chain(int n, std::span<const double> target);

// Fiber gains of unit-multiplier loops in the residue chain:
// phase 1 -> (0, 2n pi), phase 2 -> 2n pi (sin(pi/n), -cos(pi/n)).
std::array<double, 2> residue_direction(int n, int phase);

struct Verification {
  bool pass = false;
  std::vector<double> achieved;
  double error = 0.0;
  double tolerance = 0.0;
  systems::Trajectory trajectory;  // all phases, global time
};

// Simulates the phases one after another with RK4 at (at most) `step`.
// Passes when the endpoint error norm is below 1e-4 for residue-chain plans
// and 1e-6 otherwise.
Verification verify_plan(const systems::SystemModel& sys, const SteeringPlan& plan, std::span<const double> from,
                         double step = 1e-4);

// {method, phases[{duration, rationale, channels[{kind, params}]}], predicted_endpoint[]}
io::Json to_json(const SteeringPlan& plan);
io::Json to_json(const systems::InputPiece& piece);

}  // namespace nonholo::steering
