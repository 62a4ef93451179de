#pragma once

#include <span>

#include "nonholo/systems/input.hpp"
#include "nonholo/systems/system.hpp"

namespace nonholo::systems::detail {

// Shared argument validation for simulate and fiber_displacement.
void check_run(const SystemModel& sys, const InputSignal& u, std::span<const double> x0, double T);

}  // namespace nonholo::systems::detail
