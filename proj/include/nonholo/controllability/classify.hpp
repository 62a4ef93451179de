#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nonholo/controllability/probes.hpp"
#include "nonholo/io/json.hpp"
#include "nonholo/systems/system.hpp"

namespace nonholo::controllability {

enum class Verdict { Controllable, Uncontrollable, Inconclusive };

std::string_view verdict_name(Verdict v);

struct ProbeBudget {
  double box_half_width = 2.0;
  int grid = 33;
  std::vector<double> radii{0.25, 0.5, 1.0};
  std::size_t max_loops = 300;
  // Relative to the field's own scale (largest Jacobian entry on the grid for
  // curls, largest absolute circulation integrand for loops), so verdicts do
  // not change when the field is multiplied by a constant.
  double tolerance = 1e-8;
  std::uint64_t seed = 0;  // jitter of loop centers
};

struct Witness {
  std::string fiber;             // state label of the fiber coordinate(s)
  std::vector<Loop> loops;       // one loop, or two for the complex plane
  std::vector<std::vector<double>> values;  // per loop, one value per fiber
  std::optional<field::Point> point;        // curl witness when no loop is
  double curl = 0.0;
};

struct Evidence {
  std::string kind;   // "symbolic", "curl_scan", "loop", "stokes", "holomorphy", "span"
  std::string fiber;
  io::Json data;
};

struct ControllabilityReport {
  Verdict verdict = Verdict::Inconclusive;
  std::optional<Witness> witness;
  std::vector<std::string> caveats;
  std::vector<Evidence> evidence;

  bool has_caveat(std::string_view text) const;
};

// Throws ValidationError for an empty model.
ControllabilityReport classify(const systems::SystemModel& sys, const ProbeBudget& budget = {});

// {verdict, witness, caveats[], evidence[]}
io::Json to_json(const ControllabilityReport& report);
io::Json to_json(const Loop& loop);

// Caveat strings, exposed so callers can test for them.
inline constexpr std::string_view kCaveatNonSimplyConnected = "non-simply-connected domain";
inline constexpr std::string_view kCaveatExistential =
    "curl criterion read existentially: a nonzero curl or circulation at one probe suffices";

}  // namespace nonholo::controllability
