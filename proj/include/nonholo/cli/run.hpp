#pragma once

// Config loading and task execution behind the `nonholo` command line tool.
//
// A config is TOML with three tables:
//
//   [system]  variant = "classic" | "general_r2" | "general_r3" | "generalized_rm"
//                       | "pairwise_rm" | "drift_r3" | "complex_plane"
//             field = ["x2^2", "-x1^2"]         general_r2, general_r3, drift_r3
//             drift = "x1"                       drift_r3
//             m = 3, fields = [["-x2", "x1"], ...]   generalized_rm, pairwise_rm
//             conj_power = 2  or  re = "...", im = "...", poles = [[0, 0]]   complex_plane
//             excluded = "origin" | [[x1, x2(, x3)], ...], note = "..."
//   [task]    from, to, T, step, tol, seed, method, cost, g, inputs
//   [task.budget]  box_half_width, grid, radii, max_loops
//   [output]  dir, format = "csv" | "json" | "both"
//
// Input specs are one entry per channel: "const:v", "sin:a,omega,phase"
// (a cos(omega t + phase)) or "poly:c0,c1,...". On the command line the
// channels are separated by ';'.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nonholo/controllability/classify.hpp"
#include "nonholo/optimal/extremal.hpp"
#include "nonholo/systems/input.hpp"
#include "nonholo/systems/system.hpp"

namespace nonholo::cli {

enum class Task { Analyze, Steer, Optimal, Simulate };
enum class Format { Csv, Json, Both };

std::string_view task_name(Task t);

struct RunConfig {
  systems::SystemModel system;
  std::optional<int> conj_power;  // complex plane given as zbar^n

  std::optional<std::vector<double>> from;
  std::optional<std::vector<double>> to;
  std::optional<double> T;
  std::optional<double> step;
  std::optional<double> tol;
  std::uint64_t seed = 0;
  std::string method = "auto";
  optimal::CostKind cost = optimal::CostKind::Energy;
  std::optional<std::string> state_cost;
  std::vector<std::string> inputs;
  controllability::ProbeBudget budget;

  std::string out_dir;  // empty: NONHOLO_OUT, then "."
  Format format = Format::Both;
};

// Throws ValidationError (with the offending key) on malformed TOML, unknown
// keys, unparsable expressions or missing variant fields.
RunConfig parse_config(std::string_view toml_text, std::string_view source = "config");
RunConfig load_config(const std::string& path);

systems::InputSignal parse_inputs(const std::vector<std::string>& channels, double T);
std::vector<std::string> split_channels(std::string_view text);  // on ';'
std::vector<double> parse_vector(std::string_view text);           // "1,2,3"
Format parse_format(std::string_view text);

struct Overrides {
  std::optional<std::vector<double>> to;
  std::optional<double> T;
  std::optional<double> step;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<Format> format;
  std::optional<std::string> inputs;
};

// Applies overrides and rejects invalid step/tol/T values before any work.
void apply_overrides(RunConfig& cfg, const Overrides& o);

// Runs one task and writes its files; a one-line summary goes to `out`.
// Exceptions propagate; main maps them to exit codes via exit_code().
void run_task(Task task, const RunConfig& cfg, std::ostream& out);

// 0 success, 2 validation error, 3 task failure.
int exit_code(const std::exception& e);

}  // namespace nonholo::cli
