#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "nonholo/cli/run.hpp"
#include "nonholo/error.hpp"

namespace {

using nonholo::cli::Task;

struct Flags {
  std::string config;
  std::optional<std::string> to, T, step, tol, seed, out, format, inputs;
};

double positive_number(const std::string& text, const char* flag) {
  const auto v = nonholo::cli::parse_vector(text);
  if (v.size() != 1) throw nonholo::ValidationError(std::string(flag) + " takes a single number");
  if (!(v[0] > 0.0)) throw nonholo::ValidationError(std::string(flag) + " must be positive, got " + text);
  return v[0];
}

nonholo::cli::Overrides overrides_of(const Flags& f) {
  nonholo::cli::Overrides o;
  if (f.to) o.to = nonholo::cli::parse_vector(*f.to);
  if (f.T) o.T = positive_number(*f.T, "--T");
  if (f.step) o.step = positive_number(*f.step, "--step");
  if (f.tol) o.tol = positive_number(*f.tol, "--tol");
  if (f.seed) {
    if (f.seed->empty() || f.seed->find_first_not_of("0123456789") != std::string::npos) {
      throw nonholo::ValidationError("--seed must be a non-negative integer, got '" + *f.seed + "'");
    }
    try {
      o.seed = std::stoull(*f.seed);
    } catch (const std::out_of_range&) {
      throw nonholo::ValidationError("--seed is out of range");
    }
  }
  o.out = f.out;
  if (f.format) o.format = nonholo::cli::parse_format(*f.format);
  o.inputs = f.inputs;
  return o;
}

CLI::App* add_task(CLI::App& app, const char* name, const char* about, Flags& f) {
  auto* sub = app.add_subcommand(name, about);
  sub->add_option("config", f.config, "TOML config file")->required();
  sub->add_option("--step", f.step, "integrator step");
  sub->add_option("--tol", f.tol, "task tolerance");
  sub->add_option("--seed", f.seed, "random seed (default 0)");
  sub->add_option("--out", f.out, "output directory (default $NONHOLO_OUT, then .)");
  sub->add_option("--format", f.format, "csv, json or both");
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analysis, steering and optimal control of nonholonomic integrators"};
  app.require_subcommand(1);
  Flags f;
  auto* analyze = add_task(app, "analyze", "classify controllability and write report.json", f);
  auto* steer = add_task(app, "steer", "plan and verify inputs to a target state", f);
  steer->add_option("--to", f.to, "target state x1,x2,...");
  steer->add_option("--T", f.T, "horizon");
  auto* optimal = add_task(app, "optimal", "shoot for a minimum-cost extremal", f);
  optimal->add_option("--to", f.to, "target state x1,x2,...");
  optimal->add_option("--T", f.T, "horizon");
  auto* simulate = add_task(app, "simulate", "integrate the system under given inputs", f);
  simulate->add_option("--inputs", f.inputs, "channels separated by ';', e.g. 'sin:2,6.283185,0;const:1'");
  simulate->add_option("--T", f.T, "horizon");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  Task task = Task::Analyze;
  if (steer->parsed()) task = Task::Steer;
  if (optimal->parsed()) task = Task::Optimal;
  if (simulate->parsed()) task = Task::Simulate;
  (void)analyze;

  try {
    auto cfg = nonholo::cli::load_config(f.config);
    nonholo::cli::apply_overrides(cfg, overrides_of(f));
    nonholo::cli::run_task(task, cfg, std::cout);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return nonholo::cli::exit_code(e);
  }
}
