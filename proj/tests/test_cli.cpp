#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "nonholo/cli/run.hpp"
#include "nonholo/error.hpp"
#include "nonholo/io/json.hpp"

using namespace nonholo;
using namespace nonholo::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("nonholo_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

RunConfig with_out(std::string toml, const fs::path& dir) {
  auto cfg = parse_config(toml);
  cfg.out_dir = dir.string();
  return cfg;
}

const char* kPunctured = R"toml(
[system]
variant = "general_r2"
field = ["x1/(x1^2 + x2^2)", "x2/(x1^2 + x2^2)"]
excluded = "origin"
)toml";

const char* kQuadratic = R"toml(
[system]
variant = "general_r2"
field = ["x2^2", "-x1^2"]
[task]
to = [0, 0, -2]
)toml";

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("every variant builds") {
    CHECK(parse_config("[system]\nvariant = \"classic\"").system.state_dim() == 3);
    CHECK(parse_config("[system]\nvariant = \"general_r3\"\nfield = [\"x2\", \"x3\", \"x1\"]").system.state_dim() == 4);
    CHECK(parse_config("[system]\nvariant = \"generalized_rm\"\nm = 3").system.base_dim() == 3);
    CHECK(parse_config("[system]\nvariant = \"drift_r3\"\nfield = [\"x2\", \"x3\", \"x1\"]\ndrift = \"x1\"")
              .system.base_dim() == 3);
    const auto cp = parse_config("[system]\nvariant = \"complex_plane\"\nconj_power = 2");
    CHECK(cp.conj_power == 2);
    CHECK(cp.system.state_dim() == 4);
    const auto pole = parse_config(
        "[system]\nvariant = \"complex_plane\"\nre = \"x1/(x1^2+x2^2)\"\nim = \"-x2/(x1^2+x2^2)\"\npoles = [[0, 0]]");
    CHECK_FALSE(pole.conj_power);
  }
  SUBCASE("task and output blocks") {
    const auto cfg = parse_config(R"toml(
[system]
variant = "classic"
[task]
from = [1, 2, 3]
to = [0, 0, 1]
T = 2.5
step = 1e-3
seed = 7
method = "two-phase"
[task.budget]
grid = 9
radii = [0.5]
[output]
dir = "somewhere"
format = "json"
)toml");
    CHECK(cfg.from->at(1) == 2.0);
    CHECK(cfg.T == 2.5);
    CHECK(cfg.seed == 7u);
    CHECK(cfg.method == "two-phase");
    CHECK(cfg.budget.grid == 9);
    CHECK(cfg.out_dir == "somewhere");
    CHECK(cfg.format == Format::Json);
  }
  SUBCASE("validation errors") {
    CHECK_THROWS_AS(parse_config("[system\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("[task]\nT = 1"), ValidationError);
    CHECK_THROWS_AS(parse_config("[system]\nvariant = \"klein\""), ValidationError);
    CHECK_THROWS_AS(parse_config("[system]\nvariant = \"general_r2\""), ValidationError);
    CHECK_THROWS_AS(parse_config("[system]\nvariant = \"general_r2\"\nfield = [\"x1\"]"), ValidationError);
    CHECK_THROWS_AS(parse_config("[system]\nvariant = \"general_r2\"\nfield = [\"x1+\", \"x2\"]"), ValidationError);
    CHECK_THROWS_AS(parse_config("[system]\nvariant = \"classic\"\nfield = [\"x1\", \"x2\"]"), ValidationError);
    CHECK_THROWS_AS(parse_config("[system]\nvariant = \"classic\"\n[task]\nT = 0"), ValidationError);
    CHECK_THROWS_AS(parse_config("[system]\nvariant = \"classic\"\n[task]\nstep = -1e-3"), ValidationError);
    CHECK_THROWS_AS(parse_config("[system]\nvariant = \"classic\"\n[task]\nspeed = 1"), ValidationError);
    CHECK_THROWS_AS(parse_config("[system]\nvariant = \"classic\"\n[output]\nformat = \"xml\""), ValidationError);
  }
}

TEST_CASE("input specs") {
  const auto u = parse_inputs(split_channels("sin:2,6.283185307179586,0; const:-1;poly:0,1"), 1.0);
  REQUIRE(u.channels() == 3);
  CHECK(u.value(0, 0.0) == doctest::Approx(2.0));
  CHECK(u.value(1, 0.3) == -1.0);
  CHECK(u.value(2, 0.25) == doctest::Approx(0.25));
  CHECK_THROWS_AS(parse_inputs({"tri:1"}, 1.0), ValidationError);
  CHECK_THROWS_AS(parse_inputs({"sin:1,2"}, 1.0), ValidationError);
  CHECK_THROWS_AS(parse_inputs({"const"}, 1.0), ValidationError);
  CHECK(parse_vector("1, -2.5,3e-1") == std::vector<double>{1.0, -2.5, 0.3});
  CHECK_THROWS_AS(parse_vector("1,,2"), ValidationError);
}

TEST_CASE("overrides are validated before running") {
  auto cfg = parse_config(kQuadratic);
  Overrides bad;
  bad.step = -1.0;
  CHECK_THROWS_AS(apply_overrides(cfg, bad), ValidationError);
  Overrides zero_tol;
  zero_tol.tol = 0.0;
  CHECK_THROWS_AS(apply_overrides(cfg, zero_tol), ValidationError);
  Overrides wrong_dim;
  wrong_dim.to = std::vector<double>{1.0, 2.0};
  CHECK_THROWS_AS(apply_overrides(cfg, wrong_dim), ValidationError);

  Overrides good;
  good.step = 5e-4;
  good.tol = 1e-9;
  good.seed = 3;
  good.inputs = "const:0;const:1";
  apply_overrides(cfg, good);
  CHECK(cfg.step == 5e-4);
  CHECK(cfg.tol == 1e-9);
  CHECK(cfg.seed == 3u);
  CHECK(cfg.inputs.size() == 2);
}

TEST_CASE("analyze on the winding field") {
  const auto dir = scratch("analyze");
  std::ostringstream out;
  run_task(Task::Analyze, with_out(kPunctured, dir), out);
  const auto report = io::Json::parse(slurp(dir / "report.json"));
  CHECK(report["verdict"] == "uncontrollable");
  bool caveat = false;
  for (const auto& c : report["caveats"]) caveat = caveat || c == "non-simply-connected domain";
  CHECK(caveat);
  CHECK(out.str().find("uncontrollable") != std::string::npos);
}

TEST_CASE("analyze replays the witness loop") {
  const auto dir = scratch("replay");
  std::ostringstream out;
  run_task(Task::Analyze, with_out("[system]\nvariant = \"classic\"", dir), out);
  const auto report = io::Json::parse(slurp(dir / "report.json"));
  CHECK(report["verdict"] == "controllable");
  bool found = false;
  for (const auto& e : report["evidence"]) {
    if (e["kind"] != "replay") continue;
    found = true;
    CHECK(e["data"]["mismatch"].get<double>() < 1e-8);
  }
  CHECK(found);
  CHECK(fs::exists(dir / "witness.csv"));
}

TEST_CASE("steer on the quadratic field") {
  const auto dir = scratch("steer");
  std::ostringstream out;
  run_task(Task::Steer, with_out(kQuadratic, dir), out);
  const auto v = io::Json::parse(slurp(dir / "verification.json"));
  CHECK(v["pass"] == true);
  CHECK(v["achieved"][2].get<double>() == doctest::Approx(-2.0).epsilon(1e-9));
  const auto plan = io::Json::parse(slurp(dir / "plan.json"));
  CHECK(plan["method"] == "loop-scaling");
  CHECK(fs::exists(dir / "trajectory.csv"));
}

TEST_CASE("steer picks a planner per system") {
  const auto dir = scratch("auto");
  auto method = [&](const std::string& toml) {
    std::ostringstream out;
    run_task(Task::Steer, with_out(toml, dir), out);
    return io::Json::parse(slurp(dir / "plan.json"))["method"].get<std::string>();
  };
  CHECK(method("[system]\nvariant = \"classic\"\n[task]\nto = [0, 0, 1]") == "sinusoid-classic");
  CHECK(method("[system]\nvariant = \"classic\"\n[task]\nto = [1, 1, 3]") == "two-phase");
  CHECK(method("[system]\nvariant = \"complex_plane\"\nconj_power = 2\n[task]\nto = [0, 0, 1, 2]") ==
        "residue-chain");
  CHECK(method("[system]\nvariant = \"classic\"\n[task]\nto = [0, 0, 1]\nmethod = \"loop-scaling\"") ==
        "loop-scaling");
}

TEST_CASE("steer failures map to exit codes") {
  const auto dir = scratch("fail");
  std::ostringstream out;
  const auto grad = with_out("[system]\nvariant = \"general_r2\"\nfield = [\"x1\", \"x2\"]\n[task]\nto = [0, 0, 1]", dir);
  try {
    run_task(Task::Steer, grad, out);
    FAIL("expected a task failure");
  } catch (const std::exception& e) {
    CHECK(exit_code(e) == 3);
  }
  const auto no_target = with_out("[system]\nvariant = \"classic\"", dir);
  try {
    run_task(Task::Steer, no_target, out);
    FAIL("expected a validation failure");
  } catch (const std::exception& e) {
    CHECK(exit_code(e) == 2);
  }
  const auto unknown = with_out("[system]\nvariant = \"classic\"\n[task]\nto = [0, 0, 1]\nmethod = \"magic\"", dir);
  CHECK_THROWS_AS(run_task(Task::Steer, unknown, out), ValidationError);
}

TEST_CASE("optimal on the classic system") {
  const auto dir = scratch("optimal");
  std::ostringstream out;
  run_task(Task::Optimal, with_out("[system]\nvariant = \"classic\"\n[task]\nto = [0, 0, 1]", dir), out);
  const auto s = io::Json::parse(slurp(dir / "solution.json"));
  CHECK(2.0 * s["lambda"].get<double>() == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-8));
  CHECK(s["cost"].get<double>() == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-8));
}

TEST_CASE("simulate with zero inputs gives constant rows") {
  const auto dir = scratch("simulate");
  std::ostringstream out;
  auto cfg = with_out("[system]\nvariant = \"general_r2\"\nfield = [\"x2^2\", \"-x1^2\"]\n"
                      "[task]\nfrom = [0.5, -1, 2]\ninputs = [\"const:0\", \"const:0\"]",
                      dir);
  run_task(Task::Simulate, cfg, out);
  std::ifstream csv(dir / "trajectory.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == "t,x1,x2,x3");
  int rows = 0;
  while (std::getline(csv, line)) {
    CHECK(line.substr(line.find(',')) == ",0.5,-1,2");
    ++rows;
  }
  CHECK(rows == 1001);
  const auto s = io::Json::parse(slurp(dir / "summary.json"));
  CHECK(s["mismatch"].get<double>() == 0.0);
}

TEST_CASE("simulate reproduces the quadratic example gain") {
  const auto dir = scratch("simulate32");
  std::ostringstream out;
  auto cfg = with_out("[system]\nvariant = \"general_r2\"\nfield = [\"x2^2\", \"-x1^2\"]\n"
                      "[task]\nstep = 1e-4\ninputs = [\"sin:2,6.283185307179586,0\", "
                      "\"sin:6.283185307179586,6.283185307179586,-1.5707963267948966\"]",
                      dir);
  run_task(Task::Simulate, cfg, out);
  const auto s = io::Json::parse(slurp(dir / "summary.json"));
  CHECK(s["final_state"][2].get<double>() == doctest::Approx(-2.0).epsilon(1e-7));
  CHECK(s["mismatch"].get<double>() < 1e-6);
}

TEST_CASE("output directory and formats") {
  const auto dir = scratch("formats");
  std::ostringstream out;
  auto cfg = with_out(kQuadratic, dir);
  cfg.format = Format::Json;
  run_task(Task::Steer, cfg, out);
  CHECK(fs::exists(dir / "plan.json"));
  CHECK_FALSE(fs::exists(dir / "trajectory.csv"));
  fs::remove_all(dir);
  cfg.format = Format::Csv;
  run_task(Task::Steer, cfg, out);
  CHECK_FALSE(fs::exists(dir / "plan.json"));
  CHECK(fs::exists(dir / "trajectory.csv"));
}

TEST_CASE("property: identical config and seed give byte-identical reports") {
  const std::string toml = "[system]\nvariant = \"general_r2\"\nfield = [\"x2^2\", \"-x1^2\"]\n[task]\nseed = 11\n";
  const auto a = scratch("det_a"), b = scratch("det_b");
  std::ostringstream out;
  run_task(Task::Analyze, with_out(toml, a), out);
  run_task(Task::Analyze, with_out(toml, b), out);
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  run_task(Task::Steer, with_out(kQuadratic, a), out);
  run_task(Task::Steer, with_out(kQuadratic, b), out);
  CHECK(slurp(a / "plan.json") == slurp(b / "plan.json"));
  CHECK(slurp(a / "verification.json") == slurp(b / "verification.json"));
}

TEST_CASE("property: step and tol overrides reach every subcommand") {
  const auto dir = scratch("overrides");
  std::ostringstream out;
  Overrides o;
  o.step = 2e-3;
  o.tol = 1e-7;

  auto sim = with_out("[system]\nvariant = \"classic\"\n[task]\ninputs = [\"const:1\", \"const:0\"]", dir);
  apply_overrides(sim, o);
  run_task(Task::Simulate, sim, out);
  CHECK(io::Json::parse(slurp(dir / "summary.json"))["tolerance"].get<double>() == 1e-7);
  std::ifstream csv(dir / "trajectory.csv");
  int lines = 0;
  for (std::string line; std::getline(csv, line);) ++lines;
  CHECK(lines == 502);

  auto an = with_out("[system]\nvariant = \"classic\"", dir);
  apply_overrides(an, o);
  run_task(Task::Analyze, an, out);
  const auto report = io::Json::parse(slurp(dir / "report.json"));
  for (const auto& e : report["evidence"]) {
    if (e["kind"] == "replay") CHECK(e["data"]["step"].get<double>() == 2e-3);
  }

  auto st = with_out(kQuadratic, dir);
  apply_overrides(st, o);
  run_task(Task::Steer, st, out);
  std::ifstream traj(dir / "trajectory.csv");
  lines = 0;
  for (std::string line; std::getline(traj, line);) ++lines;
  CHECK(lines == 502);

  auto op = with_out("[system]\nvariant = \"classic\"\n[task]\nto = [0, 0, 1]", dir);
  apply_overrides(op, o);
  run_task(Task::Optimal, op, out);
  CHECK(io::Json::parse(slurp(dir / "solution.json"))["residual"].get<double>() < 1e-7);
}
