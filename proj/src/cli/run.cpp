#include "nonholo/cli/run.hpp"

#include <toml.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "nonholo/error.hpp"
#include "nonholo/optimal/extremal.hpp"
#include "nonholo/steering/plan.hpp"
#include "nonholo/systems/simulate.hpp"

namespace nonholo::cli {
namespace {

using systems::SystemModel;
using systems::Variant;

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void check_keys(const toml::table& t, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, node] : t) {
    if (!allowed.contains(std::string(key.str()))) {
      throw ValidationError("unknown key '" + std::string(key.str()) + "' in [" + where + "]");
    }
  }
}

std::optional<double> get_number(const toml::table& t, const char* key, const std::string& where) {
  const toml::node* n = t.get(key);
  if (!n) return std::nullopt;
  if (auto v = n->value<double>()) return *v;
  throw ValidationError("[" + where + "] " + key + " must be a number");
}

std::optional<std::string> get_string(const toml::table& t, const char* key, const std::string& where) {
  const toml::node* n = t.get(key);
  if (!n) return std::nullopt;
  if (auto v = n->value<std::string>()) return *v;
  throw ValidationError("[" + where + "] " + key + " must be a string");
}

std::optional<std::int64_t> get_int(const toml::table& t, const char* key, const std::string& where) {
  const toml::node* n = t.get(key);
  if (!n) return std::nullopt;
  if (n->is_integer()) return n->value<std::int64_t>();
  throw ValidationError("[" + where + "] " + key + " must be an integer");
}

std::vector<double> numbers_of(const toml::node& n, const std::string& what) {
  const auto* arr = n.as_array();
  if (!arr) throw ValidationError(what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& item : *arr) {
    auto v = item.value<double>();
    if (!v) throw ValidationError(what + " must be an array of numbers");
    out.push_back(*v);
  }
  return out;
}

std::vector<std::string> strings_of(const toml::node& n, const std::string& what) {
  const auto* arr = n.as_array();
  if (!arr) throw ValidationError(what + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& item : *arr) {
    auto v = item.value<std::string>();
    if (!v) throw ValidationError(what + " must be an array of strings");
    out.push_back(*v);
  }
  return out;
}

field::ExcludedSet parse_excluded(const toml::table& sys) {
  field::ExcludedSet ex;
  if (const toml::node* n = sys.get("excluded")) {
    if (auto s = n->value<std::string>()) {
      if (*s != "origin") throw ValidationError("[system] excluded must be \"origin\" or a list of points");
      ex = field::ExcludedSet::origin();
    } else if (const auto* arr = n->as_array()) {
      for (const auto& item : *arr) {
        const auto pt = numbers_of(item, "[system] excluded point");
        if (pt.size() < 1 || pt.size() > 3) throw ValidationError("[system] excluded points have 1 to 3 coordinates");
        field::ExcludedPoint p;
        for (std::size_t i = 0; i < pt.size(); ++i) p.coords[i] = pt[i];
        ex.points.push_back(p);
      }
    } else {
      throw ValidationError("[system] excluded must be \"origin\" or a list of points");
    }
  }
  if (auto note = get_string(sys, "note", "system")) ex.note = *note;
  return ex;
}

field::ScalarExpr parse_expr_at(const std::string& text, const std::string& where) {
  try {
    return field::parse_expr(text);
  } catch (const ValidationError& e) {
    throw ValidationError(where + " '" + text + "': " + e.what());
  }
}

field::VectorField parse_field(const std::vector<std::string>& comps, const field::ExcludedSet& ex,
                               const std::string& where) {
  std::vector<field::ScalarExpr> exprs;
  for (const auto& c : comps) exprs.push_back(parse_expr_at(c, where));
  return field::VectorField(std::move(exprs), ex);
}

field::VectorField field_of(const toml::table& sys, int dim, const field::ExcludedSet& ex) {
  const toml::node* n = sys.get("field");
  if (!n) throw ValidationError("[system] field is required for this variant");
  const auto comps = strings_of(*n, "[system] field");
  if (static_cast<int>(comps.size()) != dim) {
    throw ValidationError("[system] field needs " + std::to_string(dim) + " components");
  }
  return parse_field(comps, ex, "[system] field");
}

void build_system(const toml::table& sys, RunConfig& cfg) {
  const auto variant = get_string(sys, "variant", "system");
  if (!variant) throw ValidationError("[system] variant is required");
  const auto ex = parse_excluded(sys);
  const std::string& v = *variant;
  std::set<std::string> allowed{"variant", "excluded", "note"};
  if (v == "classic") {
    cfg.system = SystemModel::classic();
  } else if (v == "general_r2") {
    allowed.insert("field");
    cfg.system = SystemModel::general_r2(field_of(sys, 2, ex));
  } else if (v == "general_r3") {
    allowed.insert("field");
    cfg.system = SystemModel::general_r3(field_of(sys, 3, ex));
  } else if (v == "drift_r3") {
    allowed.insert({"field", "drift"});
    const auto g = get_string(sys, "drift", "system");
    if (!g) throw ValidationError("[system] drift is required for drift_r3");
    cfg.system = SystemModel::drift_r3(parse_expr_at(*g, "[system] drift"), field_of(sys, 3, ex));
  } else if (v == "generalized_rm" || v == "pairwise_rm") {
    allowed.insert("m");
    const auto m = get_int(sys, "m", "system");
    if (!m) throw ValidationError("[system] m is required for " + v);
    if (*m < 2 || *m > 64) throw ValidationError("[system] m must be between 2 and 64");
    if (v == "generalized_rm") {
      cfg.system = SystemModel::generalized_rm(static_cast<int>(*m));
    } else {
      allowed.insert("fields");
      const toml::node* n = sys.get("fields");
      const auto* arr = n ? n->as_array() : nullptr;
      if (!arr) throw ValidationError("[system] fields (one [f1, f2] pair per coordinate pair) is required");
      std::vector<field::VectorField> fields;
      for (const auto& item : *arr) fields.push_back(parse_field(strings_of(item, "[system] fields entry"), ex, "[system] fields"));
      cfg.system = SystemModel::pairwise_rm(static_cast<int>(*m), std::move(fields));
    }
  } else if (v == "complex_plane") {
    allowed.insert({"conj_power", "re", "im", "poles"});
    if (auto n = get_int(sys, "conj_power", "system")) {
      if (*n < 0 || *n > 64) throw ValidationError("[system] conj_power must be between 0 and 64");
      if (sys.get("re") || sys.get("im")) throw ValidationError("[system] give either conj_power or re/im, not both");
      cfg.conj_power = static_cast<int>(*n);
      cfg.system = SystemModel::complex_plane(field::ComplexFunction::conj_power(static_cast<int>(*n)));
    } else {
      const auto re = get_string(sys, "re", "system");
      const auto im = get_string(sys, "im", "system");
      if (!re || !im) throw ValidationError("[system] complex_plane needs conj_power or both re and im");
      field::ExcludedSet poles = ex;
      if (const toml::node* p = sys.get("poles")) {
        const auto* arr = p->as_array();
        if (!arr) throw ValidationError("[system] poles must be a list of [x1, x2] points");
        for (const auto& item : *arr) {
          const auto pt = numbers_of(item, "[system] pole");
          if (pt.size() != 2) throw ValidationError("[system] poles are [x1, x2] points");
          poles.points.push_back(field::ExcludedPoint{{pt[0], pt[1], std::nullopt}});
        }
        if (poles.note.empty()) poles.note = "declared poles";
      }
      parse_expr_at(*re, "[system] re");
      parse_expr_at(*im, "[system] im");
      cfg.system = SystemModel::complex_plane(field::ComplexFunction::parse(*re, *im, std::move(poles)));
    }
  } else {
    throw ValidationError("[system] unknown variant '" + v + "'");
  }
  check_keys(sys, allowed, "system");
}

void check_positive(std::optional<double> v, const char* what) {
  if (v && (!(*v > 0.0) || !std::isfinite(*v))) {
    throw ValidationError(std::string(what) + " must be positive and finite");
  }
}

std::vector<double> zeros(const SystemModel& s) { return std::vector<double>(static_cast<std::size_t>(s.state_dim()), 0.0); }

std::vector<double> checked_state(const std::optional<std::vector<double>>& v, const SystemModel& s, const char* what) {
  if (!v) return zeros(s);
  if (static_cast<int>(v->size()) != s.state_dim()) {
    throw ValidationError(std::string(what) + " has " + std::to_string(v->size()) + " entries, the " +
                          std::string(systems::variant_name(s.variant())) + " state has " +
                          std::to_string(s.state_dim()));
  }
  for (double x : *v) {
    if (!std::isfinite(x)) throw ValidationError(std::string(what) + " must be finite");
  }
  return *v;
}

std::filesystem::path output_dir(const RunConfig& cfg) {
  std::string dir = cfg.out_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("NONHOLO_OUT"); env && *env) dir = env;
  }
  if (dir.empty()) dir = ".";
  std::filesystem::create_directories(dir);
  return dir;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << content;
  if (!f) throw Error("cannot write " + path.string());
}

std::string csv_of(const systems::Trajectory& traj) {
  std::ostringstream os;
  systems::write_csv(os, traj);
  return os.str();
}

bool wants_json(Format f) { return f != Format::Csv; }
bool wants_csv(Format f) { return f != Format::Json; }

// Drives the system around each witness loop with the simulator and compares
// the fiber gains with the loop integrals.
std::optional<std::pair<controllability::Evidence, systems::Trajectory>> replay_witness(
    const SystemModel& sys, const controllability::ControllabilityReport& rep, double step) {
  if (!rep.witness || rep.witness->loops.empty() || sys.variant() == Variant::DriftR3) return std::nullopt;
  const auto& w = *rep.witness;
  // fiber labels in the witness, mapped to state indices and forms
  std::vector<std::string> labels;
  std::stringstream ss(w.fiber);
  for (std::string part; std::getline(ss, part, ',');) labels.push_back(part);
  const auto state_labels = sys.state_labels();
  std::vector<std::size_t> index;
  std::vector<const systems::FiberForm*> forms;
  for (const auto& l : labels) {
    for (std::size_t f = 0; f < sys.fibers().size(); ++f) {
      if (sys.fibers()[f].label == l) {
        index.push_back(static_cast<std::size_t>(sys.base_dim()) + f);
        forms.push_back(&sys.fibers()[f]);
      }
    }
  }
  if (forms.empty()) return std::nullopt;
  const auto& base = forms.front()->base;

  io::Json simulated = io::Json::array(), integral = io::Json::array();
  double mismatch = 0.0;
  systems::Trajectory last;
  for (std::size_t l = 0; l < w.loops.size(); ++l) {
    const auto& loop = w.loops[l];
    const auto p0 = loop.position(0.0);
    std::vector<double> x0 = zeros(sys);
    const int dim = loop.dim();
    for (int k = 0; k < dim; ++k) x0[static_cast<std::size_t>(base[static_cast<std::size_t>(k)])] = p0[static_cast<std::size_t>(k)];
    std::vector<double> amp(static_cast<std::size_t>(sys.base_dim()), 0.0), phase(amp.size(), 0.0);
    const double speed = 2.0 * kPi * loop.radius();
    const auto a = static_cast<std::size_t>(base[static_cast<std::size_t>(loop.plane()[0])]);
    const auto b = static_cast<std::size_t>(base[static_cast<std::size_t>(loop.plane()[1])]);
    amp[a] = speed;
    phase[a] = kPi / 2.0;
    amp[b] = loop.orientation() * speed;
    const auto u = systems::InputSignal::sinusoids(amp, 2.0 * kPi, phase, 1.0);
    const double h = 1.0 / std::max(1.0, std::ceil(1.0 / step - 1e-9));
    last = systems::simulate(sys, u, x0, 1.0, h);
    std::vector<double> got, expect;
    for (std::size_t f = 0; f < index.size(); ++f) {
      got.push_back(last.final_state()[index[f]]);
      expect.push_back(w.values[l][f]);
      mismatch = std::max(mismatch, std::fabs(got.back() - expect.back()));
    }
    simulated.push_back(io::numbers(got));
    integral.push_back(io::numbers(expect));
  }
  controllability::Evidence ev;
  ev.kind = "replay";
  ev.fiber = w.fiber;
  ev.data = io::Json::object();
  ev.data["step"] = io::number(step);
  ev.data["simulated"] = std::move(simulated);
  ev.data["integral"] = std::move(integral);
  ev.data["mismatch"] = io::number(mismatch);
  return std::pair{std::move(ev), std::move(last)};
}

void run_analyze(const RunConfig& cfg, std::ostream& out) {
  auto budget = cfg.budget;
  budget.seed = cfg.seed;
  if (cfg.tol) budget.tolerance = *cfg.tol;
  auto report = controllability::classify(cfg.system, budget);
  const auto replay = replay_witness(cfg.system, report, cfg.step.value_or(1e-3));
  if (replay) report.evidence.push_back(replay->first);

  const auto dir = output_dir(cfg);
  if (wants_json(cfg.format)) write_file(dir / "report.json", io::dump_json(controllability::to_json(report)));
  if (wants_csv(cfg.format) && replay) write_file(dir / "witness.csv", csv_of(replay->second));
  out << "verdict: " << controllability::verdict_name(report.verdict);
  for (const auto& c : report.caveats) {
    if (c == controllability::kCaveatNonSimplyConnected) out << " (" << c << ")";
  }
  out << "\n";
}

steering::SteeringPlan make_plan(const RunConfig& cfg, const std::vector<double>& from, const std::vector<double>& to,
                                 double T) {
  const auto& sys = cfg.system;
  const Variant v = sys.variant();
  steering::PlanOptions opts;
  if (cfg.tol) opts.tolerance = *cfg.tol;
  const bool from_origin = std::all_of(from.begin(), from.end(), [](double x) { return x == 0.0; });
  const bool base_origin =
      std::all_of(to.begin(), to.begin() + sys.base_dim(), [](double x) { return x == 0.0; });

  std::string method = cfg.method;
  if (method == "auto") {
    if (v == Variant::ComplexPlane && cfg.conj_power && *cfg.conj_power >= 2) {
      method = "residue-chain";
    } else if (v == Variant::Classic && from_origin && base_origin) {
      method = "sinusoid-classic";
    } else if ((v == Variant::Classic || v == Variant::GeneralR2) && from_origin && base_origin) {
      method = "loop-scaling";
    } else if (v == Variant::Classic || v == Variant::GeneralR2 || v == Variant::GeneralR3) {
      method = "two-phase";
    } else {
      throw ValidationError("no planner for the " + std::string(systems::variant_name(v)) + " variant");
    }
  }
  auto need_origin = [&](const char* m) {
    if (!from_origin || !base_origin) {
      throw ValidationError(std::string(m) + " plans run from the origin to a pure fiber target");
    }
  };
  if (method == "sinusoid-classic") {
    if (v != Variant::Classic) throw ValidationError("sinusoid-classic needs the classic variant");
    need_origin("sinusoid-classic");
    return steering::plan_sinusoid_classic(to[2], T);
  }
  if (method == "loop-scaling") {
    need_origin("loop-scaling");
    return steering::plan_loop_scaling(sys, to[2], T, opts);
  }
  if (method == "two-phase") return steering::plan_two_phase(sys, from, to, T, opts);
  if (method == "residue-chain") {
    if (v != Variant::ComplexPlane || !cfg.conj_power) {
      throw ValidationError("residue-chain needs a complex_plane system given by conj_power");
    }
    need_origin("residue-chain");
    return steering::plan_residue_chain(*cfg.conj_power, to);
  }
  throw ValidationError("unknown steering method '" + method + "'");
}

void run_steer(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.to) throw ValidationError("steer needs a target: --to or [task] to");
  const auto from = checked_state(cfg.from, cfg.system, "start state");
  const auto to = checked_state(cfg.to, cfg.system, "target state");
  const double T = cfg.T.value_or(1.0);
  const auto plan = make_plan(cfg, from, to, T);
  const auto check = steering::verify_plan(cfg.system, plan, from, cfg.step.value_or(1e-4));

  const auto dir = output_dir(cfg);
  if (wants_json(cfg.format)) {
    write_file(dir / "plan.json", io::dump_json(steering::to_json(plan)));
    io::Json v = io::Json::object();
    v["pass"] = check.pass;
    v["achieved"] = io::numbers(check.achieved);
    v["error"] = io::number(check.error);
    v["tolerance"] = io::number(check.tolerance);
    write_file(dir / "verification.json", io::dump_json(v));
  }
  if (wants_csv(cfg.format)) write_file(dir / "trajectory.csv", csv_of(check.trajectory));
  out << "plan: " << steering::method_name(plan.method) << ", " << plan.phases.size() << " phase(s), verification "
      << (check.pass ? "pass" : "fail") << " (error " << fmt(check.error) << ")\n";
  if (!check.pass) {
    throw TaskError("plan failed verification: endpoint error " + fmt(check.error) + " exceeds " +
                    fmt(check.tolerance));
  }
}

void run_optimal(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.to) throw ValidationError("optimal needs a target: --to or [task] to");
  optimal::ExtremalProblem p;
  p.system = cfg.system;
  p.from = checked_state(cfg.from, cfg.system, "start state");
  p.to = checked_state(cfg.to, cfg.system, "target state");
  p.T = cfg.T.value_or(1.0);
  p.cost = cfg.cost;
  if (cfg.state_cost) p.state_cost = field::parse_expr(*cfg.state_cost);
  optimal::ShootOptions opts;
  if (cfg.step) opts.step = *cfg.step;
  if (cfg.tol) opts.tolerance = *cfg.tol;
  const auto sol = optimal::shoot(p, opts);

  const auto dir = output_dir(cfg);
  if (wants_json(cfg.format)) write_file(dir / "solution.json", io::dump_json(optimal::to_json(sol)));
  if (wants_csv(cfg.format)) write_file(dir / "trajectory.csv", csv_of(sol.path.trajectory));
  out << "extremal: lambda " << fmt(sol.lambda) << ", cost " << fmt(sol.cost) << ", residual " << fmt(sol.residual)
      << ", branch " << sol.branch << "\n";
}

void run_simulate(const RunConfig& cfg, std::ostream& out) {
  if (cfg.inputs.empty()) throw ValidationError("simulate needs inputs: --inputs or [task] inputs");
  const double T = cfg.T.value_or(1.0);
  const auto x0 = checked_state(cfg.from, cfg.system, "start state");
  const auto u = parse_inputs(cfg.inputs, T);
  if (u.channels() != cfg.system.base_dim()) {
    throw ValidationError("inputs have " + std::to_string(u.channels()) + " channels, the system has " +
                          std::to_string(cfg.system.base_dim()));
  }
  const double step = cfg.step.value_or(1e-3);
  const double tol = cfg.tol.value_or(1e-6);
  const auto traj = systems::simulate(cfg.system, u, x0, T, step);
  // independent check of the fiber gains by quadrature along the base path
  const auto gains = systems::fiber_displacement(cfg.system, u, x0, T);
  const auto base = static_cast<std::size_t>(cfg.system.base_dim());
  double mismatch = 0.0;
  std::vector<double> quad;
  for (std::size_t f = 0; f < gains.size(); ++f) {
    quad.push_back(x0[base + f] + gains[f]);
    mismatch = std::max(mismatch, std::fabs(traj.final_state()[base + f] - quad.back()));
  }

  const auto dir = output_dir(cfg);
  if (wants_csv(cfg.format)) write_file(dir / "trajectory.csv", csv_of(traj));
  if (wants_json(cfg.format)) {
    io::Json s = io::Json::object();
    s["final_state"] = io::numbers(traj.final_state());
    s["fiber_quadrature"] = io::numbers(quad);
    s["mismatch"] = io::number(mismatch);
    s["tolerance"] = io::number(tol);
    write_file(dir / "summary.json", io::dump_json(s));
  }
  out << "simulated " << traj.times.size() - 1 << " steps, final fiber mismatch vs quadrature " << fmt(mismatch)
      << "\n";
  if (mismatch > tol) {
    throw TaskError("integrator and quadrature disagree by " + fmt(mismatch) + " (tolerance " + fmt(tol) +
                    "); reduce --step");
  }
}

double parse_double(std::string_view text, const std::string& what) {
  std::string s(text);
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  if (b == std::string::npos) throw ValidationError(what + " is empty");
  s = s.substr(b, e - b + 1);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) throw ValidationError(what + " '" + s + "' is not a number");
  return v;
}

}  // namespace

std::string_view task_name(Task t) {
  switch (t) {
    case Task::Analyze: return "analyze";
    case Task::Steer: return "steer";
    case Task::Optimal: return "optimal";
    case Task::Simulate: return "simulate";
  }
  return "unknown";
}

std::vector<double> parse_vector(std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = text.find(',', pos);
    out.push_back(parse_double(text.substr(pos, comma - pos), "vector entry"));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<std::string> split_channels(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto semi = text.find(';', pos);
    out.emplace_back(text.substr(pos, semi - pos));
    if (semi == std::string_view::npos) break;
    pos = semi + 1;
  }
  return out;
}

systems::InputSignal parse_inputs(const std::vector<std::string>& channels, double T) {
  if (channels.empty()) throw ValidationError("no input channels given");
  std::vector<std::vector<systems::InputPiece>> pieces;
  for (const auto& raw : channels) {
    const auto colon = raw.find(':');
    if (colon == std::string::npos) throw ValidationError("input '" + raw + "' needs kind:params");
    std::string kind = raw.substr(0, colon);
    kind.erase(0, kind.find_first_not_of(" \t"));
    const auto params = parse_vector(std::string_view(raw).substr(colon + 1));
    if (kind == "const") {
      if (params.size() != 1) throw ValidationError("const input takes one value");
      pieces.push_back({systems::InputPiece::constant(0.0, T, params[0])});
    } else if (kind == "sin") {
      if (params.size() != 3) throw ValidationError("sin input takes amplitude,omega,phase");
      pieces.push_back({systems::InputPiece::sinusoid(0.0, T, params[0], params[1], params[2])});
    } else if (kind == "poly") {
      pieces.push_back({systems::InputPiece::polynomial(0.0, T, params)});
    } else {
      throw ValidationError("unknown input kind '" + kind + "' (const, sin or poly)");
    }
  }
  return systems::InputSignal(std::move(pieces), T);
}

Format parse_format(std::string_view text) {
  if (text == "csv") return Format::Csv;
  if (text == "json") return Format::Json;
  if (text == "both") return Format::Both;
  throw ValidationError("format must be csv, json or both, got '" + std::string(text) + "'");
}

RunConfig parse_config(std::string_view toml_text, std::string_view source) {
  toml::table root;
  try {
    root = toml::parse(toml_text, source);
  } catch (const toml::parse_error& e) {
    const auto& where = e.source().begin;
    throw ValidationError(std::string(source) + ":" + std::to_string(where.line) + ":" + std::to_string(where.column) +
                          ": " + std::string(e.description()));
  }
  check_keys(root, {"system", "task", "output"}, "top level");
  RunConfig cfg;
  const toml::table* sys = root["system"].as_table();
  if (!sys) throw ValidationError("[system] table is required");
  build_system(*sys, cfg);

  if (const toml::table* task = root["task"].as_table()) {
    check_keys(*task, {"from", "to", "T", "step", "tol", "seed", "method", "cost", "g", "inputs", "budget"}, "task");
    if (const toml::node* n = task->get("from")) cfg.from = numbers_of(*n, "[task] from");
    if (const toml::node* n = task->get("to")) cfg.to = numbers_of(*n, "[task] to");
    cfg.T = get_number(*task, "T", "task");
    cfg.step = get_number(*task, "step", "task");
    cfg.tol = get_number(*task, "tol", "task");
    if (auto s = get_int(*task, "seed", "task")) {
      if (*s < 0) throw ValidationError("[task] seed must be non-negative");
      cfg.seed = static_cast<std::uint64_t>(*s);
    }
    if (auto m = get_string(*task, "method", "task")) cfg.method = *m;
    if (auto c = get_string(*task, "cost", "task")) {
      if (*c == "energy") {
        cfg.cost = optimal::CostKind::Energy;
      } else if (*c == "energy-plus-state") {
        cfg.cost = optimal::CostKind::EnergyPlusState;
      } else {
        throw ValidationError("[task] cost must be energy or energy-plus-state");
      }
    }
    cfg.state_cost = get_string(*task, "g", "task");
    if (cfg.state_cost) parse_expr_at(*cfg.state_cost, "[task] g");
    if (const toml::node* n = task->get("inputs")) cfg.inputs = strings_of(*n, "[task] inputs");
    if (const toml::node* n = task->get("budget")) {
      const auto* b = n->as_table();
      if (!b) throw ValidationError("[task.budget] must be a table");
      check_keys(*b, {"box_half_width", "grid", "radii", "max_loops"}, "task.budget");
      if (auto v = get_number(*b, "box_half_width", "task.budget")) cfg.budget.box_half_width = *v;
      if (auto v = get_int(*b, "grid", "task.budget")) cfg.budget.grid = static_cast<int>(*v);
      if (auto v = get_int(*b, "max_loops", "task.budget")) {
        if (*v < 1) throw ValidationError("[task.budget] max_loops must be positive");
        cfg.budget.max_loops = static_cast<std::size_t>(*v);
      }
      if (const toml::node* r = b->get("radii")) cfg.budget.radii = numbers_of(*r, "[task.budget] radii");
    }
  }
  if (const toml::table* o = root["output"].as_table()) {
    check_keys(*o, {"dir", "format"}, "output");
    if (auto d = get_string(*o, "dir", "output")) cfg.out_dir = *d;
    if (auto f = get_string(*o, "format", "output")) cfg.format = parse_format(*f);
  }
  check_positive(cfg.T, "[task] T");
  check_positive(cfg.step, "[task] step");
  check_positive(cfg.tol, "[task] tol");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

void apply_overrides(RunConfig& cfg, const Overrides& o) {
  check_positive(o.T, "--T");
  check_positive(o.step, "--step");
  check_positive(o.tol, "--tol");
  RunConfig next = cfg;
  if (o.to) next.to = o.to;
  if (o.T) next.T = o.T;
  if (o.step) next.step = o.step;
  if (o.tol) next.tol = o.tol;
  if (o.seed) next.seed = *o.seed;
  if (o.out) next.out_dir = *o.out;
  if (o.format) next.format = *o.format;
  if (o.inputs) next.inputs = split_channels(*o.inputs);
  // surface shape errors now rather than after the task has run
  if (next.from) checked_state(next.from, next.system, "start state");
  if (next.to) checked_state(next.to, next.system, "target state");
  if (!next.inputs.empty()) parse_inputs(next.inputs, next.T.value_or(1.0));
  cfg = std::move(next);
}

void run_task(Task task, const RunConfig& cfg, std::ostream& out) {
  switch (task) {
    case Task::Analyze: return run_analyze(cfg, out);
    case Task::Steer: return run_steer(cfg, out);
    case Task::Optimal: return run_optimal(cfg, out);
    case Task::Simulate: return run_simulate(cfg, out);
  }
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e)) return 2;
  return 3;
}

}  // namespace nonholo::cli
