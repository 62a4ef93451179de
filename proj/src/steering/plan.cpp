#include "nonholo/steering/plan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <string>

#include "nonholo/controllability/classify.hpp"
#include "nonholo/error.hpp"
#include "nonholo/field/calculus.hpp"

namespace nonholo::steering {
namespace {

using systems::InputPiece;
using systems::InputSignal;
using systems::SystemModel;
using systems::Variant;

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void check_horizon(double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("horizon T must be positive and finite");
}

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw ValidationError(std::string(what) + " must be finite");
  }
}

void require_controllable(const SystemModel& sys, const PlanOptions& opts) {
  if (!opts.check_controllability) return;
  const auto report = controllability::classify(sys);
  if (report.verdict == controllability::Verdict::Uncontrollable) {
    throw TaskError("system classifies as uncontrollable; no closed loop changes the fiber");
  }
}

// u_i = c1 cos(w t), u_j = c2 sin(w t), other channels zero, w = 2 pi / T.
InputSignal loop_signal(int channels, std::array<int, 2> plane, double c1, double c2, double T) {
  std::vector<double> amp(static_cast<std::size_t>(channels), 0.0), phase(static_cast<std::size_t>(channels), 0.0);
  amp[static_cast<std::size_t>(plane[0])] = c1;
  amp[static_cast<std::size_t>(plane[1])] = c2;
  phase[static_cast<std::size_t>(plane[1])] = -kPi / 2.0;
  return InputSignal::sinusoids(amp, 2.0 * kPi / T, phase, T);
}

struct LoopFit {
  double c1 = 0.0, c2 = 0.0;
  InputSignal inputs;
};

// Finds s with fiber gain of loop_signal(s1 s, s2 s) at `anchor` equal to gap.
std::optional<LoopFit> fit_loop(const SystemModel& sys, std::span<const double> anchor, std::array<int, 2> plane,
                                std::array<double, 2> sign, double gap, double T, const PlanOptions& opts) {
  const int channels = sys.base_dim();
  auto signal = [&](double s) { return loop_signal(channels, plane, sign[0] * s, sign[1] * s, T); };
  auto g = [&](double s) -> std::optional<double> {
    try {
      return systems::fiber_displacement(sys, signal(s), anchor, T)[0] - gap;
    } catch (const DomainError&) {
      return std::nullopt;
    }
  };

  const double g0 = -gap;
  double lo = 0.0, glo = g0, hi = 0.0, ghi = 0.0;
  bool bracketed = false;
  for (double s = 1.0 / 16.0;; s = std::min(2.0 * s, opts.amplitude_cap)) {
    const auto v = g(s);
    if (!v) break;
    if (std::fabs(*v) < opts.tolerance * 1e-2) return LoopFit{sign[0] * s, sign[1] * s, signal(s)};
    if ((*v > 0.0) != (g0 > 0.0)) {
      hi = s;
      ghi = *v;
      bracketed = true;
      break;
    }
    lo = s;
    glo = *v;
    if (s >= opts.amplitude_cap) break;
  }
  if (!bracketed) return std::nullopt;

  // Bisection down to a narrow bracket, then a bracketed secant (Illinois).
  auto eval = [&](double s) {
    const auto v = g(s);
    if (!v) throw DomainError("loop crosses the excluded set inside a bracketing interval");
    return *v;
  };
  while (hi - lo > 1e-3 * hi) {
    const double mid = 0.5 * (lo + hi);
    const double gm = eval(mid);
    if ((gm > 0.0) == (glo > 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
      ghi = gm;
    }
  }
  int side = 0;
  double best = std::fabs(glo) < std::fabs(ghi) ? lo : hi;
  double gbest = std::min(std::fabs(glo), std::fabs(ghi));
  for (int it = 0; it < 100 && gbest > 1e-2 * opts.tolerance && hi > lo; ++it) {
    const double s = (lo * ghi - hi * glo) / (ghi - glo);
    if (!(s > lo && s < hi)) break;
    const double gs = eval(s);
    if (std::fabs(gs) < gbest) {
      best = s;
      gbest = std::fabs(gs);
    }
    if ((gs > 0.0) == (glo > 0.0)) {
      lo = s;
      glo = gs;
      if (side == -1) ghi *= 0.5;
      side = -1;
    } else {
      hi = s;
      ghi = gs;
      if (side == 1) glo *= 0.5;
      side = 1;
    }
  }
  if (gbest >= opts.tolerance) return std::nullopt;
  return LoopFit{sign[0] * best, sign[1] * best, signal(best)};
}

// Closed loop at `anchor` whose fiber gain equals gap. Signs (1, 1) and
// (-1, -1) run counter-clockwise on opposite sides of the anchor, (1, -1) and
// (-1, 1) clockwise; the orientation matching the sign of the gap goes first.
PlanPhase loop_phase(const SystemModel& sys, std::span<const double> anchor, std::array<int, 2> plane, double gap,
                     double T, const PlanOptions& opts) {
  const double o = gap > 0.0 ? 1.0 : -1.0;
  const std::array<std::array<double, 2>, 4> patterns{{{1.0, o}, {-1.0, -o}, {1.0, -o}, {-1.0, o}}};
  for (const auto& sign : patterns) {
    if (auto fit = fit_loop(sys, anchor, plane, sign, gap, T, opts)) {
      PlanPhase p;
      p.duration = T;
      p.inputs = std::move(fit->inputs);
      p.rationale = "closed loop u" + std::to_string(plane[0] + 1) + " = " + fmt(fit->c1) + " cos(2 pi t/" + fmt(T) +
                    "), u" + std::to_string(plane[1] + 1) + " = " + fmt(fit->c2) + " sin(2 pi t/" + fmt(T) +
                    ") adds " + fmt(gap) + " to the fiber";
      return p;
    }
  }
  throw TaskError("no loop amplitude up to " + fmt(opts.amplitude_cap) + " reaches fiber gain " + fmt(gap) +
                  " with any sign pattern of (c1, c2)");
}

PlanPhase zero_phase(int channels, double T, std::string why) {
  return PlanPhase{T, InputSignal::zero(channels, T), std::move(why)};
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::SinusoidClassic: return "sinusoid-classic";
    case Method::TwoPhase: return "two-phase";
    case Method::LoopScaling: return "loop-scaling";
    case Method::ResidueChain: return "residue-chain";
  }
  return "unknown";
}

double SteeringPlan::total_duration() const {
  double t = 0.0;
  for (const auto& p : phases) t += p.duration;
  return t;
}

InputSignal SteeringPlan::concatenated() const {
  if (phases.empty()) throw ValidationError("plan has no phases");
  const int channels = phases.front().inputs.channels();
  std::vector<std::vector<InputPiece>> out(static_cast<std::size_t>(channels));
  double offset = 0.0;
  for (const auto& ph : phases) {
    if (ph.inputs.channels() != channels) throw ValidationError("plan phases disagree on the channel count");
    for (int c = 0; c < channels; ++c) {
      for (InputPiece piece : ph.inputs.pieces(c)) {
        piece.start += offset;
        piece.end += offset;
        out[static_cast<std::size_t>(c)].push_back(std::move(piece));
      }
    }
    offset += ph.duration;
  }
  // pin the seams so rounding in the offsets never opens a gap
  for (auto& ch : out) {
    for (std::size_t i = 1; i < ch.size(); ++i) ch[i].start = ch[i - 1].end;
  }
  return InputSignal(std::move(out), offset);
}

SteeringPlan plan_sinusoid_classic(double a, double T) {
  check_horizon(T);
  if (!std::isfinite(a)) throw ValidationError("target must be finite");
  SteeringPlan plan;
  plan.method = Method::SinusoidClassic;
  plan.predicted_endpoint = {0.0, 0.0, a};
  if (a == 0.0) {
    plan.phases.push_back(zero_phase(2, T, "target equals the start; no motion"));
    return plan;
  }
  const int n = a > 0.0 ? 1 : -1;
  const double c = 2.0 * kPi * n / T;
  const double amp = std::sqrt(std::fabs(c * a) / T);
  PlanPhase p;
  p.duration = T;
  p.inputs = InputSignal::sinusoids({amp, amp}, c, {kPi / 4.0, -kPi / 4.0}, T);
  p.rationale = "u(0) = (" + fmt(amp / std::sqrt(2.0)) + ", " + fmt(amp / std::sqrt(2.0)) + ") rotated at rate c = " +
                fmt(c) + " (n = " + std::to_string(n) + "), one full turn encloses area " + fmt(a / 2.0);
  plan.phases.push_back(std::move(p));
  return plan;
}

SteeringPlan plan_loop_scaling(const SystemModel& sys, double a, double T, const PlanOptions& opts) {
  check_horizon(T);
  if (!std::isfinite(a)) throw ValidationError("target must be finite");
  if (sys.variant() != Variant::Classic && sys.variant() != Variant::GeneralR2) {
    throw ValidationError("loop scaling needs a classic or general_r2 system, got " +
                          std::string(systems::variant_name(sys.variant())));
  }
  SteeringPlan plan;
  plan.method = Method::LoopScaling;
  plan.predicted_endpoint = {0.0, 0.0, a};
  if (a == 0.0) {
    plan.phases.push_back(zero_phase(2, T, "target equals the start; no motion"));
    return plan;
  }
  require_controllable(sys, opts);
  const std::vector<double> origin{0.0, 0.0, 0.0};
  plan.phases.push_back(loop_phase(sys, origin, {0, 1}, a, T, opts));
  return plan;
}

SteeringPlan plan_two_phase(const SystemModel& sys, std::span<const double> from, std::span<const double> to, double T,
                            const PlanOptions& opts) {
  check_horizon(T);
  const Variant v = sys.variant();
  if (v != Variant::Classic && v != Variant::GeneralR2 && v != Variant::GeneralR3) {
    throw ValidationError("two-phase steering needs a classic, general_r2 or general_r3 system, got " +
                          std::string(systems::variant_name(v)));
  }
  const auto n = static_cast<std::size_t>(sys.state_dim());
  if (from.size() != n || to.size() != n) {
    throw ValidationError("boundary states need " + std::to_string(n) + " entries");
  }
  check_finite(from, "start state");
  check_finite(to, "target state");
  require_controllable(sys, opts);

  const int m = sys.base_dim();
  const double half = 0.5 * T;
  SteeringPlan plan;
  plan.method = Method::TwoPhase;
  plan.predicted_endpoint.assign(to.begin(), to.end());

  std::vector<double> rates(static_cast<std::size_t>(m));
  bool moves = false;
  for (int i = 0; i < m; ++i) {
    rates[static_cast<std::size_t>(i)] = (to[static_cast<std::size_t>(i)] - from[static_cast<std::size_t>(i)]) / half;
    moves = moves || rates[static_cast<std::size_t>(i)] != 0.0;
  }
  PlanPhase first{half, InputSignal::constant(rates, half),
                  moves ? "constant inputs carry the base straight to the target base point"
                        : "base already at the target; no motion"};
  const double gained = systems::fiber_displacement(sys, first.inputs, from, half)[0];
  plan.phases.push_back(std::move(first));

  std::vector<double> anchor(to.begin(), to.end());
  anchor[static_cast<std::size_t>(m)] = from[static_cast<std::size_t>(m)] + gained;
  const double gap = to[static_cast<std::size_t>(m)] - anchor[static_cast<std::size_t>(m)];
  if (std::fabs(gap) <= opts.tolerance) {
    plan.phases.push_back(zero_phase(m, half, "fiber already matches after the straight segment; no loop needed"));
    return plan;
  }

  std::vector<std::array<int, 2>> planes{{0, 1}};
  if (m == 3) {
    // planes ordered by the curl component normal to them at the anchor
    const auto curl = field::curl(sys.field(), std::span<const double>(anchor.data(), 3));
    planes = {{0, 1}, {1, 2}, {2, 0}};
    auto normal = [&](const std::array<int, 2>& p) { return std::fabs(curl.value[static_cast<std::size_t>(3 - p[0] - p[1])]); };
    std::stable_sort(planes.begin(), planes.end(), [&](const auto& x, const auto& y) { return normal(x) > normal(y); });
  }
  std::string failures;
  for (const auto& plane : planes) {
    try {
      plan.phases.push_back(loop_phase(sys, anchor, plane, gap, half, opts));
      return plan;
    } catch (const TaskError& e) {
      failures += std::string(failures.empty() ? "" : "; ") + e.what();
    }
  }
  throw TaskError("phase-2 loop failed: " + failures);
}

std::array<double, 2> residue_direction(int n, int phase) {
  if (n < 2) throw ValidationError("residue chain needs n >= 2");
  const double s = 2.0 * n * kPi;
  if (phase == 1) return {0.0, s};
  if (phase == 2) return {s * std::sin(kPi / n), -s * std::cos(kPi / n)};
  throw ValidationError("residue chain has phases 1 and 2");
}

SteeringPlan plan_residue_chain(int n, std::span<const double> target) {
  if (n < 2) throw ValidationError("residue chain needs n >= 2");
  if (target.size() != 4) throw ValidationError("residue-chain target is (0, 0, a, b)");
  check_finite(target, "target state");
  if (target[0] != 0.0 || target[1] != 0.0) {
    throw ValidationError("residue-chain loops return the base to the origin; target base must be (0, 0)");
  }
  const double a = target[2], b = target[3];
  const auto d1 = residue_direction(n, 1);
  const auto d2 = residue_direction(n, 2);
  // [d1 d2] (c1, c2) = (a, b) with d1 = (0, s)
  const double det = d1[0] * d2[1] - d2[0] * d1[1];
  if (det == 0.0) throw TaskError("residue directions are parallel");
  const double c1 = (a * d2[1] - d2[0] * b) / det;
  const double c2 = (d1[0] * b - a * d1[1]) / det;

  auto sgn = [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); };
  const double p = 1.0 / (n + 1);
  SteeringPlan plan;
  plan.method = Method::ResidueChain;
  plan.predicted_endpoint.assign(target.begin(), target.end());

  const double r1 = std::pow(std::fabs(c1), p);
  const double w1 = 2.0 * kPi;
  std::vector<std::vector<InputPiece>> ch1{{InputPiece::sinusoid(0.0, 1.0, w1 * r1, w1, -kPi / 2.0)},
                                           {InputPiece::sinusoid(0.0, 1.0, -sgn(c1) * w1 * r1, w1, 0.0)}};
  plan.phases.push_back({1.0, InputSignal(std::move(ch1), 1.0),
                         "circle of radius " + fmt(r1) + " around " + fmt(r1) + " through the origin, multiplier c1 = " +
                             fmt(c1) + ": fiber gain c1 (0, 2n pi)"});

  const double r2 = std::pow(std::fabs(c2), p);
  const double w2 = kPi / n;
  const double s2 = c2 < 0.0 ? -1.0 : 1.0;
  const double dur = 2.0 * n;
  std::vector<std::vector<InputPiece>> ch2{
      {InputPiece::sinusoid(0.0, dur, s2 * r2 * w2, s2 * w2, kPi / n - kPi / 2.0)},
      {InputPiece::sinusoid(0.0, dur, -s2 * r2 * w2, s2 * w2, kPi / n)}};
  plan.phases.push_back({dur, InputSignal(std::move(ch2), dur),
                         "circle of radius " + fmt(r2) + " around " + fmt(r2) + " e^(i pi/" + std::to_string(n) +
                             ") through the origin, multiplier c2 = " + fmt(c2) +
                             ": fiber gain c2 2n pi (sin(pi/n), -cos(pi/n))"});
  return plan;
}

Verification verify_plan(const SystemModel& sys, const SteeringPlan& plan, std::span<const double> from, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw ValidationError("step must be positive");
  const auto n = static_cast<std::size_t>(sys.state_dim());
  if (from.size() != n) throw ValidationError("start state needs " + std::to_string(n) + " entries");
  if (plan.predicted_endpoint.size() != n) {
    throw ValidationError("plan endpoint has " + std::to_string(plan.predicted_endpoint.size()) +
                          " entries, system state has " + std::to_string(n));
  }
  if (plan.phases.empty()) throw ValidationError("plan has no phases");
  for (const auto& ph : plan.phases) {
    if (ph.inputs.channels() != sys.base_dim()) {
      throw ValidationError("plan drives " + std::to_string(ph.inputs.channels()) + " channels, system has " +
                            std::to_string(sys.base_dim()) + " inputs");
    }
  }

  Verification out;
  out.tolerance = plan.method == Method::ResidueChain ? 1e-4 : 1e-6;
  auto& traj = out.trajectory;
  traj.inputs = plan.concatenated();
  traj.times.push_back(0.0);
  traj.states.emplace_back(from.begin(), from.end());
  double offset = 0.0;
  for (const auto& ph : plan.phases) {
    const double steps = std::max(1.0, std::ceil(ph.duration / step - 1e-9));
    const double h = ph.duration / steps;
    traj.step = std::max(traj.step, h);
    const auto part = systems::simulate(sys, ph.inputs, traj.states.back(), ph.duration, h);
    for (std::size_t i = 1; i < part.times.size(); ++i) {
      traj.times.push_back(offset + part.times[i]);
      traj.states.push_back(part.states[i]);
    }
    offset += ph.duration;
  }
  traj.times.back() = traj.inputs.duration();

  out.achieved = traj.final_state();
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = out.achieved[i] - plan.predicted_endpoint[i];
    sq += d * d;
  }
  out.error = std::sqrt(sq);
  out.pass = out.error < out.tolerance;
  return out;
}

io::Json to_json(const InputPiece& piece) {
  io::Json j = io::Json::object();
  io::Json params = io::Json::object();
  switch (piece.kind) {
    case InputPiece::Kind::Constant:
      j["kind"] = "constant";
      params["value"] = io::number(piece.amplitude);
      break;
    case InputPiece::Kind::Sinusoid:
      j["kind"] = "sinusoid";
      params["amplitude"] = io::number(piece.amplitude);
      params["omega"] = io::number(piece.omega);
      params["phase"] = io::number(piece.phase);
      break;
    case InputPiece::Kind::Polynomial:
      j["kind"] = "polynomial";
      params["coeffs"] = io::numbers(piece.coeffs);
      break;
  }
  j["params"] = std::move(params);
  return j;
}

io::Json to_json(const SteeringPlan& plan) {
  io::Json j = io::Json::object();
  j["method"] = std::string(method_name(plan.method));
  io::Json phases = io::Json::array();
  for (const auto& ph : plan.phases) {
    io::Json p = io::Json::object();
    p["duration"] = io::number(ph.duration);
    p["rationale"] = ph.rationale;
    io::Json channels = io::Json::array();
    for (int c = 0; c < ph.inputs.channels(); ++c) {
      const auto& pieces = ph.inputs.pieces(c);
      if (pieces.size() == 1) {
        channels.push_back(to_json(pieces.front()));
        continue;
      }
      io::Json list = io::Json::array();
      for (const auto& piece : pieces) {
        io::Json item = to_json(piece);
        item["start"] = io::number(piece.start);
        item["end"] = io::number(piece.end);
        list.push_back(std::move(item));
      }
      channels.push_back(io::Json{{"kind", "piecewise"}, {"params", io::Json{{"pieces", std::move(list)}}}});
    }
    p["channels"] = std::move(channels);
    phases.push_back(std::move(p));
  }
  j["phases"] = std::move(phases);
  j["predicted_endpoint"] = io::numbers(plan.predicted_endpoint);
  return j;
}

}  // namespace nonholo::steering
