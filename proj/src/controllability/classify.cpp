#include "nonholo/controllability/classify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nonholo/error.hpp"
#include "nonholo/field/calculus.hpp"
#include "nonholo/field/rational.hpp"

namespace nonholo::controllability {

using io::Json;
using systems::FiberForm;
using systems::SystemModel;
using systems::Variant;

namespace {

constexpr std::size_t kLoopsReported = 5;

struct LoopProbe {
  std::size_t index = 0;
  Loop loop;
  LoopValue value;
};

struct FormAnalysis {
  std::string label;
  bool symbolic_zero = false;
  bool excluded = false;
  CurlScan scan;
  double curl_threshold = 0.0;
  std::vector<LoopProbe> loops;
  std::size_t loops_skipped = 0;
  double loop_threshold = 0.0;
  std::size_t best_loop = 0;  // position in `loops`
  double best_loop_abs = 0.0;
  Verdict verdict = Verdict::Inconclusive;
};

std::vector<Loop> probe_loops(int dim, const ProbeBudget& budget) {
  std::vector<std::array<int, 2>> planes{{0, 1}};
  if (dim == 3) planes = {{0, 1}, {1, 2}, {2, 0}};
  const std::size_t per_center = planes.size() * std::max<std::size_t>(1, budget.radii.size());
  const double centers = std::max(1.0, static_cast<double>(budget.max_loops / per_center));
  int per_axis = std::max(1, static_cast<int>(std::floor(std::pow(centers, 1.0 / dim) + 1e-9)));
  per_axis = std::min(per_axis, budget.grid);

  const double w = budget.box_half_width;
  const double spacing = per_axis > 1 ? 2.0 * w / (per_axis - 1) : w;
  std::mt19937_64 rng(budget.seed);
  std::uniform_real_distribution<double> jitter(-0.02 * spacing, 0.02 * spacing);

  std::vector<Loop> out;
  std::size_t total = 1;
  for (int k = 0; k < dim; ++k) total *= static_cast<std::size_t>(per_axis);
  for (std::size_t c = 0; c < total; ++c) {
    double p[3] = {0.0, 0.0, 0.0};
    std::size_t rest = c;
    for (int k = dim - 1; k >= 0; --k) {
      const int i = static_cast<int>(rest % static_cast<std::size_t>(per_axis));
      rest /= static_cast<std::size_t>(per_axis);
      p[k] = (per_axis > 1 ? -w + spacing * i : 0.0) + jitter(rng);
    }
    const field::Point center(std::span<const double>(p, static_cast<std::size_t>(dim)));
    for (double r : budget.radii) {
      for (const auto& plane : planes) out.emplace_back(center, r, 1, plane);
    }
  }
  return out;
}

FormAnalysis analyze_form(const FiberForm& form, const std::vector<Loop>& loops, const ProbeBudget& budget) {
  FormAnalysis a;
  a.label = form.label;
  const auto& f = form.field;
  a.excluded = !f.excluded().empty();
  a.symbolic_zero = true;
  for (const auto& c : f.curl_components()) a.symbolic_zero = a.symbolic_zero && field::is_symbolically_zero(c);

  a.scan = curl_scan(f, Box::cube(f.dimension(), -budget.box_half_width, budget.box_half_width), budget.grid);
  a.curl_threshold = budget.tolerance * a.scan.jacobian_scale;

  double scale = 0.0;
  for (std::size_t i = 0; i < loops.size(); ++i) {
    const Loop& loop = loops[i];
    if (loop.distance_to(f.excluded()) < 0.05 * loop.radius()) {
      ++a.loops_skipped;
      continue;
    }
    try {
      const LoopValue v = loop_circulation(f, loop);
      if (!std::isfinite(v.value)) {
        ++a.loops_skipped;
        continue;
      }
      scale = std::max(scale, v.magnitude);
      a.loops.push_back({i, loop, v});
    } catch (const DomainError&) {
      ++a.loops_skipped;
    }
  }
  a.loop_threshold = budget.tolerance * scale;
  for (std::size_t i = 0; i < a.loops.size(); ++i) {
    const double v = std::fabs(a.loops[i].value.value);
    if (v > a.best_loop_abs) {
      a.best_loop_abs = v;
      a.best_loop = i;
    }
  }

  const bool loop_nonzero = !a.loops.empty() && a.best_loop_abs > a.loop_threshold;
  const bool curl_nonzero = a.scan.probes > 0 && a.scan.max_abs > a.curl_threshold;
  if (loop_nonzero || curl_nonzero) {
    a.verdict = Verdict::Controllable;
  } else if (a.symbolic_zero) {
    a.verdict = Verdict::Uncontrollable;
  } else {
    a.verdict = Verdict::Inconclusive;
  }
  return a;
}

Json box_json(const ProbeBudget& b, int dim) {
  Json box = Json::array();
  for (int k = 0; k < dim; ++k) box.push_back(io::numbers(std::vector<double>{-b.box_half_width, b.box_half_width}));
  return box;
}

void add_form_evidence(ControllabilityReport& rep, const FiberForm& form, const FormAnalysis& a,
                       const ProbeBudget& budget) {
  Json curls = Json::array();
  for (const auto& c : form.field.curl_components()) curls.push_back(c.to_string());
  Json sym;
  sym["curl"] = curls;
  sym["curl_is_zero"] = a.symbolic_zero;
  rep.evidence.push_back({"symbolic", a.label, sym});

  Json scan;
  scan["box"] = box_json(budget, form.dim());
  scan["grid"] = budget.grid;
  scan["probes"] = a.scan.probes;
  scan["skipped"] = a.scan.skipped;
  scan["max_abs_curl"] = io::number(a.scan.max_abs);
  scan["argmax"] = a.scan.probes ? io::numbers(a.scan.argmax.view()) : Json(nullptr);
  scan["threshold"] = io::number(a.curl_threshold);
  rep.evidence.push_back({"curl_scan", a.label, scan});

  Json summary;
  summary["probed"] = a.loops.size();
  summary["skipped"] = a.loops_skipped;
  summary["max_abs_circulation"] = io::number(a.best_loop_abs);
  summary["threshold"] = io::number(a.loop_threshold);
  rep.evidence.push_back({"loop_summary", a.label, summary});

  // the largest few circulations, listed in probe order
  std::vector<std::size_t> order(a.loops.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::fabs(a.loops[x].value.value) > std::fabs(a.loops[y].value.value);
  });
  order.resize(std::min(order.size(), kLoopsReported));
  std::sort(order.begin(), order.end());
  for (std::size_t i : order) {
    Json e;
    e["probe"] = a.loops[i].index;
    e["loop"] = to_json(a.loops[i].loop);
    e["circulation"] = io::number(a.loops[i].value.value);
    e["points"] = a.loops[i].value.points;
    rep.evidence.push_back({"loop", a.label, e});
  }
}

void add_stokes_evidence(ControllabilityReport& rep, const FiberForm& form, const Loop& loop, const std::string& label) {
  try {
    const StokesResult s = stokes_check(form.field, loop);
    Json e;
    e["loop"] = to_json(loop);
    e["line"] = io::number(s.line);
    e["surface"] = io::number(s.surface);
    e["trusted"] = !s.excluded_inside;
    rep.evidence.push_back({"stokes", label, e});
  } catch (const DomainError&) {
  }
}

Witness form_witness(const FormAnalysis& a) {
  Witness w;
  w.fiber = a.label;
  if (!a.loops.empty() && a.best_loop_abs > a.loop_threshold) {
    const auto& p = a.loops[a.best_loop];
    w.loops.push_back(p.loop);
    w.values.push_back({p.value.value});
  } else {
    w.point = a.scan.argmax;
    w.curl = a.scan.max_abs;
  }
  return w;
}

void add_common_caveats(ControllabilityReport& rep, bool excluded) {
  rep.caveats.emplace_back(kCaveatExistential);
  if (excluded) rep.caveats.emplace_back(kCaveatNonSimplyConnected);
}

ControllabilityReport classify_single(const SystemModel& sys, const ProbeBudget& budget) {
  ControllabilityReport rep;
  const FiberForm& form = sys.fibers().front();
  const auto loops = probe_loops(form.dim(), budget);
  const FormAnalysis a = analyze_form(form, loops, budget);
  rep.verdict = a.verdict;
  add_common_caveats(rep, a.excluded);
  if (sys.variant() == Variant::DriftR3) {
    rep.caveats.emplace_back("drift term does not enter the test; the verdict concerns the 1-form f only");
  }
  add_form_evidence(rep, form, a, budget);
  if (a.verdict == Verdict::Controllable) {
    rep.witness = form_witness(a);
    if (!rep.witness->loops.empty()) add_stokes_evidence(rep, form, rep.witness->loops.front(), a.label);
  }
  return rep;
}

ControllabilityReport classify_pairwise(const SystemModel& sys, const ProbeBudget& budget) {
  ControllabilityReport rep;
  const auto loops = probe_loops(2, budget);
  bool any_uncontrollable = false, all_controllable = true, excluded = false;
  std::optional<Witness> witness;
  std::vector<FormAnalysis> analyses;
  for (const auto& form : sys.fibers()) {
    analyses.push_back(analyze_form(form, loops, budget));
    const auto& a = analyses.back();
    excluded = excluded || a.excluded;
    any_uncontrollable = any_uncontrollable || a.verdict == Verdict::Uncontrollable;
    all_controllable = all_controllable && a.verdict == Verdict::Controllable;
  }
  rep.verdict = any_uncontrollable ? Verdict::Uncontrollable
                : all_controllable ? Verdict::Controllable
                                   : Verdict::Inconclusive;
  add_common_caveats(rep, excluded);
  rep.caveats.emplace_back("pairwise system: controllable only when every pair passes the planar test");
  for (std::size_t k = 0; k < analyses.size(); ++k) {
    add_form_evidence(rep, sys.fibers()[k], analyses[k], budget);
  }
  if (rep.verdict == Verdict::Controllable) rep.witness = form_witness(analyses.front());
  return rep;
}

ControllabilityReport classify_complex(const SystemModel& sys, const ProbeBudget& budget) {
  ControllabilityReport rep;
  const auto& F = sys.complex_function();
  const auto loops = probe_loops(2, budget);
  const FormAnalysis a1 = analyze_form(sys.fibers()[0], loops, budget);
  const FormAnalysis a2 = analyze_form(sys.fibers()[1], loops, budget);
  add_common_caveats(rep, !F.poles.empty());
  rep.caveats.emplace_back("complex-plane probes assume winding number 1 for every loop");
  add_form_evidence(rep, sys.fibers()[0], a1, budget);
  add_form_evidence(rep, sys.fibers()[1], a2, budget);

  const auto cr = field::cauchy_riemann_exprs(F);
  const bool holomorphic_symbolic = field::is_symbolically_zero(cr[0]) && field::is_symbolically_zero(cr[1]);
  const auto holo = holomorphy_test(F, Box::cube(2, -budget.box_half_width, budget.box_half_width), budget.grid);
  Json h;
  h["symbolic"] = holomorphic_symbolic;
  h["numeric"] = holo.holomorphic;
  h["max_residual"] = io::number(holo.max_residual);
  h["witness"] = holo.probes ? io::numbers(holo.witness.view()) : Json(nullptr);
  h["declared_poles"] = holo.has_poles;
  rep.evidence.push_back({"holomorphy", "w", h});

  // Both fibers see the same loops; pair their circulations into 2-vectors.
  struct Pair {
    const LoopProbe* w1;
    const LoopProbe* w2;
  };
  std::vector<Pair> pairs;
  for (const auto& p1 : a1.loops) {
    for (const auto& p2 : a2.loops) {
      if (p2.index == p1.index) pairs.push_back({&p1, &p2});
    }
  }
  const double thr = std::max(a1.loop_threshold, a2.loop_threshold);
  const Pair* lead = nullptr;
  double lead_norm = 0.0;
  for (const auto& p : pairs) {
    const double n = std::hypot(p.w1->value.value, p.w2->value.value);
    if (n > lead_norm) {
      lead_norm = n;
      lead = &p;
    }
  }
  const Pair* second = nullptr;
  double perp = 0.0;
  if (lead) {
    const double ux = lead->w1->value.value / lead_norm, uy = lead->w2->value.value / lead_norm;
    for (const auto& p : pairs) {
      const double d = std::fabs(ux * p.w2->value.value - uy * p.w1->value.value);
      if (d > perp) {
        perp = d;
        second = &p;
      }
    }
  }
  const int rank = lead_norm > thr ? (perp > thr ? 2 : 1) : 0;
  Json span;
  span["rank"] = rank;
  span["leading_norm"] = io::number(lead_norm);
  span["orthogonal_component"] = io::number(perp);
  span["threshold"] = io::number(thr);
  rep.evidence.push_back({"span", "w", span});

  const bool curls_nonzero = a1.verdict == Verdict::Controllable || a2.verdict == Verdict::Controllable;
  if (rank == 2) {
    rep.verdict = Verdict::Controllable;
    Witness w;
    w.fiber = "w1,w2";
    for (const Pair* p : {lead, second}) {
      w.loops.push_back(p->w1->loop);
      w.values.push_back({p->w1->value.value, p->w2->value.value});
    }
    rep.witness = w;
  } else if (rank == 1 || curls_nonzero) {
    rep.verdict = Verdict::Uncontrollable;
    rep.caveats.emplace_back("closed-loop increments of (w1, w2) span only one real direction");
  } else if (holomorphic_symbolic && a1.symbolic_zero && a2.symbolic_zero) {
    rep.verdict = Verdict::Uncontrollable;
  } else {
    rep.verdict = Verdict::Inconclusive;
  }
  return rep;
}

}  // namespace

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Controllable: return "controllable";
    case Verdict::Uncontrollable: return "uncontrollable";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

bool ControllabilityReport::has_caveat(std::string_view text) const {
  return std::any_of(caveats.begin(), caveats.end(), [&](const std::string& c) { return c == text; });
}

ControllabilityReport classify(const SystemModel& sys, const ProbeBudget& budget) {
  if (sys.fibers().empty()) throw ValidationError("system has no fiber coordinates");
  if (budget.grid < 2) throw ValidationError("probe grid needs at least 2 points per axis");
  if (!(budget.box_half_width > 0.0)) throw ValidationError("probe box must have positive size");
  if (!(budget.tolerance > 0.0)) throw ValidationError("probe tolerance must be positive");
  for (double r : budget.radii) {
    if (!(r > 0.0)) throw ValidationError("probe radii must be positive");
  }
  switch (sys.variant()) {
    case Variant::Classic:
    case Variant::GeneralR2:
    case Variant::GeneralR3:
    case Variant::DriftR3:
      return classify_single(sys, budget);
    case Variant::GeneralizedRm:
    case Variant::PairwiseRm:
      return classify_pairwise(sys, budget);
    case Variant::ComplexPlane:
      return classify_complex(sys, budget);
  }
  throw ValidationError("unsupported system variant");
}

Json to_json(const Loop& loop) {
  Json j;
  j["center"] = io::numbers(loop.center().view());
  j["radius"] = io::number(loop.radius());
  j["orientation"] = loop.orientation();
  j["plane"] = Json::array({loop.plane()[0] + 1, loop.plane()[1] + 1});
  return j;
}

Json to_json(const ControllabilityReport& report) {
  Json j;
  j["verdict"] = std::string(verdict_name(report.verdict));
  if (report.witness) {
    Json w;
    w["fiber"] = report.witness->fiber;
    if (!report.witness->loops.empty()) {
      Json loops = Json::array();
      for (std::size_t i = 0; i < report.witness->loops.size(); ++i) {
        Json l = to_json(report.witness->loops[i]);
        l["circulation"] = io::numbers(report.witness->values[i]);
        loops.push_back(l);
      }
      w["loops"] = loops;
    } else if (report.witness->point) {
      w["point"] = io::numbers(report.witness->point->view());
      w["curl"] = io::number(report.witness->curl);
    }
    j["witness"] = w;
  } else {
    j["witness"] = nullptr;
  }
  j["caveats"] = report.caveats;
  Json ev = Json::array();
  for (const auto& e : report.evidence) {
    Json item;
    item["kind"] = e.kind;
    item["fiber"] = e.fiber;
    item["data"] = e.data;
    ev.push_back(item);
  }
  j["evidence"] = ev;
  return j;
}

}  // namespace nonholo::controllability
