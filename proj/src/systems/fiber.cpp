#include <boost/math/quadrature/gauss.hpp>

#include <array>
#include <cmath>
#include <vector>

#include "detail.hpp"
#include "nonholo/error.hpp"
#include "nonholo/systems/simulate.hpp"

namespace nonholo::systems {
namespace {

constexpr std::size_t kInitialPanels = 8;
constexpr std::size_t kMaxPanels = std::size_t{1} << 14;
constexpr double kRelTol = 1e-13;

struct Rule {
  std::array<double, 5> node;
  std::array<double, 5> weight;
};

const Rule& gauss5() {
  static const Rule rule = [] {
    using G = boost::math::quadrature::gauss<double, 5>;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    // Boost stores the non-negative half; mirror it.
    Rule r{};
    r.node = {-x[2], -x[1], x[0], x[1], x[2]};
    r.weight = {w[2], w[1], w[0], w[1], w[2]};
    return r;
  }();
  return rule;
}

struct Estimate {
  std::vector<double> value;
  std::vector<double> magnitude;  // sum of |weighted integrand|, the roundoff scale
};

class FiberQuadrature {
 public:
  FiberQuadrature(const SystemModel& sys, const InputSignal& u, std::span<const double> x0)
      : sys_(sys), u_(u), x0_(x0) {}

  Estimate segment(double a, double b, std::size_t panels) {
    const Rule& rule = gauss5();
    const std::size_t m = panels * 5;
    const double width = (b - a) / static_cast<double>(panels);
    const int nb = sys_.base_dim();
    // the two segment ends join the nodes so a path starting or ending on
    // an excluded point is caught; they carry zero weight
    times_.resize(m + 2);
    weights_.assign(m + 2, 0.0);
    times_[m] = a;
    times_[m + 1] = b;
    for (std::size_t p = 0; p < panels; ++p) {
      const double lo = a + width * static_cast<double>(p);
      for (std::size_t k = 0; k < 5; ++k) {
        times_[p * 5 + k] = lo + 0.5 * width * (rule.node[k] + 1.0);
        weights_[p * 5 + k] = 0.5 * width * rule.weight[k];
      }
    }
    base_.assign(static_cast<std::size_t>(nb), std::vector<double>(m + 2));
    rate_.assign(static_cast<std::size_t>(nb), std::vector<double>(m + 2));
    for (int c = 0; c < nb; ++c) {
      for (std::size_t i = 0; i < m + 2; ++i) {
        base_[c][i] = x0_[c] + u_.integral(c, times_[i]);
        rate_[c][i] = u_.value(c, times_[i]);
      }
    }

    const auto& fibers = sys_.fibers();
    Estimate est{std::vector<double>(fibers.size(), 0.0), std::vector<double>(fibers.size(), 0.0)};
    integrand_.resize(m);
    scale_.resize(m);
    scratch_.resize(m);
    for (std::size_t f = 0; f < fibers.size(); ++f) {
      const FiberForm& form = fibers[f];
      kernels::PointBatch batch;
      batch.size = m + 2;
      for (int k = 0; k < form.dim(); ++k) batch.coords[k] = base_[static_cast<std::size_t>(form.base[k])];
      guard(form, batch);
      batch.size = m;
      field::evaluate_batch(form.drift, batch, integrand_);
      for (std::size_t i = 0; i < m; ++i) scale_[i] = std::fabs(integrand_[i]);
      for (int k = 0; k < form.dim(); ++k) {
        field::evaluate_batch(form.field.component(k), batch, scratch_);
        const auto& uk = rate_[static_cast<std::size_t>(form.base[k])];
        for (std::size_t i = 0; i < m; ++i) {
          const double term = scratch_[i] * uk[i];
          integrand_[i] += term;
          scale_[i] += std::fabs(term);
        }
      }
      // Neumaier summation; the scale is taken before cancellation
      double sum = 0.0, carry = 0.0, mag = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double term = weights_[i] * integrand_[i];
        const double next = sum + term;
        carry += std::fabs(sum) >= std::fabs(term) ? (sum - next) + term : (term - next) + sum;
        sum = next;
        mag += weights_[i] * scale_[i];
      }
      sum += carry;
      if (!std::isfinite(sum)) throw DomainError("fiber integrand is not finite along the base path");
      est.value[f] = sum;
      est.magnitude[f] = mag;
    }
    return est;
  }

 private:
  void guard(const FiberForm& form, const kernels::PointBatch& batch) const {
    const auto& ex = form.field.excluded();
    if (ex.empty()) return;
    double p[3] = {0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < batch.size; ++i) {
      for (int k = 0; k < form.dim(); ++k) p[k] = batch.coords[k][i];
      if (ex.within_guard(std::span<const double>(p, static_cast<std::size_t>(form.dim())))) {
        throw DomainError("base path enters the excluded set" + (ex.note.empty() ? std::string() : " (" + ex.note + ")"));
      }
    }
  }

  const SystemModel& sys_;
  const InputSignal& u_;
  std::span<const double> x0_;
  std::vector<double> times_, weights_, integrand_, scale_, scratch_;
  std::vector<std::vector<double>> base_, rate_;
};

}  // namespace

std::vector<double> fiber_displacement(const SystemModel& sys, const InputSignal& u, std::span<const double> x0,
                                       double T) {
  detail::check_run(sys, u, x0, T);
  FiberQuadrature quad(sys, u, x0);
  const auto breaks = u.breakpoints();
  std::vector<double> total(sys.fibers().size(), 0.0);
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    std::size_t panels = kInitialPanels;
    Estimate prev = quad.segment(breaks[s], breaks[s + 1], panels);
    for (;;) {
      panels *= 2;
      Estimate cur = quad.segment(breaks[s], breaks[s + 1], panels);
      bool done = true;
      for (std::size_t f = 0; f < total.size(); ++f) {
        if (std::fabs(cur.value[f] - prev.value[f]) > kRelTol * cur.magnitude[f]) done = false;
      }
      prev = std::move(cur);
      if (done || panels >= kMaxPanels) break;
    }
    for (std::size_t f = 0; f < total.size(); ++f) total[f] += prev.value[f];
  }
  return total;
}

}  // namespace nonholo::systems
