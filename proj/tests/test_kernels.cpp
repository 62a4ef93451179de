#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "nonholo/field/expr.hpp"
#include "nonholo/kernels/dispatch.hpp"
#include "support/generators.hpp"

using namespace nonholo;
using nonholo::kernels::Backend;

namespace {

std::vector<const kernels::KernelTable*> simd_tables() {
  std::vector<const kernels::KernelTable*> out;
  for (auto b : {Backend::Avx2, Backend::Neon}) {
    if (kernels::backend_available(b)) out.push_back(&kernels::kernels_for(b));
  }
  return out;
}

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

}  // namespace

TEST_CASE("scalar backend is always available and forcing works") {
  CHECK(kernels::backend_available(Backend::Scalar));
  kernels::force_backend(Backend::Scalar);
  CHECK(kernels::active_kernels().backend == Backend::Scalar);
  kernels::reset_backend();
  CHECK(kernels::backend_available(kernels::active_kernels().backend));
}

TEST_CASE("SIMD elementwise kernels are bit-identical to scalar") {
  const auto& ref = kernels::scalar_kernels();
  std::mt19937_64 rng(11);
  for (const auto* simd : simd_tables()) {
    CAPTURE(simd->name);
    // odd lengths exercise the tails
    for (std::size_t n : {1u, 3u, 4u, 7u, 17u, 128u, 257u}) {
      const auto a = random_values(rng, n, -5.0, 5.0);
      auto b = random_values(rng, n, 0.5, 3.0);
      std::vector<double> r1(n), r2(n);
      const auto check = [&] {
        for (std::size_t i = 0; i < n; ++i) REQUIRE(same_bits(r1[i], r2[i]));
      };
      ref.add(a.data(), b.data(), r1.data(), n);
      simd->add(a.data(), b.data(), r2.data(), n);
      check();
      ref.sub(a.data(), b.data(), r1.data(), n);
      simd->sub(a.data(), b.data(), r2.data(), n);
      check();
      ref.mul(a.data(), b.data(), r1.data(), n);
      simd->mul(a.data(), b.data(), r2.data(), n);
      check();
      ref.div(a.data(), b.data(), r1.data(), n);
      simd->div(a.data(), b.data(), r2.data(), n);
      check();
      ref.neg(a.data(), r1.data(), n);
      simd->neg(a.data(), r2.data(), n);
      check();
      ref.fill(2.5, r1.data(), n);
      simd->fill(2.5, r2.data(), n);
      check();
      for (int k : {-3, -1, 0, 1, 2, 3, 5, 8}) {
        ref.pow_int(b.data(), k, r1.data(), n);
        simd->pow_int(b.data(), k, r2.data(), n);
        check();
      }
      ref.sin(a.data(), r1.data(), n);
      simd->sin(a.data(), r2.data(), n);
      check();
      ref.cos(a.data(), r1.data(), n);
      simd->cos(a.data(), r2.data(), n);
      check();
      ref.exp(a.data(), r1.data(), n);
      simd->exp(a.data(), r2.data(), n);
      check();
    }
  }
}

TEST_CASE("SIMD reductions agree with scalar") {
  const auto& ref = kernels::scalar_kernels();
  std::mt19937_64 rng(12);
  for (const auto* simd : simd_tables()) {
    for (std::size_t n : {0u, 1u, 5u, 64u, 1001u}) {
      const auto a = random_values(rng, n, -1.0, 1.0);
      const auto b = random_values(rng, n, -1.0, 1.0);
      double mag = 0.0;
      for (std::size_t i = 0; i < n; ++i) mag += std::fabs(a[i] * b[i]);
      CHECK(std::fabs(ref.dot(a.data(), b.data(), n) - simd->dot(a.data(), b.data(), n)) <= 1e-13 * (1.0 + mag));
      double amag = 0.0;
      for (double x : a) amag += std::fabs(x);
      CHECK(std::fabs(ref.sum(a.data(), n) - simd->sum(a.data(), n)) <= 1e-13 * (1.0 + amag));
      CHECK(ref.max_abs_index(a.data(), n) == simd->max_abs_index(a.data(), n));
    }
  }
}

TEST_CASE("max_abs_index returns the first maximum and skips NaN") {
  const double nan = std::nan("");
  const std::vector<double> v{1.0, -4.0, nan, 4.0, 2.0};
  for (auto b : {Backend::Scalar, Backend::Avx2, Backend::Neon}) {
    if (!kernels::backend_available(b)) continue;
    const auto& k = kernels::kernels_for(b);
    CHECK(k.max_abs_index(v.data(), v.size()) == 1);
    const std::vector<double> all_nan{nan, nan};
    CHECK(k.max_abs_index(all_nan.data(), 2) == 2);
  }
}

TEST_CASE("tape batch evaluation matches pointwise evaluation on every backend") {
  std::mt19937_64 rng(13);
  constexpr std::size_t n = 300;
  const auto x1 = random_values(rng, n, -1.5, 1.5);
  const auto x2 = random_values(rng, n, -1.5, 1.5);
  const auto x3 = random_values(rng, n, -1.5, 1.5);
  kernels::PointBatch batch{{x1, x2, x3}, n};
  for (int trial = 0; trial < 25; ++trial) {
    const auto e = testing::random_expression(rng, 3, 4);
    std::vector<double> ref(n);
    e.tape().evaluate_batch(batch, ref, kernels::scalar_kernels());
    for (std::size_t i = 0; i < n; ++i) {
      const double p[3] = {x1[i], x2[i], x3[i]};
      const double direct = e.evaluate(p);
      REQUIRE(std::fabs(ref[i] - direct) <= 1e-12 * (1.0 + std::fabs(direct)));
    }
    for (const auto* simd : simd_tables()) {
      std::vector<double> got(n);
      e.tape().evaluate_batch(batch, got, *simd);
      for (std::size_t i = 0; i < n; ++i) REQUIRE(same_bits(ref[i], got[i]));
    }
  }
}
