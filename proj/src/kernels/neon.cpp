#include "backends.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

#include <cmath>
#include <cstdlib>

namespace nonholo::kernels::detail {
namespace {

constexpr std::size_t kLanes = 2;

void add(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) vst1q_f64(out + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void div(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) vst1q_f64(out + i, vdivq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] / b[i];
}

void neg(const double* a, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) vst1q_f64(out + i, vnegq_f64(vld1q_f64(a + i)));
  for (; i < n; ++i) out[i] = -a[i];
}

void fill(double value, double* out, std::size_t n) {
  const float64x2_t v = vdupq_n_f64(value);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) vst1q_f64(out + i, v);
  for (; i < n; ++i) out[i] = value;
}

double pow_one(double base, int exponent) {
  unsigned k = static_cast<unsigned>(std::abs(exponent));
  double result = 1.0;
  while (k != 0) {
    if (k & 1u) result = result * base;
    k >>= 1u;
    if (k != 0) base = base * base;
  }
  return exponent < 0 ? 1.0 / result : result;
}

void pow_int(const double* a, int exponent, double* out, std::size_t n) {
  const unsigned magnitude = static_cast<unsigned>(std::abs(exponent));
  const float64x2_t one = vdupq_n_f64(1.0);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    float64x2_t base = vld1q_f64(a + i);
    float64x2_t result = one;
    unsigned k = magnitude;
    while (k != 0) {
      if (k & 1u) result = vmulq_f64(result, base);
      k >>= 1u;
      if (k != 0) base = vmulq_f64(base, base);
    }
    if (exponent < 0) result = vdivq_f64(one, result);
    vst1q_f64(out + i, result);
  }
  for (; i < n; ++i) out[i] = pow_one(a[i], exponent);
}

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  // vmulq + vaddq rather than vfmaq to keep the rounding of the scalar kernel
  for (; i + kLanes <= n; i += kLanes) acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  double total = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

double sum(const double* a, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) acc = vaddq_f64(acc, vld1q_f64(a + i));
  double total = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) total += a[i];
  return total;
}

std::size_t max_abs_index(const double* a, std::size_t n) {
  double peak = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::fabs(a[i]);
    if (v > peak) peak = v;
  }
  if (peak < 0.0) return n;
  for (std::size_t j = 0; j < n; ++j) {
    if (std::fabs(a[j]) == peak) return j;
  }
  return n;
}

constexpr KernelTable kNeon{Backend::Neon, "neon", add, sub, mul, div, neg, fill, pow_int,
                            sin_loop, cos_loop, exp_loop, dot, sum, max_abs_index};

}  // namespace

const KernelTable* neon_table() { return &kNeon; }

}  // namespace nonholo::kernels::detail

#else

namespace nonholo::kernels::detail {
const KernelTable* neon_table() { return nullptr; }
}  // namespace nonholo::kernels::detail

#endif
