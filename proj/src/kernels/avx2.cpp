// Compiled with -mavx2 (see CMakeLists.txt); only reached after a runtime
// CPU check in dispatch.cpp.

#include "backends.hpp"

#if defined(NONHOLO_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>
#include <cstdlib>

namespace nonholo::kernels::detail {
namespace {

constexpr std::size_t kLanes = 4;

template <typename VecOp, typename ScalarOp>
inline void binary(const double* a, const double* b, double* out, std::size_t n,
                   VecOp vop, ScalarOp sop) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(out + i, vop(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = sop(a[i], b[i]);
}

void add(const double* a, const double* b, double* out, std::size_t n) {
  binary(a, b, out, n, [](__m256d x, __m256d y) { return _mm256_add_pd(x, y); },
         [](double x, double y) { return x + y; });
}

void sub(const double* a, const double* b, double* out, std::size_t n) {
  binary(a, b, out, n, [](__m256d x, __m256d y) { return _mm256_sub_pd(x, y); },
         [](double x, double y) { return x - y; });
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  binary(a, b, out, n, [](__m256d x, __m256d y) { return _mm256_mul_pd(x, y); },
         [](double x, double y) { return x * y; });
}

void div(const double* a, const double* b, double* out, std::size_t n) {
  binary(a, b, out, n, [](__m256d x, __m256d y) { return _mm256_div_pd(x, y); },
         [](double x, double y) { return x / y; });
}

void neg(const double* a, double* out, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(out + i, _mm256_xor_pd(_mm256_loadu_pd(a + i), sign));
  }
  for (; i < n; ++i) out[i] = -a[i];
}

void fill(double value, double* out, std::size_t n) {
  const __m256d v = _mm256_set1_pd(value);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) _mm256_storeu_pd(out + i, v);
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

// Same multiply sequence as the scalar kernel, one lane per element.
void pow_int(const double* a, int exponent, double* out, std::size_t n) {
  const unsigned magnitude = static_cast<unsigned>(std::abs(exponent));
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d base = _mm256_loadu_pd(a + i);
    __m256d result = one;
    unsigned k = magnitude;
    while (k != 0) {
      if (k & 1u) result = _mm256_mul_pd(result, base);
      k >>= 1u;
      if (k != 0) base = _mm256_mul_pd(base, base);
    }
    if (exponent < 0) result = _mm256_div_pd(one, result);
    _mm256_storeu_pd(out + i, result);
  }
  for (; i < n; ++i) out[i] = pow_one(a[i], exponent);
}

double horizontal_sum(__m256d v) {
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double total = horizontal_sum(acc);
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

double sum(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double total = horizontal_sum(acc);
  for (; i < n; ++i) total += a[i];
  return total;
}

std::size_t max_abs_index(const double* a, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d best = _mm256_set1_pd(-1.0);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d v = _mm256_andnot_pd(sign, _mm256_loadu_pd(a + i));
    best = _mm256_max_pd(v, best);  // NaN in v yields best
  }
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, best);
  double peak = lanes[0];
  for (std::size_t l = 1; l < kLanes; ++l) peak = lanes[l] > peak ? lanes[l] : peak;
  for (; i < n; ++i) {
    const double v = std::fabs(a[i]);
    if (v > peak) peak = v;
  }
  if (peak < 0.0) return n;
  for (std::size_t j = 0; j < n; ++j) {
    if (std::fabs(a[j]) == peak) return j;
  }
  return n;
}

constexpr KernelTable kAvx2{Backend::Avx2, "avx2", add, sub, mul, div, neg, fill, pow_int,
                            sin_loop, cos_loop, exp_loop, dot, sum, max_abs_index};

}  // namespace

const KernelTable* avx2_table() { return &kAvx2; }

}  // namespace nonholo::kernels::detail

#else

namespace nonholo::kernels::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace nonholo::kernels::detail

#endif
