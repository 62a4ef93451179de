#include <cmath>
#include <cstdlib>

#include "backends.hpp"

namespace nonholo::kernels {
namespace detail {

void sin_loop(const double* a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::sin(a[i]);
}

void cos_loop(const double* a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::cos(a[i]);
}

void exp_loop(const double* a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(a[i]);
}

}  // namespace detail

namespace {

void add(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void div(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] / b[i];
}

void neg(const double* a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = -a[i];
}

void fill(double value, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = value;
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
  for (std::size_t i = 0; i < n; ++i) out[i] = pow_one(a[i], exponent);
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

std::size_t max_abs_index(const double* a, std::size_t n) {
  std::size_t best = n;
  double best_value = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::fabs(a[i]);
    if (v > best_value) {  // NaN compares false
      best_value = v;
      best = i;
    }
  }
  return best;
}

constexpr KernelTable kScalar{
    Backend::Scalar, "scalar", add, sub, mul, div, neg, fill, pow_int,
    detail::sin_loop, detail::cos_loop, detail::exp_loop, dot, sum, max_abs_index};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

}  // namespace nonholo::kernels
