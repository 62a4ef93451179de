#pragma once

// Elementwise and reduction kernels over contiguous double arrays.
//
// Every backend must produce bit-identical results for the elementwise
// kernels (the transcendental ones call into libm in all backends).
// Reductions may differ by summation order only.

#include <cstddef>
#include <string_view>

namespace nonholo::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  Backend backend;
  const char* name;

  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  void (*div)(const double* a, const double* b, double* out, std::size_t n);
  void (*neg)(const double* a, double* out, std::size_t n);
  void (*fill)(double value, double* out, std::size_t n);
  // Binary exponentiation; negative exponents take the reciprocal last.
  void (*pow_int)(const double* a, int exponent, double* out, std::size_t n);
  void (*sin)(const double* a, double* out, std::size_t n);
  void (*cos)(const double* a, double* out, std::size_t n);
  void (*exp)(const double* a, double* out, std::size_t n);

  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  // First index of the largest |a[i]|, NaN entries skipped. Returns n when
  // no finite entry exists.
  std::size_t (*max_abs_index)(const double* a, std::size_t n);
};

const KernelTable& scalar_kernels();
bool backend_available(Backend backend);
// Throws std::invalid_argument when the backend is not compiled in or the CPU
// lacks the instruction set.
const KernelTable& kernels_for(Backend backend);

// Best available backend, unless NONHOLO_SIMD=scalar|avx2|neon overrides it
// or force_backend() was called.
const KernelTable& active_kernels();
void force_backend(Backend backend);
void reset_backend();

std::string_view backend_name(Backend backend);

}  // namespace nonholo::kernels
