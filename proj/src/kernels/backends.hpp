#pragma once

#include "nonholo/kernels/dispatch.hpp"

namespace nonholo::kernels::detail {

// Shared by all backends so that transcendental results never depend on the
// selected backend.
void sin_loop(const double* a, double* out, std::size_t n);
void cos_loop(const double* a, double* out, std::size_t n);
void exp_loop(const double* a, double* out, std::size_t n);

const KernelTable* avx2_table();  // nullptr when not compiled in
const KernelTable* neon_table();  // nullptr when not compiled in

}  // namespace nonholo::kernels::detail
