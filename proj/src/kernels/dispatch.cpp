#include "nonholo/kernels/dispatch.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "backends.hpp"

namespace nonholo::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* lookup(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return &scalar_kernels();
    case Backend::Avx2:
      return cpu_has_avx2() ? detail::avx2_table() : nullptr;
    case Backend::Neon:
      return detail::neon_table();
  }
  return nullptr;
}

const KernelTable* detect() {
  if (const char* env = std::getenv("NONHOLO_SIMD")) {
    const std::string choice(env);
    if (choice == "scalar") return &scalar_kernels();
    if (choice == "avx2" && lookup(Backend::Avx2)) return lookup(Backend::Avx2);
    if (choice == "neon" && lookup(Backend::Neon)) return lookup(Backend::Neon);
  }
  if (const KernelTable* t = lookup(Backend::Avx2)) return t;
  if (const KernelTable* t = lookup(Backend::Neon)) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{detect()};
  return slot;
}

}  // namespace

bool backend_available(Backend backend) { return lookup(backend) != nullptr; }

const KernelTable& kernels_for(Backend backend) {
  const KernelTable* table = lookup(backend);
  if (table == nullptr) {
    throw std::invalid_argument("kernel backend not available: " + std::string(backend_name(backend)));
  }
  return *table;
}

const KernelTable& active_kernels() { return *active_slot().load(std::memory_order_acquire); }

void force_backend(Backend backend) {
  active_slot().store(&kernels_for(backend), std::memory_order_release);
}

void reset_backend() { active_slot().store(detect(), std::memory_order_release); }

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace nonholo::kernels
