#include <atomic>

#include "facesim/error.hpp"
#include "facesim/simd/kernels.hpp"

namespace facesim::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(FACESIM_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* detect() noexcept {
#if defined(FACESIM_HAVE_AVX2_KERNELS)
  if (cpu_has_avx2()) return &detail::avx2_table;
#endif
  return &detail::scalar_table;
}

std::atomic<const KernelTable*>& slot() noexcept {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

bool parse_isa(std::string_view text, Isa& out) noexcept {
  if (text == "scalar") {
    out = Isa::scalar;
    return true;
  }
  if (text == "avx2") {
    out = Isa::avx2;
    return true;
  }
  return false;
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
      return cpu_has_avx2();
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw ValidationError("kernel variant '" + std::string(to_string(isa)) +
                          "' is not available on this machine");
  }
#if defined(FACESIM_HAVE_AVX2_KERNELS)
  if (isa == Isa::avx2) return detail::avx2_table;
#endif
  return detail::scalar_table;
}

const KernelTable& active() noexcept { return *slot().load(std::memory_order_acquire); }

void force_isa(Isa isa) { slot().store(&kernels_for(isa), std::memory_order_release); }

void reset_isa() noexcept { slot().store(detect(), std::memory_order_release); }

}  // namespace facesim::simd
