#pragma once

// Dense double-precision kernels behind every inner loop of the library.
//
// Each instruction set provides the same table of functions. The scalar table
// is the reference; wider variants must agree with it to rounding (they may
// reassociate sums and contract into FMA). The active table is chosen once at
// first use from the CPU's capabilities and can be pinned with force_isa() so
// that runs are comparable across machines.

#include <cstddef>
#include <string_view>

namespace facesim::simd {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa) noexcept;
/// Parses "scalar" / "avx2"; returns false on anything else.
bool parse_isa(std::string_view text, Isa& out) noexcept;

struct KernelTable {
  Isa isa;
  /// sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// y = A x for a row-major rows x cols matrix A.
  void (*gemv)(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols);
  /// A += u v^T for a row-major rows x cols matrix A.
  void (*rank1_update)(double* a, const double* u, const double* v, std::size_t rows,
                       std::size_t cols);
  /// Heavy-ball SGD with coupled weight decay:
  ///   velocity = momentum * velocity - lr * (grad + decay * w);  w += velocity
  void (*momentum_step)(double* w, double* velocity, const double* grad, std::size_t n,
                        double lr, double momentum, double decay);
};

/// True when this build carries the variant and the running CPU can execute it.
bool isa_supported(Isa isa) noexcept;

/// The table for a specific variant. Throws ValidationError if unsupported.
const KernelTable& kernels_for(Isa isa);

/// The table every library routine uses.
const KernelTable& active() noexcept;

/// Pins the active variant. Throws ValidationError if unsupported.
void force_isa(Isa isa);

/// Returns selection to automatic detection.
void reset_isa() noexcept;

namespace detail {
extern const KernelTable scalar_table;
#if defined(FACESIM_HAVE_AVX2_KERNELS)
extern const KernelTable avx2_table;
#endif
}  // namespace detail

}  // namespace facesim::simd
