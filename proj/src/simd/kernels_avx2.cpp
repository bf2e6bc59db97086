// Compiled with -mavx2 -mfma. Nothing here may run before isa_supported(Isa::avx2).

#include <immintrin.h>

#include "facesim/simd/kernels.hpp"

namespace facesim::simd {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    i += 4;
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_avx2(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(a + r * cols, x, cols);
}

void rank1_update_avx2(double* a, const double* u, const double* v, std::size_t rows,
                       std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (u[r] != 0.0) axpy_avx2(u[r], v, a + r * cols, cols);
  }
}

void momentum_step_avx2(double* w, double* velocity, const double* grad, std::size_t n, double lr,
                        double momentum, double decay) {
  const __m256d vm = _mm256_set1_pd(momentum);
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d vdecay = _mm256_set1_pd(decay);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d wi = _mm256_loadu_pd(w + i);
    const __m256d step = _mm256_fmadd_pd(vdecay, wi, _mm256_loadu_pd(grad + i));
    const __m256d vel = _mm256_fnmadd_pd(vlr, step, _mm256_mul_pd(vm, _mm256_loadu_pd(velocity + i)));
    _mm256_storeu_pd(velocity + i, vel);
    _mm256_storeu_pd(w + i, _mm256_add_pd(wi, vel));
  }
  for (; i < n; ++i) {
    velocity[i] = momentum * velocity[i] - lr * (grad[i] + decay * w[i]);
    w[i] += velocity[i];
  }
}

}  // namespace

namespace detail {
const KernelTable avx2_table{Isa::avx2,         dot_avx2,          axpy_avx2, gemv_avx2,
                             rank1_update_avx2, momentum_step_avx2};
}  // namespace detail

}  // namespace facesim::simd
