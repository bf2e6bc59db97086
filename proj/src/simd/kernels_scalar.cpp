#include "facesim/simd/kernels.hpp"

namespace facesim::simd {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* a, const double* x, double* y, std::size_t rows,
                 std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(a + r * cols, x, cols);
}

void rank1_update_scalar(double* a, const double* u, const double* v, std::size_t rows,
                         std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (u[r] != 0.0) axpy_scalar(u[r], v, a + r * cols, cols);
  }
}

void momentum_step_scalar(double* w, double* velocity, const double* grad, std::size_t n,
                          double lr, double momentum, double decay) {
  for (std::size_t i = 0; i < n; ++i) {
    velocity[i] = momentum * velocity[i] - lr * (grad[i] + decay * w[i]);
    w[i] += velocity[i];
  }
}

}  // namespace

namespace detail {
const KernelTable scalar_table{Isa::scalar,         dot_scalar,          axpy_scalar, gemv_scalar,
                               rank1_update_scalar, momentum_step_scalar};
}  // namespace detail

}  // namespace facesim::simd
