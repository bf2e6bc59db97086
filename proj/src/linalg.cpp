#include "facesim/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "facesim/simd/kernels.hpp"

namespace facesim {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const noexcept { return facesim::all_finite(data_); }

double dot(std::span<const double> x, std::span<const double> y) noexcept {
  return simd::active().dot(x.data(), y.data(), x.size());
}

double norm(std::span<const double> x) noexcept { return std::sqrt(dot(x, x)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
  simd::active().axpy(alpha, x.data(), y.data(), x.size());
}

void gemv(const Matrix& a, std::span<const double> x, std::span<double> y) noexcept {
  simd::active().gemv(a.values().data(), x.data(), y.data(), a.rows(), a.cols());
}

Vector gemv(const Matrix& a, std::span<const double> x) {
  Vector y(a.rows());
  gemv(a, x, y);
  return y;
}

void rank1_update(Matrix& a, std::span<const double> u, std::span<const double> v) noexcept {
  simd::active().rank1_update(a.values().data(), u.data(), v.data(), a.rows(), a.cols());
}

bool all_finite(std::span<const double> x) noexcept {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace facesim
