#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace facesim {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static Matrix identity(std::size_t n);
  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Thin wrappers over the active SIMD kernel table. Sizes are the caller's
// responsibility; higher layers check dimensions before reaching here.
double dot(std::span<const double> x, std::span<const double> y) noexcept;
double norm(std::span<const double> x) noexcept;
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;
/// y = A x
void gemv(const Matrix& a, std::span<const double> x, std::span<double> y) noexcept;
Vector gemv(const Matrix& a, std::span<const double> x);
/// A += u v^T
void rank1_update(Matrix& a, std::span<const double> u, std::span<const double> v) noexcept;

bool all_finite(std::span<const double> x) noexcept;

}  // namespace facesim
