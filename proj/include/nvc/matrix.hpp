#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nvc/error.hpp"

namespace nvc {

// Dense row-major matrix of doubles. Rows are observations, columns are
// coordinates.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  // Builds an n x d matrix from d columns of equal length n.
  static Matrix from_columns(std::span<const std::span<const double>> columns) {
    if (columns.empty()) return {};
    const std::size_t n = columns.front().size();
    Matrix m(n, columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (columns[c].size() != n) throw InvalidArgument("Matrix::from_columns: ragged columns");
      for (std::size_t r = 0; r < n; ++r) m(r, c) = columns[c][r];
    }
    return m;
  }

  static Matrix from_columns(const std::vector<std::vector<double>>& columns) {
    std::vector<std::span<const double>> views(columns.begin(), columns.end());
    return from_columns(std::span<const std::span<const double>>(views));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  std::span<const double> data() const noexcept { return data_; }

  bool all_finite() const noexcept {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Squared Euclidean distance, accumulated in coordinate order. Every
// neighbor search in the library goes through this so exact ties compare
// bit-identically across search strategies.
inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

}  // namespace nvc
