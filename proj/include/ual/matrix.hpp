#ifndef UAL_MATRIX_HPP
#define UAL_MATRIX_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ual/error.hpp"

namespace ual {

/// Dense row-major 2-D array.
template <typename T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw ShapeError("matrix data length " + std::to_string(data_.size()) + " != " +
                       std::to_string(rows_) + "x" + std::to_string(cols_));
    }
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<T>> rows) {
    const std::size_t n = rows.size();
    const std::size_t m = n == 0 ? 0 : rows.begin()->size();
    std::vector<T> data;
    data.reserve(n * m);
    for (const auto& r : rows) {
      if (r.size() != m) throw ShapeError("ragged initializer for matrix");
      data.insert(data.end(), r.begin(), r.end());
    }
    return Matrix(n, m, std::move(data));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  Matrix select_rows(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      if (indices[i] >= rows_) throw ShapeError("row index out of range");
      std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(indices[i] * cols_), cols_,
                  out.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
    }
    return out;
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using LabelMatrix = Matrix<std::size_t>;

inline bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

inline std::string shape_string(const RealMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

/// a (n x k) times transpose(b) (m x k) -> n x m.
inline RealMatrix matmul_bt(const RealMatrix& a, const RealMatrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_bt: " + shape_string(a) + " vs " + shape_string(b));
  }
  RealMatrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ar = a.row(i);
    auto orow = out.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const auto br = b.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < ar.size(); ++k) acc += ar[k] * br[k];
      orow[j] = acc;
    }
  }
  return out;
}

/// transpose(a) (n x m) times b (n x k) -> m x k.
inline RealMatrix matmul_at(const RealMatrix& a, const RealMatrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul_at: " + shape_string(a) + " vs " + shape_string(b));
  }
  RealMatrix out(a.cols(), b.cols());
  for (std::size_t n = 0; n < a.rows(); ++n) {
    const auto ar = a.row(n);
    const auto br = b.row(n);
    for (std::size_t i = 0; i < ar.size(); ++i) {
      const double s = ar[i];
      if (s == 0.0) continue;
      auto orow = out.row(i);
      for (std::size_t k = 0; k < br.size(); ++k) orow[k] += s * br[k];
    }
  }
  return out;
}

/// a (n x k) times b (k x m) -> n x m.
inline RealMatrix matmul(const RealMatrix& a, const RealMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + shape_string(a) + " vs " + shape_string(b));
  }
  RealMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ar = a.row(i);
    auto orow = out.row(i);
    for (std::size_t k = 0; k < ar.size(); ++k) {
      const double s = ar[k];
      if (s == 0.0) continue;
      const auto br = b.row(k);
      for (std::size_t j = 0; j < br.size(); ++j) orow[j] += s * br[j];
    }
  }
  return out;
}

/// Index of the largest entry; ties go to the lowest index.
inline std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw ArgumentError("argmax of empty range");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

/// Throws unless every row is a probability vector (entries >= 0, sum 1 +- tol).
inline void require_probability_rows(const RealMatrix& probs, double tol = 1e-6) {
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    double sum = 0.0;
    for (double p : probs.row(i)) {
      if (!std::isfinite(p) || p < 0.0) {
        throw ArgumentError("row " + std::to_string(i) + " has a negative or non-finite entry");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > tol) {
      throw ArgumentError("row " + std::to_string(i) + " is not normalized (sum " +
                          std::to_string(sum) + ")");
    }
  }
}

}  // namespace ual

#endif  // UAL_MATRIX_HPP
