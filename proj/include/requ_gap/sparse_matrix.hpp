#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace requ_gap {

/// One stored coefficient of a coordinate-list matrix.
struct MatrixEntry {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;

  friend bool operator==(const MatrixEntry&, const MatrixEntry&) = default;
};

/// Coordinate-list sparse matrix.
///
/// Entries are kept sorted by (row, col). Zeros passed to the constructor are
/// dropped, so `nonzeros()` is the literal l0 count of the matrix.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<MatrixEntry> entries = {})
      : rows_(rows), cols_(cols) {
    std::erase_if(entries, [](const MatrixEntry& e) { return e.value == 0.0; });
    std::sort(entries.begin(), entries.end(), [](const MatrixEntry& a, const MatrixEntry& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const auto& e = entries[k];
      if (e.row >= rows_ || e.col >= cols_) {
        throw std::out_of_range("matrix entry (" + std::to_string(e.row) + ", " + std::to_string(e.col) +
                                ") outside " + std::to_string(rows_) + "x" + std::to_string(cols_));
      }
      if (!std::isfinite(e.value)) {
        throw std::invalid_argument("matrix entry is not finite");
      }
      if (k > 0 && entries[k - 1].row == e.row && entries[k - 1].col == e.col) {
        throw std::invalid_argument("duplicate matrix entry (" + std::to_string(e.row) + ", " +
                                    std::to_string(e.col) + ")");
      }
    }
    entries_ = std::move(entries);
  }

  static SparseMatrix from_dense(std::size_t rows, std::size_t cols, std::span<const double> row_major) {
    if (row_major.size() != rows * cols) {
      throw std::invalid_argument("dense data size does not match matrix shape");
    }
    std::vector<MatrixEntry> entries;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        entries.push_back({i, j, row_major[i * cols + j]});
      }
    }
    return {rows, cols, std::move(entries)};
  }

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] std::size_t nonzeros() const noexcept { return entries_.size(); }
  [[nodiscard]] const std::vector<MatrixEntry>& entries() const noexcept { return entries_; }

  [[nodiscard]] double max_abs() const noexcept {
    double m = 0.0;
    for (const auto& e : entries_) m = std::max(m, std::abs(e.value));
    return m;
  }

  [[nodiscard]] double at(std::size_t i, std::size_t j) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), MatrixEntry{i, j, 0.0},
                               [](const MatrixEntry& a, const MatrixEntry& b) {
                                 return a.row != b.row ? a.row < b.row : a.col < b.col;
                               });
    return (it != entries_.end() && it->row == i && it->col == j) ? it->value : 0.0;
  }

  /// y += A x
  template <class T>
  void multiply_add(std::span<const T> x, std::span<T> y) const {
    for (const auto& e : entries_) y[e.row] += T(e.value) * x[e.col];
  }

  /// Largest row sum of |a_ij|, i.e. the l-inf operator norm.
  [[nodiscard]] double max_row_abs_sum() const {
    std::vector<double> sums(rows_, 0.0);
    for (const auto& e : entries_) sums[e.row] += std::abs(e.value);
    return sums.empty() ? 0.0 : *std::max_element(sums.begin(), sums.end());
  }

  [[nodiscard]] SparseMatrix scaled(double factor) const {
    std::vector<MatrixEntry> out = entries_;
    for (auto& e : out) e.value *= factor;
    return {rows_, cols_, std::move(out)};
  }

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<MatrixEntry> entries_;
};

}  // namespace requ_gap
