#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ncslice/gf256.hpp"

namespace ncslice::gf256 {

// Dense row-major matrix over GF(2^8).
class FieldMatrix {
 public:
  FieldMatrix() = default;
  FieldMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}
  FieldMatrix(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    data_.resize(rows_ * cols_, 0);
  }

  static FieldMatrix identity(std::size_t n) {
    FieldMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::uint8_t& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  std::uint8_t operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<std::uint8_t> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const std::uint8_t> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  void append_row(std::span<const std::uint8_t> values) {
    data_.insert(data_.end(), values.begin(), values.end());
    data_.resize((rows_ + 1) * cols_, 0);
    ++rows_;
  }

  void swap_rows(std::size_t a, std::size_t b) noexcept {
    if (a == b) return;
    for (std::size_t c = 0; c < cols_; ++c) std::swap((*this)(a, c), (*this)(b, c));
  }

  const std::vector<std::uint8_t>& entries() const noexcept { return data_; }

  friend bool operator==(const FieldMatrix&, const FieldMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> data_;
};

struct RrefResult {
  FieldMatrix reduced;
  std::size_t rank = 0;
  std::vector<std::size_t> pivot_cols;
};

// Reduced row-echelon form. The pivot for each column is the first row at or
// below the current pivot row with a nonzero entry; output is deterministic.
inline RrefResult rref_rank(FieldMatrix m) {
  RrefResult out;
  std::size_t pivot_row = 0;
  for (std::size_t col = 0; col < m.cols() && pivot_row < m.rows(); ++col) {
    std::size_t r = pivot_row;
    while (r < m.rows() && m(r, col) == 0) ++r;
    if (r == m.rows()) continue;
    m.swap_rows(r, pivot_row);
    scale(m.row(pivot_row), inv(m(pivot_row, col)));
    for (std::size_t other = 0; other < m.rows(); ++other) {
      if (other == pivot_row) continue;
      const std::uint8_t f = m(other, col);
      if (f != 0) axpy(m.row(other), f, m.row(pivot_row));
    }
    out.pivot_cols.push_back(col);
    ++pivot_row;
  }
  out.rank = pivot_row;
  out.reduced = std::move(m);
  return out;
}

}  // namespace ncslice::gf256
