#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace mscorr {

/// Dense column-major matrix. Columns are stocks throughout the library, so
/// column access is contiguous.
template <typename T>
class ColumnMatrix {
 public:
  ColumnMatrix() = default;
  ColumnMatrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[c * rows_ + r];
  }
  const T& operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[c * rows_ + r];
  }

  std::span<T> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
  std::span<const T> col(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }

  std::span<const T> data() const noexcept { return data_; }

  friend bool operator==(const ColumnMatrix&, const ColumnMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

}  // namespace mscorr
