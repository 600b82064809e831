#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace kacov {

// Dense row-major n x n matrix of doubles.
class SquareMatrix {
public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  std::size_t size() const noexcept { return n_; }

  double& operator()(std::size_t i, std::size_t j) noexcept {
    assert(i < n_ && j < n_);
    return data_[i * n_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    assert(i < n_ && j < n_);
    return data_[i * n_ + j];
  }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * n_, n_}; }
  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * n_, n_}; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<const double> values() const noexcept { return data_; }

  bool operator==(const SquareMatrix&) const = default;

private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

// Returns P with P(i, j) = M(perm[i], perm[j]).
SquareMatrix permuted(const SquareMatrix& m, std::span<const std::size_t> perm);

}  // namespace kacov
