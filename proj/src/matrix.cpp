#include "kacov/matrix.hpp"

namespace kacov {

SquareMatrix permuted(const SquareMatrix& m, std::span<const std::size_t> perm) {
  const std::size_t n = m.size();
  SquareMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = m.row(perm[i]);
    auto dst = out.row(i);
    for (std::size_t j = 0; j < n; ++j) dst[j] = src[perm[j]];
  }
  return out;
}

}  // namespace kacov
