#pragma once

#include <cstddef>
#include <string_view>

namespace kacov::simd {

// Reduction kernels used by the Gram builders and the U-statistic
// brackets. Every variant in a table computes the same mathematical
// quantity; variants differ only in summation order, so results agree to
// rounding but are not bit-identical across variants. Within one variant
// the order is fixed, which is what the determinism contracts rely on.
struct KernelTable {
  std::string_view name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  // sum_i (a_i - b_i) * (c_i - d_i)
  double (*diff_dot)(const double* a, const double* b, const double* c, const double* d,
                     std::size_t n);
  // sum_i (a_i - b_i)^2
  double (*sq_dist)(const double* a, const double* b, std::size_t n);
  // sum_i |a_i - b_i|
  double (*l1_dist)(const double* a, const double* b, std::size_t n);
  // sum_i |a_i|
  double (*l1_norm)(const double* a, std::size_t n);
};

const KernelTable& scalar_table() noexcept;

// nullptr when the variant was not compiled in or the CPU lacks support.
const KernelTable* avx2_table() noexcept;

// The table picked at first use: AVX2 when available, scalar otherwise.
// KACOV_SIMD=scalar in the environment forces the scalar reference.
const KernelTable& active() noexcept;

}  // namespace kacov::simd
