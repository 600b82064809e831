// AVX2 + FMA kernels. Compiled with -mavx2 -mfma; only reached through
// avx2_table() after a runtime CPU check.
//
// Layout of every reduction: four independent 4-lane accumulators over
// blocks of 16, then one 4-lane accumulator over blocks of 4, then a scalar
// tail. The horizontal fold order is fixed.

#include "kacov/simd.hpp"

#include <immintrin.h>

#include <cmath>

namespace kacov::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);  // (l0+l2, l1+l3)
  return _mm_cvtsd_f64(s) + _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
}

inline __m256d fold(__m256d a0, __m256d a1, __m256d a2, __m256d a3) {
  return _mm256_add_pd(_mm256_add_pd(a0, a1), _mm256_add_pd(a2, a3));
}

inline __m256d abs_pd(__m256d v) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  return _mm256_and_pd(v, mask);
}

// Generic driver: `step(i)` returns the 4-lane contribution at offset i,
// `tail(i)` the scalar contribution of element i; accumulation is a plain add.
template <class Step, class Tail>
inline double reduce(std::size_t n, Step step, Tail tail) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  __m256d a2 = _mm256_setzero_pd();
  __m256d a3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    a0 = step(i, a0);
    a1 = step(i + 4, a1);
    a2 = step(i + 8, a2);
    a3 = step(i + 12, a3);
  }
  __m256d acc = fold(a0, a1, a2, a3);
  for (; i + 4 <= n; i += 4) acc = step(i, acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += tail(i);
  return s;
}

double dot(const double* a, const double* b, std::size_t n) {
  return reduce(
      n,
      [=](std::size_t i, __m256d acc) {
        return _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
      },
      [=](std::size_t i) { return a[i] * b[i]; });
}

double sum(const double* a, std::size_t n) {
  return reduce(
      n, [=](std::size_t i, __m256d acc) { return _mm256_add_pd(_mm256_loadu_pd(a + i), acc); },
      [=](std::size_t i) { return a[i]; });
}

double diff_dot(const double* a, const double* b, const double* c, const double* d,
                std::size_t n) {
  return reduce(
      n,
      [=](std::size_t i, __m256d acc) {
        const __m256d x = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        const __m256d y = _mm256_sub_pd(_mm256_loadu_pd(c + i), _mm256_loadu_pd(d + i));
        return _mm256_fmadd_pd(x, y, acc);
      },
      [=](std::size_t i) { return (a[i] - b[i]) * (c[i] - d[i]); });
}

double sq_dist(const double* a, const double* b, std::size_t n) {
  return reduce(
      n,
      [=](std::size_t i, __m256d acc) {
        const __m256d x = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        return _mm256_fmadd_pd(x, x, acc);
      },
      [=](std::size_t i) {
        const double x = a[i] - b[i];
        return x * x;
      });
}

double l1_dist(const double* a, const double* b, std::size_t n) {
  return reduce(
      n,
      [=](std::size_t i, __m256d acc) {
        const __m256d x = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        return _mm256_add_pd(abs_pd(x), acc);
      },
      [=](std::size_t i) { return std::fabs(a[i] - b[i]); });
}

double l1_norm(const double* a, std::size_t n) {
  return reduce(
      n, [=](std::size_t i, __m256d acc) { return _mm256_add_pd(abs_pd(_mm256_loadu_pd(a + i)), acc); },
      [=](std::size_t i) { return std::fabs(a[i]); });
}

}  // namespace

const KernelTable& avx2_kernels() noexcept {
  static const KernelTable table{"avx2", dot, sum, diff_dot, sq_dist, l1_dist, l1_norm};
  return table;
}

}  // namespace kacov::simd
