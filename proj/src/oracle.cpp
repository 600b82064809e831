// Brute-force U-statistics over ordered tuples of distinct indices. The
// angles are recomputed here entry by entry from the Gram matrix so this
// path shares nothing with the matrix formulas in estimators.cpp.

#include "kacov/estimators.hpp"

#include "kacov/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace kacov {
namespace {

double clamped_acos(double c) { return std::acos(std::clamp(c, -1.0, 1.0)); }

double prime_angle(const GramMatrix& g, std::size_t i, std::size_t j) {
  if (i == j) return 0.0;
  return clamped_acos((g(i, j) + 1.0) / std::sqrt((g(i, i) + 1.0) * (g(j, j) + 1.0)));
}

double vertex_angle(const GramMatrix& g, std::size_t i, std::size_t j, std::size_t k) {
  if (i == k || j == k || i == j) return 0.0;
  const double di = g(i, i) - 2.0 * g(i, k) + g(k, k);
  const double dj = g(j, j) - 2.0 * g(j, k) + g(k, k);
  if (di <= kDuplicateDistance || dj <= kDuplicateDistance) return 0.0;
  return clamped_acos((g(i, j) - g(i, k) - g(j, k) + g(k, k)) / std::sqrt(di * dj));
}

// a[(i * n + j) * n + k] = ang(z_i, z_j; z_k)
std::vector<double> vertex_cube(const GramMatrix& g) {
  const std::size_t n = g.size();
  std::vector<double> a(n * n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) a[(i * n + j) * n + k] = vertex_angle(g, i, j, k);
  return a;
}

double falling(std::size_t n, std::size_t m) {
  double p = 1.0;
  for (std::size_t i = 0; i < m; ++i) p *= static_cast<double>(n - i);
  return p;
}

}  // namespace

KacovValue kacov_oracle(int m, const GramMatrix& gx, const GramMatrix& gy) {
  const std::size_t n = gx.size();
  if (gy.size() != n) throw Error(ErrorCode::InputError, "X and Y have different sample counts");
  const std::size_t need = min_sample_size(m);
  if (n < need) {
    throw Error(ErrorCode::SampleTooSmall, "oracle for KAcov" + std::to_string(m) +
                                               " needs n >= " + std::to_string(need));
  }
  if (n > 12) {
    throw Error(ErrorCode::OracleTooLarge,
                "brute-force oracle refuses n = " + std::to_string(n) + " > 12");
  }

  double total = 0.0;
  if (m == 1) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == i || k == j) continue;
          for (std::size_t l = 0; l < n; ++l) {
            if (l == i || l == j || l == k) continue;
            const double a = prime_angle(gx, i, j);
            total += a * prime_angle(gy, i, j) - 2.0 * a * prime_angle(gy, i, k) +
                     a * prime_angle(gy, k, l);
          }
        }
      }
    return {1, total / falling(n, 4), n};
  }

  const auto a = vertex_cube(gx);
  const auto b = vertex_cube(gy);
  auto at = [n](const std::vector<double>& c, std::size_t i, std::size_t j, std::size_t k) {
    return c[(i * n + j) * n + k];
  };

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        for (std::size_t l = 0; l < n; ++l) {
          if (l == i || l == j || l == k) continue;
          for (std::size_t r = 0; r < n; ++r) {
            if (r == i || r == j || r == k || r == l) continue;
            const double air = at(a, i, j, r);
            if (m == 2) {
              total += air * at(b, i, j, r) - 2.0 * air * at(b, i, k, r) + air * at(b, k, l, r);
              continue;
            }
            for (std::size_t t = 0; t < n; ++t) {
              if (t == i || t == j || t == k || t == l || t == r) continue;
              total += air * at(b, i, j, t) - 2.0 * air * at(b, i, k, t) + air * at(b, k, l, t);
            }
          }
        }
      }
    }
  return {m, total / falling(n, m == 2 ? 5 : 6), n};
}

}  // namespace kacov
