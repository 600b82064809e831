#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's angle or estimator code; inputs are plain coordinate arrays.

#include "kacov/kernels.hpp"
#include "kacov/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace support {

using Points = std::vector<std::vector<double>>;

inline Points random_points(std::size_t n, std::size_t dim, kacov::Rng& rng) {
  Points p(n, std::vector<double>(dim));
  for (auto& z : p)
    for (double& v : z) v = rng.normal();
  return p;
}

inline kacov::SampleSet to_samples(const Points& p) {
  std::vector<double> flat;
  for (const auto& z : p) flat.insert(flat.end(), z.begin(), z.end());
  return kacov::SampleSet::vectors(p.size(), p.empty() ? 0 : p[0].size(), std::move(flat));
}

// Random symmetric PSD Gram matrix M M^T with M n x r, r small so some
// geometry is degenerate-ish but still valid.
inline kacov::GramMatrix random_gram(std::size_t n, kacov::Rng& rng, std::size_t rank = 3) {
  std::vector<double> m(n * rank);
  for (double& v : m) v = rng.normal();
  kacov::SquareMatrix g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t u = 0; u < rank; ++u) s += m[i * rank + u] * m[j * rank + u];
      g(i, j) = g(j, i) = s;
    }
  return kacov::gram_from_matrix(std::move(g));
}

inline double norm(const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

inline double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t u = 0; u < a.size(); ++u) s += (a[u] - b[u]) * (a[u] - b[u]);
  return std::sqrt(s);
}

// Euclidean angle at vertex zk between zi and zj; 0 if i or j coincides with k.
inline double euclid_angle(const std::vector<double>& zi, const std::vector<double>& zj,
                           const std::vector<double>& zk) {
  double dot = 0.0, ni = 0.0, nj = 0.0;
  for (std::size_t u = 0; u < zi.size(); ++u) {
    const double a = zi[u] - zk[u], b = zj[u] - zk[u];
    dot += a * b;
    ni += a * a;
    nj += b * b;
  }
  if (ni == 0.0 || nj == 0.0) return 0.0;
  return std::acos(std::clamp(dot / std::sqrt(ni * nj), -1.0, 1.0));
}

// Projection covariance: the order-5 U-statistic with Euclidean vertex
// angles, summed literally over distinct (i, j, k, l, r).
inline double projection_covariance(const Points& x, const Points& y) {
  const std::size_t n = x.size();
  std::vector<double> a(n * n), b(n * n);
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        a[i * n + j] = (i == r || j == r) ? 0.0 : euclid_angle(x[i], x[j], x[r]);
        b[i * n + j] = (i == r || j == r) ? 0.0 : euclid_angle(y[i], y[j], y[r]);
      }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == r) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == r || j == i) continue;
        const double aij = a[i * n + j];
        for (std::size_t k = 0; k < n; ++k) {
          if (k == r || k == i || k == j) continue;
          const double bik = b[i * n + k];
          for (std::size_t l = 0; l < n; ++l) {
            if (l == r || l == i || l == j || l == k) continue;
            total += aij * (b[i * n + j] - 2.0 * bik + b[k * n + l]);
          }
        }
      }
    }
  }
  const double nn = static_cast<double>(n);
  return total / (nn * (nn - 1) * (nn - 2) * (nn - 3) * (nn - 4));
}

// Unbiased distance covariance with distances |x - y|^s via U-centred
// matrices built element by element.
inline double unbiased_dcov(const Points& x, const Points& y, double s) {
  const std::size_t n = x.size();
  auto centred = [&](const Points& p) {
    std::vector<double> d(n * n), row(n, 0.0);
    double all = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        d[i * n + j] = std::pow(dist(p[i], p[j]), s);
        row[i] += d[i * n + j];
        all += d[i * n + j];
      }
    std::vector<double> c(n * n, 0.0);
    const double nn = static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j)
          c[i * n + j] = d[i * n + j] - row[i] / (nn - 2) - row[j] / (nn - 2) +
                         all / ((nn - 1) * (nn - 2));
    return c;
  };
  const auto a = centred(x), b = centred(y);
  double s2 = 0.0;
  for (std::size_t i = 0; i < n * n; ++i) s2 += a[i] * b[i];
  return s2 / (static_cast<double>(n) * (static_cast<double>(n) - 3));
}

// Kolmogorov-Smirnov distance of a sample from Uniform(0, 1).
inline double ks_uniform(std::vector<double> p) {
  std::sort(p.begin(), p.end());
  const double n = static_cast<double>(p.size());
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - p[i]));
    d = std::max(d, std::fabs(p[i] - static_cast<double>(i) / n));
  }
  return d;
}

// erf by its Maclaurin series; adequate for |x| <= 3.
inline double erf_series(double x) {
  double term = x, sum = x;
  for (int k = 1; k < 200; ++k) {
    term *= -x * x / k;
    sum += term / (2 * k + 1);
  }
  return 2.0 / std::sqrt(std::numbers::pi) * sum;
}

}  // namespace support
