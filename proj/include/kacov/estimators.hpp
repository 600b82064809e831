#pragma once

#include "kacov/angles.hpp"
#include "kacov/kernels.hpp"
#include "kacov/matrix.hpp"

#include <cstddef>

namespace kacov {

struct KacovValue {
  int m = 1;  // 1, 2 or 3
  double value = 0.0;
  std::size_t n = 0;
};

struct EstimatorOptions {
  // kacov3 materializes all 2n vertex angle matrices when n <= memo_cap
  // and recomputes them per pair otherwise.
  std::size_t memo_cap = 256;
  // 0 means configured_workers().
  std::size_t workers = 0;
};

// Minimum sample size for method m: 4, 5, 6.
std::size_t min_sample_size(int m);

// Unbiased U-centred covariance of two zero-diagonal symmetric matrices:
//   {n(n-3)}^-1 [ tr(AB) - 2/(n-2) 1'AB1 + 1'A1 1'B1 / ((n-1)(n-2)) ]
// computed from entrywise products and row sums; requires n >= 4.
double u_centered_cov(const SquareMatrix& a, const SquareMatrix& b);

KacovValue kacov1(const PrimeAngleMatrix& a, const PrimeAngleMatrix& b);

KacovValue kacov2(const GramMatrix& gx, const GramMatrix& gy, const EstimatorOptions& opts = {});
KacovValue kacov2(const VertexAngleSet& a, const VertexAngleSet& b,
                  const EstimatorOptions& opts = {});

KacovValue kacov3(const GramMatrix& gx, const GramMatrix& gy, const EstimatorOptions& opts = {});
KacovValue kacov3(const VertexAngleSet& a, const VertexAngleSet& b,
                  const EstimatorOptions& opts = {});

// Literal evaluation of the U-statistic sums over all ordered tuples of
// distinct indices. Cost grows like n^(m+3); refuses n > 12.
KacovValue kacov_oracle(int m, const GramMatrix& gx, const GramMatrix& gy);

// kacov_m(X,Y) / sqrt(kacov_m(X,X) kacov_m(Y,Y)).
double kac(int m, const GramMatrix& gx, const GramMatrix& gy, const EstimatorOptions& opts = {});

// rho(i,j) = sqrt(K_ii - 2 K_ij + K_jj), zero diagonal.
SquareMatrix kernel_distance_matrix(const GramMatrix& g);

// Generalized distance covariance: u_centered_cov of the two kernel-induced
// distance matrices.
double gdcov(const GramMatrix& gx, const GramMatrix& gy);

}  // namespace kacov
