#include "kacov/estimators.hpp"

#include "kacov/error.hpp"
#include "kacov/parallel.hpp"
#include "kacov/simd.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace kacov {
namespace {

constexpr double kSelfCovFloor = 1e-14;
constexpr double kNegativeSquaredDistance = -1e-10;

void require_size(int m, std::size_t n, std::size_t other) {
  if (n != other) {
    throw Error(ErrorCode::InputError, "X and Y have different sample counts (" +
                                           std::to_string(n) + " vs " + std::to_string(other) + ")");
  }
  const std::size_t need = min_sample_size(m);
  if (n < need) {
    throw Error(ErrorCode::SampleTooSmall, "KAcov" + std::to_string(m) + " needs n >= " +
                                               std::to_string(need) + ", got " + std::to_string(n));
  }
}

// The bracket shared by every matrix form, for restricted matrices of
// size N: tr - 2/(N-2) cross + sa sb / ((N-1)(N-2)).
inline double bracket(double tr, double cross, double sa, double sb, double big_n) {
  return tr - 2.0 * cross / (big_n - 2.0) + sa * sb / ((big_n - 1.0) * (big_n - 2.0));
}

double ordered_sum(const std::vector<double>& slots) {
  double s = 0.0;
  for (double v : slots) s += v;
  return s;
}

}  // namespace

std::size_t min_sample_size(int m) {
  switch (m) {
    case 1: return 4;
    case 2: return 5;
    case 3: return 6;
  }
  throw Error(ErrorCode::InvalidSpec, "method index must be 1, 2 or 3");
}

double u_centered_cov(const SquareMatrix& a, const SquareMatrix& b) {
  const std::size_t n = a.size();
  if (b.size() != n) throw Error(ErrorCode::InputError, "matrix sizes differ");
  if (n < 4) throw Error(ErrorCode::SampleTooSmall, "U-centred covariance needs n >= 4");
  const auto& k = simd::active();
  std::vector<double> ra(n), rb(n);
  for (std::size_t i = 0; i < n; ++i) {
    ra[i] = k.sum(a.row(i).data(), n);
    rb[i] = k.sum(b.row(i).data(), n);
  }
  const double tr = k.dot(a.data(), b.data(), n * n);
  const double cross = k.dot(ra.data(), rb.data(), n);
  const double sa = k.sum(ra.data(), n);
  const double sb = k.sum(rb.data(), n);
  const double nn = static_cast<double>(n);
  return bracket(tr, cross, sa, sb, nn) / (nn * (nn - 3.0));
}

KacovValue kacov1(const PrimeAngleMatrix& a, const PrimeAngleMatrix& b) {
  require_size(1, a.size(), b.size());
  return {1, u_centered_cov(a.entries, b.entries), a.size()};
}

KacovValue kacov2(const VertexAngleSet& a, const VertexAngleSet& b, const EstimatorOptions& opts) {
  const std::size_t n = a.size();
  require_size(2, n, b.size());
  const double nn = static_cast<double>(n);
  std::vector<double> slots(n);
  parallel_for(
      0, n,
      [&](std::size_t r) {
        thread_local VertexAngles sa, sb;
        const auto& k = simd::active();
        const VertexAngles& ar = a.get(r, sa);
        const VertexAngles& br = b.get(r, sb);
        // Row/column r are zero, so full-matrix sums equal the sums over the
        // (n-1) x (n-1) restriction.
        const double tr = k.dot(ar.angles.data(), br.angles.data(), n * n);
        const double cross = k.dot(ar.row_sums.data(), br.row_sums.data(), n);
        slots[r] = bracket(tr, cross, ar.total, br.total, nn - 1.0);
      },
      opts.workers);
  return {2, ordered_sum(slots) / (nn * (nn - 1.0) * (nn - 4.0)), n};
}

KacovValue kacov2(const GramMatrix& gx, const GramMatrix& gy, const EstimatorOptions& opts) {
  require_size(2, gx.size(), gy.size());
  const bool memo = gx.size() <= opts.memo_cap;
  return kacov2(VertexAngleSet(gx, memo), VertexAngleSet(gy, memo), opts);
}

KacovValue kacov3(const VertexAngleSet& a, const VertexAngleSet& b, const EstimatorOptions& opts) {
  const std::size_t n = a.size();
  require_size(3, n, b.size());
  const double nn = static_cast<double>(n);
  std::vector<double> slots(n);
  parallel_for(
      0, n,
      [&](std::size_t r) {
        thread_local VertexAngles sa, sb;
        const auto& k = simd::active();
        const VertexAngles& ar = a.get(r, sa);
        double acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
          if (t == r) continue;
          const VertexAngles& bt = b.get(t, sb);
          // A_rt / B_tr drop indices r and t. Row r of A_r and row t of B_t
          // vanish, so only the t-th row of A_r and r-th row of B_t have to
          // be taken out of the row sums.
          const double tr = k.dot(ar.angles.data(), bt.angles.data(), n * n);
          const double cross = k.diff_dot(ar.row_sums.data(), ar.angles.row(t).data(),
                                          bt.row_sums.data(), bt.angles.row(r).data(), n);
          const double suma = ar.total - 2.0 * ar.row_sums[t];
          const double sumb = bt.total - 2.0 * bt.row_sums[r];
          acc += bracket(tr, cross, suma, sumb, nn - 2.0);
        }
        slots[r] = acc;
      },
      opts.workers);
  return {3, ordered_sum(slots) / (nn * (nn - 1.0) * (nn - 2.0) * (nn - 5.0)), n};
}

KacovValue kacov3(const GramMatrix& gx, const GramMatrix& gy, const EstimatorOptions& opts) {
  require_size(3, gx.size(), gy.size());
  const bool memo = gx.size() <= opts.memo_cap;
  return kacov3(VertexAngleSet(gx, memo), VertexAngleSet(gy, memo), opts);
}

double kac(int m, const GramMatrix& gx, const GramMatrix& gy, const EstimatorOptions& opts) {
  auto value = [&](const GramMatrix& a, const GramMatrix& b) {
    switch (m) {
      case 1: return kacov1(angle_prime_matrix(a), angle_prime_matrix(b)).value;
      case 2: return kacov2(a, b, opts).value;
      case 3: return kacov3(a, b, opts).value;
    }
    throw Error(ErrorCode::InvalidSpec, "method index must be 1, 2 or 3");
  };
  const double xx = value(gx, gx);
  const double yy = value(gy, gy);
  if (!(xx > kSelfCovFloor) || !(yy > kSelfCovFloor)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "degenerate marginal: self-covariance %s = %.17g",
                  xx > kSelfCovFloor ? "of Y" : "of X", xx > kSelfCovFloor ? yy : xx);
    throw Error(ErrorCode::DegenerateMarginal, buf);
  }
  return value(gx, gy) / std::sqrt(xx * yy);
}

SquareMatrix kernel_distance_matrix(const GramMatrix& g) {
  const std::size_t n = g.size();
  SquareMatrix rho(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double sq = (g(i, i) + g(j, j)) - 2.0 * g(i, j);
      if (sq < kNegativeSquaredDistance) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "kernel-induced squared distance %.17g at (%zu, %zu) is negative", sq, i, j);
        throw Error(ErrorCode::NumericalDomain, buf);
      }
      if (sq < 0.0) sq = 0.0;
      rho(i, j) = rho(j, i) = std::sqrt(sq);
    }
  }
  return rho;
}

double gdcov(const GramMatrix& gx, const GramMatrix& gy) {
  require_size(1, gx.size(), gy.size());
  return u_centered_cov(kernel_distance_matrix(gx), kernel_distance_matrix(gy));
}

}  // namespace kacov
