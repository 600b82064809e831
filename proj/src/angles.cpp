#include "kacov/angles.hpp"

#include "kacov/error.hpp"
#include "kacov/parallel.hpp"
#include "kacov/simd.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

namespace kacov {
namespace {

std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// arccos with the tolerance band; `where` names the entry for diagnostics.
inline double checked_acos(double c, std::size_t i, std::size_t j) {
  if (!(c <= 1.0 + kCosineTolerance && c >= -1.0 - kCosineTolerance)) {
    throw Error(ErrorCode::NumericalDomain,
                "angle cosine " + format_g(c) + " at (" + std::to_string(i) + ", " +
                    std::to_string(j) + ") is outside [-1, 1]; Gram matrix is not PSD");
  }
  if (c >= 1.0) return 0.0;
  if (c <= -1.0) return std::numbers::pi;
  return std::acos(c);
}

}  // namespace

PrimeAngleMatrix angle_prime_matrix(const GramMatrix& g) {
  const std::size_t n = g.size();
  std::vector<double> inv(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = g(i, i) + 1.0;
    if (!(d > 0.0)) {
      throw Error(ErrorCode::InvalidKernel, "K(z_" + std::to_string(i) + ", z_" +
                                                std::to_string(i) + ") + 1 = " + format_g(d) +
                                                " is not positive");
    }
    inv[i] = 1.0 / std::sqrt(d);
  }
  PrimeAngleMatrix out{SquareMatrix(n)};
  parallel_for(0, n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c = (g(i, j) + 1.0) * (inv[i] * inv[j]);
      const double a = checked_acos(c, i, j);
      out.entries(i, j) = a;
      out.entries(j, i) = a;
    }
  });
  return out;
}

void angle_vertex_into(const SquareMatrix& g, std::size_t k, SquareMatrix& out) {
  const std::size_t n = g.size();
  if (k >= n) throw Error(ErrorCode::InputError, "vertex index out of range");
  if (out.size() != n) out = SquareMatrix(n);

  thread_local std::vector<double> inv;
  inv.assign(n, 0.0);
  const double gkk = g(k, k);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = g(i, i) - 2.0 * g(i, k) + gkk;
    inv[i] = (i == k || d <= kDuplicateDistance) ? 0.0 : 1.0 / std::sqrt(d);
  }
  for (std::size_t i = 0; i < n; ++i) {
    out(i, i) = 0.0;
    const auto gi = g.row(i);
    const double gik = gi[k];
    for (std::size_t j = i + 1; j < n; ++j) {
      double a = 0.0;
      if (inv[i] != 0.0 && inv[j] != 0.0) {
        // Written symmetric in (i, j) so relabelled inputs give identical bits.
        const double c = ((gi[j] + gkk) - (gik + g(j, k))) * (inv[i] * inv[j]);
        a = checked_acos(c, i, j);
      }
      out(i, j) = a;
      out(j, i) = a;
    }
  }
}

VertexAngleMatrix angle_vertex_matrix(const GramMatrix& g, std::size_t k) {
  VertexAngleMatrix out{k, SquareMatrix(g.size())};
  angle_vertex_into(g.entries, k, out.entries);
  return out;
}

double orthant_prob_closed(double inner, double norm1, double norm2) {
  const double denom = norm1 * norm2;
  if (!(denom > 0.0)) throw Error(ErrorCode::NumericalDomain, "norms must be positive");
  const double c = inner / denom;
  if (!(std::fabs(c) <= 1.0 + 1e-12)) {
    throw Error(ErrorCode::NumericalDomain,
                "|inner| exceeds norm1 * norm2: cosine " + format_g(c));
  }
  const double cc = std::fmax(-1.0, std::fmin(1.0, c));
  return 0.5 - std::acos(cc) / (2.0 * std::numbers::pi);
}

double orthant_prob_shifted_closed(double inner, double norm1, double norm2) {
  const double c = (1.0 + inner) / std::sqrt((1.0 + norm1 * norm1) * (1.0 + norm2 * norm2));
  const double cc = std::fmax(-1.0, std::fmin(1.0, c));
  return 0.5 - std::acos(cc) / (2.0 * std::numbers::pi);
}

void VertexAngles::refresh_sums() {
  const std::size_t n = angles.size();
  const auto& kern = simd::active();
  row_sums.resize(n);
  for (std::size_t i = 0; i < n; ++i) row_sums[i] = kern.sum(angles.row(i).data(), n);
  total = kern.sum(row_sums.data(), n);
}

VertexAngleSet::VertexAngleSet(const GramMatrix& g, bool memoize)
    : n_(g.size()), memoize_(memoize) {
  if (!memoize) {
    gram_ = g.entries;
    return;
  }
  memo_.resize(n_);
  parallel_for(0, n_, [&](std::size_t k) {
    angle_vertex_into(g.entries, k, memo_[k].angles);
    memo_[k].refresh_sums();
  });
}

const VertexAngles& VertexAngleSet::get(std::size_t k, VertexAngles& scratch) const {
  if (memoize_) return memo_[k];
  angle_vertex_into(gram_, k, scratch.angles);
  scratch.refresh_sums();
  return scratch;
}

VertexAngleSet VertexAngleSet::permuted(std::span<const std::size_t> perm) const {
  VertexAngleSet out;
  out.n_ = n_;
  out.memoize_ = memoize_;
  if (!memoize_) {
    out.gram_ = kacov::permuted(gram_, perm);
    return out;
  }
  out.memo_.resize(n_);
  for (std::size_t k = 0; k < n_; ++k) {
    out.memo_[k].angles = kacov::permuted(memo_[perm[k]].angles, perm);
    out.memo_[k].refresh_sums();
  }
  return out;
}

double VertexAngleSet::mean_distinct() const {
  if (n_ < 3) throw Error(ErrorCode::SampleTooSmall, "mean vertex angle needs n >= 3");
  VertexAngles scratch;
  double s = 0.0;
  for (std::size_t k = 0; k < n_; ++k) s += get(k, scratch).total;
  const double nn = static_cast<double>(n_);
  return s / (nn * (nn - 1.0) * (nn - 2.0));
}

}  // namespace kacov
