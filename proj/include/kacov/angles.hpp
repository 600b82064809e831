#pragma once

#include "kacov/kernels.hpp"
#include "kacov/matrix.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace kacov {

// Angle between the lifted points (phi(z_i), 0) and (phi(z_j), 0) seen
// from the vertex (0, 1). Symmetric, zero diagonal, entries in [0, pi].
struct PrimeAngleMatrix {
  SquareMatrix entries;
  std::size_t size() const noexcept { return entries.size(); }
};

// Angles a_{ijk} at vertex phi(z_k). Row and column k are zero, as is any
// row whose point coincides with z_k in kernel geometry.
struct VertexAngleMatrix {
  std::size_t vertex = 0;
  SquareMatrix entries;
  std::size_t size() const noexcept { return entries.size(); }
};

// Raw cosines may leave [-1, 1] by at most this much before the Gram
// matrix is rejected; inside the band they are clamped.
inline constexpr double kCosineTolerance = 1e-8;
// Squared kernel distance at or below which z_i is treated as equal to z_k.
inline constexpr double kDuplicateDistance = 1e-14;

PrimeAngleMatrix angle_prime_matrix(const GramMatrix& g);
VertexAngleMatrix angle_vertex_matrix(const GramMatrix& g, std::size_t k);

// Writes A_k into `out` (resized to n x n); allocation-free on reuse.
void angle_vertex_into(const SquareMatrix& g, std::size_t k, SquareMatrix& out);

// Probability that <s1,h> <= 0 and <s2,h> <= 0 for standard Gaussian h.
double orthant_prob_closed(double inner, double norm1, double norm2);
// Same with both thresholds replaced by an independent standard normal U.
double orthant_prob_shifted_closed(double inner, double norm1, double norm2);

// A vertex angle matrix together with its row sums and grand total, which
// every U-statistic bracket needs.
struct VertexAngles {
  SquareMatrix angles;
  std::vector<double> row_sums;
  double total = 0.0;

  void refresh_sums();
};

// The family {A_k, k = 0..n-1} for one Gram matrix, either fully
// materialized (O(n^3) memory) or recomputed on demand from the Gram
// matrix. Both modes return bit-identical matrices.
class VertexAngleSet {
public:
  VertexAngleSet(const GramMatrix& g, bool memoize);

  std::size_t size() const noexcept { return n_; }
  bool memoized() const noexcept { return memoize_; }

  // Returns A_k; `scratch` backs the result when the set is not memoized.
  const VertexAngles& get(std::size_t k, VertexAngles& scratch) const;

  // The set for the relabelled sample whose i-th point is point perm[i].
  VertexAngleSet permuted(std::span<const std::size_t> perm) const;

  // Mean of a_{ijk} over all ordered triples of distinct indices.
  double mean_distinct() const;

private:
  VertexAngleSet() = default;

  std::size_t n_ = 0;
  bool memoize_ = false;
  SquareMatrix gram_;               // kept when not memoized
  std::vector<VertexAngles> memo_;  // one per vertex when memoized
};

}  // namespace kacov
