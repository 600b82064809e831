#pragma once

#include "kacov/matrix.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kacov {

enum class SampleKind { Vector, SpdMatrix };

// n observations stored contiguously: each sample occupies dim values
// (vectors) or dim*dim row-major values (SPD matrices).
class SampleSet {
public:
  // Validates shape and, for SPD samples, symmetry and positivity.
  static SampleSet vectors(std::size_t n, std::size_t dim, std::vector<double> data);
  static SampleSet spd_matrices(std::size_t n, std::size_t dim, std::vector<double> data);

  SampleKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t stride() const noexcept { return kind_ == SampleKind::Vector ? dim_ : dim_ * dim_; }

  std::span<const double> sample(std::size_t i) const noexcept {
    return {data_.data() + i * stride(), stride()};
  }
  const std::vector<double>& data() const noexcept { return data_; }

  // Same kind/dim, samples reordered so that result.sample(i) == sample(order[i]).
  SampleSet reordered(std::span<const std::size_t> order) const;

  bool operator==(const SampleSet&) const = default;

private:
  SampleSet(SampleKind kind, std::size_t n, std::size_t dim, std::vector<double> data)
      : kind_(kind), n_(n), dim_(dim), data_(std::move(data)) {}

  SampleKind kind_ = SampleKind::Vector;
  std::size_t n_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

enum class KernelFamily { Gaussian, Laplacian, Distance, Linear, L1Norm, LogEuclidean };

struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  std::optional<double> bandwidth;  // gaussian/laplacian; empty selects the median heuristic
  std::optional<double> alpha;      // distance family only, in (0, 2]

  static KernelSpec gaussian(std::optional<double> bandwidth = std::nullopt);
  static KernelSpec laplacian(std::optional<double> bandwidth = std::nullopt);
  static KernelSpec distance(double alpha);
  static KernelSpec linear();
  static KernelSpec l1norm();
  static KernelSpec log_euclidean();

  // Throws InvalidSpec when the field/family combination is not allowed.
  void validate() const;

  // "family" or "family:param", e.g. "laplacian:0.5", "distance:1".
  std::string label() const;
  static KernelSpec parse(const std::string& text);

  bool operator==(const KernelSpec&) const = default;
};

struct GramMatrix {
  SquareMatrix entries;
  KernelSpec spec;
  std::optional<double> resolved_bandwidth;
  bool precomputed = false;  // supplied directly rather than built from samples

  std::size_t size() const noexcept { return entries.size(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return entries(i, j); }
};

enum class SampleMetric { Euclidean, LogEuclideanFrobenius };

double median_heuristic(const SampleSet& samples, SampleMetric metric);

// Matrix logarithm of a d x d SPD matrix given row-major, via a symmetric
// eigendecomposition. The result is symmetrized.
std::vector<double> matrix_log(std::span<const double> m, std::size_t d);

// Throws NotSPD if m is not symmetric within 1e-10 or has an eigenvalue
// at or below 1e-12.
void check_spd(std::span<const double> m, std::size_t d);

double kernel_eval(std::span<const double> z1, std::span<const double> z2, SampleKind kind,
                   std::size_t dim, const KernelSpec& spec, std::optional<double> bandwidth);

GramMatrix gram(const SampleSet& samples, const KernelSpec& spec);

// Wraps a user-supplied matrix (e.g. re-ingested from CSV). Requires a
// square, exactly symmetric matrix.
GramMatrix gram_from_matrix(SquareMatrix entries);

}  // namespace kacov
