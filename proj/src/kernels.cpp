#include "kacov/kernels.hpp"

#include "kacov/error.hpp"
#include "kacov/parallel.hpp"
#include "kacov/simd.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string_view>

namespace kacov {
namespace {

constexpr double kSymmetryTol = 1e-10;
constexpr double kMinEigenvalue = 1e-12;
constexpr double kMinBandwidth = 1e-12;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string format_g(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string_view family_name(KernelFamily f) {
  switch (f) {
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Laplacian: return "laplacian";
    case KernelFamily::Distance: return "distance";
    case KernelFamily::Linear: return "linear";
    case KernelFamily::L1Norm: return "l1norm";
    case KernelFamily::LogEuclidean: return "log_euclidean";
  }
  return "unknown";
}

bool needs_spd(KernelFamily f) { return f == KernelFamily::LogEuclidean; }
bool needs_bandwidth(KernelFamily f) {
  return f == KernelFamily::Gaussian || f == KernelFamily::Laplacian;
}

void check_kind(const KernelSpec& spec, SampleKind kind) {
  const bool spd = kind == SampleKind::SpdMatrix;
  if (needs_spd(spec.family) != spd) {
    throw Error(ErrorCode::KindMismatch,
                std::string("kernel '") + std::string(family_name(spec.family)) +
                    "' requires " + (needs_spd(spec.family) ? "SPD matrix" : "vector") +
                    " samples");
  }
}

double frobenius_sq(std::span<const double> m) {
  return simd::active().dot(m.data(), m.data(), m.size());
}

// Kernel value from the precomputed quantities each family needs.
// For log-Euclidean inputs z1/z2 are already matrix logarithms.
double eval_prepared(std::span<const double> z1, std::span<const double> z2, const KernelSpec& spec,
                     double gamma) {
  const auto& k = simd::active();
  const std::size_t p = z1.size();
  switch (spec.family) {
    case KernelFamily::Gaussian: {
      const double s = k.sq_dist(z1.data(), z2.data(), p);
      return std::exp(-s / (gamma * gamma));
    }
    case KernelFamily::Laplacian: {
      const double s = k.sq_dist(z1.data(), z2.data(), p);
      return std::exp(-std::sqrt(s) / gamma);
    }
    case KernelFamily::Distance: {
      const double h = *spec.alpha / 2.0;
      const double n1 = std::pow(k.dot(z1.data(), z1.data(), p), h);
      const double n2 = std::pow(k.dot(z2.data(), z2.data(), p), h);
      const double d = std::pow(k.sq_dist(z1.data(), z2.data(), p), h);
      return (n1 + n2 - d) / 2.0;
    }
    case KernelFamily::Linear:
      return k.dot(z1.data(), z2.data(), p);
    case KernelFamily::L1Norm: {
      const double a = k.l1_norm(z1.data(), p);
      const double b = k.l1_norm(z2.data(), p);
      const double d = k.l1_dist(z1.data(), z2.data(), p);
      return (a * a + b * b - d * d) / 2.0;
    }
    case KernelFamily::LogEuclidean: {
      const double a = frobenius_sq(z1);
      const double b = frobenius_sq(z2);
      const double d = k.sq_dist(z1.data(), z2.data(), p);
      return (a + b - d) / 2.0;
    }
  }
  return 0.0;
}

double median_of(std::vector<double>& values) {
  const std::size_t m = values.size();
  auto mid = values.begin() + static_cast<std::ptrdiff_t>(m / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double upper = *mid;
  if (m % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), mid);
  return (lower + upper) / 2.0;
}

}  // namespace

// ---------------------------------------------------------------- samples

SampleSet SampleSet::vectors(std::size_t n, std::size_t dim, std::vector<double> data) {
  if (n == 0) throw Error(ErrorCode::InputError, "sample set must not be empty");
  if (dim == 0) throw Error(ErrorCode::InputError, "vector dimension must be positive");
  if (data.size() != n * dim) {
    throw Error(ErrorCode::InputError, "expected " + std::to_string(n * dim) + " values for " +
                                           std::to_string(n) + " vectors of dimension " +
                                           std::to_string(dim) + ", got " +
                                           std::to_string(data.size()));
  }
  return SampleSet(SampleKind::Vector, n, dim, std::move(data));
}

SampleSet SampleSet::spd_matrices(std::size_t n, std::size_t dim, std::vector<double> data) {
  if (n == 0) throw Error(ErrorCode::InputError, "sample set must not be empty");
  if (dim == 0) throw Error(ErrorCode::InputError, "matrix dimension must be positive");
  const std::size_t stride = dim * dim;
  if (data.size() != n * stride) {
    throw Error(ErrorCode::InputError, "expected " + std::to_string(n * stride) + " values for " +
                                           std::to_string(n) + " matrices of size " +
                                           std::to_string(dim) + "x" + std::to_string(dim) +
                                           ", got " + std::to_string(data.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    try {
      check_spd(std::span<const double>(data.data() + i * stride, stride), dim);
    } catch (const Error& e) {
      throw e.with_context("sample " + std::to_string(i));
    }
  }
  return SampleSet(SampleKind::SpdMatrix, n, dim, std::move(data));
}

SampleSet SampleSet::reordered(std::span<const std::size_t> order) const {
  std::vector<double> out;
  out.reserve(order.size() * stride());
  for (std::size_t idx : order) {
    const auto s = sample(idx);
    out.insert(out.end(), s.begin(), s.end());
  }
  return SampleSet(kind_, order.size(), dim_, std::move(out));
}

// ---------------------------------------------------------------- kernel specs

KernelSpec KernelSpec::gaussian(std::optional<double> bandwidth) {
  return {KernelFamily::Gaussian, bandwidth, std::nullopt};
}
KernelSpec KernelSpec::laplacian(std::optional<double> bandwidth) {
  return {KernelFamily::Laplacian, bandwidth, std::nullopt};
}
KernelSpec KernelSpec::distance(double alpha) { return {KernelFamily::Distance, std::nullopt, alpha}; }
KernelSpec KernelSpec::linear() { return {KernelFamily::Linear, std::nullopt, std::nullopt}; }
KernelSpec KernelSpec::l1norm() { return {KernelFamily::L1Norm, std::nullopt, std::nullopt}; }
KernelSpec KernelSpec::log_euclidean() {
  return {KernelFamily::LogEuclidean, std::nullopt, std::nullopt};
}

void KernelSpec::validate() const {
  if (alpha.has_value() != (family == KernelFamily::Distance)) {
    throw Error(ErrorCode::InvalidSpec, "alpha must be given exactly for the distance kernel");
  }
  if (alpha && !(*alpha > 0.0 && *alpha <= 2.0)) {
    throw Error(ErrorCode::InvalidSpec, "distance kernel alpha must lie in (0, 2], got " +
                                            format_g(*alpha));
  }
  if (bandwidth && !needs_bandwidth(family)) {
    throw Error(ErrorCode::InvalidSpec, "bandwidth applies only to gaussian/laplacian kernels");
  }
  if (bandwidth && !(*bandwidth > 0.0 && std::isfinite(*bandwidth))) {
    throw Error(ErrorCode::InvalidSpec, "bandwidth must be positive, got " + format_g(*bandwidth));
  }
}

std::string KernelSpec::label() const {
  std::string out(family_name(family));
  if (alpha) out += ":" + format_g(*alpha);
  if (bandwidth) out += ":" + format_g(*bandwidth);
  return out;
}

KernelSpec KernelSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  std::optional<double> param;
  if (colon != std::string::npos) {
    const std::string rest = text.substr(colon + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), v);
    if (rest.empty() || ec != std::errc() || ptr != rest.data() + rest.size()) {
      throw Error(ErrorCode::InvalidSpec, "bad kernel parameter in '" + text + "'");
    }
    param = v;
  }
  KernelSpec spec;
  if (name == "gaussian") {
    spec = gaussian(param);
  } else if (name == "laplacian") {
    spec = laplacian(param);
  } else if (name == "distance") {
    spec = distance(param.value_or(1.0));
  } else if (name == "linear" || name == "l1norm" || name == "log_euclidean") {
    if (param) throw Error(ErrorCode::InvalidSpec, "kernel '" + name + "' takes no parameter");
    spec = name == "linear" ? linear() : name == "l1norm" ? l1norm() : log_euclidean();
  } else {
    throw Error(ErrorCode::InvalidSpec,
                "unknown kernel '" + name +
                    "' (expected gaussian, laplacian, distance, linear, l1norm, log_euclidean)");
  }
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------- SPD helpers

void check_spd(std::span<const double> m, std::size_t d) {
  if (m.size() != d * d) throw Error(ErrorCode::InputError, "matrix has wrong number of entries");
  double asym = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      asym = std::max(asym, std::fabs(m[i * d + j] - m[j * d + i]));
    }
  }
  if (!(asym <= kSymmetryTol)) {
    throw Error(ErrorCode::NotSPD, "matrix is not symmetric: max |M_ij - M_ji| = " + format_g(asym));
  }
  const Eigen::Map<const RowMatrix> mat(m.data(), static_cast<Eigen::Index>(d),
                                        static_cast<Eigen::Index>(d));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  if (!(lo > kMinEigenvalue)) {
    throw Error(ErrorCode::NotSPD, "matrix is not positive definite: smallest eigenvalue " +
                                       format_g(lo));
  }
}

std::vector<double> matrix_log(std::span<const double> m, std::size_t d) {
  check_spd(m, d);
  const auto di = static_cast<Eigen::Index>(d);
  const Eigen::Map<const RowMatrix> mat(m.data(), di, di);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat);
  const Eigen::MatrixXd& v = es.eigenvectors();
  const Eigen::VectorXd logs = es.eigenvalues().array().log();
  const Eigen::MatrixXd l = v * logs.asDiagonal() * v.transpose();
  std::vector<double> out(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      out[i * d + j] = (l(ii, jj) + l(jj, ii)) / 2.0;
    }
  }
  return out;
}

// ---------------------------------------------------------------- bandwidth

double median_heuristic(const SampleSet& samples, SampleMetric metric) {
  const std::size_t n = samples.size();
  if (n < 2) throw Error(ErrorCode::SampleTooSmall, "median heuristic needs at least 2 samples");

  std::vector<std::vector<double>> logs;
  if (metric == SampleMetric::LogEuclideanFrobenius) {
    if (samples.kind() != SampleKind::SpdMatrix) {
      throw Error(ErrorCode::KindMismatch, "log-Euclidean metric requires SPD matrix samples");
    }
    logs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) logs.push_back(matrix_log(samples.sample(i), samples.dim()));
  }

  const auto& k = simd::active();
  std::vector<double> dist;
  dist.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = logs.empty()
                           ? k.sq_dist(samples.sample(i).data(), samples.sample(j).data(),
                                       samples.stride())
                           : k.sq_dist(logs[i].data(), logs[j].data(), logs[i].size());
      dist.push_back(std::sqrt(s));
    }
  }
  const double med = median_of(dist);
  if (!(med > kMinBandwidth)) {
    throw Error(ErrorCode::DegenerateBandwidth,
                "median pairwise distance is " + format_g(med) +
                    "; samples effectively coincide, supply an explicit bandwidth");
  }
  return med;
}

// ---------------------------------------------------------------- evaluation

double kernel_eval(std::span<const double> z1, std::span<const double> z2, SampleKind kind,
                   std::size_t dim, const KernelSpec& spec, std::optional<double> bandwidth) {
  spec.validate();
  check_kind(spec, kind);
  if (z1.size() != z2.size()) throw Error(ErrorCode::InputError, "samples differ in size");
  if (needs_bandwidth(spec.family)) {
    const auto g = bandwidth ? bandwidth : spec.bandwidth;
    if (!g || !(*g > 0.0)) throw Error(ErrorCode::InvalidSpec, "kernel bandwidth not resolved");
    return eval_prepared(z1, z2, spec, *g);
  }
  if (spec.family == KernelFamily::LogEuclidean) {
    const auto l1 = matrix_log(z1, dim);
    const auto l2 = matrix_log(z2, dim);
    return eval_prepared(l1, l2, spec, 0.0);
  }
  return eval_prepared(z1, z2, spec, 0.0);
}

GramMatrix gram(const SampleSet& samples, const KernelSpec& spec) {
  spec.validate();
  check_kind(spec, samples.kind());
  const std::size_t n = samples.size();

  GramMatrix g{SquareMatrix(n), spec, std::nullopt, false};
  double gamma = 0.0;
  if (needs_bandwidth(spec.family)) {
    gamma = spec.bandwidth ? *spec.bandwidth : median_heuristic(samples, SampleMetric::Euclidean);
    g.resolved_bandwidth = gamma;
  }

  std::vector<std::vector<double>> logs;
  if (spec.family == KernelFamily::LogEuclidean) {
    logs.resize(n);
    parallel_for(0, n, [&](std::size_t i) { logs[i] = matrix_log(samples.sample(i), samples.dim()); });
  }
  auto prepared = [&](std::size_t i) -> std::span<const double> {
    return logs.empty() ? samples.sample(i) : std::span<const double>(logs[i]);
  };

  parallel_for(0, n, [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = eval_prepared(prepared(i), prepared(j), spec, gamma);
      g.entries(i, j) = v;
      g.entries(j, i) = v;
    }
  });
  return g;
}

GramMatrix gram_from_matrix(SquareMatrix entries) {
  const std::size_t n = entries.size();
  if (n == 0) throw Error(ErrorCode::InputError, "Gram matrix must not be empty");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(entries(i, j))) {
        throw Error(ErrorCode::InputError, "Gram matrix has a non-finite entry");
      }
      if (entries(i, j) != entries(j, i)) {
        throw Error(ErrorCode::InputError, "Gram matrix is not symmetric at (" + std::to_string(i) +
                                               ", " + std::to_string(j) + ")");
      }
    }
  }
  return GramMatrix{std::move(entries), KernelSpec{}, std::nullopt, true};
}

}  // namespace kacov
