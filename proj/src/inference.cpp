#include "kacov/inference.hpp"

#include "kacov/error.hpp"
#include "kacov/parallel.hpp"
#include "kacov/rng.hpp"
#include "kacov/simd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <variant>
#include <vector>

namespace kacov {
namespace {

constexpr double kSelfCovFloor = 1e-14;

// Everything the statistic of one method needs, built once per test so
// permutations only relabel indices.
struct Prepared {
  Method method;
  EstimatorOptions opts;
  SquareMatrix ax, ay;                        // prime angles or kernel distances
  std::optional<VertexAngleSet> vx, vy;       // vertex angles (methods 2, 3)
};

Prepared prepare(Method method, const GramMatrix& gx, const GramMatrix& gy,
                 const EstimatorOptions& opts) {
  const std::size_t n = gx.size();
  if (gy.size() != n) {
    throw Error(ErrorCode::InputError, "X and Y have different sample counts (" +
                                           std::to_string(n) + " vs " +
                                           std::to_string(gy.size()) + ")");
  }
  const std::size_t need = min_sample_size(method);
  if (n < need) {
    throw Error(ErrorCode::SampleTooSmall,
                std::string(method_name(method)) + " needs n >= " + std::to_string(need) +
                    ", got " + std::to_string(n));
  }
  Prepared p{method, opts, {}, {}, std::nullopt, std::nullopt};
  auto side = [](const char* name, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      throw e.with_context(std::string("angles of ") + name);
    }
  };
  switch (method) {
    case Method::Kacov1:
      side("x", [&] { p.ax = angle_prime_matrix(gx).entries; });
      side("y", [&] { p.ay = angle_prime_matrix(gy).entries; });
      break;
    case Method::Gdcov:
      side("x", [&] { p.ax = kernel_distance_matrix(gx); });
      side("y", [&] { p.ay = kernel_distance_matrix(gy); });
      break;
    case Method::Kacov2:
    case Method::Kacov3: {
      const bool memo = n <= opts.memo_cap;
      side("x", [&] { p.vx.emplace(gx, memo); });
      side("y", [&] { p.vy.emplace(gy, memo); });
      break;
    }
  }
  return p;
}

double statistic_of(const Prepared& p, const SquareMatrix& ay, const VertexAngleSet* vy) {
  switch (p.method) {
    case Method::Kacov1:
    case Method::Gdcov:
      return u_centered_cov(p.ax, ay);
    case Method::Kacov2:
      return kacov2(*p.vx, *vy, p.opts).value;
    case Method::Kacov3:
      return kacov3(*p.vx, *vy, p.opts).value;
  }
  return 0.0;
}

double observed(const Prepared& p) { return statistic_of(p, p.ay, p.vy ? &*p.vy : nullptr); }

double permuted_statistic(const Prepared& p, std::span<const std::size_t> perm) {
  if (p.vy) {
    const VertexAngleSet vy = p.vy->permuted(perm);
    return statistic_of(p, p.ay, &vy);
  }
  return statistic_of(p, permuted(p.ay, perm), nullptr);
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
  }
  return perm;
}

int method_index(Method m) {
  switch (m) {
    case Method::Kacov1: return 1;
    case Method::Kacov2: return 2;
    case Method::Kacov3: return 3;
    case Method::Gdcov: return 1;
  }
  return 1;
}

TestResult base_result(Method method, Inference inference, double stat, std::size_t n) {
  TestResult r;
  r.method = method;
  r.inference = inference;
  r.statistic = stat;
  r.scaled_statistic = static_cast<double>(n) * stat;
  r.n = n;
  return r;
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Kacov1: return "kacov1";
    case Method::Kacov2: return "kacov2";
    case Method::Kacov3: return "kacov3";
    case Method::Gdcov: return "gdcov";
  }
  return "unknown";
}

std::string_view inference_name(Inference i) {
  return i == Inference::Gamma ? "gamma" : "permutation";
}

Method parse_method(std::string_view text) {
  for (Method m : {Method::Kacov1, Method::Kacov2, Method::Kacov3, Method::Gdcov}) {
    if (text == method_name(m)) return m;
  }
  throw Error(ErrorCode::InvalidSpec, "unknown method '" + std::string(text) +
                                          "' (expected kacov1, kacov2, kacov3, gdcov)");
}

Inference parse_inference(std::string_view text) {
  if (text == "gamma") return Inference::Gamma;
  if (text == "permutation") return Inference::Permutation;
  throw Error(ErrorCode::InvalidSpec,
              "unknown inference '" + std::string(text) + "' (expected gamma, permutation)");
}

std::size_t min_sample_size(Method m) {
  return m == Method::Gdcov ? 4 : min_sample_size(method_index(m));
}

double mean_off_diagonal(const SquareMatrix& m) {
  const std::size_t n = m.size();
  if (n < 2) throw Error(ErrorCode::SampleTooSmall, "off-diagonal mean needs n >= 2");
  const double s = simd::active().sum(m.data(), n * n);
  return s / (static_cast<double>(n) * static_cast<double>(n - 1));
}

GammaParams estimate_gamma_params(int m, double mean_angle_x, double mean_angle_y,
                                  const KacovValue& self_x, const KacovValue& self_y) {
  for (const auto& [name, v] : {std::pair{"X", self_x.value}, std::pair{"Y", self_y.value}}) {
    if (!(v > kSelfCovFloor)) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "degenerate marginal: self-covariance of %s is %.17g (constant sample?)", name,
                    v);
      throw Error(ErrorCode::DegenerateMarginal, buf);
    }
  }
  const double a = mean_angle_x * mean_angle_y;
  if (!(a > 0.0)) {
    throw Error(ErrorCode::NonPositiveMoment, "first moment of the null law is not positive");
  }
  const double b = 2.0 * self_x.value * self_y.value;
  GammaParams g{a * a / b, a / b, m};
  if (!std::isfinite(g.shape) || !std::isfinite(g.rate)) {
    throw Error(ErrorCode::NonPositiveMoment, "gamma parameters are not finite");
  }
  return g;
}

double gamma_pvalue(const KacovValue& stat, const GammaParams& params) {
  const double shifted = static_cast<double>(stat.n) * stat.value + params.shape / params.rate;
  if (shifted <= 0.0) return 1.0;
  return regularized_upper_gamma(params.shape, params.rate * shifted);
}

TestResult gamma_test(Method method, const GramMatrix& gx, const GramMatrix& gy,
                      const EstimatorOptions& opts) {
  const Prepared p = prepare(method, gx, gy, opts);
  const std::size_t n = gx.size();
  const double stat = observed(p);

  double mean_x = 0.0, mean_y = 0.0;
  KacovValue self_x, self_y;
  const int m = method_index(method);
  switch (method) {
    case Method::Kacov1:
    case Method::Gdcov:
      mean_x = mean_off_diagonal(p.ax);
      mean_y = mean_off_diagonal(p.ay);
      self_x = {m, u_centered_cov(p.ax, p.ax), n};
      self_y = {m, u_centered_cov(p.ay, p.ay), n};
      break;
    case Method::Kacov2:
    case Method::Kacov3:
      // Both vertex-angle methods share the KAcov3 self-covariance as the
      // variance term.
      mean_x = p.vx->mean_distinct();
      mean_y = p.vy->mean_distinct();
      self_x = kacov3(*p.vx, *p.vx, opts);
      self_y = kacov3(*p.vy, *p.vy, opts);
      break;
  }
  const GammaParams params = estimate_gamma_params(m, mean_x, mean_y, self_x, self_y);
  TestResult r = base_result(method, Inference::Gamma, stat, n);
  r.gamma_params = params;
  r.p_value = gamma_pvalue({m, stat, n}, params);
  return r;
}

TestResult permutation_pvalue(Method method, const GramMatrix& gx, const GramMatrix& gy,
                              std::size_t permutations, std::uint64_t seed,
                              const EstimatorOptions& opts) {
  if (permutations < 1) throw Error(ErrorCode::InvalidSpec, "need at least one permutation");
  const Prepared p = prepare(method, gx, gy, opts);
  const std::size_t n = gx.size();
  const double stat = observed(p);

  std::vector<unsigned char> exceed(permutations, 0);
  parallel_for(
      0, permutations,
      [&](std::size_t b) {
        Rng rng = rng_stream(seed, b);
        const auto perm = shuffled_indices(n, rng);
        exceed[b] = permuted_statistic(p, perm) >= stat ? 1 : 0;
      },
      opts.workers);
  const auto count = static_cast<double>(std::count(exceed.begin(), exceed.end(), 1));

  TestResult r = base_result(method, Inference::Permutation, stat, n);
  r.p_value = (1.0 + count) / (static_cast<double>(permutations) + 1.0);
  r.permutations = permutations;
  r.seed = seed;
  return r;
}

TestResult run_test_on_grams(const GramMatrix& gx, const GramMatrix& gy, Method method,
                             Inference inference, std::size_t permutations, std::uint64_t seed,
                             const EstimatorOptions& opts) {
  TestResult r = inference == Inference::Gamma
                     ? gamma_test(method, gx, gy, opts)
                     : permutation_pvalue(method, gx, gy, permutations, seed, opts);
  r.kernel_x = gx.precomputed ? "precomputed" : gx.spec.label();
  r.kernel_y = gy.precomputed ? "precomputed" : gy.spec.label();
  r.bandwidth_x = gx.resolved_bandwidth;
  r.bandwidth_y = gy.resolved_bandwidth;
  return r;
}

TestResult run_test(const SampleSet& x, const SampleSet& y, const KernelSpec& spec_x,
                    const KernelSpec& spec_y, Method method, Inference inference,
                    std::size_t permutations, std::uint64_t seed, const EstimatorOptions& opts) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::InputError, "X has " + std::to_string(x.size()) + " samples but Y has " +
                                           std::to_string(y.size()));
  }
  auto build = [](const SampleSet& s, const KernelSpec& spec, const char* name) {
    try {
      return gram(s, spec);
    } catch (const Error& e) {
      throw e.with_context(std::string("kernel for ") + name);
    }
  };
  const GramMatrix gx = build(x, spec_x, "x");
  const GramMatrix gy = build(y, spec_y, "y");
  return run_test_on_grams(gx, gy, method, inference, permutations, seed, opts);
}

}  // namespace kacov
