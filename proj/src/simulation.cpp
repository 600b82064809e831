#include "kacov/simulation.hpp"

#include "kacov/error.hpp"
#include "kacov/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace kacov {
namespace {

constexpr std::size_t kLowDim = 5;
constexpr std::size_t kHighDim = 100;

double noise_draw(Noise noise, Rng& rng) {
  return noise == Noise::Normal ? rng.normal() : rng.student_t3();
}

// One (x, y) observation pair appended to the flat buffers.
void draw_low_dim(Scenario id, double lambda, Noise noise, Rng& rng, std::vector<double>& x,
                  std::vector<double>& y) {
  double xs[kLowDim];
  for (double& v : xs) v = rng.normal();
  const double e1 = noise_draw(noise, rng);
  const double e2 = noise_draw(noise, rng);
  double ys[kLowDim];
  switch (id) {
    case Scenario::Linear:
      ys[0] = 0.4 * xs[0] + 0.2 * xs[1] + 2.0 * lambda * e1;
      ys[1] = 0.4 * xs[1] + 0.2 * xs[2] + 2.0 * lambda * e2;
      break;
    case Scenario::Log:
      ys[0] = 1.2 * std::log(xs[0] * xs[0]) + 6.0 * lambda * e1;
      ys[1] = 1.2 * std::log(xs[1] * xs[1]) + 6.0 * lambda * e2;
      break;
    case Scenario::Quadratic:
      ys[0] = 0.2 * (xs[0] - 2.0) * (xs[0] - 2.0) + 6.0 * lambda * e1;
      ys[1] = 0.2 * (xs[1] - 2.0) * (xs[1] - 2.0) + 6.0 * lambda * e2;
      break;
    default:
      break;
  }
  for (std::size_t j = 2; j < kLowDim; ++j) ys[j] = rng.normal();
  x.insert(x.end(), xs, xs + kLowDim);
  y.insert(y.end(), ys, ys + kLowDim);
}

void draw_high_dim(Scenario id, double lambda, Noise noise, Rng& rng, std::vector<double>& x,
                   std::vector<double>& y) {
  for (std::size_t j = 0; j < kHighDim; ++j) {
    const double xj = rng.uniform();
    const double e = noise_draw(noise, rng);
    double yj = 0.0;
    switch (id) {
      case Scenario::Circle:
        yj = 1.5 * std::sqrt(1.0 - xj * xj) * rng.rademacher() + lambda * e;
        break;
      case Scenario::TwoParabola:
        yj = xj * xj * rng.rademacher() + 0.7 * lambda * e;
        break;
      case Scenario::Sinusoidal:
        yj = std::sin(4.0 * std::numbers::pi * xj) + 4.0 * lambda * e;
        break;
      default:
        break;
    }
    x.push_back(xj);
    y.push_back(yj);
  }
}

// Unit diagonal, every off-diagonal entry equal to c: eigenvalues 1 - c
// (multiplicity d - 1) and 1 + (d - 1) c, so SPD for c in (0, 1).
void append_equicorrelation(std::size_t d, double c, std::vector<double>& out) {
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t l = 0; l < d; ++l) out.push_back(r == l ? 1.0 : c);
}

void append_block(double c, std::vector<double>& out) {
  const double rows[4][4] = {{1, c, 0, 0}, {c, 1, 0, 0}, {0, 0, 1, c}, {0, 0, c, 1}};
  for (const auto& row : rows) out.insert(out.end(), row, row + 4);
}

void draw_matrix(Scenario id, double rho, Noise noise, Rng& rng, std::vector<double>& x,
                 std::vector<double>& y) {
  const double g1 = rng.normal();
  const double g2 = rng.normal();
  double z1 = g1;
  double z2 = rho * g1 + std::sqrt(1.0 - rho * rho) * g2;
  if (noise == Noise::T3) {
    // One shared chi-square divisor gives the bivariate t with scale matrix Sigma.
    const double s = std::sqrt(rng.chi_square(3) / 3.0);
    z1 /= s;
    z2 /= s;
  }
  const double c1 = 1.0 / (1.0 + z1 * z1);
  const double c2 = 1.0 / (1.0 + z2 * z2);
  switch (id) {
    case Scenario::MatrixMatrix:
      append_equicorrelation(3, c1, x);
      append_equicorrelation(3, c2, y);
      break;
    case Scenario::BlockMatrix:
      append_block(c1, x);
      append_block(c2, y);
      break;
    case Scenario::MatrixVector:
      append_equicorrelation(3, c1, x);
      y.push_back((z2 - 2.0) * (z2 - 2.0));
      break;
    default:
      break;
  }
}

ScenarioData draw_pair(const ScenarioSpec& spec, Rng& rng) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < spec.n; ++i) {
    switch (spec.id) {
      case Scenario::Linear:
      case Scenario::Log:
      case Scenario::Quadratic:
        draw_low_dim(spec.id, spec.param, spec.noise, rng, x, y);
        break;
      case Scenario::Circle:
      case Scenario::TwoParabola:
      case Scenario::Sinusoidal:
        draw_high_dim(spec.id, spec.param, spec.noise, rng, x, y);
        break;
      case Scenario::MatrixMatrix:
      case Scenario::BlockMatrix:
      case Scenario::MatrixVector:
        draw_matrix(spec.id, spec.param, spec.noise, rng, x, y);
        break;
    }
  }
  const std::size_t n = spec.n;
  switch (spec.id) {
    case Scenario::Linear:
    case Scenario::Log:
    case Scenario::Quadratic:
      return {SampleSet::vectors(n, kLowDim, std::move(x)),
              SampleSet::vectors(n, kLowDim, std::move(y))};
    case Scenario::Circle:
    case Scenario::TwoParabola:
    case Scenario::Sinusoidal:
      return {SampleSet::vectors(n, kHighDim, std::move(x)),
              SampleSet::vectors(n, kHighDim, std::move(y))};
    case Scenario::MatrixMatrix:
      return {SampleSet::spd_matrices(n, 3, std::move(x)), SampleSet::spd_matrices(n, 3, std::move(y))};
    case Scenario::BlockMatrix:
      return {SampleSet::spd_matrices(n, 4, std::move(x)), SampleSet::spd_matrices(n, 4, std::move(y))};
    case Scenario::MatrixVector:
      return {SampleSet::spd_matrices(n, 3, std::move(x)), SampleSet::vectors(n, 1, std::move(y))};
  }
  throw Error(ErrorCode::InvalidSpec, "unknown scenario");
}

struct Replicate {
  double p_value = 1.0;
  double statistic = 0.0;
};

std::vector<Replicate> run_replicates(const ScenarioSpec& spec, const RateConfig& config) {
  spec.validate();
  if (config.reps < 1) throw Error(ErrorCode::InvalidSpec, "reps must be at least 1");
  config.kernel_x.validate();
  config.kernel_y.validate();
  std::vector<Replicate> out(config.reps);
  parallel_for(
      0, config.reps,
      [&](std::size_t r) {
        try {
          Rng rng = rng_stream(spec.seed, r);
          const ScenarioData data = generate_scenario(spec, rng);
          const TestResult t =
              run_test(data.x, data.y, config.kernel_x, config.kernel_y, config.method,
                       config.inference, config.permutations, derive_seed(spec.seed, r),
                       config.opts);
          out[r] = {t.p_value, t.statistic};
        } catch (const Error& e) {
          throw e.with_context("replicate " + std::to_string(r));
        }
      },
      config.opts.workers);
  return out;
}

}  // namespace

std::string_view scenario_name(Scenario s) {
  switch (s) {
    case Scenario::Linear: return "linear";
    case Scenario::Log: return "log";
    case Scenario::Quadratic: return "quadratic";
    case Scenario::Circle: return "circle";
    case Scenario::TwoParabola: return "two_parabola";
    case Scenario::Sinusoidal: return "sinusoidal";
    case Scenario::MatrixMatrix: return "matrix_matrix";
    case Scenario::BlockMatrix: return "block_matrix";
    case Scenario::MatrixVector: return "matrix_vector";
  }
  return "unknown";
}

Scenario parse_scenario(std::string_view text) {
  for (int i = 0; i <= static_cast<int>(Scenario::MatrixVector); ++i) {
    const auto s = static_cast<Scenario>(i);
    if (text == scenario_name(s)) return s;
  }
  throw Error(ErrorCode::InvalidSpec, "unknown scenario '" + std::string(text) + "'");
}

std::string_view noise_name(Noise n) { return n == Noise::Normal ? "normal" : "t3"; }

Noise parse_noise(std::string_view text) {
  if (text == "normal") return Noise::Normal;
  if (text == "t3") return Noise::T3;
  throw Error(ErrorCode::InvalidSpec,
              "unknown noise '" + std::string(text) + "' (expected normal, t3)");
}

bool uses_rho(Scenario s) {
  return s == Scenario::MatrixMatrix || s == Scenario::BlockMatrix || s == Scenario::MatrixVector;
}

void ScenarioSpec::validate() const {
  if (n < 6) throw Error(ErrorCode::InvalidSpec, "scenario sample size must be at least 6");
  if (uses_rho(id)) {
    if (!(param >= 0.0 && param < 1.0)) {
      throw Error(ErrorCode::InvalidSpec, "rho must lie in [0, 1)");
    }
  } else if (!(param >= 0.0) || !std::isfinite(param)) {
    throw Error(ErrorCode::InvalidSpec, "lambda must be non-negative");
  }
}

ScenarioData generate_scenario(const ScenarioSpec& spec) {
  Rng rng = rng_stream(spec.seed, 0);
  return generate_scenario(spec, rng);
}

ScenarioData generate_scenario(const ScenarioSpec& spec, Rng& rng) {
  spec.validate();
  if (!spec.independent) return draw_pair(spec, rng);
  ScenarioData first = draw_pair(spec, rng);
  ScenarioData second = draw_pair(spec, rng);
  return {std::move(first.x), std::move(second.y)};
}

std::pair<KernelSpec, KernelSpec> default_kernels(Scenario s) {
  switch (s) {
    case Scenario::Linear:
    case Scenario::Log:
    case Scenario::Quadratic:
      return {KernelSpec::laplacian(), KernelSpec::laplacian()};
    case Scenario::Circle:
    case Scenario::TwoParabola:
    case Scenario::Sinusoidal:
      return {KernelSpec::l1norm(), KernelSpec::l1norm()};
    case Scenario::MatrixMatrix:
    case Scenario::BlockMatrix:
      return {KernelSpec::log_euclidean(), KernelSpec::log_euclidean()};
    case Scenario::MatrixVector:
      return {KernelSpec::log_euclidean(), KernelSpec::laplacian()};
  }
  return {KernelSpec::laplacian(), KernelSpec::laplacian()};
}

std::vector<double> replicate_pvalues(const ScenarioSpec& spec, const RateConfig& config) {
  const auto reps = run_replicates(spec, config);
  std::vector<double> out;
  out.reserve(reps.size());
  for (const auto& r : reps) out.push_back(r.p_value);
  return out;
}

SimResult empirical_rate(const ScenarioSpec& spec, const RateConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const auto reps = run_replicates(spec, config);
  std::size_t rejections = 0;
  double stat_sum = 0.0;
  for (const auto& r : reps) {
    if (r.p_value <= config.level) ++rejections;
    stat_sum += r.statistic;
  }
  const auto stop = std::chrono::steady_clock::now();
  SimResult out;
  out.scenario = spec;
  out.method = config.method;
  out.inference = config.inference;
  out.level = config.level;
  out.reps = config.reps;
  out.rejection_rate = static_cast<double>(rejections) / static_cast<double>(config.reps);
  out.mean_statistic = stat_sum / static_cast<double>(config.reps);
  out.wall_time = std::chrono::duration<double>(stop - start).count();
  return out;
}

double mc_orthant_probability(std::span<const double> s1, std::span<const double> s2, bool shifted,
                              std::size_t draws, std::uint64_t seed) {
  if (s1.size() != s2.size() || s1.empty()) {
    throw Error(ErrorCode::InputError, "orthant vectors must share a positive dimension");
  }
  if (draws < 10000) throw Error(ErrorCode::InvalidSpec, "need at least 10^4 draws");
  Rng rng = rng_stream(seed, 0);
  std::size_t hits = 0;
  for (std::size_t d = 0; d < draws; ++d) {
    double p1 = 0.0, p2 = 0.0;
    for (std::size_t u = 0; u < s1.size(); ++u) {
      const double h = rng.normal();
      p1 += s1[u] * h;
      p2 += s2[u] * h;
    }
    const double threshold = shifted ? rng.normal() : 0.0;
    if (p1 <= threshold && p2 <= threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(draws);
}

}  // namespace kacov
