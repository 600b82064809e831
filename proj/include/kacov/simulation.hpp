#pragma once

#include "kacov/inference.hpp"
#include "kacov/kernels.hpp"
#include "kacov/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace kacov {

enum class Scenario {
  // low-dimensional vectors, p = 5
  Linear,
  Log,
  Quadratic,
  // high-dimensional vectors, p = 100
  Circle,
  TwoParabola,
  Sinusoidal,
  // SPD matrices driven by a correlated latent pair (Z1, Z2)
  MatrixMatrix,
  BlockMatrix,
  MatrixVector,
};

enum class Noise { Normal, T3 };

std::string_view scenario_name(Scenario s);
Scenario parse_scenario(std::string_view text);
std::string_view noise_name(Noise n);
Noise parse_noise(std::string_view text);

// True for the matrix scenarios, whose parameter is the latent correlation
// rho rather than the noise scale lambda.
bool uses_rho(Scenario s);

struct ScenarioSpec {
  Scenario id = Scenario::Linear;
  std::size_t n = 100;
  double param = 1.0;  // lambda, or rho for the matrix scenarios
  Noise noise = Noise::Normal;
  bool independent = false;  // test X of one draw against Y of another
  std::uint64_t seed = 0;

  void validate() const;
};

struct ScenarioData {
  SampleSet x;
  SampleSet y;
};

// Draws from rng_stream(spec.seed, 0).
ScenarioData generate_scenario(const ScenarioSpec& spec);
ScenarioData generate_scenario(const ScenarioSpec& spec, Rng& rng);

// Kernels the studies pair with each scenario: Laplacian for the
// low-dimensional vectors, L1-norm for the high-dimensional ones,
// log-Euclidean for SPD matrices (Laplacian for a scalar partner).
std::pair<KernelSpec, KernelSpec> default_kernels(Scenario s);

struct RateConfig {
  Method method = Method::Kacov1;
  Inference inference = Inference::Gamma;
  KernelSpec kernel_x;
  KernelSpec kernel_y;
  double level = 0.05;
  std::size_t reps = 500;
  std::size_t permutations = kDefaultPermutations;
  EstimatorOptions opts;
};

struct SimResult {
  ScenarioSpec scenario;
  Method method = Method::Kacov1;
  Inference inference = Inference::Gamma;
  double level = 0.05;
  std::size_t reps = 0;
  double rejection_rate = 0.0;
  double mean_statistic = 0.0;
  double wall_time = 0.0;  // seconds
};

// Replicate r draws its data from rng_stream(spec.seed, r) and its
// permutations from derive_seed(spec.seed, r); replicates run in parallel.
SimResult empirical_rate(const ScenarioSpec& spec, const RateConfig& config);

// Per-replicate p-values in replicate order (same streams as empirical_rate).
std::vector<double> replicate_pvalues(const ScenarioSpec& spec, const RateConfig& config);

// Empirical frequency of {<s1,h> <= 0, <s2,h> <= 0} (or <= U with an extra
// standard normal U when shifted) over standard Gaussian h.
double mc_orthant_probability(std::span<const double> s1, std::span<const double> s2, bool shifted,
                              std::size_t draws, std::uint64_t seed);

}  // namespace kacov
