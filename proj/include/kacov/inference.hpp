#pragma once

#include "kacov/angles.hpp"
#include "kacov/estimators.hpp"
#include "kacov/kernels.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace kacov {

// ------------------------------------------------------------ special functions

// P(a, x) = gamma(a, x) / Gamma(a): series for x < a + 1, continued
// fraction otherwise, each with a 500-term budget (NonConvergence when
// exhausted). Shapes above 1000 use Boost.Math's gamma_p instead.
double regularized_lower_gamma(double a, double x);
// Q(a, x) = 1 - P(a, x), evaluated on the same branch split (gamma_q above 1000).
double regularized_upper_gamma(double a, double x);

namespace detail {
// The two raw evaluations, exposed so tests can check one against the other
// where both converge.
double lower_gamma_series(double a, double x);
double upper_gamma_continued_fraction(double a, double x);
}  // namespace detail

// ------------------------------------------------------------ tests

enum class Method { Kacov1, Kacov2, Kacov3, Gdcov };
enum class Inference { Gamma, Permutation };

std::string_view method_name(Method m);
std::string_view inference_name(Inference i);
Method parse_method(std::string_view text);
Inference parse_inference(std::string_view text);
std::size_t min_sample_size(Method m);

struct GammaParams {
  double shape = 0.0;
  double rate = 0.0;
  int m = 1;

  double mean() const { return shape / rate; }
  double variance() const { return shape / (rate * rate); }
};

// Moment-matched Gamma for the null law of n * statistic + mean:
//   shape = a^2 / b, rate = a / b, with b = 2 * self_x * self_y,
// where a is the product of the two marginal mean angles (or distances).
GammaParams estimate_gamma_params(int m, double mean_angle_x, double mean_angle_y,
                                  const KacovValue& self_x, const KacovValue& self_y);

// Mean of the off-diagonal entries of a zero-diagonal matrix.
double mean_off_diagonal(const SquareMatrix& m);

// Upper tail of Gamma(shape, rate) at max(0, n * stat + shape / rate).
double gamma_pvalue(const KacovValue& stat, const GammaParams& params);

struct TestResult {
  Method method = Method::Kacov1;
  Inference inference = Inference::Gamma;
  double statistic = 0.0;
  double scaled_statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  std::optional<GammaParams> gamma_params;
  std::optional<std::size_t> permutations;
  std::optional<std::uint64_t> seed;
  std::string kernel_x;
  std::string kernel_y;
  std::optional<double> bandwidth_x;
  std::optional<double> bandwidth_y;
};

inline constexpr std::size_t kDefaultPermutations = 199;

// Statistic and permutation p-value (1 + #{stat_b >= stat_obs}) / (B + 1).
// Permutation b relabels Y with a shuffle drawn from rng_stream(seed, b).
TestResult permutation_pvalue(Method method, const GramMatrix& gx, const GramMatrix& gy,
                              std::size_t permutations, std::uint64_t seed,
                              const EstimatorOptions& opts = {});

// Statistic and gamma-approximation p-value from two Gram matrices.
TestResult gamma_test(Method method, const GramMatrix& gx, const GramMatrix& gy,
                      const EstimatorOptions& opts = {});

TestResult run_test_on_grams(const GramMatrix& gx, const GramMatrix& gy, Method method,
                             Inference inference, std::size_t permutations, std::uint64_t seed,
                             const EstimatorOptions& opts = {});

TestResult run_test(const SampleSet& x, const SampleSet& y, const KernelSpec& spec_x,
                    const KernelSpec& spec_y, Method method, Inference inference,
                    std::size_t permutations = kDefaultPermutations, std::uint64_t seed = 0,
                    const EstimatorOptions& opts = {});

}  // namespace kacov
