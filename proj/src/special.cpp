#include "kacov/error.hpp"
#include "kacov/inference.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace kacov {
namespace {

constexpr int kMaxTerms = 500;
constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
// Near x = a both expansions need about 9 sqrt(a) terms, so the 500-term
// budget covers shapes up to roughly 3000. Larger shapes (high-dimensional
// inputs routinely give 10^4) go to Boost's uniform asymptotic evaluation.
constexpr double kLargeShape = 1000.0;

// Far tails underflow to 0 or 1 rather than raising.
using LargeShapePolicy =
    boost::math::policies::policy<boost::math::policies::overflow_error<boost::math::policies::ignore_error>,
                                  boost::math::policies::underflow_error<boost::math::policies::ignore_error>>;

double clamp_unit(double v) {
  if (std::isnan(v)) throw Error(ErrorCode::NumericalDomain, "incomplete gamma evaluated to NaN");
  return std::clamp(v, 0.0, 1.0);
}

void check_args(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    throw Error(ErrorCode::NumericalDomain, "incomplete gamma needs a > 0 and x >= 0");
  }
}

// log of x^a e^-x / Gamma(a), the common prefactor.
double log_prefactor(double a, double x) { return a * std::log(x) - x - std::lgamma(a); }

[[noreturn]] void no_convergence(const char* what, double a, double x) {
  throw Error(ErrorCode::NonConvergence, std::string(what) + " did not converge for a = " +
                                             std::to_string(a) + ", x = " + std::to_string(x));
}

}  // namespace

namespace detail {

double lower_gamma_series(double a, double x) {
  check_args(a, x);
  if (x == 0.0) return 0.0;
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int i = 0; i < kMaxTerms; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) {
      return std::min(1.0, sum * std::exp(log_prefactor(a, x)));
    }
  }
  no_convergence("incomplete gamma series", a, x);
}

double upper_gamma_continued_fraction(double a, double x) {
  check_args(a, x);
  if (x == 0.0) return 1.0;
  // Modified Lentz evaluation of the continued fraction for Gamma(a, x).
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) return std::min(1.0, std::exp(log_prefactor(a, x)) * h);
  }
  no_convergence("incomplete gamma continued fraction", a, x);
}

}  // namespace detail

double regularized_lower_gamma(double a, double x) {
  check_args(a, x);
  if (a > kLargeShape) return clamp_unit(boost::math::gamma_p(a, x, LargeShapePolicy()));
  if (x < a + 1.0) return detail::lower_gamma_series(a, x);
  return 1.0 - detail::upper_gamma_continued_fraction(a, x);
}

double regularized_upper_gamma(double a, double x) {
  check_args(a, x);
  if (a > kLargeShape) return clamp_unit(boost::math::gamma_q(a, x, LargeShapePolicy()));
  if (x < a + 1.0) return 1.0 - detail::lower_gamma_series(a, x);
  return detail::upper_gamma_continued_fraction(a, x);
}

}  // namespace kacov
