#include "support.hpp"

#include "kacov/angles.hpp"
#include "kacov/error.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

using namespace kacov;
using std::numbers::pi;

namespace {

GramMatrix linear_gram(const support::Points& p) {
  return gram(support::to_samples(p), KernelSpec::linear());
}

std::vector<double> zero_sum_weights(std::size_t n, Rng& rng, std::size_t skip) {
  // Zero sum over indices other than `skip`; the weight at `skip` is free
  // because row and column `skip` of A_skip vanish.
  std::vector<double> w(n);
  double s = 0.0;
  std::size_t last = n;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = rng.normal();
    if (i != skip) {
      s += w[i];
      last = i;
    }
  }
  w[last] -= s;
  return w;
}

double quad(const SquareMatrix& m, const std::vector<double>& w) {
  double q = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) q += w[i] * m(i, j) * w[j];
  return q;
}

}  // namespace

TEST_CASE("prime angle examples") {
  const auto a = angle_prime_matrix(linear_gram({{1.0}, {-1.0}}));
  CHECK(a.entries(0, 0) == 0.0);
  CHECK(a.entries(0, 1) == doctest::Approx(pi / 2).epsilon(1e-15));
  const auto b = angle_prime_matrix(linear_gram({{1.0, 0.0}, {0.0, 1.0}}));
  CHECK(b.entries(0, 1) == doctest::Approx(pi / 3).epsilon(1e-15));
}

TEST_CASE("vertex angle examples") {
  const auto g = linear_gram({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}});
  const auto a0 = angle_vertex_matrix(g, 0);
  CHECK(a0.entries(1, 2) == doctest::Approx(pi / 2).epsilon(1e-15));
  CHECK(a0.entries(1, 3) == 0.0);  // coincident rays
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(a0.entries(0, j) == 0.0);
    CHECK(a0.entries(j, 0) == 0.0);
  }
  // z_3 duplicates z_1, so at vertex 1 row 3 is zero too.
  const auto a1 = angle_vertex_matrix(g, 1);
  for (std::size_t j = 0; j < 4; ++j) CHECK(a1.entries(3, j) == 0.0);
}

TEST_CASE("vertex angles reduce to Euclidean angles under the linear kernel") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + rng.uniform_index(10);
    const auto pts = support::random_points(n, 2 + rng.uniform_index(4), rng);
    const auto g = linear_gram(pts);
    for (std::size_t k = 0; k < n; ++k) {
      const auto a = angle_vertex_matrix(g, k);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const double want = (i == k || j == k) ? 0.0 : support::euclid_angle(pts[i], pts[j], pts[k]);
          CHECK(std::fabs(a.entries(i, j) - want) < 1e-10);
        }
    }
  }
}

TEST_CASE("angle matrix invariants") {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(12);
    const auto g = support::random_gram(n, rng, 1 + rng.uniform_index(4));
    const auto p = angle_prime_matrix(g);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(p.entries(i, i) == 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(p.entries(i, j) == p.entries(j, i));
        CHECK((p.entries(i, j) >= 0.0 && p.entries(i, j) <= pi));
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      const auto a = angle_vertex_matrix(g, k);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(a.entries(i, k) == 0.0);
        CHECK(a.entries(k, i) == 0.0);
        for (std::size_t j = 0; j < n; ++j) {
          CHECK(a.entries(i, j) == a.entries(j, i));
          CHECK((a.entries(i, j) >= 0.0 && a.entries(i, j) <= pi));
        }
      }
    }
  }
}

TEST_CASE("corrupted gram is rejected") {
  SquareMatrix m(2);
  m(0, 0) = 1.0;
  m(1, 1) = 1.0;
  m(0, 1) = m(1, 0) = 5.0;
  try {
    angle_prime_matrix(gram_from_matrix(m));
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NumericalDomain);
  }
  SquareMatrix bad(2);
  bad(0, 0) = -2.0;
  bad(1, 1) = 1.0;
  try {
    angle_prime_matrix(gram_from_matrix(bad));
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidKernel);
  }
}

TEST_CASE("negative type quadratic forms") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng.uniform_index(10);
    const auto g = support::random_gram(n, rng, 2 + rng.uniform_index(4));
    const auto p = angle_prime_matrix(g);
    CHECK(quad(p.entries, zero_sum_weights(n, rng, n)) <= 1e-8);
    for (std::size_t k = 0; k < n; ++k) {
      const auto a = angle_vertex_matrix(g, k);
      CHECK(quad(a.entries, zero_sum_weights(n, rng, k)) <= 1e-8);
    }
  }
}

TEST_CASE("negative type on collinear geometry is limited by arccos conditioning") {
  // Rank-one Grams put every vertex angle at exactly 0 or pi, where arccos
  // turns a cosine error of a few ulps into an angle error near 1e-8. The
  // form can then exceed 1e-8 by rounding alone; bound it by that noise.
  Rng rng(98);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng.uniform_index(10);
    const auto g = support::random_gram(n, rng, 1);
    for (std::size_t k = 0; k < n; ++k) {
      const auto w = zero_sum_weights(n, rng, k);
      double wsum = 0.0;
      for (double v : w) wsum += std::fabs(v);
      CHECK(quad(angle_vertex_matrix(g, k).entries, w) <= 1e-7 * wsum * wsum);
    }
  }
}

TEST_CASE("orthant closed forms") {
  CHECK(orthant_prob_closed(2.0, std::sqrt(2.0), std::sqrt(2.0)) == doctest::Approx(0.5));
  CHECK(orthant_prob_closed(0.0, 1.0, 3.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(orthant_prob_closed(-6.0, 2.0, 3.0) == doctest::Approx(0.0).scale(1).epsilon(1e-15));
  CHECK_THROWS_AS(orthant_prob_closed(7.0, 2.0, 3.0), Error);
  CHECK(orthant_prob_shifted_closed(0.0, 0.0, 0.0) == doctest::Approx(0.5));
  CHECK(orthant_prob_shifted_closed(1.0, 1.0, 1.0) == doctest::Approx(0.5));
  CHECK(orthant_prob_shifted_closed(0.0, 1.0, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("vertex angle set modes agree bit for bit") {
  Rng rng(17);
  const auto g = support::random_gram(9, rng);
  const VertexAngleSet memo(g, true), lazy(g, false);
  std::vector<std::size_t> perm(9);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = 8; i > 0; --i) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
  const VertexAngleSet pm = memo.permuted(perm), pl = lazy.permuted(perm);
  const auto direct = VertexAngleSet(gram_from_matrix(permuted(g.entries, perm)), true);
  VertexAngles s1, s2, s3;
  for (std::size_t k = 0; k < 9; ++k) {
    CHECK(memo.get(k, s1).angles == lazy.get(k, s2).angles);
    CHECK(memo.get(k, s1).angles == angle_vertex_matrix(g, k).entries);
    CHECK(pm.get(k, s1).angles == pl.get(k, s2).angles);
    CHECK(pm.get(k, s1).angles == direct.get(k, s3).angles);
  }
  CHECK(memo.mean_distinct() == lazy.mean_distinct());
}
