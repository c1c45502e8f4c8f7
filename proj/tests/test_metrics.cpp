#include <doctest.h>

#include <cmath>
#include <vector>

#include "mabs/metrics.hpp"
#include "mabs/optimize.hpp"
#include "support.hpp"

using namespace mabs;
using testsup::random_dataset;
using testsup::random_simplex;
using testsup::random_vector;

namespace {

// Exhaustive V_e minimization over the resolution-h simplex grid for n = 3.
double grid_min_ve(const std::vector<double>& rewards, double h) {
  double best = std::numeric_limits<double>::infinity();
  int steps = static_cast<int>(std::lround(1.0 / h));
  for (int i = 1; i < steps - 1; ++i)
    for (int j = 1; i + j < steps; ++j) {
      std::vector<double> p{i * h, j * h, 1.0 - (i + j) * h};
      best = std::min(best, effective_variance(rewards, p));
    }
  return best;
}

}  // namespace

TEST_CASE("effective variance at fixed inputs") {
  CHECK(effective_variance({1.0, 1.0}, {0.5, 0.5}) == doctest::Approx(4.0));
  // zero-reward entries contribute nothing even with zero mass
  CHECK(effective_variance({0.0, 2.0}, {0.0, 1.0}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(effective_variance({1.0, 1.0}, {1.0, 0.0}), std::domain_error);
  CHECK_THROWS(effective_variance({-1.0, 1.0}, {0.5, 0.5}));
  CHECK_THROWS(effective_variance({1.0}, {0.5, 0.5}));
}

TEST_CASE("variance split matches the brute-force expectation") {
  Rng rng(41);
  ProblemSpec spec;
  spec.loss = Loss::Logistic;
  for (int rep = 0; rep < 30; ++rep) {
    int n = 2 + rng.uniform_index(9);
    Dataset data = random_dataset(rng, n, 4, true);
    Vector w = random_vector(rng, 4);
    auto p = random_simplex(rng, n);

    GradientEstimator est(EstimatorKind::PlainSgd, spec, data, w);
    Vector mean = full_gradient(spec, data, w);
    double expect = 0.0;
    for (int i = 0; i < n; ++i) {
      Estimate e = est.estimate(w, i, p[static_cast<std::size_t>(i)]);
      expect += p[static_cast<std::size_t>(i)] * (e.g_hat - mean).squaredNorm();
    }

    VarianceReport rep_out = pseudo_variance(spec, data, w, p);
    CHECK(std::abs(rep_out.pseudo - expect) < 1e-10);
    CHECK(rep_out.centering == doctest::Approx(mean.squaredNorm()).epsilon(1e-12));
    CHECK(rep_out.effective == doctest::Approx(rep_out.pseudo + rep_out.centering));
  }
}

TEST_CASE("effective variance is convex with the stated gradient") {
  Rng rng(43);
  for (int rep = 0; rep < 200; ++rep) {
    int n = 2 + rng.uniform_index(6);
    std::vector<double> a(static_cast<std::size_t>(n));
    for (auto& x : a) x = rng.uniform();
    auto p1 = random_simplex(rng, n);
    auto p2 = random_simplex(rng, n);

    // <p, grad V_e(p)> = -V_e(p)
    double inner = 0.0;
    for (int i = 0; i < n; ++i) {
      std::size_t k = static_cast<std::size_t>(i);
      inner += p1[k] * (-a[k] / (p1[k] * p1[k]));
    }
    CHECK(inner == doctest::Approx(-effective_variance(a, p1)).epsilon(1e-12));

    double t = rng.uniform();
    std::vector<double> mid(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      std::size_t k = static_cast<std::size_t>(i);
      mid[k] = t * p1[k] + (1.0 - t) * p2[k];
    }
    CHECK(effective_variance(a, mid) <=
          t * effective_variance(a, p1) + (1.0 - t) * effective_variance(a, p2) + 1e-9);
  }
}

TEST_CASE("stepwise optimum is the normalized gradient norms") {
  // ridge gradient for (x, y=0) at w=1 is x^2 * 1, so x = 1, sqrt(2), sqrt(3)
  // gives per-point gradient norms 1, 2, 3.
  std::vector<DataPoint> pts(3);
  pts[0].features = {{0, 1.0}};
  pts[1].features = {{0, std::sqrt(2.0)}};
  pts[2].features = {{0, std::sqrt(3.0)}};
  for (auto& p : pts) p.label = 0.0;
  Dataset data(pts, 1);
  ProblemSpec spec;
  spec.loss = Loss::Ridge;
  Vector w(1);
  w << 1.0;
  Distribution d = optimal_stepwise_p(spec, data, w);
  CHECK(d.p[0] == doctest::Approx(1.0 / 6.0));
  CHECK(d.p[1] == doctest::Approx(2.0 / 6.0));
  CHECK(d.p[2] == doctest::Approx(3.0 / 6.0));
  CHECK_FALSE(d.degenerate);

  // all-zero gradients fall back to uniform
  Vector zero = Vector::Zero(1);
  Distribution flat = optimal_stepwise_p(spec, data, zero);
  CHECK(flat.degenerate);
  CHECK(flat.p[0] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("static optimum is the normalized root of summed rewards") {
  Distribution d = optimal_static_p({{1.0, 4.0}});
  CHECK(d.p[0] == doctest::Approx(1.0 / 3.0));
  CHECK(d.p[1] == doctest::Approx(2.0 / 3.0));
  Distribution two = optimal_static_p({{1.0, 2.0}, {3.0, 2.0}});
  CHECK(two.p[0] == doctest::Approx(0.5));
  CHECK_THROWS(optimal_static_p({}));
  CHECK_THROWS(optimal_static_p({{1.0}, {1.0, 2.0}}));
}

TEST_CASE("closed-form optima beat a coarse simplex grid") {
  Rng rng(47);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<double> a{0.2 + rng.uniform(), 0.2 + rng.uniform(), 0.2 + rng.uniform()};
    std::vector<double> root{std::sqrt(a[0]), std::sqrt(a[1]), std::sqrt(a[2])};
    double total = root[0] + root[1] + root[2];
    std::vector<double> star{root[0] / total, root[1] / total, root[2] / total};
    CHECK(effective_variance(a, star) <= grid_min_ve(a, 5e-3) + 1e-6);
  }
}

TEST_CASE("regret certificate arithmetic on a crafted history") {
  std::vector<std::vector<double>> rewards{{1.0, 0.0}, {1.0, 0.0}, {0.0, 4.0}};
  std::vector<std::vector<double>> ps{{0.5, 0.5}, {0.25, 0.75}, {0.5, 0.5}};
  std::vector<double> bounds{1.0, 4.0};

  BoundReport rep = regret_bound_check(rewards, ps, bounds, 50.0);
  CHECK(rep.adaptive_total == doctest::Approx(2.0 + 4.0 + 8.0));
  // p* ~ (sqrt(2), 2)
  double s = std::sqrt(2.0);
  std::vector<double> pstar{s / (s + 2.0), 2.0 / (s + 2.0)};
  double expect_static = 2.0 / pstar[0] + 4.0 / pstar[1];
  CHECK(rep.static_optimum == doctest::Approx(expect_static).epsilon(1e-12));
  CHECK(rep.additive ==
        doctest::Approx(50.0 * std::sqrt(32.0 * 3.0 * 8.5 * std::log(2.0))).epsilon(1e-12));
  CHECK(rep.constant == 50.0);
  CHECK(rep.min_horizon == mabs_min_horizon(bounds));
  CHECK(rep.horizon_ok == (rewards.size() >= static_cast<std::size_t>(rep.min_horizon)));
  CHECK(rep.satisfied == (rep.adaptive_total <= 3.0 * rep.static_optimum + rep.additive));
}

TEST_CASE("regret convexity inequality holds on random draws") {
  Rng rng(53);
  for (int rep = 0; rep < 2000; ++rep) {
    int n = 2 + rng.uniform_index(7);
    std::vector<double> a(static_cast<std::size_t>(n));
    for (auto& x : a) x = rng.uniform() < 0.15 ? 0.0 : rng.uniform();
    auto p1 = random_simplex(rng, n);
    auto p2 = random_simplex(rng, n);
    double zeta = rng.uniform() < 0.5 ? rng.uniform() : 1.0 - 2.0 * rng.uniform();
    CHECK(lemma1_check(a, p1, p2, zeta));
  }
  CHECK_THROWS(lemma1_check({1.0}, {1.0}, {1.0}, 2.0));
  CHECK_THROWS(lemma1_check({1.0, 1.0}, {0.5, 0.5}, {1.0, 0.0}, 0.5));
}
