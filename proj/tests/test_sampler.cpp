#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mabs/sampler.hpp"
#include "support.hpp"

using namespace mabs;

namespace {

// Scalar reference of the adaptive sampler: log-space weights, explicit
// mixture, no tree. Log space keeps the reference finite in regimes where
// raw weights overflow; the production sampler must track it.
struct ReferenceExp3 {
  std::vector<double> logw;
  std::vector<double> q;  // mixing distribution
  double eta, delta;

  ReferenceExp3(int n, double eta_, double delta_)
      : logw(static_cast<std::size_t>(n), 0.0),
        q(static_cast<std::size_t>(n), 1.0 / n),
        eta(eta_),
        delta(delta_) {}

  double prob(int i) const {
    double logmax = *std::max_element(logw.begin(), logw.end());
    double total = 0.0;
    for (double x : logw) total += std::exp(x - logmax);
    return (1.0 - eta) * std::exp(logw[static_cast<std::size_t>(i)] - logmax) / total +
           eta * q[static_cast<std::size_t>(i)];
  }

  void update(int i, double reward) {
    double p = prob(i);
    logw[static_cast<std::size_t>(i)] += delta * reward / (p * p * p);
  }
};

}  // namespace

TEST_CASE("uniform and fixed samplers report their distribution") {
  Rng rng(7);
  UniformSampler u(4);
  CHECK(u.probability(2) == doctest::Approx(0.25));
  for (int k = 0; k < 100; ++k) {
    Draw d = u.draw(rng);
    CHECK(d.probability == doctest::Approx(0.25));
    CHECK(d.index >= 0);
    CHECK(d.index < 4);
  }

  FixedSampler f({0.1, 0.2, 0.7});
  CHECK(f.probability(2) == doctest::Approx(0.7));
  for (int k = 0; k < 100; ++k) {
    Draw d = f.draw(rng);
    CHECK(d.probability == doctest::Approx(f.probability(d.index)));
  }
  CHECK_THROWS_AS(FixedSampler({0.5, 0.6}), ConfigError);
  CHECK_THROWS_AS(FixedSampler({1.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(UniformSampler(0), ConfigError);
}

TEST_CASE("clamped normalization keeps zero scores reachable") {
  auto p = clamped_normalize({2.0, 0.0, 2.0});
  CHECK(p[1] > 0.0);
  CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0));
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK_THROWS_AS(clamped_normalize({0.0, 0.0}), ConfigError);
  CHECK_THROWS(clamped_normalize({-1.0, 2.0}));
}

TEST_CASE("importance distributions from smoothness and bounds") {
  SmoothnessProfile prof;
  prof.per_point = {1.0, 3.0};
  FixedSampler is = is_from_smoothness(prof);
  CHECK(is.probability(0) == doctest::Approx(0.25));
  CHECK(is.probability(1) == doctest::Approx(0.75));

  FixedSampler isb = is_from_bounds({1.0, 4.0});  // p proportional to sqrt(a)
  CHECK(isb.probability(0) == doctest::Approx(1.0 / 3.0));
  CHECK(isb.probability(1) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("bandit step size at fixed inputs") {
  // sqrt(eta^4 ln n / (T n^5 mean(a^2)))
  CHECK(mabs_delta(2, 100, 1.0) == doctest::Approx(2.35482e-3).epsilon(1e-5));
  // the relaxed-horizon factor divides delta
  CHECK(mabs_delta(2, 100, 1.0, 0.4, 2.0) == doctest::Approx(mabs_delta(2, 100, 1.0) / 2.0));
  CHECK_THROWS_AS(mabs_delta(1, 100, 1.0), ConfigError);
  CHECK_THROWS_AS(mabs_delta(2, 0, 1.0), ConfigError);
  CHECK_THROWS_AS(mabs_delta(2, 100, 0.0), ConfigError);
  CHECK_THROWS_AS(mabs_delta(2, 100, 1.0, 0.5), ConfigError);
  CHECK_THROWS_AS(mabs_delta(2, 100, 1.0, 0.4, 0.5), ConfigError);
}

TEST_CASE("guarantee horizon at fixed inputs") {
  // 25 n ln(n) max(a)^2 / (4 c^2 mean(a^2)), rounded up
  CHECK(mabs_min_horizon({1.0, 1.0}) == 9);
  CHECK(mabs_min_horizon({1.0, 1.0}, 2.0) == 3);
  CHECK(mabs_min_horizon({5.0}) == 1);
  CHECK_THROWS_AS(mabs_min_horizon({}), ConfigError);
  CHECK_THROWS_AS(mabs_min_horizon({0.0, 0.0}), ConfigError);
}

TEST_CASE("one update moves the drawn arm as the closed form says") {
  MabsOptions opts;
  opts.delta_override = 0.1;
  MabsSampler s(2, 100, 1.0, opts);
  CHECK(s.probability(0) == doctest::Approx(0.5));
  CHECK(s.delta() == doctest::Approx(0.1));
  s.update(0, 0.05);
  // weight factor exp(0.1 * 0.05 / 0.5^3), then remix with eta = 0.4
  double w = std::exp(0.04);
  CHECK(s.probability(0) == doctest::Approx(0.6 * w / (1.0 + w) + 0.2).epsilon(1e-12));
  CHECK(s.probability(0) == doctest::Approx(0.5059992).epsilon(1e-6));
  CHECK(s.probability(0) + s.probability(1) == doctest::Approx(1.0));
}

TEST_CASE("adaptive sampler tracks the scalar reference") {
  Rng rng(23);
  // Step sizes scaled down with n so no leaf drifts far enough below the
  // maximum to underflow: past that point the tree pins a leaf at zero while
  // the log-space reference can bring it back, and the two legitimately part.
  struct Case {
    int n;
    double delta;
  };
  for (auto [n, delta] : {Case{2, 1e-3}, Case{7, 3e-5}, Case{32, 1e-6}}) {
    MabsOptions opts;
    opts.delta_override = delta;
    MabsSampler s(n, 1000, 1.0, opts);
    ReferenceExp3 ref(n, 0.4, delta);
    for (int t = 0; t < 3000; ++t) {
      int i = rng.uniform_index(n);
      double reward = rng.uniform() * 0.5;
      s.update(i, reward);
      ref.update(i, reward);
    }
    for (int i = 0; i < n; ++i)
      CHECK(s.probability(i) == doctest::Approx(ref.prob(i)).epsilon(1e-9));
  }
}

TEST_CASE("probabilities stay a distribution with an exploration floor") {
  Rng rng(29);
  int n = 10;
  MabsOptions opts;
  opts.delta_override = 0.2;
  MabsSampler s(n, 100, 1.0, opts);
  for (int t = 0; t < 2000; ++t) {
    Draw d = s.draw(rng);
    CHECK(d.probability == doctest::Approx(s.probability(d.index)));
    s.update(d.index, rng.uniform());
    auto p = s.probabilities();
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      CHECK(p[static_cast<std::size_t>(i)] >= 0.4 / n - 1e-15);
      sum += p[static_cast<std::size_t>(i)];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("weight renormalization leaves the distribution unchanged") {
  MabsOptions opts;
  opts.delta_override = 1.0;
  MabsSampler s(4, 100, 1.0, opts);
  ReferenceExp3 ref(4, 0.4, 1.0);
  // rewards big enough to push weights far past the renormalization threshold
  for (int t = 0; t < 400; ++t) {
    int i = t % 2;
    s.update(i, 5.0);
    ref.update(i, 5.0);
  }
  CHECK(s.log_renorm_scale() > 0.0);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::isfinite(s.state_weights()[static_cast<std::size_t>(i)]));
    CHECK(s.probability(i) == doctest::Approx(ref.prob(i)).epsilon(1e-6));
  }
}

TEST_CASE("reset bins restore fresh weights") {
  MabsOptions opts;
  opts.delta_override = 0.5;
  opts.reset_bin = 3;
  MabsSampler s(3, 100, 1.0, opts);
  s.update(0, 1.0);
  s.update(0, 1.0);
  CHECK(s.probability(0) > 0.34);
  s.update(0, 1.0);  // third update closes the bin
  CHECK(s.probability(0) == doctest::Approx(1.0 / 3.0));
  CHECK(s.updates_seen() == 3);
}

TEST_CASE("empirical draw frequencies match the reported distribution") {
  Rng rng(31);
  int n = 16;
  MabsOptions opts;
  opts.delta_override = 0.3;
  MabsSampler s(n, 1000, 1.0, opts);
  for (int t = 0; t < 200; ++t) s.update(rng.uniform_index(n), rng.uniform());

  auto p = s.probabilities();
  std::vector<long> counts(static_cast<std::size_t>(n), 0);
  const long draws = 1000000;
  for (long t = 0; t < draws; ++t) ++counts[static_cast<std::size_t>(s.draw(rng).index)];
  double tv = 0.0;
  for (int i = 0; i < n; ++i)
    tv += std::abs(static_cast<double>(counts[static_cast<std::size_t>(i)]) / draws -
                   p[static_cast<std::size_t>(i)]);
  CHECK(tv / 2.0 < 5e-3);
}

TEST_CASE("two-fifths mixing distribution at fixed inputs") {
  Mabs2Sampler s({1.0, 32.0}, 1000);
  auto q = s.mixing_distribution();
  CHECK(q[0] == doctest::Approx(0.2));  // 1 / (1 + 32^(2/5)) = 1/5
  CHECK(q[1] == doctest::Approx(0.8));
  CHECK(s.probability(0) == doctest::Approx(0.6 * 0.5 + 0.4 * 0.2));
  CHECK(s.probability(1) == doctest::Approx(0.6 * 0.5 + 0.4 * 0.8));
}

TEST_CASE("two-fifths step size uses the mixing mean") {
  // delta = sqrt(eta^4 ln n / (T n^5 mean(a^{2/5})^5)) / c
  std::vector<double> bounds{1.0, 32.0};
  double qbar = (1.0 + std::pow(32.0, 0.4)) / 2.0;
  double expect = std::sqrt(std::pow(0.4, 4) * std::log(2.0) /
                            (1000.0 * 32.0 * std::pow(qbar, 5)));
  Mabs2Sampler s(bounds, 1000);
  CHECK(s.delta() == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("two-fifths empirical frequencies match the mixture") {
  Rng rng(37);
  MabsOptions opts;
  opts.delta_override = 0.2;
  Mabs2Sampler s({1.0, 4.0, 9.0, 16.0, 2.0, 8.0, 27.0, 3.0}, 500, opts);
  for (int t = 0; t < 100; ++t) s.update(rng.uniform_index(8), rng.uniform());
  auto p = s.probabilities();
  std::vector<long> counts(8, 0);
  const long draws = 1000000;
  for (long t = 0; t < draws; ++t) ++counts[static_cast<std::size_t>(s.draw(rng).index)];
  double tv = 0.0;
  for (int i = 0; i < 8; ++i)
    tv += std::abs(static_cast<double>(counts[static_cast<std::size_t>(i)]) / draws -
                   p[static_cast<std::size_t>(i)]);
  CHECK(tv / 2.0 < 5e-3);
}

TEST_CASE("sampler constructors validate their options") {
  MabsOptions bad_eta;
  bad_eta.eta = 0.5;
  CHECK_THROWS_AS(MabsSampler(4, 100, 1.0, bad_eta), ConfigError);
  MabsOptions bad_bin;
  bad_bin.reset_bin = 0;
  CHECK_THROWS_AS(MabsSampler(4, 100, 1.0, bad_bin), ConfigError);
  MabsOptions bad_delta;
  bad_delta.delta_override = 0.0;
  CHECK_THROWS_AS(MabsSampler(4, 100, 1.0, bad_delta), ConfigError);
  CHECK_THROWS_AS(Mabs2Sampler({1.0}, 100), ConfigError);
  CHECK_THROWS_AS(Mabs2Sampler({0.0, 0.0}, 100), ConfigError);
}

TEST_CASE("rewards must be nonnegative and indices in range") {
  MabsSampler s(3, 100, 1.0);
  CHECK_THROWS(s.update(0, -1.0));
  CHECK_THROWS(s.update(3, 1.0));
  CHECK_THROWS(s.probability(-1));
}
