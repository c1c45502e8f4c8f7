#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "mabs/metrics.hpp"
#include "mabs/optimize.hpp"
#include "mabs/sampler.hpp"
#include "support.hpp"

using namespace mabs;
using testsup::random_dataset;
using testsup::random_simplex;
using testsup::random_vector;

TEST_CASE("step schedules evaluate and validate") {
  StepSchedule con{StepSchedule::Kind::Constant, 0.1, 0.0, 0.0};
  CHECK(con.step(1) == doctest::Approx(0.1));
  CHECK(con.step(1000) == doctest::Approx(0.1));

  StepSchedule inv{StepSchedule::Kind::InverseStrong, 0.0, 2.0, 0.0};
  CHECK(inv.step(1) == doctest::Approx(1.0));
  CHECK(inv.step(10) == doctest::Approx(0.1));

  StepSchedule shf{StepSchedule::Kind::Shifted, 0.0, 2.0, 3.0};
  CHECK(shf.step(1) == doctest::Approx(1.0 / 5.0));
  CHECK(shf.step(10) == doctest::Approx(1.0 / 23.0));

  CHECK_THROWS_AS(con.step(0), std::invalid_argument);
  StepSchedule bad = con;
  bad.gamma = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = inv;
  bad.mu = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = shf;
  bad.alpha = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("plain and proximal steps at fixed inputs") {
  ProblemSpec plain;
  plain.loss = Loss::Ridge;
  plain.reg = Regularizer::None;
  Vector w = Vector::Zero(1);
  Vector g(1);
  g << 2.0;
  sgd_step(w, g, 0.1, plain);
  CHECK(w(0) == doctest::Approx(-0.2));
  CHECK_THROWS(sgd_step(w, g, 0.0, plain));

  // subgradient path folds lambda * sign(w) into the step
  ProblemSpec l1;
  l1.loss = Loss::Ridge;
  l1.reg = Regularizer::L1;
  l1.lambda = 0.5;
  Vector w2(1);
  w2 << 1.0;
  Vector zero_g = Vector::Zero(1);
  sgd_step(w2, zero_g, 0.1, l1);
  CHECK(w2(0) == doctest::Approx(1.0 - 0.1 * 0.5));

  // proximal path shrinks after the gradient move
  Vector w3(1);
  w3 << 1.0;
  prox_sgd_step(w3, g, 0.25, l1);  // 1 - 0.5 = 0.5, then soft-threshold at 0.125
  CHECK(w3(0) == doctest::Approx(0.375));
  CHECK_THROWS(prox_sgd_step(w3, g, -1.0, l1));
}

TEST_CASE("estimators are unbiased under any positive distribution") {
  Rng rng(61);
  for (Loss loss : {Loss::Logistic, Loss::SquaredHinge, Loss::Ridge}) {
    ProblemSpec spec;
    spec.loss = loss;
    for (int rep = 0; rep < 12; ++rep) {
      int n = 2 + rng.uniform_index(8);
      int d = 1 + rng.uniform_index(5);
      Dataset data = random_dataset(rng, n, d, loss != Loss::Ridge);
      Vector w0 = random_vector(rng, d);
      Vector w = random_vector(rng, d);
      auto p = random_simplex(rng, n);

      for (EstimatorKind kind :
           {EstimatorKind::PlainSgd, EstimatorKind::ProxSvrg, EstimatorKind::Saga}) {
        GradientEstimator est(kind, spec, data, w0);
        Vector mean = Vector::Zero(d);
        for (int i = 0; i < n; ++i)
          mean += p[static_cast<std::size_t>(i)] * est.estimate(w, i, p[static_cast<std::size_t>(i)]).g_hat;
        Vector truth = full_gradient(spec, data, w);
        CHECK((mean - truth).lpNorm<Eigen::Infinity>() < 1e-12);
      }
    }
  }
}

TEST_CASE("per-draw rewards agree with the reward vector") {
  Rng rng(67);
  ProblemSpec spec;
  spec.loss = Loss::SquaredHinge;
  Dataset data = random_dataset(rng, 7, 3, true);
  Vector w0 = random_vector(rng, 3);
  Vector w = random_vector(rng, 3);
  for (EstimatorKind kind :
       {EstimatorKind::PlainSgd, EstimatorKind::ProxSvrg, EstimatorKind::Saga}) {
    GradientEstimator est(kind, spec, data, w0);
    auto rewards = est.reward_vector(w);
    for (int i = 0; i < data.size(); ++i) {
      Estimate e = est.estimate(w, i, 1.0 / 7.0);
      CHECK(e.reward == doctest::Approx(rewards[static_cast<std::size_t>(i)]).epsilon(1e-12));
      CHECK(e.reward >= 0.0);
    }
  }
  GradientEstimator est(EstimatorKind::PlainSgd, spec, data, w0);
  CHECK_THROWS_AS(est.estimate(w, -1, 0.5), std::out_of_range);
  CHECK_THROWS_AS(est.estimate(w, 0, 0.0), std::invalid_argument);
}

TEST_CASE("table-based estimator tracks sub-gradients exactly") {
  Rng rng(71);
  ProblemSpec spec;
  spec.loss = Loss::Logistic;
  int n = 5, d = 3;
  Dataset data = random_dataset(rng, n, d, true);
  Vector w0 = random_vector(rng, d);
  GradientEstimator est(EstimatorKind::Saga, spec, data, w0);

  // entries start as sub-gradients at the initial iterate
  std::vector<Vector> shadow(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    SparseVec g = sub_gradient(spec, data.point(i), w0);
    shadow[static_cast<std::size_t>(i)] = to_dense(g, d);
    CHECK((to_dense(est.table_entry(i), d) - shadow[static_cast<std::size_t>(i)]).norm() == 0.0);
  }

  for (int step = 0; step < 3 * n; ++step) {
    Vector w = random_vector(rng, d);
    int i = static_cast<int>(rng.uniform_index(n));
    est.absorb(w, i);
    shadow[static_cast<std::size_t>(i)] = to_dense(sub_gradient(spec, data.point(i), w), d);

    Vector mean = Vector::Zero(d);
    for (const auto& v : shadow) mean += v / static_cast<double>(n);
    CHECK((est.table_mean() - mean).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("snapshot refresh averages the past epoch") {
  Rng rng(73);
  ProblemSpec spec;
  spec.loss = Loss::Ridge;
  int n = 4, d = 2;
  Dataset data = random_dataset(rng, n, d, false);
  Vector w0 = Vector::Zero(d);
  GradientEstimator est(EstimatorKind::ProxSvrg, spec, data, w0);
  CHECK((est.snapshot() - w0).norm() == 0.0);
  CHECK((est.snapshot_gradient() - full_gradient(spec, data, w0)).norm() == 0.0);

  Vector bin_mean = Vector::Zero(d);
  for (long t = 1; t <= n; ++t) {
    Vector w = random_vector(rng, d);
    est.iteration_started(w);
    bin_mean += w / static_cast<double>(n);
    est.iteration_finished(t);
    if (t < n) CHECK((est.snapshot() - w0).norm() == 0.0);  // refresh only at epoch end
  }
  CHECK((est.snapshot() - bin_mean).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((est.snapshot_gradient() - full_gradient(spec, data, est.snapshot())).norm() < 1e-12);
}

TEST_CASE("run matches a hand-rolled loop step for step") {
  Rng data_rng(79);
  ProblemSpec spec;
  spec.loss = Loss::Logistic;
  spec.reg = Regularizer::L1;
  spec.lambda = 1e-3;
  int n = 6, d = 4;
  Dataset data = random_dataset(data_rng, n, d, true);
  StepSchedule sched{StepSchedule::Kind::Constant, 0.05, 0.0, 0.0};
  const long T = 60;

  for (bool proximal : {true, false}) {
    for (EstimatorKind kind :
         {EstimatorKind::PlainSgd, EstimatorKind::ProxSvrg, EstimatorKind::Saga}) {
      MabsSampler sampler(n, T, mean_square(sgd_reward_bounds(spec, data)));
      RunTrace trace = run(spec, data, kind, sampler, sched, T, 123, {}, proximal);

      // replay with an identical sampler and generator
      MabsSampler replay(n, T, mean_square(sgd_reward_bounds(spec, data)));
      Rng rng(123);
      Vector w = Vector::Zero(d);
      GradientEstimator est(kind, spec, data, w);
      Vector weighted = Vector::Zero(d);
      for (long t = 1; t <= T; ++t) {
        est.iteration_started(w);
        weighted += static_cast<double>(t) * w;
        Draw drw = replay.draw(rng);
        Estimate e = est.estimate(w, drw.index, drw.probability);
        est.absorb(w, drw.index);
        if (proximal)
          prox_sgd_step(w, e.g_hat, sched.step(t), spec);
        else
          sgd_step(w, e.g_hat, sched.step(t), spec);
        replay.update(drw.index, e.reward);
        est.iteration_finished(t);

        const StepRecord& rec = trace.steps[static_cast<std::size_t>(t - 1)];
        CHECK(rec.t == t);
        CHECK(rec.index == drw.index);
        CHECK(rec.probability == drw.probability);
        CHECK(rec.reward == e.reward);
      }
      CHECK((trace.final_w - w).norm() == 0.0);
      CHECK((trace.weighted_sum - weighted).norm() == 0.0);
      CHECK_FALSE(trace.diverged);
    }
  }
}

TEST_CASE("weighted average iterate at fixed inputs") {
  RunTrace trace;
  trace.horizon = 2;
  trace.weighted_sum = Vector(1);
  trace.weighted_sum << 1.0 * 0.0 + 2.0 * 3.0;  // iterates 0 then 3
  trace.final_w = Vector::Zero(1);
  CHECK(weighted_average_iterate(trace)(0) == doctest::Approx(2.0));
}

TEST_CASE("metric records follow the stride") {
  Rng rng(83);
  ProblemSpec spec;
  spec.loss = Loss::Ridge;
  Dataset data = random_dataset(rng, 5, 2, false);
  StepSchedule sched{StepSchedule::Kind::Constant, 1e-3, 0.0, 0.0};
  UniformSampler sampler(5);

  TraceOptions opts;
  opts.stride = 3;
  RunTrace trace = run(spec, data, EstimatorKind::PlainSgd, sampler, sched, 10, 7, opts);
  std::vector<long> ts;
  for (const auto& m : trace.metrics) ts.push_back(m.t);
  CHECK(ts == std::vector<long>{0, 3, 6, 9, 10});
  CHECK(trace.steps.size() == 10);
  CHECK(trace.metrics.front().cost == doctest::Approx(full_cost(spec, data, Vector::Zero(2))));

  // stride 0 defaults to one record per data pass
  TraceOptions dflt;
  RunTrace t2 = run(spec, data, EstimatorKind::PlainSgd, sampler, sched, 10, 7, dflt);
  std::vector<long> ts2;
  for (const auto& m : t2.metrics) ts2.push_back(m.t);
  CHECK(ts2 == std::vector<long>{0, 5, 10});

  TraceOptions verif;
  verif.verification = true;
  RunTrace t3 = run(spec, data, EstimatorKind::PlainSgd, sampler, sched, 10, 7, verif);
  CHECK(t3.reward_history.size() == 10);
  CHECK(t3.p_history.size() == 10);
  CHECK(t3.p_history[0] == sampler.probabilities());
}

TEST_CASE("runaway steps are flagged as divergence") {
  std::vector<DataPoint> pts(2);
  pts[0].features = {{0, 1.0}};
  pts[0].label = 1.0;
  pts[1].features = {{0, 2.0}};
  pts[1].label = -1.0;
  Dataset data(pts, 1);
  ProblemSpec spec;
  spec.loss = Loss::Ridge;
  StepSchedule sched{StepSchedule::Kind::Constant, 1e160, 0.0, 0.0};
  UniformSampler sampler(2);
  RunTrace trace = run(spec, data, EstimatorKind::PlainSgd, sampler, sched, 50, 5, {});
  CHECK(trace.diverged);
  CHECK(std::isinf(trace.metrics.back().cost));
  CHECK(trace.steps.size() < 50);  // loop stops at the first non-finite iterate
}
