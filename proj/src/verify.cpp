#include "mabs/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mabs/data_io.hpp"
#include "mabs/experiments.hpp"
#include "mabs/metrics.hpp"
#include "mabs/model.hpp"
#include "mabs/optimize.hpp"
#include "mabs/rng.hpp"
#include "mabs/sampler.hpp"
#include "mabs/weight_tree.hpp"

namespace mabs {

namespace {

constexpr std::size_t kMaxCounterexamples = 10;

void record_failure(SuiteResult& res, const std::string& what) {
  ++res.failures;
  if (res.counterexamples.size() < kMaxCounterexamples) res.counterexamples.push_back(what);
}

std::vector<double> random_distribution(Rng& rng, int n) {
  std::vector<double> p(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (double& x : p) {
    x = 0.05 + rng.uniform();
    sum += x;
  }
  for (double& x : p) x /= sum;
  return p;
}

Dataset random_dataset(Rng& rng, int n, int d, bool classification) {
  std::vector<DataPoint> points;
  points.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    DataPoint pt;
    for (int j = 0; j < d; ++j) {
      if (rng.uniform() < 0.8) {
        double v = 2.0 * rng.uniform() - 1.0;
        if (v == 0.0) v = 0.5;
        pt.features.push_back({j, v});
      }
    }
    if (pt.features.empty()) pt.features.push_back({rng.uniform_index(d), 1.0});
    pt.label = classification ? (rng.uniform() < 0.5 ? 1.0 : -1.0) : rng.gaussian();
    points.push_back(std::move(pt));
  }
  return Dataset(std::move(points), d);
}

Vector random_vector(Rng& rng, int d) {
  Vector w(d);
  for (int j = 0; j < d; ++j) w[j] = rng.gaussian();
  return w;
}

}  // namespace

SuiteResult verify_lemma1(std::uint64_t seed, long cases) {
  SuiteResult res;
  res.name = "lemma1";
  Rng rng(seed);
  for (long c = 0; c < cases; ++c) {
    ++res.cases;
    int n = 2 + rng.uniform_index(7);
    std::vector<double> a(static_cast<std::size_t>(n));
    for (double& x : a) x = rng.uniform() < 0.1 ? 0.0 : 2.0 * rng.uniform();
    auto p1 = random_distribution(rng, n);
    auto p2 = random_distribution(rng, n);
    double zeta = 2.0 * rng.uniform() - 1.0;  // [-1, 1)
    if (!lemma1_check(a, p1, p2, zeta)) {
      std::ostringstream msg;
      msg << "case " << c << ": n=" << n << " zeta=" << format_double(zeta) << " a=[";
      for (double x : a) msg << format_double(x) << ' ';
      msg << "]";
      record_failure(res, msg.str());
    }
  }
  return res;
}

SuiteResult verify_unbiasedness(std::uint64_t seed, int cases) {
  SuiteResult res;
  res.name = "unbiased";
  Rng rng(seed);
  const Loss losses[] = {Loss::Logistic, Loss::SquaredHinge, Loss::Ridge};
  const EstimatorKind kinds[] = {EstimatorKind::PlainSgd, EstimatorKind::ProxSvrg,
                                 EstimatorKind::Saga};
  for (int c = 0; c < cases; ++c) {
    ProblemSpec spec;
    spec.loss = losses[rng.uniform_index(3)];
    spec.reg = Regularizer::None;  // the estimator targets the smooth part
    int n = 2 + rng.uniform_index(9);
    int d = 2 + rng.uniform_index(4);
    Dataset data = random_dataset(rng, n, d, spec.loss != Loss::Ridge);
    Vector w = random_vector(rng, d);
    Vector anchor = random_vector(rng, d);
    auto p = random_distribution(rng, n);
    Vector target = full_gradient(spec, data, w);
    for (EstimatorKind kind : kinds) {
      ++res.cases;
      GradientEstimator est(kind, spec, data, anchor);
      Vector acc = Vector::Zero(d);
      for (int i = 0; i < n; ++i)
        acc += p[static_cast<std::size_t>(i)] *
               est.estimate(w, i, p[static_cast<std::size_t>(i)]).g_hat;
      double err = (acc - target).lpNorm<Eigen::Infinity>();
      if (!(err <= 1e-12)) {
        std::ostringstream msg;
        msg << "case " << c << ": estimator " << static_cast<int>(kind) << " loss "
            << to_string(spec.loss) << " n=" << n << " d=" << d
            << " |bias|=" << format_double(err);
        record_failure(res, msg.str());
      }
    }
  }
  return res;
}

SuiteResult verify_tree(std::uint64_t seed, long operations) {
  SuiteResult res;
  res.name = "tree";
  Rng rng(seed);
  const int n = 257;  // off a power of two on purpose
  std::vector<double> mirror(static_cast<std::size_t>(n));
  for (double& w : mirror) w = 0.1 + rng.uniform();
  WeightTree tree(mirror);
  auto depth_cap = [](int leaves) {
    return 2.0 * (std::ceil(std::log2(static_cast<double>(leaves))) + 1.0);
  };

  for (long op = 0; op < operations; ++op) {
    ++res.cases;
    if (rng.uniform() < 0.7) {
      double total = 0.0;
      for (double w : mirror) total += w;
      double u = rng.uniform() * tree.total();
      if (u >= tree.total()) u = std::nextafter(tree.total(), 0.0);
      int got = tree.sample(u);
      int want = -1;
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        double w = mirror[static_cast<std::size_t>(i)];
        if (w > 0.0 && u < acc + w) {
          want = i;
          break;
        }
        acc += w;
      }
      if (want < 0) {  // u beyond the linear prefix total by rounding
        for (int i = n - 1; i >= 0; --i)
          if (mirror[static_cast<std::size_t>(i)] > 0.0) {
            want = i;
            break;
          }
      }
      if (got != want)
        record_failure(res, "op " + std::to_string(op) + ": sample mismatch tree=" +
                                std::to_string(got) + " linear=" + std::to_string(want) +
                                " u=" + format_double(u));
      if (static_cast<double>(tree.last_path_length()) > depth_cap(n))
        record_failure(res, "op " + std::to_string(op) + ": sample path length " +
                                std::to_string(tree.last_path_length()));
      (void)total;
    } else {
      int i = rng.uniform_index(n);
      double w = rng.uniform() < 0.15 ? 0.0 : 2.0 * rng.uniform();
      double before = mirror[static_cast<std::size_t>(i)];
      mirror[static_cast<std::size_t>(i)] = w;
      bool any = false;
      for (double x : mirror) any = any || x > 0.0;
      if (!any) {  // keep the invariant that some weight is positive
        mirror[static_cast<std::size_t>(i)] = before;
        continue;
      }
      tree.update(i, w);
      if (static_cast<double>(tree.last_path_length()) > depth_cap(n))
        record_failure(res, "op " + std::to_string(op) + ": update path length " +
                                std::to_string(tree.last_path_length()));
      if (tree.weight(i) != w)
        record_failure(res, "op " + std::to_string(op) + ": leaf readback mismatch");
    }
  }

  // Path-length contract across sizes.
  for (int leaves : {16, 1024, 65536}) {
    std::vector<double> ws(static_cast<std::size_t>(leaves), 1.0);
    WeightTree big(ws);
    for (int k = 0; k < 256; ++k) {
      ++res.cases;
      double u = rng.uniform() * big.total();
      if (u >= big.total()) u = std::nextafter(big.total(), 0.0);
      big.sample(u);
      if (static_cast<double>(big.last_path_length()) > depth_cap(leaves))
        record_failure(res, "n=" + std::to_string(leaves) + ": sample path length " +
                                std::to_string(big.last_path_length()));
      big.update(rng.uniform_index(leaves), rng.uniform() + 0.5);
      if (static_cast<double>(big.last_path_length()) > depth_cap(leaves))
        record_failure(res, "n=" + std::to_string(leaves) + ": update path length " +
                                std::to_string(big.last_path_length()));
    }
  }
  return res;
}

SuiteResult verify_bound(std::uint64_t seed, int repeats) {
  SuiteResult res;
  res.name = "bound";
  SyntheticConfig scfg;
  scfg.n = 10;
  scfg.d = 3;
  scfg.seed = 12345;
  Dataset data = generate_synthetic(scfg);
  ProblemSpec spec;  // ridge, no regularizer

  Vector wstar;
  minimize_full_batch(spec, data, 1e-10, 50000000, &wstar);
  double radius = 4.0 * (wstar.norm() + 1.0);
  std::vector<double> bounds = sgd_reward_bounds(spec, data, radius);
  long horizon = mabs_min_horizon(bounds);
  SmoothnessProfile prof = smoothness_profile(spec, data);
  StepSchedule sched;
  sched.gamma = 0.5 / prof.max;

  for (int r = 0; r < repeats; ++r) {
    ++res.cases;
    MabsSampler sampler(data.size(), horizon, mean_square(bounds));
    TraceOptions opts;
    opts.verification = true;
    opts.store_iterates = true;
    RunTrace trace = run(spec, data, EstimatorKind::PlainSgd, sampler, sched, horizon,
                         seed + static_cast<std::uint64_t>(r), opts, false);

    bool valid = true;
    for (const auto& w : trace.iterates)
      if (w.norm() > radius) valid = false;
    for (const auto& row : trace.reward_history)
      for (std::size_t i = 0; i < row.size(); ++i)
        if (row[i] > bounds[i] * (1.0 + 1e-12)) valid = false;
    if (!valid) {
      record_failure(res, "seed " + std::to_string(seed + static_cast<std::uint64_t>(r)) +
                              ": reward bounds not honored by the run");
      continue;
    }
    BoundReport rep = regret_bound_check(trace.reward_history, trace.p_history, bounds);
    if (!rep.horizon_ok)
      record_failure(res, "horizon " + std::to_string(horizon) + " below the threshold " +
                              std::to_string(rep.min_horizon));
    else if (!rep.satisfied)
      record_failure(res,
                     "seed " + std::to_string(seed + static_cast<std::uint64_t>(r)) +
                         ": adaptive " + format_double(rep.adaptive_total) + " > 3*static " +
                         format_double(rep.static_optimum) + " + " + format_double(rep.additive));
  }
  return res;
}

std::vector<SuiteResult> run_verify_suites(const std::string& selector, std::uint64_t seed) {
  std::vector<SuiteResult> results;
  bool all = selector == "all" || selector.empty();
  bool known = all;
  if (all || selector == "lemma1") results.push_back(verify_lemma1(seed)), known = true;
  if (all || selector == "unbiased") results.push_back(verify_unbiasedness(seed)), known = true;
  if (all || selector == "tree") results.push_back(verify_tree(seed)), known = true;
  if (all || selector == "bound") results.push_back(verify_bound(seed)), known = true;
  if (!known) throw ConfigError("unknown suite '" + selector +
                                "' (expected all, lemma1, unbiased, tree, or bound)");
  return results;
}

nlohmann::ordered_json verify_report(const std::vector<SuiteResult>& results) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  nlohmann::ordered_json suites = nlohmann::ordered_json::array();
  bool pass = true;
  for (const auto& r : results) {
    suites.push_back({{"suite", r.name},
                      {"cases", r.cases},
                      {"failures", r.failures},
                      {"pass", r.pass()},
                      {"counterexamples", r.counterexamples}});
    pass = pass && r.pass();
  }
  j["suites"] = suites;
  j["pass"] = pass;
  return j;
}

}  // namespace mabs
