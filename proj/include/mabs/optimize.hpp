#pragma once

#include <cstdint>
#include <vector>

#include "mabs/model.hpp"
#include "mabs/sampler.hpp"

namespace mabs {

enum class EstimatorKind { PlainSgd, ProxSvrg, Saga };

struct StepSchedule {
  enum class Kind { Constant, InverseStrong, Shifted };

  Kind kind = Kind::Constant;
  double gamma = 1e-2;  // Constant
  double mu = 1.0;      // InverseStrong and Shifted
  double alpha = 0.0;   // Shifted

  // Step size for iteration t >= 1: gamma, 2/(mu t), or 1/(alpha + mu t).
  double step(long t) const;
  void validate() const;
};

struct Estimate {
  Vector g_hat;    // unbiased estimate of grad f(w)
  double reward = 0.0;  // a_i^t = ||correction_i||^2 / n^2 for the drawn i
};

// Per-iteration gradient estimators sharing the importance-weighted form
// g_hat = correction_i / (n p_i) + anchor. PlainSgd has a zero anchor and
// correction grad phi_i(w); ProxSvrg anchors at a snapshot's full gradient;
// Saga anchors at the running mean of a per-point gradient table.
class GradientEstimator {
 public:
  GradientEstimator(EstimatorKind kind, const ProblemSpec& spec, const Dataset& data,
                    const Vector& w_init);

  EstimatorKind kind() const { return kind_; }

  // Estimate at w given that index i was drawn with probability p_i.
  // Pure: estimator state is read, never written.
  Estimate estimate(const Vector& w, int i, double p_i) const;

  // Fold the drawn index into mutable state (Saga table refresh). Call after
  // estimate() with the same pre-step iterate.
  void absorb(const Vector& w, int i);

  // Bin bookkeeping for ProxSvrg: started() accumulates the pre-step iterate;
  // finished(t) refreshes the snapshot at every dataset-size boundary.
  void iteration_started(const Vector& w);
  void iteration_finished(long t);

  // Snapshot refresh: anchor iterate becomes the mean of the accumulated bin,
  // and its full gradient is recomputed exactly.
  void epoch_update();

  // a^t over all datapoints at iterate w; one O(nd) pass.
  std::vector<double> reward_vector(const Vector& w) const;

  // Squared norm of the mean correction: the p-independent part of
  // E||g_hat - grad f(w)||^2 = sum_i a_i / p_i - centering.
  double centering_term(const Vector& w) const;

  const Vector& snapshot() const { return snapshot_; }
  const Vector& snapshot_gradient() const { return snapshot_gradient_; }
  const SparseVec& table_entry(int i) const;
  const Vector& table_mean() const { return table_mean_; }

 private:
  double correction_scale(const Vector& w, int i) const;
  void recompute_table_mean();

  EstimatorKind kind_;
  const ProblemSpec* spec_;
  const Dataset* data_;

  // ProxSvrg state
  Vector snapshot_;
  Vector snapshot_gradient_;
  Vector bin_sum_;
  long bin_count_ = 0;

  // Saga state
  std::vector<SparseVec> table_;
  Vector table_mean_;
  long absorbs_ = 0;
};

// w <- w - gamma (g_hat + lambda dr(w)), subgradient handling of the regularizer.
void sgd_step(Vector& w, const Vector& g_hat, double gamma, const ProblemSpec& spec);

// w <- prox_{gamma lambda r}(w - gamma g_hat).
void prox_sgd_step(Vector& w, const Vector& g_hat, double gamma, const ProblemSpec& spec);

struct StepRecord {
  long t = 0;
  int index = 0;
  double probability = 0.0;
  double reward = 0.0;
};

struct MetricRecord {
  long t = 0;
  double cost = 0.0;                // F(w^t), post-step
  double effective_variance = 0.0;  // V_e of the run's estimator at w^t, p^t
  double pseudo_variance = 0.0;     // V_e minus the centering term
};

struct TraceOptions {
  long stride = 0;           // metric cadence; 0 means the dataset size
  bool store_iterates = false;
  bool verification = false; // keep full (a^t, p^t) rows for bound checking
};

struct RunTrace {
  long horizon = 0;
  std::vector<StepRecord> steps;
  std::vector<MetricRecord> metrics;  // includes t = 0 and t = horizon
  Vector final_w;
  Vector weighted_sum;  // sum_t t * w^t over pre-step iterates
  bool diverged = false;
  std::vector<double> sampler_weights;  // adaptive sampler leaves at the end

  std::vector<Vector> iterates;                    // pre-step w^1..w^T, then final (optional)
  std::vector<std::vector<double>> reward_history; // verification mode only
  std::vector<std::vector<double>> p_history;      // verification mode only
};

// (2 / (T (T + 1))) sum_t t w^t; the tail-weighted average used for reporting.
Vector weighted_average_iterate(const RunTrace& trace);

// Run `horizon` iterations from w = 0. Each iteration: draw (i, p_i), form
// the estimate at the pre-step iterate, absorb into estimator state, take the
// (prox-)gradient step, then feed a_i^t back to the sampler. Non-finite
// iterates stop the run with diverged = true and a +inf cost record.
RunTrace run(const ProblemSpec& spec, const Dataset& data, EstimatorKind kind,
             Sampler& sampler, const StepSchedule& schedule, long horizon,
             std::uint64_t seed, const TraceOptions& opts = {}, bool proximal = true);

}  // namespace mabs
