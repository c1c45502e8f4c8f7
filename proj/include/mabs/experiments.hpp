#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mabs/data_io.hpp"
#include "mabs/model.hpp"
#include "mabs/optimize.hpp"
#include "mabs/sampler.hpp"

namespace mabs {

// The four optimizer configurations: PlainSgd with subgradient or proximal
// regularizer handling, and the two variance-reduced estimators (always
// proximal).
enum class Algorithm { Sgd, ProxSgd, ProxSvrg, Saga };

EstimatorKind estimator_of(Algorithm alg);
bool proximal_of(Algorithm alg);

enum class SamplerKind { Uniform, IsSmoothness, IsBound, Mabs, Mabs2 };

// Where the static reward bounds a_i = G_i^2/n^2 come from.
//  - GradientBound: model.gradient_bound with the configured iterate radius.
//  - InitialGradient: exact per-point gradient norms at the zero start.
//  - Auto: GradientBound for logistic (radius-free and tight), otherwise
//    InitialGradient, since radius-inflated bounds shrink the bandit step.
enum class BoundSource { Auto, GradientBound, InitialGradient };

struct SamplerConfig {
  SamplerKind kind = SamplerKind::Uniform;
  double eta = 0.4;
  double horizon_scale = 1.0;  // --t-scale
  std::optional<int> reset_bin;
  BoundSource bounds = BoundSource::Auto;
  double radius = 10.0;  // iterate radius for GradientBound
};

struct DatasetConfig {
  // Exactly one of path / synthetic is set.
  std::optional<std::string> path;
  std::optional<SyntheticConfig> synthetic;
  std::optional<int> dimension;  // parse override
};

struct ExperimentConfig {
  ProblemSpec problem;
  DatasetConfig dataset;
  Algorithm algorithm = Algorithm::Sgd;
  SamplerConfig sampler;
  StepSchedule schedule;
  long horizon = 1000;
  int repeats = 1;
  std::uint64_t seed = 0;
  long stride = 0;  // 0 = dataset size
  std::string out_dir = ".";
  int threads = 0;  // 0 = hardware concurrency
};

// String forms used by the CLI, config files, and summaries.
std::string to_string(Loss v);
std::string to_string(Regularizer v);
std::string to_string(Algorithm v);
std::string to_string(SamplerKind v);
std::string to_string(BoundSource v);
std::string to_string(StepSchedule::Kind v);
Loss loss_from_string(const std::string& s);
Regularizer reg_from_string(const std::string& s);
Algorithm algorithm_from_string(const std::string& s);
SamplerKind sampler_from_string(const std::string& s);
BoundSource bound_source_from_string(const std::string& s);
StepSchedule::Kind schedule_kind_from_string(const std::string& s);

nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

// All validation problems at once, empty when the config is runnable.
std::vector<std::string> validate(const ExperimentConfig& cfg);
void validate_or_throw(const ExperimentConfig& cfg);

Dataset load_dataset(const ExperimentConfig& cfg);

// Static reward bounds per the configured source.
std::vector<double> reward_bound_vector(const SamplerConfig& cfg, const ProblemSpec& spec,
                                        const Dataset& data);

std::unique_ptr<Sampler> make_sampler(const SamplerConfig& cfg, const ProblemSpec& spec,
                                      const Dataset& data, long horizon);

struct RepeatSummary {
  int repeat = 0;
  std::uint64_t seed = 0;
  double final_cost = 0.0;
  double final_effective_variance = 0.0;
  double final_pseudo_variance = 0.0;
  bool diverged = false;
};

struct RunOutput {
  std::vector<RunTrace> traces;     // ordered by repeat index
  std::vector<RepeatSummary> repeats;
};

// k independent repeats, seeded base_seed + repeat index, run on a thread
// pool; results are ordered by repeat index so parallelism never shows.
RunOutput run_repeats(const ExperimentConfig& cfg, const Dataset& data,
                      const TraceOptions& opts = {});

nlohmann::ordered_json summarize(const ExperimentConfig& cfg, const RunOutput& out);

// Writes trace_<repeat>.csv per repeat plus summary.json under cfg.out_dir.
void write_run_outputs(const ExperimentConfig& cfg, const RunOutput& out);

// Full-batch gradient descent with backtracking line search, stopping at
// ||grad F|| < tol. Supports differentiable objectives only (no L1). The
// generous iteration budget covers ill-conditioned designs; conditioning of
// the synthetic data is dominated by the nearly-constant feature columns.
double minimize_full_batch(const ProblemSpec& spec, const Dataset& data, double tol = 1e-10,
                           long max_iters = 50000000, Vector* w_out = nullptr);

struct TauSweepRow {
  double tau = 0.0;
  double scale_c = 0.0;
  SamplerKind sampler = SamplerKind::Uniform;
  double mean_final_cost_gap = 0.0;       // mean over repeats of F(w^T) - F*
  double mean_final_effective_variance = 0.0;
};

// For each target tau: regenerate the synthetic dataset at the matching
// scale, compute F* by full-batch descent, then run every sampler in
// `samplers` for cfg.repeats repeats.
std::vector<TauSweepRow> tau_sweep(const ExperimentConfig& cfg, const std::vector<double>& taus,
                                   const std::vector<SamplerKind>& samplers = {
                                       SamplerKind::Uniform, SamplerKind::IsSmoothness,
                                       SamplerKind::Mabs});

void write_tau_sweep_csv(const std::vector<TauSweepRow>& rows, std::ostream& out);

struct StabilityRow {
  double gamma = 0.0;
  SamplerKind sampler = SamplerKind::Uniform;
  Algorithm algorithm = Algorithm::Sgd;
  // Mean over converged repeats; unset when every repeat diverged.
  std::optional<double> mean_final_cost;
  double diverged_fraction = 0.0;
  int repeats = 0;
};

// A repeat counts as diverged when its final cost is non-finite or exceeds
// the cost of the zero initial iterate.
std::vector<StabilityRow> stability_sweep(const ExperimentConfig& cfg, const Dataset& data,
                                          const std::vector<double>& gammas,
                                          const std::vector<SamplerKind>& samplers = {
                                              SamplerKind::Uniform, SamplerKind::IsSmoothness,
                                              SamplerKind::Mabs});

void write_stability_csv(const std::vector<StabilityRow>& rows, std::ostream& out);

}  // namespace mabs
