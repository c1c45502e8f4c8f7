#include "mabs/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "mabs/metrics.hpp"

namespace mabs {

EstimatorKind estimator_of(Algorithm alg) {
  switch (alg) {
    case Algorithm::Sgd:
    case Algorithm::ProxSgd:
      return EstimatorKind::PlainSgd;
    case Algorithm::ProxSvrg:
      return EstimatorKind::ProxSvrg;
    case Algorithm::Saga:
      return EstimatorKind::Saga;
  }
  throw std::logic_error("estimator_of: unknown algorithm");
}

bool proximal_of(Algorithm alg) { return alg != Algorithm::Sgd; }

std::string to_string(Loss v) {
  switch (v) {
    case Loss::Logistic:
      return "logistic";
    case Loss::SquaredHinge:
      return "squared-hinge";
    case Loss::Ridge:
      return "ridge";
  }
  return "?";
}

std::string to_string(Regularizer v) {
  switch (v) {
    case Regularizer::L1:
      return "l1";
    case Regularizer::L2:
      return "l2";
    case Regularizer::None:
      return "none";
  }
  return "?";
}

std::string to_string(Algorithm v) {
  switch (v) {
    case Algorithm::Sgd:
      return "sgd";
    case Algorithm::ProxSgd:
      return "prox-sgd";
    case Algorithm::ProxSvrg:
      return "prox-svrg";
    case Algorithm::Saga:
      return "saga";
  }
  return "?";
}

std::string to_string(SamplerKind v) {
  switch (v) {
    case SamplerKind::Uniform:
      return "uniform";
    case SamplerKind::IsSmoothness:
      return "is-smoothness";
    case SamplerKind::IsBound:
      return "is-bound";
    case SamplerKind::Mabs:
      return "mabs";
    case SamplerKind::Mabs2:
      return "mabs2";
  }
  return "?";
}

std::string to_string(BoundSource v) {
  switch (v) {
    case BoundSource::Auto:
      return "auto";
    case BoundSource::GradientBound:
      return "bound";
    case BoundSource::InitialGradient:
      return "grad-init";
  }
  return "?";
}

std::string to_string(StepSchedule::Kind v) {
  switch (v) {
    case StepSchedule::Kind::Constant:
      return "constant";
    case StepSchedule::Kind::InverseStrong:
      return "inverse-strong";
    case StepSchedule::Kind::Shifted:
      return "shifted";
  }
  return "?";
}

namespace {

[[noreturn]] void bad_enum(const std::string& what, const std::string& got) {
  throw ConfigError("unknown " + what + " '" + got + "'");
}

}  // namespace

Loss loss_from_string(const std::string& s) {
  if (s == "logistic") return Loss::Logistic;
  if (s == "squared-hinge") return Loss::SquaredHinge;
  if (s == "ridge") return Loss::Ridge;
  bad_enum("loss", s);
}

Regularizer reg_from_string(const std::string& s) {
  if (s == "l1") return Regularizer::L1;
  if (s == "l2") return Regularizer::L2;
  if (s == "none") return Regularizer::None;
  bad_enum("regularizer", s);
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "sgd") return Algorithm::Sgd;
  if (s == "prox-sgd") return Algorithm::ProxSgd;
  if (s == "prox-svrg") return Algorithm::ProxSvrg;
  if (s == "saga") return Algorithm::Saga;
  bad_enum("estimator", s);
}

SamplerKind sampler_from_string(const std::string& s) {
  if (s == "uniform") return SamplerKind::Uniform;
  if (s == "is-smoothness") return SamplerKind::IsSmoothness;
  if (s == "is-bound") return SamplerKind::IsBound;
  if (s == "mabs") return SamplerKind::Mabs;
  if (s == "mabs2") return SamplerKind::Mabs2;
  bad_enum("sampler", s);
}

BoundSource bound_source_from_string(const std::string& s) {
  if (s == "auto") return BoundSource::Auto;
  if (s == "bound") return BoundSource::GradientBound;
  if (s == "grad-init") return BoundSource::InitialGradient;
  bad_enum("bound source", s);
}

StepSchedule::Kind schedule_kind_from_string(const std::string& s) {
  if (s == "constant") return StepSchedule::Kind::Constant;
  if (s == "inverse-strong") return StepSchedule::Kind::InverseStrong;
  if (s == "shifted") return StepSchedule::Kind::Shifted;
  bad_enum("schedule", s);
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["problem"] = {{"loss", to_string(cfg.problem.loss)},
                  {"reg", to_string(cfg.problem.reg)},
                  {"lambda", cfg.problem.lambda}};
  if (cfg.dataset.path) {
    j["dataset"]["path"] = *cfg.dataset.path;
    if (cfg.dataset.dimension) j["dataset"]["dimension"] = *cfg.dataset.dimension;
  } else if (cfg.dataset.synthetic) {
    const auto& s = *cfg.dataset.synthetic;
    j["dataset"]["synthetic"] = {{"n", s.n},         {"d", s.d},
                                 {"beta_std", s.beta_std}, {"noise_std", s.noise_std},
                                 {"scale_c", s.scale_c},   {"seed", s.seed}};
  }
  j["estimator"] = to_string(cfg.algorithm);
  nlohmann::ordered_json sj;
  sj["kind"] = to_string(cfg.sampler.kind);
  sj["eta"] = cfg.sampler.eta;
  sj["t_scale"] = cfg.sampler.horizon_scale;
  if (cfg.sampler.reset_bin) sj["reset_bin"] = *cfg.sampler.reset_bin;
  sj["bounds"] = to_string(cfg.sampler.bounds);
  sj["radius"] = cfg.sampler.radius;
  j["sampler"] = sj;
  nlohmann::ordered_json sch;
  sch["kind"] = to_string(cfg.schedule.kind);
  switch (cfg.schedule.kind) {
    case StepSchedule::Kind::Constant:
      sch["gamma"] = cfg.schedule.gamma;
      break;
    case StepSchedule::Kind::InverseStrong:
      sch["mu"] = cfg.schedule.mu;
      break;
    case StepSchedule::Kind::Shifted:
      sch["alpha"] = cfg.schedule.alpha;
      sch["mu"] = cfg.schedule.mu;
      break;
  }
  j["schedule"] = sch;
  j["T"] = cfg.horizon;
  j["repeats"] = cfg.repeats;
  j["seed"] = cfg.seed;
  j["stride"] = cfg.stride;
  j["out"] = cfg.out_dir;
  j["threads"] = cfg.threads;
  return j;
}

namespace {

// Read j[key] with a type check; missing keys keep the default.
template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be an object");
  ExperimentConfig cfg;
  if (j.contains("problem")) {
    const auto& p = j.at("problem");
    std::string s;
    read_field(p, "loss", s = to_string(cfg.problem.loss));
    cfg.problem.loss = loss_from_string(s);
    read_field(p, "reg", s = to_string(cfg.problem.reg));
    cfg.problem.reg = reg_from_string(s);
    read_field(p, "lambda", cfg.problem.lambda);
  }
  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    if (d.contains("path") && d.contains("synthetic"))
      throw ConfigError("dataset: give either a path or a synthetic block, not both");
    if (d.contains("path")) {
      std::string p;
      read_field(d, "path", p);
      cfg.dataset.path = p;
      if (d.contains("dimension")) {
        int dim = 0;
        read_field(d, "dimension", dim);
        cfg.dataset.dimension = dim;
      }
    } else if (d.contains("synthetic")) {
      SyntheticConfig s;
      const auto& sj = d.at("synthetic");
      read_field(sj, "n", s.n);
      read_field(sj, "d", s.d);
      read_field(sj, "beta_std", s.beta_std);
      read_field(sj, "noise_std", s.noise_std);
      read_field(sj, "scale_c", s.scale_c);
      read_field(sj, "seed", s.seed);
      cfg.dataset.synthetic = s;
    }
  }
  if (j.contains("estimator")) {
    std::string s;
    read_field(j, "estimator", s);
    cfg.algorithm = algorithm_from_string(s);
  }
  if (j.contains("sampler")) {
    const auto& sj = j.at("sampler");
    std::string s;
    read_field(sj, "kind", s = to_string(cfg.sampler.kind));
    cfg.sampler.kind = sampler_from_string(s);
    read_field(sj, "eta", cfg.sampler.eta);
    read_field(sj, "t_scale", cfg.sampler.horizon_scale);
    if (sj.contains("reset_bin")) {
      int b = 0;
      read_field(sj, "reset_bin", b);
      cfg.sampler.reset_bin = b;
    }
    read_field(sj, "bounds", s = to_string(cfg.sampler.bounds));
    cfg.sampler.bounds = bound_source_from_string(s);
    read_field(sj, "radius", cfg.sampler.radius);
  }
  if (j.contains("schedule")) {
    const auto& sch = j.at("schedule");
    std::string s;
    read_field(sch, "kind", s = to_string(cfg.schedule.kind));
    cfg.schedule.kind = schedule_kind_from_string(s);
    read_field(sch, "gamma", cfg.schedule.gamma);
    read_field(sch, "mu", cfg.schedule.mu);
    read_field(sch, "alpha", cfg.schedule.alpha);
  }
  read_field(j, "T", cfg.horizon);
  read_field(j, "repeats", cfg.repeats);
  read_field(j, "seed", cfg.seed);
  read_field(j, "stride", cfg.stride);
  read_field(j, "out", cfg.out_dir);
  read_field(j, "threads", cfg.threads);
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

std::vector<std::string> validate(const ExperimentConfig& cfg) {
  std::vector<std::string> problems;
  if (cfg.problem.lambda < 0.0 || !std::isfinite(cfg.problem.lambda))
    problems.push_back("lambda must be finite and nonnegative");
  if (!cfg.dataset.path && !cfg.dataset.synthetic)
    problems.push_back("dataset: provide a LIBSVM path or a synthetic block");
  if (cfg.dataset.path && !std::filesystem::exists(*cfg.dataset.path))
    problems.push_back("dataset file '" + *cfg.dataset.path + "' does not exist");
  if (cfg.dataset.synthetic) {
    const auto& s = *cfg.dataset.synthetic;
    if (s.n < 2) problems.push_back("synthetic n must be >= 2");
    if (s.d < 1) problems.push_back("synthetic d must be >= 1");
    if (!(s.scale_c >= 1.0)) problems.push_back("synthetic scale_c must be >= 1");
    if (!(s.beta_std >= 0.0)) problems.push_back("synthetic beta_std must be nonnegative");
    if (!(s.noise_std >= 0.0)) problems.push_back("synthetic noise_std must be nonnegative");
  }
  if (cfg.horizon < 0) problems.push_back("T must be nonnegative");
  if (cfg.repeats < 1) problems.push_back("repeats must be >= 1");
  if (cfg.stride < 0) problems.push_back("stride must be nonnegative");
  if (cfg.threads < 0) problems.push_back("threads must be nonnegative");
  if (!(cfg.sampler.eta > 0.0 && cfg.sampler.eta < 0.5))
    problems.push_back("eta must lie in (0, 0.5)");
  if (!(cfg.sampler.horizon_scale >= 1.0)) problems.push_back("t-scale must be >= 1");
  if (cfg.sampler.reset_bin && *cfg.sampler.reset_bin < 1)
    problems.push_back("reset-bin must be >= 1");
  if (!(cfg.sampler.radius >= 0.0)) problems.push_back("radius must be nonnegative");
  try {
    cfg.schedule.validate();
  } catch (const ConfigError& e) {
    problems.push_back(e.what());
  }
  return problems;
}

void validate_or_throw(const ExperimentConfig& cfg) {
  auto problems = validate(cfg);
  if (problems.empty()) return;
  std::string msg = "invalid config:";
  for (const auto& p : problems) msg += "\n  - " + p;
  throw ConfigError(msg);
}

Dataset load_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset.synthetic) return generate_synthetic(*cfg.dataset.synthetic);
  if (!cfg.dataset.path) throw ConfigError("no dataset configured");
  LabelPolicy policy =
      cfg.problem.loss == Loss::Ridge ? LabelPolicy::Raw : LabelPolicy::Binary;
  return parse_libsvm_file(*cfg.dataset.path, policy, cfg.dataset.dimension);
}

std::vector<double> reward_bound_vector(const SamplerConfig& cfg, const ProblemSpec& spec,
                                        const Dataset& data) {
  BoundSource src = cfg.bounds;
  if (src == BoundSource::Auto)
    src = spec.loss == Loss::Logistic ? BoundSource::GradientBound
                                      : BoundSource::InitialGradient;
  if (src == BoundSource::GradientBound) {
    std::optional<double> radius;
    if (spec.loss != Loss::Logistic) radius = cfg.radius;
    return sgd_reward_bounds(spec, data, radius);
  }
  // InitialGradient: exact reward weights at the zero start.
  Vector w0 = Vector::Zero(data.dimension());
  double n = static_cast<double>(data.size());
  std::vector<double> a;
  a.reserve(static_cast<std::size_t>(data.size()));
  for (const auto& pt : data.points()) {
    double s = gradient_scale(spec, pt, w0);
    a.push_back(s * s * pt.squared_norm() / (n * n));
  }
  return a;
}

std::unique_ptr<Sampler> make_sampler(const SamplerConfig& cfg, const ProblemSpec& spec,
                                      const Dataset& data, long horizon) {
  long h = std::max(horizon, 1L);  // T=0 runs never update, any delta works
  switch (cfg.kind) {
    case SamplerKind::Uniform:
      return std::make_unique<UniformSampler>(data.size());
    case SamplerKind::IsSmoothness:
      return std::make_unique<FixedSampler>(is_from_smoothness(smoothness_profile(spec, data)));
    case SamplerKind::IsBound:
      return std::make_unique<FixedSampler>(
          is_from_bounds(reward_bound_vector(cfg, spec, data)));
    case SamplerKind::Mabs: {
      auto a = reward_bound_vector(cfg, spec, data);
      double msq = mean_square(a);
      if (!(msq > 0.0)) throw ConfigError("reward bounds are all zero; pick another bound source");
      MabsOptions opts;
      opts.eta = cfg.eta;
      opts.horizon_scale = cfg.horizon_scale;
      opts.reset_bin = cfg.reset_bin;
      return std::make_unique<MabsSampler>(data.size(), h, msq, opts);
    }
    case SamplerKind::Mabs2: {
      auto a = reward_bound_vector(cfg, spec, data);
      MabsOptions opts;
      opts.eta = cfg.eta;
      opts.horizon_scale = cfg.horizon_scale;
      opts.reset_bin = cfg.reset_bin;
      return std::make_unique<Mabs2Sampler>(a, h, opts);
    }
  }
  throw std::logic_error("make_sampler: unknown kind");
}

RunOutput run_repeats(const ExperimentConfig& cfg, const Dataset& data,
                      const TraceOptions& opts) {
  validate_or_throw(cfg);
  TraceOptions topts = opts;
  if (topts.stride == 0) topts.stride = cfg.stride;

  RunOutput out;
  out.traces.resize(static_cast<std::size_t>(cfg.repeats));
  std::vector<std::string> failures(static_cast<std::size_t>(cfg.repeats));

  auto one_repeat = [&](int r) {
    try {
      auto sampler = make_sampler(cfg.sampler, cfg.problem, data, cfg.horizon);
      out.traces[static_cast<std::size_t>(r)] =
          run(cfg.problem, data, estimator_of(cfg.algorithm), *sampler, cfg.schedule,
              cfg.horizon, cfg.seed + static_cast<std::uint64_t>(r), topts,
              proximal_of(cfg.algorithm));
    } catch (const std::exception& e) {
      failures[static_cast<std::size_t>(r)] = e.what();
    }
  };

  unsigned pool = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                  : std::max(1u, std::thread::hardware_concurrency());
  pool = std::min<unsigned>(pool, static_cast<unsigned>(cfg.repeats));
  if (pool <= 1) {
    for (int r = 0; r < cfg.repeats; ++r) one_repeat(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    workers.reserve(pool);
    for (unsigned k = 0; k < pool; ++k)
      workers.emplace_back([&] {
        for (int r = next.fetch_add(1); r < cfg.repeats; r = next.fetch_add(1)) one_repeat(r);
      });
    for (auto& w : workers) w.join();
  }
  for (int r = 0; r < cfg.repeats; ++r)
    if (!failures[static_cast<std::size_t>(r)].empty())
      throw ConfigError("repeat " + std::to_string(r) + ": " +
                        failures[static_cast<std::size_t>(r)]);

  out.repeats.reserve(out.traces.size());
  for (int r = 0; r < cfg.repeats; ++r) {
    const auto& tr = out.traces[static_cast<std::size_t>(r)];
    RepeatSummary s;
    s.repeat = r;
    s.seed = cfg.seed + static_cast<std::uint64_t>(r);
    const auto& last = tr.metrics.back();
    s.final_cost = last.cost;
    s.final_effective_variance = last.effective_variance;
    s.final_pseudo_variance = last.pseudo_variance;
    s.diverged = tr.diverged;
    out.repeats.push_back(s);
  }
  return out;
}

namespace {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_and_sample_std(const std::vector<double>& v) {
  MeanStd ms;
  if (v.empty()) return ms;
  for (double x : v) ms.mean += x;
  ms.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double acc = 0.0;
    for (double x : v) acc += (x - ms.mean) * (x - ms.mean);
    ms.std = std::sqrt(acc / static_cast<double>(v.size() - 1));
  }
  return ms;
}

// JSON has no Inf/NaN; serialize them as strings so summaries stay loadable.
nlohmann::ordered_json json_number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

}  // namespace

nlohmann::ordered_json summarize(const ExperimentConfig& cfg, const RunOutput& out) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["config"] = config_to_json(cfg);
  nlohmann::ordered_json reps = nlohmann::ordered_json::array();
  std::vector<double> costs, ves;
  int diverged = 0;
  for (const auto& r : out.repeats) {
    reps.push_back({{"repeat", r.repeat},
                    {"seed", r.seed},
                    {"final_cost", json_number(r.final_cost)},
                    {"final_effective_variance", json_number(r.final_effective_variance)},
                    {"final_pseudo_variance", json_number(r.final_pseudo_variance)},
                    {"diverged", r.diverged}});
    costs.push_back(r.final_cost);
    ves.push_back(r.final_effective_variance);
    diverged += r.diverged ? 1 : 0;
  }
  j["repeats"] = reps;
  MeanStd c = mean_and_sample_std(costs);
  MeanStd v = mean_and_sample_std(ves);
  j["aggregate"] = {{"mean_final_cost", json_number(c.mean)},
                    {"std_final_cost", json_number(c.std)},
                    {"mean_final_effective_variance", json_number(v.mean)},
                    {"std_final_effective_variance", json_number(v.std)},
                    {"diverged_count", diverged}};
  return j;
}

void write_run_outputs(const ExperimentConfig& cfg, const RunOutput& out) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + cfg.out_dir + "'");
  for (std::size_t r = 0; r < out.traces.size(); ++r) {
    char name[32];
    std::snprintf(name, sizeof name, "trace_%03zu.csv", r);
    write_trace_csv_file(out.traces[r], (std::filesystem::path(cfg.out_dir) / name).string());
  }
  std::string path = (std::filesystem::path(cfg.out_dir) / "summary.json").string();
  std::ofstream sum(path);
  if (!sum) throw IoError("cannot open '" + path + "' for writing");
  sum << summarize(cfg, out).dump(2) << '\n';
  if (!sum) throw IoError("failed writing '" + path + "'");
}

double minimize_full_batch(const ProblemSpec& spec, const Dataset& data, double tol,
                           long max_iters, Vector* w_out) {
  if (spec.reg == Regularizer::L1 && spec.lambda > 0.0)
    throw ConfigError("full-batch reference needs a differentiable objective (no L1)");
  Vector w = Vector::Zero(data.dimension());
  double F = full_cost(spec, data, w);
  double gamma = 1.0;
  double gamma_good = 0.0;  // last step size with a certified decrease
  for (long it = 0; it < max_iters; ++it) {
    Vector g = full_gradient(spec, data, w);
    if (spec.reg == Regularizer::L2 && spec.lambda > 0.0) g += spec.lambda * w;
    double gn2 = g.squaredNorm();
    if (std::sqrt(gn2) < tol) {
      if (w_out) *w_out = w;
      return F;
    }
    // Near the optimum the sufficient-decrease margin drops below the
    // rounding noise of F, so an Armijo test can no longer certify
    // progress even though the iterate can still improve. Fall back to
    // fixed steps at half the last certified step size.
    double noise = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(F), 1e-30);
    auto certifiable = [&](double step) { return 1e-4 * step * gn2 > noise; };
    if (!certifiable(gamma) && gamma_good > 0.0) {
      w -= 0.5 * gamma_good * g;
      F = full_cost(spec, data, w);
      gamma = gamma_good;
      continue;
    }
    // Armijo backtracking with gentle re-expansion.
    while (true) {
      Vector trial = w - gamma * g;
      double Ft = full_cost(spec, data, trial);
      if (Ft <= F - 1e-4 * gamma * gn2) {
        w = std::move(trial);
        F = Ft;
        gamma_good = gamma;
        break;
      }
      gamma *= 0.5;
      if (!certifiable(gamma) && gamma_good > 0.0) {
        w -= 0.5 * gamma_good * g;
        F = full_cost(spec, data, w);
        gamma = gamma_good;
        break;
      }
      if (gamma < 1e-18) throw std::runtime_error("line search stalled");
    }
    gamma = std::min(gamma * 2.0, 1e6);
  }
  throw std::runtime_error("full-batch descent did not reach the gradient tolerance");
}

std::vector<TauSweepRow> tau_sweep(const ExperimentConfig& cfg, const std::vector<double>& taus,
                                   const std::vector<SamplerKind>& samplers) {
  if (!cfg.dataset.synthetic) throw ConfigError("tau sweep needs a synthetic dataset config");
  if (taus.empty()) throw ConfigError("tau sweep needs a nonempty tau grid");
  validate_or_throw(cfg);
  std::vector<TauSweepRow> rows;
  for (double tau : taus) {
    SyntheticConfig scfg = *cfg.dataset.synthetic;
    scfg.scale_c = scale_for_tau(scfg, tau);
    Dataset data = generate_synthetic(scfg);
    double fstar = minimize_full_batch(cfg.problem, data);
    for (SamplerKind kind : samplers) {
      ExperimentConfig run_cfg = cfg;
      run_cfg.dataset.synthetic = scfg;
      run_cfg.sampler.kind = kind;
      RunOutput out = run_repeats(run_cfg, data);
      double gap = 0.0, ve = 0.0;
      for (const auto& r : out.repeats) {
        gap += r.final_cost - fstar;
        ve += r.final_effective_variance;
      }
      TauSweepRow row;
      row.tau = tau;
      row.scale_c = scfg.scale_c;
      row.sampler = kind;
      row.mean_final_cost_gap = gap / static_cast<double>(out.repeats.size());
      row.mean_final_effective_variance = ve / static_cast<double>(out.repeats.size());
      rows.push_back(row);
    }
  }
  return rows;
}

void write_tau_sweep_csv(const std::vector<TauSweepRow>& rows, std::ostream& out) {
  out << "tau,scale_c,sampler,mean_final_cost_gap,mean_final_effective_variance\n";
  for (const auto& r : rows)
    out << format_double(r.tau) << ',' << format_double(r.scale_c) << ',' << to_string(r.sampler)
        << ',' << format_double(r.mean_final_cost_gap) << ','
        << format_double(r.mean_final_effective_variance) << '\n';
}

std::vector<StabilityRow> stability_sweep(const ExperimentConfig& cfg, const Dataset& data,
                                          const std::vector<double>& gammas,
                                          const std::vector<SamplerKind>& samplers) {
  if (cfg.schedule.kind != StepSchedule::Kind::Constant)
    throw ConfigError("stability sweep needs a constant schedule");
  if (gammas.empty()) throw ConfigError("stability sweep needs a nonempty gamma grid");
  validate_or_throw(cfg);
  double f0 = full_cost(cfg.problem, data, Vector::Zero(data.dimension()));
  std::vector<StabilityRow> rows;
  for (double gamma : gammas) {
    if (!(gamma > 0.0)) throw ConfigError("gamma grid entries must be positive");
    for (SamplerKind kind : samplers) {
      ExperimentConfig run_cfg = cfg;
      run_cfg.schedule.gamma = gamma;
      run_cfg.sampler.kind = kind;
      RunOutput out = run_repeats(run_cfg, data);
      StabilityRow row;
      row.gamma = gamma;
      row.sampler = kind;
      row.algorithm = cfg.algorithm;
      row.repeats = cfg.repeats;
      int diverged = 0;
      double acc = 0.0;
      int kept = 0;
      for (const auto& r : out.repeats) {
        bool bad = r.diverged || !std::isfinite(r.final_cost) || r.final_cost > f0;
        if (bad) {
          ++diverged;
        } else {
          acc += r.final_cost;
          ++kept;
        }
      }
      row.diverged_fraction = static_cast<double>(diverged) / static_cast<double>(cfg.repeats);
      if (kept > 0) row.mean_final_cost = acc / static_cast<double>(kept);
      rows.push_back(row);
    }
  }
  return rows;
}

void write_stability_csv(const std::vector<StabilityRow>& rows, std::ostream& out) {
  out << "gamma,sampler,estimator,mean_final_cost,diverged_fraction,repeats\n";
  for (const auto& r : rows) {
    out << format_double(r.gamma) << ',' << to_string(r.sampler) << ',' << to_string(r.algorithm)
        << ',';
    if (r.mean_final_cost) out << format_double(*r.mean_final_cost);
    out << ',' << format_double(r.diverged_fraction) << ',' << r.repeats << '\n';
  }
}

}  // namespace mabs
