#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mabs/data_io.hpp"
#include "mabs/experiments.hpp"
#include "mabs/verify.hpp"

namespace {

using mabs::ExperimentConfig;

// Flag values held separately from the config so that a config file can be
// loaded first and explicitly passed flags applied on top (flags win).
struct Flags {
  std::string config_path;
  std::string dataset;
  std::string loss, reg, estimator, sampler, schedule, bounds;
  double lambda = 0.0, eta = 0.4, gamma = 0.0, mu = 0.0, alpha = 0.0;
  double t_scale = 1.0, radius = 0.0;
  long T = 0;
  int repeats = 0, reset_bin = 0, threads = 0, dimension = 0;
  std::uint64_t seed = 0;
  long stride = 0;
  std::string out_dir;
  int synth_n = 0, synth_d = 0;
  std::uint64_t synth_seed = 0;
  double scale_c = 0.0, beta_std = 0.0, noise_std = 0.0;
};

void add_common_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path, "Config file (JSON); flags override its values");
  cmd->add_option("--dataset", f.dataset, "LIBSVM path, or 'synthetic'");
  cmd->add_option("--loss", f.loss, "logistic | squared-hinge | ridge");
  cmd->add_option("--reg", f.reg, "l1 | l2 | none");
  cmd->add_option("--lambda", f.lambda, "Regularization weight");
  cmd->add_option("--estimator", f.estimator, "sgd | prox-sgd | prox-svrg | saga");
  cmd->add_option("--sampler", f.sampler, "uniform | is-smoothness | is-bound | mabs | mabs2");
  cmd->add_option("--eta", f.eta, "Bandit exploration mix, in (0, 0.5)");
  cmd->add_option("--T", f.T, "Iterations per repeat");
  cmd->add_option("--repeats", f.repeats, "Independent repeats");
  cmd->add_option("--seed", f.seed, "Base seed; repeat r uses seed + r");
  cmd->add_option("--gamma", f.gamma, "Constant step size");
  cmd->add_option("--schedule", f.schedule, "constant | inverse-strong | shifted");
  cmd->add_option("--mu", f.mu, "Strong-convexity constant for decaying schedules");
  cmd->add_option("--alpha", f.alpha, "Shift for the shifted schedule");
  cmd->add_option("--stride", f.stride, "Metric recording stride (0 = dataset size)");
  cmd->add_option("--out", f.out_dir, "Output directory");
  cmd->add_option("--reset-bin", f.reset_bin, "Reset bandit weights every N updates");
  cmd->add_option("--t-scale", f.t_scale, "Relaxed-horizon factor c >= 1 (divides delta)");
  cmd->add_option("--a-source", f.bounds, "auto | bound | grad-init");
  cmd->add_option("--radius", f.radius, "Iterate radius for gradient bounds");
  cmd->add_option("--threads", f.threads, "Parallel repeats (0 = hardware)");
  cmd->add_option("--dimension", f.dimension, "Dimension override when parsing");
  cmd->add_option("--synth-n", f.synth_n, "Synthetic datapoint count");
  cmd->add_option("--synth-d", f.synth_d, "Synthetic dimension");
  cmd->add_option("--synth-seed", f.synth_seed, "Synthetic generator seed");
  cmd->add_option("--scale-c", f.scale_c, "Synthetic max-norm point scale");
  cmd->add_option("--beta-std", f.beta_std, "Synthetic coefficient std");
  cmd->add_option("--noise-std", f.noise_std, "Synthetic label noise std");
}

bool given(const CLI::App* cmd, const std::string& name) { return cmd->count(name) > 0; }

ExperimentConfig build_config(const CLI::App* cmd, const Flags& f,
                              const ExperimentConfig& defaults) {
  ExperimentConfig cfg =
      given(cmd, "--config") ? mabs::load_config_file(f.config_path) : defaults;

  if (given(cmd, "--dataset")) {
    cfg.dataset = {};
    if (f.dataset == "synthetic")
      cfg.dataset.synthetic = defaults.dataset.synthetic.value_or(mabs::SyntheticConfig{});
    else
      cfg.dataset.path = f.dataset;
  }
  bool synth_flag = given(cmd, "--synth-n") || given(cmd, "--synth-d") ||
                    given(cmd, "--synth-seed") || given(cmd, "--scale-c") ||
                    given(cmd, "--beta-std") || given(cmd, "--noise-std");
  if (synth_flag) {
    if (!cfg.dataset.synthetic) {
      if (cfg.dataset.path)
        throw mabs::ConfigError("synthetic flags require --dataset synthetic");
      cfg.dataset.synthetic = mabs::SyntheticConfig{};
    }
    auto& s = *cfg.dataset.synthetic;
    if (given(cmd, "--synth-n")) s.n = f.synth_n;
    if (given(cmd, "--synth-d")) s.d = f.synth_d;
    if (given(cmd, "--synth-seed")) s.seed = f.synth_seed;
    if (given(cmd, "--scale-c")) s.scale_c = f.scale_c;
    if (given(cmd, "--beta-std")) s.beta_std = f.beta_std;
    if (given(cmd, "--noise-std")) s.noise_std = f.noise_std;
  }
  if (given(cmd, "--dimension")) cfg.dataset.dimension = f.dimension;

  if (given(cmd, "--loss")) cfg.problem.loss = mabs::loss_from_string(f.loss);
  if (given(cmd, "--reg")) cfg.problem.reg = mabs::reg_from_string(f.reg);
  if (given(cmd, "--lambda")) cfg.problem.lambda = f.lambda;
  if (given(cmd, "--estimator")) cfg.algorithm = mabs::algorithm_from_string(f.estimator);
  if (given(cmd, "--sampler")) cfg.sampler.kind = mabs::sampler_from_string(f.sampler);
  if (given(cmd, "--eta")) cfg.sampler.eta = f.eta;
  if (given(cmd, "--t-scale")) cfg.sampler.horizon_scale = f.t_scale;
  if (given(cmd, "--reset-bin")) cfg.sampler.reset_bin = f.reset_bin;
  if (given(cmd, "--a-source")) cfg.sampler.bounds = mabs::bound_source_from_string(f.bounds);
  if (given(cmd, "--radius")) cfg.sampler.radius = f.radius;
  if (given(cmd, "--schedule")) cfg.schedule.kind = mabs::schedule_kind_from_string(f.schedule);
  if (given(cmd, "--gamma")) {
    if (!given(cmd, "--schedule")) cfg.schedule.kind = mabs::StepSchedule::Kind::Constant;
    cfg.schedule.gamma = f.gamma;
  }
  if (given(cmd, "--mu")) cfg.schedule.mu = f.mu;
  if (given(cmd, "--alpha")) cfg.schedule.alpha = f.alpha;
  if (given(cmd, "--T")) cfg.horizon = f.T;
  if (given(cmd, "--repeats")) cfg.repeats = f.repeats;
  if (given(cmd, "--seed")) cfg.seed = f.seed;
  if (given(cmd, "--stride")) cfg.stride = f.stride;
  if (given(cmd, "--out")) cfg.out_dir = f.out_dir;
  if (given(cmd, "--threads")) cfg.threads = f.threads;
  return cfg;
}

int run_command(const CLI::App* cmd, const Flags& f) {
  ExperimentConfig defaults;
  defaults.dataset.synthetic = mabs::SyntheticConfig{};
  ExperimentConfig cfg = build_config(cmd, f, defaults);
  mabs::validate_or_throw(cfg);
  mabs::Dataset data = mabs::load_dataset(cfg);
  mabs::RunOutput out = mabs::run_repeats(cfg, data);
  mabs::write_run_outputs(cfg, out);
  std::cout << "wrote " << out.traces.size() << " trace(s) and summary.json under "
            << cfg.out_dir << "\n";
  return 0;
}

int tau_sweep_command(const CLI::App* cmd, const Flags& f, const std::vector<double>& taus) {
  ExperimentConfig defaults;  // the dense Gaussian ridge protocol
  defaults.problem.loss = mabs::Loss::Ridge;
  defaults.problem.reg = mabs::Regularizer::None;
  defaults.problem.lambda = 0.0;
  defaults.dataset.synthetic = mabs::SyntheticConfig{};
  defaults.schedule.kind = mabs::StepSchedule::Kind::Constant;
  defaults.schedule.gamma = 4e-3;
  defaults.horizon = 3000;
  defaults.repeats = 200;
  ExperimentConfig cfg = build_config(cmd, f, defaults);
  mabs::validate_or_throw(cfg);

  auto rows = mabs::tau_sweep(cfg, taus);

  std::filesystem::create_directories(cfg.out_dir);
  std::string csv_path = (std::filesystem::path(cfg.out_dir) / "tau_sweep.csv").string();
  std::ofstream csv(csv_path);
  if (!csv) throw mabs::IoError("cannot open '" + csv_path + "' for writing");
  mabs::write_tau_sweep_csv(rows, csv);

  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["config"] = mabs::config_to_json(cfg);
  j["tau_grid"] = taus;
  nlohmann::ordered_json jrows = nlohmann::ordered_json::array();
  for (const auto& r : rows)
    jrows.push_back({{"tau", r.tau},
                     {"scale_c", r.scale_c},
                     {"sampler", mabs::to_string(r.sampler)},
                     {"mean_final_cost_gap", r.mean_final_cost_gap},
                     {"mean_final_effective_variance", r.mean_final_effective_variance}});
  j["rows"] = jrows;
  std::string sum_path = (std::filesystem::path(cfg.out_dir) / "summary.json").string();
  std::ofstream sum(sum_path);
  if (!sum) throw mabs::IoError("cannot open '" + sum_path + "' for writing");
  sum << j.dump(2) << '\n';
  std::cout << "wrote " << csv_path << "\n";
  return 0;
}

int stability_command(const CLI::App* cmd, const Flags& f, const std::vector<double>& gammas) {
  ExperimentConfig defaults;  // the step-size stress protocol
  defaults.problem.loss = mabs::Loss::Logistic;
  defaults.problem.reg = mabs::Regularizer::L1;
  defaults.problem.lambda = 1e-4;
  defaults.repeats = 50;
  defaults.horizon = 0;  // filled in as 60n below when not given
  ExperimentConfig cfg = build_config(cmd, f, defaults);
  mabs::Dataset data = mabs::load_dataset(cfg);
  if (!given(cmd, "--T") && !given(cmd, "--config")) cfg.horizon = 60L * data.size();
  mabs::validate_or_throw(cfg);

  auto rows = mabs::stability_sweep(cfg, data, gammas);

  std::filesystem::create_directories(cfg.out_dir);
  std::string csv_path = (std::filesystem::path(cfg.out_dir) / "stability.csv").string();
  std::ofstream csv(csv_path);
  if (!csv) throw mabs::IoError("cannot open '" + csv_path + "' for writing");
  mabs::write_stability_csv(rows, csv);

  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["config"] = mabs::config_to_json(cfg);
  j["gamma_grid"] = gammas;
  nlohmann::ordered_json jrows = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row = {{"gamma", r.gamma},
                                  {"sampler", mabs::to_string(r.sampler)},
                                  {"estimator", mabs::to_string(r.algorithm)},
                                  {"diverged_fraction", r.diverged_fraction},
                                  {"repeats", r.repeats}};
    if (r.mean_final_cost)
      row["mean_final_cost"] = *r.mean_final_cost;
    else
      row["mean_final_cost"] = nullptr;
    jrows.push_back(row);
  }
  j["rows"] = jrows;
  std::string sum_path = (std::filesystem::path(cfg.out_dir) / "summary.json").string();
  std::ofstream sum(sum_path);
  if (!sum) throw mabs::IoError("cannot open '" + sum_path + "' for writing");
  sum << j.dump(2) << '\n';
  std::cout << "wrote " << csv_path << "\n";
  return 0;
}

int verify_command(const std::string& suite, std::uint64_t seed) {
  auto results = mabs::run_verify_suites(suite, seed);
  nlohmann::ordered_json report = mabs::verify_report(results);
  std::cout << report.dump(2) << '\n';
  return report.at("pass").get<bool>() ? 0 : 3;
}

int parse_check_command(const std::string& path, const std::string& labels,
                        std::optional<int> dimension) {
  mabs::LabelPolicy policy;
  if (labels == "binary")
    policy = mabs::LabelPolicy::Binary;
  else if (labels == "raw")
    policy = mabs::LabelPolicy::Raw;
  else
    throw mabs::ConfigError("labels must be 'binary' or 'raw'");
  mabs::Dataset data = mabs::parse_libsvm_file(path, policy, dimension);
  std::cout << "ok: n=" << data.size() << " d=" << data.dimension()
            << " nnz=" << data.nonzeros() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive datapoint sampling for stochastic optimizers"};
  app.require_subcommand(1);

  Flags f;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment configuration");
  add_common_flags(run_cmd, f);

  Flags ft;
  std::vector<double> taus{4.0, 10.0, 20.0, 40.0};
  auto* tau_cmd = app.add_subcommand("tau-sweep", "Sweep the smoothness ratio on synthetic data");
  add_common_flags(tau_cmd, ft);
  tau_cmd->add_option("--tau-grid", taus, "Target smoothness ratios")->delimiter(',');

  Flags fs;
  std::vector<double> gammas{0.1, 0.5, 1.0, 2.0, 5.0};
  auto* stab_cmd = app.add_subcommand("stability-sweep", "Sweep constant step sizes");
  add_common_flags(stab_cmd, fs);
  stab_cmd->add_option("--gamma-grid", gammas, "Constant step sizes to try")->delimiter(',');

  std::string suite = "all";
  std::uint64_t verify_seed = 20240915;
  auto* verify_cmd = app.add_subcommand("verify", "Run the property suites");
  verify_cmd->add_option("--suite", suite, "all | lemma1 | unbiased | tree | bound");
  verify_cmd->add_option("--seed", verify_seed, "Suite seed");

  std::string parse_path, parse_labels = "binary";
  int parse_dim = 0;
  auto* parse_cmd = app.add_subcommand("parse-check", "Validate a LIBSVM file");
  parse_cmd->add_option("path", parse_path, "File to validate")->required();
  parse_cmd->add_option("--labels", parse_labels, "binary | raw");
  parse_cmd->add_option("--dimension", parse_dim, "Dimension override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // flag misuse is a config error
  }

  try {
    if (run_cmd->parsed()) return run_command(run_cmd, f);
    if (tau_cmd->parsed()) return tau_sweep_command(tau_cmd, ft, taus);
    if (stab_cmd->parsed()) return stability_command(stab_cmd, fs, gammas);
    if (verify_cmd->parsed()) return verify_command(suite, verify_seed);
    if (parse_cmd->parsed()) {
      std::optional<int> dim;
      if (parse_cmd->count("--dimension") > 0) dim = parse_dim;
      return parse_check_command(parse_path, parse_labels, dim);
    }
  } catch (const mabs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const mabs::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 4;
  } catch (const mabs::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
