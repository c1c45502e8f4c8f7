#include "mabs/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mabs {

void Sampler::update(int /*index*/, double reward) {
  if (!(reward >= 0.0)) throw std::invalid_argument("Sampler: reward must be nonnegative");
}

std::vector<double> Sampler::probabilities() const {
  std::vector<double> p(static_cast<std::size_t>(size()));
  for (int i = 0; i < size(); ++i) p[static_cast<std::size_t>(i)] = probability(i);
  return p;
}

namespace {

// Largest representable position strictly below the tree total.
double clamp_position(double u, double total) {
  return u < total ? u : std::nextafter(total, 0.0);
}

}  // namespace

UniformSampler::UniformSampler(int n) : n_(n) {
  if (n < 1) throw ConfigError("UniformSampler: n must be positive");
}

Draw UniformSampler::draw(Rng& rng) {
  int i = rng.uniform_index(n_);
  return {i, 1.0 / static_cast<double>(n_)};
}

double UniformSampler::probability(int index) const {
  if (index < 0 || index >= n_) throw std::out_of_range("UniformSampler: index out of range");
  return 1.0 / static_cast<double>(n_);
}

FixedSampler::FixedSampler(std::vector<double> p) : p_(std::move(p)), tree_(p_) {
  double sum = 0.0;
  for (double x : p_) {
    if (!(x > 0.0)) throw ConfigError("FixedSampler: probabilities must be positive");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("FixedSampler: probabilities must sum to 1");
}

Draw FixedSampler::draw(Rng& rng) {
  double u = clamp_position(rng.uniform() * tree_.total(), tree_.total());
  int i = tree_.sample(u);
  return {i, p_[static_cast<std::size_t>(i)]};
}

double FixedSampler::probability(int index) const {
  if (index < 0 || index >= size()) throw std::out_of_range("FixedSampler: index out of range");
  return p_[static_cast<std::size_t>(index)];
}

std::vector<double> clamped_normalize(std::vector<double> scores, double eps) {
  if (scores.empty()) throw std::invalid_argument("clamped_normalize: empty scores");
  double sum = 0.0;
  for (double x : scores) {
    if (!(x >= 0.0)) throw std::invalid_argument("clamped_normalize: negative score");
    sum += x;
  }
  if (!(sum > 0.0)) throw ConfigError("clamped_normalize: all scores are zero");
  sum = 0.0;
  for (double& x : scores) {
    x = std::max(x, eps);
    sum += x;
  }
  for (double& x : scores) x /= sum;
  return scores;
}

FixedSampler is_from_smoothness(const SmoothnessProfile& profile) {
  return FixedSampler(clamped_normalize(profile.per_point));
}

FixedSampler is_from_bounds(const std::vector<double>& reward_bounds) {
  std::vector<double> scores;
  scores.reserve(reward_bounds.size());
  for (double a : reward_bounds) {
    if (!(a >= 0.0)) throw std::invalid_argument("is_from_bounds: negative bound");
    scores.push_back(std::sqrt(a));
  }
  return FixedSampler(clamped_normalize(scores));
}

double mabs_delta(int n, long horizon, double a_sq_mean, double eta, double horizon_scale) {
  if (n < 2) throw ConfigError("mabs_delta: n must be at least 2");
  if (horizon < 1) throw ConfigError("mabs_delta: horizon must be positive");
  if (!(a_sq_mean > 0.0)) throw ConfigError("mabs_delta: mean(a^2) must be positive");
  if (!(eta > 0.0 && eta < 0.5)) throw ConfigError("mabs_delta: eta must lie in (0, 0.5)");
  if (!(horizon_scale >= 1.0)) throw ConfigError("mabs_delta: horizon scale must be >= 1");
  double nn = static_cast<double>(n);
  double num = eta * eta * eta * eta * std::log(nn);
  double den = static_cast<double>(horizon) * std::pow(nn, 5) * a_sq_mean;
  return std::sqrt(num / den) / horizon_scale;
}

long mabs_min_horizon(const std::vector<double>& reward_bounds, double horizon_scale) {
  if (reward_bounds.empty()) throw ConfigError("mabs_min_horizon: empty bounds");
  if (!(horizon_scale >= 1.0)) throw ConfigError("mabs_min_horizon: horizon scale must be >= 1");
  double n = static_cast<double>(reward_bounds.size());
  if (reward_bounds.size() < 2) return 1;
  double amax = 0.0;
  for (double a : reward_bounds) {
    if (!(a >= 0.0)) throw std::invalid_argument("mabs_min_horizon: negative bound");
    amax = std::max(amax, a);
  }
  double msq = mean_square(reward_bounds);
  if (!(msq > 0.0)) throw ConfigError("mabs_min_horizon: all bounds are zero");
  double t = 25.0 * n * std::log(n) * amax * amax /
             (4.0 * horizon_scale * horizon_scale * msq);
  return std::max(1L, static_cast<long>(std::ceil(t)));
}

MabsSampler::MabsSampler(Raw, int n, double eta, double delta, std::optional<int> reset_bin)
    : tree_(std::vector<double>(static_cast<std::size_t>(std::max(n, 1)), 1.0)),
      eta_(eta),
      delta_(delta),
      reset_bin_(reset_bin) {
  if (n < 2) throw ConfigError("MabsSampler: n must be at least 2");
  if (!(eta > 0.0 && eta < 0.5)) throw ConfigError("MabsSampler: eta must lie in (0, 0.5)");
  if (!(delta > 0.0)) throw ConfigError("MabsSampler: delta must be positive");
  if (reset_bin_ && *reset_bin_ < 1) throw ConfigError("MabsSampler: reset bin must be positive");
}

MabsSampler::MabsSampler(int n, long horizon, double a_sq_mean, MabsOptions opts)
    : MabsSampler(Raw{}, n, opts.eta,
                  opts.delta_override
                      ? *opts.delta_override
                      : mabs_delta(n, horizon, a_sq_mean, opts.eta, opts.horizon_scale),
                  opts.reset_bin) {}

double MabsSampler::mixing(int /*index*/) const { return 1.0 / static_cast<double>(size()); }

int MabsSampler::draw_mixing(Rng& rng) { return rng.uniform_index(size()); }

double MabsSampler::probability(int index) const {
  if (index < 0 || index >= size()) throw std::out_of_range("MabsSampler: index out of range");
  return (1.0 - eta_) * tree_.weight(index) / tree_.total() + eta_ * mixing(index);
}

Draw MabsSampler::draw(Rng& rng) {
  // Mixture draw: weight component with mass 1 - eta, mixing component with
  // mass eta. The reported probability is the total mixture mass on i.
  double u = rng.uniform();
  int i;
  if (u < 1.0 - eta_) {
    double v = rng.uniform() * tree_.total();
    i = tree_.sample(v < tree_.total() ? v : std::nextafter(tree_.total(), 0.0));
  } else {
    i = draw_mixing(rng);
  }
  return {i, probability(i)};
}

void MabsSampler::update(int index, double reward) {
  if (index < 0 || index >= size()) throw std::out_of_range("MabsSampler: index out of range");
  if (!(reward >= 0.0)) throw std::invalid_argument("MabsSampler: reward must be nonnegative");
  double p = probability(index);
  double x = delta_ * reward / (p * p * p);
  // Divergent runs can feed an infinite reward; pinning the exponent lands
  // the leaf at the renormalized maximum instead of minting inf or NaN.
  if (!(x <= kExponentCap)) x = kExponentCap;
  double w_old = tree_.weight(index);
  // log of the would-be weight; -inf when the leaf already underflowed to 0.
  double log_new = std::log(w_old) + x;
  if (log_new > kRenormLogThreshold) {
    // Divide every leaf by the new maximum so the largest becomes 1. Leaves
    // more than ~700 nats below the maximum underflow to 0; the eta/n floor
    // keeps them reachable.
    std::vector<double> leaves = tree_.weights();
    double log_max = log_new;
    for (std::size_t j = 0; j < leaves.size(); ++j)
      if (static_cast<int>(j) != index) log_max = std::max(log_max, std::log(leaves[j]));
    for (std::size_t j = 0; j < leaves.size(); ++j)
      leaves[j] = static_cast<int>(j) == index ? std::exp(log_new - log_max)
                                               : std::exp(std::log(leaves[j]) - log_max);
    tree_.assign(leaves);
    log_renorm_scale_ += log_max;
  } else {
    double w_new = w_old * std::exp(x);
    // 0 * inf or subnormal * inf: recover through the log form, which keeps
    // an underflowed leaf at zero instead of NaN.
    if (!std::isfinite(w_new)) w_new = std::exp(log_new);
    tree_.update(index, w_new);
  }
  ++updates_;
  if (reset_bin_ && updates_ % *reset_bin_ == 0) reset();
}

void MabsSampler::reset() { tree_.fill(1.0); }

double mabs2_delta(const std::vector<double>& reward_bounds, long horizon, double eta,
                   double horizon_scale) {
  int n = static_cast<int>(reward_bounds.size());
  if (n < 2) throw ConfigError("mabs2_delta: n must be at least 2");
  if (horizon < 1) throw ConfigError("mabs2_delta: horizon must be positive");
  if (!(eta > 0.0 && eta < 0.5)) throw ConfigError("mabs2_delta: eta must lie in (0, 0.5)");
  if (!(horizon_scale >= 1.0)) throw ConfigError("mabs2_delta: horizon scale must be >= 1");
  double qbar = 0.0;
  for (double a : reward_bounds) {
    if (!(a >= 0.0)) throw std::invalid_argument("mabs2_delta: negative bound");
    qbar += std::pow(a, 0.4);
  }
  qbar /= static_cast<double>(n);
  if (!(qbar > 0.0)) throw ConfigError("mabs2_delta: all bounds are zero");
  double nn = static_cast<double>(n);
  double num = eta * eta * eta * eta * std::log(nn);
  double den = static_cast<double>(horizon) * std::pow(nn, 5) * std::pow(qbar, 5);
  return std::sqrt(num / den) / horizon_scale;
}

Mabs2Sampler::Mabs2Sampler(const std::vector<double>& reward_bounds, long horizon,
                           MabsOptions opts)
    : MabsSampler(Raw{}, static_cast<int>(reward_bounds.size()), opts.eta,
                  opts.delta_override
                      ? *opts.delta_override
                      : mabs2_delta(reward_bounds, horizon, opts.eta, opts.horizon_scale),
                  opts.reset_bin),
      q_([&] {
        std::vector<double> scores;
        scores.reserve(reward_bounds.size());
        for (double a : reward_bounds) {
          if (!(a >= 0.0)) throw std::invalid_argument("Mabs2Sampler: negative bound");
          scores.push_back(std::pow(a, 0.4));
        }
        return clamped_normalize(std::move(scores));
      }()),
      q_tree_(q_) {}

int Mabs2Sampler::draw_mixing(Rng& rng) {
  double v = rng.uniform() * q_tree_.total();
  return q_tree_.sample(v < q_tree_.total() ? v : std::nextafter(q_tree_.total(), 0.0));
}

}  // namespace mabs
