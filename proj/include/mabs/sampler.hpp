#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "mabs/errors.hpp"
#include "mabs/model.hpp"
#include "mabs/rng.hpp"
#include "mabs/weight_tree.hpp"

namespace mabs {

struct Draw {
  int index = 0;
  double probability = 0.0;  // probability the index had at draw time
};

// Datapoint sampling strategy. draw() consumes randomness; update() feeds
// back the reward weight a_i^t observed for the drawn index. probabilities()
// always sums to 1 within 1e-12 and every mass is positive for adaptive
// samplers (floored by the exploration mix).
class Sampler {
 public:
  virtual ~Sampler() = default;

  virtual int size() const = 0;
  virtual Draw draw(Rng& rng) = 0;
  virtual void update(int index, double reward);
  virtual double probability(int index) const = 0;
  std::vector<double> probabilities() const;

  // Internal leaf weights for trace serialization; empty for static samplers.
  virtual std::vector<double> state_weights() const { return {}; }
};

class UniformSampler final : public Sampler {
 public:
  explicit UniformSampler(int n);
  int size() const override { return n_; }
  Draw draw(Rng& rng) override;
  double probability(int index) const override;

 private:
  int n_;
};

// Fixed distribution sampled through a sum tree.
class FixedSampler final : public Sampler {
 public:
  // p must already be a distribution with positive entries.
  explicit FixedSampler(std::vector<double> p);
  int size() const override { return static_cast<int>(p_.size()); }
  Draw draw(Rng& rng) override;
  double probability(int index) const override;

 private:
  std::vector<double> p_;
  WeightTree tree_;
};

// Normalize nonnegative scores into a strictly positive distribution,
// clamping zero entries to eps first. Throws ConfigError when all scores
// are zero, std::invalid_argument on negatives.
std::vector<double> clamped_normalize(std::vector<double> scores, double eps = 1e-12);

// p_i proportional to the per-point smoothness constant L_i.
FixedSampler is_from_smoothness(const SmoothnessProfile& profile);

// p_i proportional to sqrt(a_i): the static optimum for constant rewards.
FixedSampler is_from_bounds(const std::vector<double>& reward_bounds);

struct MabsOptions {
  double eta = 0.4;                     // exploration mix, in (0, 0.5)
  double horizon_scale = 1.0;           // c >= 1; divides the update step delta
  std::optional<int> reset_bin;         // reset weights every this many updates
  std::optional<double> delta_override; // bypass the formula (testing)
};

// delta = sqrt(eta^4 ln n / (T n^5 mean(a^2))) / c.
double mabs_delta(int n, long horizon, double a_sq_mean, double eta = 0.4,
                  double horizon_scale = 1.0);

// Smallest T for which the regret guarantee applies:
// ceil(25 n ln n max(a)^2 / (4 c^2 mean(a^2))).
long mabs_min_horizon(const std::vector<double>& reward_bounds, double horizon_scale = 1.0);

// Bandit sampler: multiplicative weights with exploration mixing.
// p_j = (1 - eta) w_j / W + eta * m_j, where m is uniform here and a
// reward-shaped distribution in the subclass. The drawn index's weight is
// multiplied by exp(delta * a / p^3). Weights live in a sum tree; when the
// updated weight would exceed 1e100 every leaf is renormalized by the
// maximum (in log space), which leaves p unchanged up to underflow.
class MabsSampler : public Sampler {
 public:
  MabsSampler(int n, long horizon, double a_sq_mean, MabsOptions opts = {});

  int size() const override { return tree_.size(); }
  Draw draw(Rng& rng) override;
  void update(int index, double reward) override;
  double probability(int index) const override;
  std::vector<double> state_weights() const override { return tree_.weights(); }

  // Weights back to one; the mixing distribution is untouched.
  void reset();

  double eta() const { return eta_; }
  double delta() const { return delta_; }
  long updates_seen() const { return updates_; }
  // Cumulative log of the factors divided out by overflow renormalizations.
  double log_renorm_scale() const { return log_renorm_scale_; }

 protected:
  struct Raw {};
  MabsSampler(Raw, int n, double eta, double delta, std::optional<int> reset_bin);

  virtual double mixing(int index) const;
  virtual int draw_mixing(Rng& rng);

  WeightTree tree_;
  double eta_;
  double delta_;

 private:
  std::optional<int> reset_bin_;
  long updates_ = 0;
  double log_renorm_scale_ = 0.0;

  static constexpr double kRenormLogThreshold = 230.25850929940457;  // ln 1e100
  // Update exponents past this are pinned: large enough that the leaf lands
  // at the renormalized maximum with everything else underflowing to the
  // eta floor, small enough that the log-space arithmetic stays finite.
  static constexpr double kExponentCap = 1e15;
};

// Bandit sampler whose exploration mass follows q_i proportional to
// a_i^(2/5), with delta = sqrt(eta^4 ln n / (T n^5 mean(a^(2/5))^5)) / c.
class Mabs2Sampler final : public MabsSampler {
 public:
  Mabs2Sampler(const std::vector<double>& reward_bounds, long horizon, MabsOptions opts = {});

  const std::vector<double>& mixing_distribution() const { return q_; }

 protected:
  double mixing(int index) const override { return q_[static_cast<std::size_t>(index)]; }
  int draw_mixing(Rng& rng) override;

 private:
  std::vector<double> q_;
  WeightTree q_tree_;
};

double mabs2_delta(const std::vector<double>& reward_bounds, long horizon, double eta = 0.4,
                   double horizon_scale = 1.0);

}  // namespace mabs
