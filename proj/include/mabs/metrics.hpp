#pragma once

#include <vector>

#include "mabs/model.hpp"

namespace mabs {

// V_e(p) = sum_i a_i / p_i. Zero-reward indices contribute nothing even at
// p_i = 0; a positive-reward index with p_i <= 0 is a domain error.
double effective_variance(const std::vector<double>& rewards, const std::vector<double>& p);

struct VarianceReport {
  double effective = 0.0;  // V_e(p)
  double centering = 0.0;  // ||grad f(w)||^2 (p-independent)
  double pseudo = 0.0;     // V = V_e - centering, the estimator's actual variance
};

// Variance split of the plain SGD estimator at iterate w under distribution p,
// with a_i = ||grad phi_i(w)||^2 / n^2.
VarianceReport pseudo_variance(const ProblemSpec& spec, const Dataset& data, const Vector& w,
                               const std::vector<double>& p);

struct Distribution {
  std::vector<double> p;
  // All scores were zero; p fell back to uniform.
  bool degenerate = false;
};

// argmin_p V_e at one iterate: p_i proportional to ||grad phi_i(w)||.
Distribution optimal_stepwise_p(const ProblemSpec& spec, const Dataset& data, const Vector& w);

// argmin_p sum_t V_e^t(p) for a full reward history: p_i proportional to
// sqrt(sum_t a_i^t).
Distribution optimal_static_p(const std::vector<std::vector<double>>& reward_history);

struct BoundReport {
  double adaptive_total = 0.0;   // sum_t V_e^t(p^t) actually paid
  double static_optimum = 0.0;   // sum_t V_e^t(p*) of the best fixed p
  double additive = 0.0;         // constant * sqrt(n^5 T mean(a^2) ln n)
  double constant = 0.0;
  long min_horizon = 0;
  bool horizon_ok = false;       // T reached the guarantee threshold
  bool satisfied = false;        // adaptive_total <= 3 * static_optimum + additive
};

// Check the cumulative effective-variance guarantee of the bandit sampler
// against a recorded run. reward_history[t][i] = a_i^t, p_history[t] = p^t.
BoundReport regret_bound_check(const std::vector<std::vector<double>>& reward_history,
                               const std::vector<std::vector<double>>& p_history,
                               const std::vector<double>& reward_bounds, double constant = 50.0,
                               double horizon_scale = 1.0);

// Convexity-style inequality used by the regret analysis:
//   (1 - 2 zeta) V_e(p1) - (1 - zeta) V_e(p2)
//     <= <p1 - p2, grad V_e(p1)> + zeta <p2, grad V_e(p1)>
// with grad V_e(p)_i = -a_i / p_i^2, for any zeta <= 1 and full-support p1, p2.
bool lemma1_check(const std::vector<double>& rewards, const std::vector<double>& p1,
                  const std::vector<double>& p2, double zeta, double tol = 1e-9);

}  // namespace mabs
