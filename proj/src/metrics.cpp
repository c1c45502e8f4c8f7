#include "mabs/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mabs/sampler.hpp"

namespace mabs {

double effective_variance(const std::vector<double>& rewards, const std::vector<double>& p) {
  if (rewards.size() != p.size())
    throw std::invalid_argument("effective_variance: size mismatch");
  if (rewards.empty()) throw std::invalid_argument("effective_variance: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    if (!(rewards[i] >= 0.0))
      throw std::invalid_argument("effective_variance: negative reward");
    if (rewards[i] == 0.0) continue;
    if (!(p[i] > 0.0))
      throw std::domain_error("effective_variance: zero probability on positive reward");
    acc += rewards[i] / p[i];
  }
  return acc;
}

VarianceReport pseudo_variance(const ProblemSpec& spec, const Dataset& data, const Vector& w,
                               const std::vector<double>& p) {
  int n = data.size();
  if (static_cast<int>(p.size()) != n)
    throw std::invalid_argument("pseudo_variance: p size mismatch");
  double nn = static_cast<double>(n);
  std::vector<double> rewards(static_cast<std::size_t>(n));
  Vector mean_grad = Vector::Zero(w.size());
  for (int i = 0; i < n; ++i) {
    const auto& pt = data.point(i);
    double s = gradient_scale(spec, pt, w);
    rewards[static_cast<std::size_t>(i)] = s * s * pt.squared_norm() / (nn * nn);
    if (s != 0.0) add_scaled(mean_grad, pt.features, s / nn);
  }
  VarianceReport rep;
  rep.effective = effective_variance(rewards, p);
  rep.centering = mean_grad.squaredNorm();
  rep.pseudo = rep.effective - rep.centering;
  return rep;
}

namespace {

Distribution normalize_or_uniform(std::vector<double> scores) {
  double sum = 0.0;
  for (double s : scores) sum += s;
  Distribution out;
  if (!(sum > 0.0)) {
    out.p.assign(scores.size(), 1.0 / static_cast<double>(scores.size()));
    out.degenerate = true;
    return out;
  }
  out.p = clamped_normalize(std::move(scores));
  return out;
}

}  // namespace

Distribution optimal_stepwise_p(const ProblemSpec& spec, const Dataset& data, const Vector& w) {
  std::vector<double> scores;
  scores.reserve(static_cast<std::size_t>(data.size()));
  for (const auto& pt : data.points()) {
    double s = gradient_scale(spec, pt, w);
    scores.push_back(std::abs(s) * std::sqrt(pt.squared_norm()));
  }
  return normalize_or_uniform(std::move(scores));
}

Distribution optimal_static_p(const std::vector<std::vector<double>>& reward_history) {
  if (reward_history.empty()) throw std::invalid_argument("optimal_static_p: empty history");
  std::size_t n = reward_history.front().size();
  std::vector<double> totals(n, 0.0);
  for (const auto& row : reward_history) {
    if (row.size() != n) throw std::invalid_argument("optimal_static_p: ragged history");
    for (std::size_t i = 0; i < n; ++i) {
      if (!(row[i] >= 0.0)) throw std::invalid_argument("optimal_static_p: negative reward");
      totals[i] += row[i];
    }
  }
  for (double& t : totals) t = std::sqrt(t);
  return normalize_or_uniform(std::move(totals));
}

BoundReport regret_bound_check(const std::vector<std::vector<double>>& reward_history,
                               const std::vector<std::vector<double>>& p_history,
                               const std::vector<double>& reward_bounds, double constant,
                               double horizon_scale) {
  if (reward_history.size() != p_history.size())
    throw std::invalid_argument("regret_bound_check: history length mismatch");
  if (reward_history.empty()) throw std::invalid_argument("regret_bound_check: empty history");
  std::size_t n = reward_bounds.size();
  if (n < 2) throw std::invalid_argument("regret_bound_check: needs at least two points");

  BoundReport rep;
  rep.constant = constant;
  Distribution pstar = optimal_static_p(reward_history);
  for (std::size_t t = 0; t < reward_history.size(); ++t) {
    if (reward_history[t].size() != n || p_history[t].size() != n)
      throw std::invalid_argument("regret_bound_check: row size mismatch");
    rep.adaptive_total += effective_variance(reward_history[t], p_history[t]);
    rep.static_optimum += effective_variance(reward_history[t], pstar.p);
  }
  double T = static_cast<double>(reward_history.size());
  double nn = static_cast<double>(n);
  rep.additive = constant * std::sqrt(std::pow(nn, 5) * T * mean_square(reward_bounds) *
                                      std::log(nn));
  rep.min_horizon = mabs_min_horizon(reward_bounds, horizon_scale);
  rep.horizon_ok = reward_history.size() >= static_cast<std::size_t>(rep.min_horizon);
  rep.satisfied = rep.adaptive_total <= 3.0 * rep.static_optimum + rep.additive;
  return rep;
}

bool lemma1_check(const std::vector<double>& rewards, const std::vector<double>& p1,
                  const std::vector<double>& p2, double zeta, double tol) {
  std::size_t n = rewards.size();
  if (p1.size() != n || p2.size() != n) throw std::invalid_argument("lemma1_check: size mismatch");
  if (!(zeta <= 1.0)) throw std::invalid_argument("lemma1_check: zeta must be <= 1");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(rewards[i] >= 0.0)) throw std::invalid_argument("lemma1_check: negative reward");
    if (!(p1[i] > 0.0) || !(p2[i] > 0.0))
      throw std::invalid_argument("lemma1_check: distributions need full support");
  }
  double ve1 = effective_variance(rewards, p1);
  double ve2 = effective_variance(rewards, p2);
  double inner_diff = 0.0;   // <p1 - p2, grad V_e(p1)>
  double inner_p2 = 0.0;     // <p2, grad V_e(p1)>
  for (std::size_t i = 0; i < n; ++i) {
    double g = -rewards[i] / (p1[i] * p1[i]);
    inner_diff += (p1[i] - p2[i]) * g;
    inner_p2 += p2[i] * g;
  }
  double lhs = (1.0 - 2.0 * zeta) * ve1 - (1.0 - zeta) * ve2;
  double rhs = inner_diff + zeta * inner_p2;
  return lhs <= rhs + tol;
}

}  // namespace mabs
