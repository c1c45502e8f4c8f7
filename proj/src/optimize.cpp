#include "mabs/optimize.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mabs/metrics.hpp"

namespace mabs {

double StepSchedule::step(long t) const {
  if (t < 1) throw std::invalid_argument("StepSchedule: t starts at 1");
  switch (kind) {
    case Kind::Constant:
      return gamma;
    case Kind::InverseStrong:
      return 2.0 / (mu * static_cast<double>(t));
    case Kind::Shifted:
      return 1.0 / (alpha + mu * static_cast<double>(t));
  }
  throw std::logic_error("StepSchedule: unknown kind");
}

void StepSchedule::validate() const {
  switch (kind) {
    case Kind::Constant:
      if (!(gamma > 0.0)) throw ConfigError("StepSchedule: gamma must be positive");
      return;
    case Kind::InverseStrong:
      if (!(mu > 0.0)) throw ConfigError("StepSchedule: mu must be positive");
      return;
    case Kind::Shifted:
      if (!(mu > 0.0)) throw ConfigError("StepSchedule: mu must be positive");
      if (!(alpha >= 0.0) || !(alpha + mu > 0.0))
        throw ConfigError("StepSchedule: alpha must keep steps positive");
      return;
  }
  throw ConfigError("StepSchedule: unknown kind");
}

GradientEstimator::GradientEstimator(EstimatorKind kind, const ProblemSpec& spec,
                                     const Dataset& data, const Vector& w_init)
    : kind_(kind), spec_(&spec), data_(&data) {
  const int d = data.dimension();
  if (w_init.size() != d)
    throw std::invalid_argument("GradientEstimator: iterate dimension mismatch");
  if (kind_ == EstimatorKind::ProxSvrg) {
    snapshot_ = w_init;
    snapshot_gradient_ = full_gradient(spec, data, snapshot_);
    bin_sum_ = Vector::Zero(d);
  } else if (kind_ == EstimatorKind::Saga) {
    table_.reserve(static_cast<std::size_t>(data.size()));
    table_mean_ = Vector::Zero(d);
    for (int i = 0; i < data.size(); ++i) {
      table_.push_back(sub_gradient(spec, data.point(i), w_init));
      add_scaled(table_mean_, table_.back(), 1.0 / static_cast<double>(data.size()));
    }
  }
}

const SparseVec& GradientEstimator::table_entry(int i) const {
  if (kind_ != EstimatorKind::Saga) throw std::logic_error("table_entry: not a Saga estimator");
  return table_.at(static_cast<std::size_t>(i));
}

double GradientEstimator::correction_scale(const Vector& w, int i) const {
  const auto& pt = data_->point(i);
  double s = gradient_scale(*spec_, pt, w);
  if (kind_ == EstimatorKind::ProxSvrg) s -= gradient_scale(*spec_, pt, snapshot_);
  return s;
}

Estimate GradientEstimator::estimate(const Vector& w, int i, double p_i) const {
  if (i < 0 || i >= data_->size())
    throw std::out_of_range("GradientEstimator: index out of range");
  if (!(p_i > 0.0)) throw std::invalid_argument("GradientEstimator: probability must be positive");
  const auto& pt = data_->point(i);
  double n = static_cast<double>(data_->size());
  double inv_np = 1.0 / (n * p_i);

  Estimate out;
  switch (kind_) {
    case EstimatorKind::PlainSgd: {
      double s = gradient_scale(*spec_, pt, w);
      out.g_hat = Vector::Zero(w.size());
      add_scaled(out.g_hat, pt.features, s * inv_np);
      out.reward = s * s * pt.squared_norm() / (n * n);
      return out;
    }
    case EstimatorKind::ProxSvrg: {
      double ds = correction_scale(w, i);
      out.g_hat = snapshot_gradient_;
      add_scaled(out.g_hat, pt.features, ds * inv_np);
      out.reward = ds * ds * pt.squared_norm() / (n * n);
      return out;
    }
    case EstimatorKind::Saga: {
      double s = gradient_scale(*spec_, pt, w);
      const SparseVec& old = table_[static_cast<std::size_t>(i)];
      out.g_hat = table_mean_;
      add_scaled(out.g_hat, pt.features, s * inv_np);
      add_scaled(out.g_hat, old, -inv_np);
      out.reward = scaled_diff_squared_norm(pt.features, s, old) / (n * n);
      return out;
    }
  }
  throw std::logic_error("GradientEstimator: unknown kind");
}

void GradientEstimator::absorb(const Vector& w, int i) {
  if (kind_ != EstimatorKind::Saga) return;
  if (i < 0 || i >= data_->size())
    throw std::out_of_range("GradientEstimator: index out of range");
  double n = static_cast<double>(data_->size());
  SparseVec fresh = sub_gradient(*spec_, data_->point(i), w);
  add_scaled(table_mean_, fresh, 1.0 / n);
  add_scaled(table_mean_, table_[static_cast<std::size_t>(i)], -1.0 / n);
  table_[static_cast<std::size_t>(i)] = std::move(fresh);
  // Incremental updates drift; restore the exact mean once per table sweep.
  if (++absorbs_ % data_->size() == 0) recompute_table_mean();
}

void GradientEstimator::recompute_table_mean() {
  table_mean_.setZero();
  for (const auto& entry : table_)
    add_scaled(table_mean_, entry, 1.0 / static_cast<double>(data_->size()));
}

void GradientEstimator::iteration_started(const Vector& w) {
  if (kind_ != EstimatorKind::ProxSvrg) return;
  bin_sum_ += w;
  ++bin_count_;
}

void GradientEstimator::iteration_finished(long t) {
  if (kind_ != EstimatorKind::ProxSvrg) return;
  if (t % data_->size() == 0) epoch_update();
}

void GradientEstimator::epoch_update() {
  if (kind_ != EstimatorKind::ProxSvrg || bin_count_ == 0) return;
  snapshot_ = bin_sum_ / static_cast<double>(bin_count_);
  snapshot_gradient_ = full_gradient(*spec_, *data_, snapshot_);
  bin_sum_.setZero();
  bin_count_ = 0;
}

std::vector<double> GradientEstimator::reward_vector(const Vector& w) const {
  double n = static_cast<double>(data_->size());
  std::vector<double> rewards(static_cast<std::size_t>(data_->size()));
  for (int i = 0; i < data_->size(); ++i) {
    const auto& pt = data_->point(i);
    double value;
    if (kind_ == EstimatorKind::Saga) {
      double s = gradient_scale(*spec_, pt, w);
      value = scaled_diff_squared_norm(pt.features, s, table_[static_cast<std::size_t>(i)]);
    } else {
      double s = correction_scale(w, i);
      value = s * s * pt.squared_norm();
    }
    rewards[static_cast<std::size_t>(i)] = value / (n * n);
  }
  return rewards;
}

double GradientEstimator::centering_term(const Vector& w) const {
  switch (kind_) {
    case EstimatorKind::PlainSgd:
      return full_gradient(*spec_, *data_, w).squaredNorm();
    case EstimatorKind::ProxSvrg:
      return (full_gradient(*spec_, *data_, w) - snapshot_gradient_).squaredNorm();
    case EstimatorKind::Saga:
      return (full_gradient(*spec_, *data_, w) - table_mean_).squaredNorm();
  }
  throw std::logic_error("GradientEstimator: unknown kind");
}

void sgd_step(Vector& w, const Vector& g_hat, double gamma, const ProblemSpec& spec) {
  if (!(gamma > 0.0)) throw std::invalid_argument("sgd_step: gamma must be positive");
  if (spec.reg == Regularizer::None || spec.lambda == 0.0) {
    w -= gamma * g_hat;
    return;
  }
  w -= gamma * (g_hat + spec.lambda * reg_subgradient(spec, w));
}

void prox_sgd_step(Vector& w, const Vector& g_hat, double gamma, const ProblemSpec& spec) {
  if (!(gamma > 0.0)) throw std::invalid_argument("prox_sgd_step: gamma must be positive");
  w = prox(spec, w - gamma * g_hat, gamma);
}

Vector weighted_average_iterate(const RunTrace& trace) {
  if (trace.horizon < 1 || trace.weighted_sum.size() == 0) return trace.final_w;
  double T = static_cast<double>(trace.horizon);
  return trace.weighted_sum * (2.0 / (T * (T + 1.0)));
}

RunTrace run(const ProblemSpec& spec, const Dataset& data, EstimatorKind kind,
             Sampler& sampler, const StepSchedule& schedule, long horizon,
             std::uint64_t seed, const TraceOptions& opts, bool proximal) {
  validate(spec);
  schedule.validate();
  if (horizon < 0) throw ConfigError("run: horizon must be nonnegative");
  if (sampler.size() != data.size()) throw ConfigError("run: sampler size mismatch");
  long stride = opts.stride > 0 ? opts.stride : data.size();

  Rng rng(seed);
  Vector w = Vector::Zero(data.dimension());
  GradientEstimator est(kind, spec, data, w);

  RunTrace trace;
  trace.horizon = horizon;
  trace.weighted_sum = Vector::Zero(data.dimension());
  trace.steps.reserve(static_cast<std::size_t>(horizon));

  auto record_metrics = [&](long t) {
    MetricRecord rec;
    rec.t = t;
    rec.cost = full_cost(spec, data, w);
    auto rewards = est.reward_vector(w);
    auto p = sampler.probabilities();
    rec.effective_variance = effective_variance(rewards, p);
    rec.pseudo_variance = rec.effective_variance - est.centering_term(w);
    trace.metrics.push_back(rec);
  };

  record_metrics(0);
  for (long t = 1; t <= horizon; ++t) {
    est.iteration_started(w);
    trace.weighted_sum += static_cast<double>(t) * w;
    if (opts.store_iterates) trace.iterates.push_back(w);
    if (opts.verification) {
      trace.reward_history.push_back(est.reward_vector(w));
      trace.p_history.push_back(sampler.probabilities());
    }

    Draw draw = sampler.draw(rng);
    Estimate e = est.estimate(w, draw.index, draw.probability);
    est.absorb(w, draw.index);
    double gamma = schedule.step(t);
    if (proximal)
      prox_sgd_step(w, e.g_hat, gamma, spec);
    else
      sgd_step(w, e.g_hat, gamma, spec);
    sampler.update(draw.index, e.reward);
    est.iteration_finished(t);

    trace.steps.push_back({t, draw.index, draw.probability, e.reward});

    if (!w.allFinite()) {
      trace.diverged = true;
      trace.metrics.push_back({t, std::numeric_limits<double>::infinity(),
                               std::numeric_limits<double>::quiet_NaN(),
                               std::numeric_limits<double>::quiet_NaN()});
      break;
    }
    if (t % stride == 0 || t == horizon) record_metrics(t);
  }
  trace.final_w = w;
  if (opts.store_iterates) trace.iterates.push_back(w);
  trace.sampler_weights = sampler.state_weights();
  return trace;
}

}  // namespace mabs
