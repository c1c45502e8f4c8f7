#include "mabs/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mabs {

double squared_norm(const SparseVec& v) {
  double acc = 0.0;
  for (const auto& e : v) acc += e.value * e.value;
  return acc;
}

void add_scaled(Vector& dense, const SparseVec& v, double scale) {
  for (const auto& e : v) {
    if (e.index >= dense.size())
      throw std::invalid_argument("add_scaled: entry index " + std::to_string(e.index) +
                                  " exceeds dimension " + std::to_string(dense.size()));
    dense[e.index] += scale * e.value;
  }
}

Vector to_dense(const SparseVec& v, int dimension) {
  Vector out = Vector::Zero(dimension);
  add_scaled(out, v, 1.0);
  return out;
}

double scaled_diff_squared_norm(const SparseVec& a, double scale_a, const SparseVec& b) {
  double acc = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].index < b[j].index)) {
      double d = scale_a * a[i].value;
      acc += d * d;
      ++i;
    } else if (i == a.size() || b[j].index < a[i].index) {
      acc += b[j].value * b[j].value;
      ++j;
    } else {
      double d = scale_a * a[i].value - b[j].value;
      acc += d * d;
      ++i;
      ++j;
    }
  }
  return acc;
}

Dataset::Dataset(std::vector<DataPoint> points, int dimension)
    : points_(std::move(points)), dimension_(dimension) {
  if (points_.empty()) throw std::invalid_argument("Dataset: needs at least one datapoint");
  if (dimension_ < 1) throw std::invalid_argument("Dataset: dimension must be positive");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    int prev = -1;
    for (const auto& e : points_[i].features) {
      if (e.index <= prev)
        throw std::invalid_argument("Dataset: point " + std::to_string(i) +
                                    " has non-increasing feature indices");
      if (e.index >= dimension_)
        throw std::invalid_argument("Dataset: point " + std::to_string(i) + " has index " +
                                    std::to_string(e.index) + " outside dimension " +
                                    std::to_string(dimension_));
      if (e.value == 0.0)
        throw std::invalid_argument("Dataset: point " + std::to_string(i) +
                                    " stores an explicit zero value");
      prev = e.index;
    }
  }
}

long long Dataset::nonzeros() const {
  long long acc = 0;
  for (const auto& p : points_) acc += static_cast<long long>(p.features.size());
  return acc;
}

void validate(const ProblemSpec& spec) {
  if (spec.lambda < 0.0) throw ConfigError("lambda must be nonnegative");
  if (!std::isfinite(spec.lambda)) throw ConfigError("lambda must be finite");
}

double dot(const DataPoint& pt, const Vector& w) {
  if (!pt.features.empty() && pt.features.back().index >= w.size())
    throw std::invalid_argument("dot: iterate dimension smaller than feature support");
  double acc = 0.0;
  for (const auto& e : pt.features) acc += e.value * w[e.index];
  return acc;
}

namespace {

// log(1 + exp(-m)) without overflow for large |m|.
double logistic_loss_of_margin(double m) {
  if (m >= 0.0) return std::log1p(std::exp(-m));
  return -m + std::log1p(std::exp(m));
}

// sigma(-m) = 1 / (1 + exp(m)) without overflow.
double sigmoid_neg(double m) {
  if (m >= 0.0) {
    double e = std::exp(-m);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(m));
}

}  // namespace

double sub_cost(const ProblemSpec& spec, const DataPoint& pt, const Vector& w) {
  double z = dot(pt, w);
  switch (spec.loss) {
    case Loss::Logistic:
      return logistic_loss_of_margin(pt.label * z);
    case Loss::SquaredHinge: {
      double h = std::max(0.0, 1.0 - pt.label * z);
      return h * h;
    }
    case Loss::Ridge: {
      double r = z - pt.label;
      return 0.5 * r * r;
    }
  }
  throw std::logic_error("sub_cost: unknown loss");
}

double gradient_scale(const ProblemSpec& spec, const DataPoint& pt, const Vector& w) {
  double z = dot(pt, w);
  switch (spec.loss) {
    case Loss::Logistic:
      return -pt.label * sigmoid_neg(pt.label * z);
    case Loss::SquaredHinge: {
      double h = std::max(0.0, 1.0 - pt.label * z);
      return -2.0 * pt.label * h;
    }
    case Loss::Ridge:
      return z - pt.label;
  }
  throw std::logic_error("gradient_scale: unknown loss");
}

SparseVec sub_gradient(const ProblemSpec& spec, const DataPoint& pt, const Vector& w) {
  double s = gradient_scale(spec, pt, w);
  SparseVec out;
  if (s == 0.0) return out;
  out.reserve(pt.features.size());
  for (const auto& e : pt.features) out.push_back({e.index, s * e.value});
  return out;
}

double full_cost(const ProblemSpec& spec, const Dataset& data, const Vector& w) {
  double acc = 0.0;
  for (const auto& pt : data.points()) acc += sub_cost(spec, pt, w);
  return acc / static_cast<double>(data.size()) + spec.lambda * regularizer_value(spec, w);
}

Vector full_gradient(const ProblemSpec& spec, const Dataset& data, const Vector& w) {
  Vector g = Vector::Zero(w.size());
  for (const auto& pt : data.points()) {
    double s = gradient_scale(spec, pt, w);
    if (s != 0.0) add_scaled(g, pt.features, s);
  }
  return g / static_cast<double>(data.size());
}

double regularizer_value(const ProblemSpec& spec, const Vector& w) {
  switch (spec.reg) {
    case Regularizer::L1:
      return w.lpNorm<1>();
    case Regularizer::L2:
      return 0.5 * w.squaredNorm();
    case Regularizer::None:
      return 0.0;
  }
  throw std::logic_error("regularizer_value: unknown regularizer");
}

Vector reg_subgradient(const ProblemSpec& spec, const Vector& w) {
  switch (spec.reg) {
    case Regularizer::L1: {
      Vector g(w.size());
      for (Eigen::Index k = 0; k < w.size(); ++k)
        g[k] = w[k] > 0.0 ? 1.0 : (w[k] < 0.0 ? -1.0 : 0.0);
      return g;
    }
    case Regularizer::L2:
      return w;
    case Regularizer::None:
      return Vector::Zero(w.size());
  }
  throw std::logic_error("reg_subgradient: unknown regularizer");
}

Vector prox(const ProblemSpec& spec, const Vector& v, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("prox: step must be positive");
  double t = step * spec.lambda;
  switch (spec.reg) {
    case Regularizer::L1: {
      Vector out(v.size());
      for (Eigen::Index k = 0; k < v.size(); ++k) {
        double m = std::abs(v[k]) - t;
        out[k] = m > 0.0 ? (v[k] > 0.0 ? m : -m) : 0.0;
      }
      return out;
    }
    case Regularizer::L2:
      return v / (1.0 + t);
    case Regularizer::None:
      return v;
  }
  throw std::logic_error("prox: unknown regularizer");
}

SmoothnessProfile smoothness_profile(const ProblemSpec& spec, const Dataset& data) {
  double factor = 1.0;
  switch (spec.loss) {
    case Loss::Logistic:
      factor = 0.25;
      break;
    case Loss::SquaredHinge:
      factor = 2.0;
      break;
    case Loss::Ridge:
      factor = 1.0;
      break;
  }
  SmoothnessProfile prof;
  prof.per_point.reserve(data.size());
  double sum = 0.0;
  for (const auto& pt : data.points()) {
    double L = factor * pt.squared_norm();
    prof.per_point.push_back(L);
    prof.max = std::max(prof.max, L);
    sum += L;
  }
  prof.mean = sum / static_cast<double>(data.size());
  prof.tau = prof.mean > 0.0 ? prof.max / prof.mean : 1.0;
  return prof;
}

double gradient_bound(const ProblemSpec& spec, const DataPoint& pt,
                      std::optional<double> iterate_radius) {
  double norm = std::sqrt(pt.squared_norm());
  switch (spec.loss) {
    case Loss::Logistic:
      return norm;  // |sigma(-m)| <= 1
    case Loss::SquaredHinge: {
      if (!iterate_radius)
        throw ConfigError("gradient_bound: squared hinge needs an iterate radius");
      double R = *iterate_radius;
      if (!(R >= 0.0)) throw ConfigError("gradient_bound: radius must be nonnegative");
      return 2.0 * norm * (1.0 + R * norm);  // |y| = 1 assumed for classification
    }
    case Loss::Ridge: {
      if (!iterate_radius) throw ConfigError("gradient_bound: ridge needs an iterate radius");
      double R = *iterate_radius;
      if (!(R >= 0.0)) throw ConfigError("gradient_bound: radius must be nonnegative");
      return norm * (R * norm + std::abs(pt.label));
    }
  }
  throw std::logic_error("gradient_bound: unknown loss");
}

std::vector<double> sgd_reward_bounds(const ProblemSpec& spec, const Dataset& data,
                                      std::optional<double> iterate_radius) {
  double n = static_cast<double>(data.size());
  std::vector<double> a;
  a.reserve(data.size());
  for (const auto& pt : data.points()) {
    double G = gradient_bound(spec, pt, iterate_radius);
    a.push_back(G * G / (n * n));
  }
  return a;
}

double mean_square(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean_square: empty vector");
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc / static_cast<double>(v.size());
}

}  // namespace mabs
