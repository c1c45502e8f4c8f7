#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "mabs/errors.hpp"

namespace mabs {

using Vector = Eigen::VectorXd;

struct FeatureEntry {
  int index = 0;
  double value = 0.0;
};

// Sparse vector in canonical form: indices strictly increasing, no stored
// zero values.
using SparseVec = std::vector<FeatureEntry>;

double squared_norm(const SparseVec& v);
// dense += scale * v
void add_scaled(Vector& dense, const SparseVec& v, double scale);
Vector to_dense(const SparseVec& v, int dimension);
// ||scale_a * a - b||^2 over the merged support.
double scaled_diff_squared_norm(const SparseVec& a, double scale_a, const SparseVec& b);

struct DataPoint {
  SparseVec features;  // canonical form
  double label = 0.0;

  double squared_norm() const { return mabs::squared_norm(features); }
};

// Immutable collection of datapoints with a fixed ambient dimension.
// Construction validates canonical form of every point and index bounds.
class Dataset {
 public:
  Dataset(std::vector<DataPoint> points, int dimension);

  int size() const { return static_cast<int>(points_.size()); }
  int dimension() const { return dimension_; }
  const DataPoint& point(int i) const { return points_[static_cast<std::size_t>(i)]; }
  const std::vector<DataPoint>& points() const { return points_; }
  long long nonzeros() const;

 private:
  std::vector<DataPoint> points_;
  int dimension_;
};

enum class Loss { Logistic, SquaredHinge, Ridge };
enum class Regularizer { L1, L2, None };

// Objective description: F(w) = (1/n) sum_i phi_i(w) + lambda * r(w).
struct ProblemSpec {
  Loss loss = Loss::Ridge;
  Regularizer reg = Regularizer::None;
  double lambda = 0.0;
};

void validate(const ProblemSpec& spec);

// Per-point smoothness constants L_i and the imbalance ratio tau = L_max / L_mean.
struct SmoothnessProfile {
  std::vector<double> per_point;
  double max = 0.0;
  double mean = 0.0;
  double tau = 1.0;  // >= 1 whenever mean > 0
};

double dot(const DataPoint& pt, const Vector& w);

// phi_i(w), the unregularized per-point loss.
double sub_cost(const ProblemSpec& spec, const DataPoint& pt, const Vector& w);

// Every supported loss has gradient s(w) * x for a scalar s; this returns s.
double gradient_scale(const ProblemSpec& spec, const DataPoint& pt, const Vector& w);

// grad phi_i(w), supported on a subset of the point's features.
SparseVec sub_gradient(const ProblemSpec& spec, const DataPoint& pt, const Vector& w);

// F(w) including the regularizer term.
double full_cost(const ProblemSpec& spec, const Dataset& data, const Vector& w);

// grad f(w) = (1/n) sum_i grad phi_i(w); excludes the regularizer.
Vector full_gradient(const ProblemSpec& spec, const Dataset& data, const Vector& w);

// r(w) without the lambda factor.
double regularizer_value(const ProblemSpec& spec, const Vector& w);

// An element of the subdifferential of r at w (sign vector for L1 with 0 at 0).
Vector reg_subgradient(const ProblemSpec& spec, const Vector& w);

// argmin_u { step * lambda * r(u) + 0.5 ||u - v||^2 }, closed form per regularizer.
Vector prox(const ProblemSpec& spec, const Vector& v, double step);

SmoothnessProfile smoothness_profile(const ProblemSpec& spec, const Dataset& data);

// Upper bound G_i on ||grad phi_i(w)|| over the run. Logistic is radius-free;
// ridge and squared hinge need an iterate radius R with ||w|| <= R.
double gradient_bound(const ProblemSpec& spec, const DataPoint& pt,
                      std::optional<double> iterate_radius = std::nullopt);

// a_i = G_i^2 / n^2: static upper bounds on the plain SGD reward weights.
std::vector<double> sgd_reward_bounds(const ProblemSpec& spec, const Dataset& data,
                                      std::optional<double> iterate_radius = std::nullopt);

// (1/n) sum_i v_i^2, the mean-square statistic in the bandit step size.
double mean_square(const std::vector<double>& v);

}  // namespace mabs
