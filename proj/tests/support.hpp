#pragma once

// Shared test fixtures: random instance builders and independent oracles the
// library code must agree with.

#include <cmath>
#include <vector>

#include "mabs/model.hpp"
#include "mabs/rng.hpp"

namespace testsup {

using mabs::DataPoint;
using mabs::Dataset;
using mabs::ProblemSpec;
using mabs::Rng;
using mabs::SparseVec;
using mabs::Vector;

inline DataPoint random_point(Rng& rng, int d, double density = 0.8,
                              bool binary_label = false) {
  DataPoint pt;
  for (int j = 0; j < d; ++j)
    if (rng.uniform() < density) {
      double v = rng.gaussian();
      if (v != 0.0) pt.features.push_back({j, v});
    }
  pt.label = binary_label ? (rng.uniform() < 0.5 ? -1.0 : 1.0) : rng.gaussian(0.0, 2.0);
  return pt;
}

inline Dataset random_dataset(Rng& rng, int n, int d, bool binary_label = false) {
  std::vector<DataPoint> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pts.push_back(random_point(rng, d, 0.8, binary_label));
  return Dataset(std::move(pts), d);
}

inline Vector random_vector(Rng& rng, int d, double scale = 1.0) {
  Vector w(d);
  for (int j = 0; j < d; ++j) w[j] = rng.gaussian(0.0, scale);
  return w;
}

// Central-difference gradient of the per-point loss.
inline Vector fd_gradient(const ProblemSpec& spec, const DataPoint& pt, const Vector& w,
                          double h = 1e-6) {
  Vector g(w.size());
  Vector probe = w;
  for (int j = 0; j < w.size(); ++j) {
    probe[j] = w[j] + h;
    double up = mabs::sub_cost(spec, pt, probe);
    probe[j] = w[j] - h;
    double dn = mabs::sub_cost(spec, pt, probe);
    probe[j] = w[j];
    g[j] = (up - dn) / (2.0 * h);
  }
  return g;
}

// Full support distribution drawn from the flat Dirichlet.
inline std::vector<double> random_simplex(Rng& rng, int n) {
  std::vector<double> p(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (auto& x : p) {
    x = -std::log(1.0 - rng.uniform());
    sum += x;
  }
  for (auto& x : p) x /= sum;
  return p;
}

}  // namespace testsup
