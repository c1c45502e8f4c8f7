#include "mabs/weight_tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mabs {

WeightTree::WeightTree(const std::vector<double>& weights) {
  if (weights.empty()) throw std::invalid_argument("WeightTree: needs at least one weight");
  n_ = static_cast<int>(weights.size());
  cap_ = 1;
  while (cap_ < n_) cap_ *= 2;
  nodes_.assign(static_cast<std::size_t>(2 * cap_), 0.0);
  std::copy(weights.begin(), weights.end(), nodes_.begin() + cap_);
  validate_leaves();
  rebuild();
}

void WeightTree::validate_leaves() const {
  bool any_positive = false;
  for (int i = 0; i < n_; ++i) {
    double w = nodes_[static_cast<std::size_t>(cap_ + i)];
    if (!(w >= 0.0))
      throw std::invalid_argument("WeightTree: weight " + std::to_string(i) +
                                  " is negative or NaN");
    if (w > 0.0) any_positive = true;
  }
  if (!any_positive) throw std::invalid_argument("WeightTree: all weights are zero");
}

void WeightTree::rebuild() {
  for (int node = cap_ - 1; node >= 1; --node)
    nodes_[node] = nodes_[static_cast<std::size_t>(2 * node)] +
                   nodes_[static_cast<std::size_t>(2 * node + 1)];
}

double WeightTree::weight(int i) const {
  if (i < 0 || i >= n_) throw std::out_of_range("WeightTree: leaf index out of range");
  return nodes_[static_cast<std::size_t>(cap_ + i)];
}

double WeightTree::max_weight() const {
  double m = 0.0;
  for (int i = 0; i < n_; ++i) m = std::max(m, nodes_[static_cast<std::size_t>(cap_ + i)]);
  return m;
}

std::vector<double> WeightTree::weights() const {
  return std::vector<double>(nodes_.begin() + cap_, nodes_.begin() + cap_ + n_);
}

void WeightTree::update(int i, double w) {
  if (i < 0 || i >= n_) throw std::out_of_range("WeightTree: leaf index out of range");
  if (!(w >= 0.0)) throw std::invalid_argument("WeightTree: weight must be nonnegative");
  std::size_t node = static_cast<std::size_t>(cap_ + i);
  nodes_[node] = w;
  std::size_t visited = 1;
  while (node > 1) {
    node /= 2;
    nodes_[node] = nodes_[2 * node] + nodes_[2 * node + 1];
    ++visited;
  }
  last_path_ = visited;
}

void WeightTree::assign(const std::vector<double>& weights) {
  if (static_cast<int>(weights.size()) != n_)
    throw std::invalid_argument("WeightTree: assign size mismatch");
  std::copy(weights.begin(), weights.end(), nodes_.begin() + cap_);
  validate_leaves();
  rebuild();
}

void WeightTree::fill(double value) {
  if (!(value > 0.0)) throw std::invalid_argument("WeightTree: fill value must be positive");
  std::fill(nodes_.begin() + cap_, nodes_.begin() + cap_ + n_, value);
  rebuild();
}

int WeightTree::sample(double u) const {
  if (!(u >= 0.0) || u >= total())
    throw std::out_of_range("WeightTree: sample position outside [0, total)");
  std::size_t node = 1;
  std::size_t visited = 1;
  while (node < static_cast<std::size_t>(cap_)) {
    std::size_t left = 2 * node;
    // Enter the right child only when it has positive mass; this keeps
    // rounding in u from ever landing on a zero-weight leaf.
    if (u < nodes_[left] || !(nodes_[left + 1] > 0.0)) {
      node = left;
    } else {
      u -= nodes_[left];
      node = left + 1;
    }
    ++visited;
  }
  last_path_ = visited;
  return static_cast<int>(node) - cap_;
}

}  // namespace mabs
