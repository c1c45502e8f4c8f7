#pragma once

#include <cstddef>
#include <vector>

namespace mabs {

// Binary sum tree over nonnegative leaf weights, backed by a flat array with
// leaf capacity rounded up to a power of two. Internal nodes store exact sums
// of their children (recomputed from children on every update, never by
// differencing), so a point update and a sample each walk one root-to-leaf
// path: at most 2 * (ceil(log2 n) + 1) node visits.
class WeightTree {
 public:
  explicit WeightTree(const std::vector<double>& weights);

  int size() const { return n_; }
  double total() const { return nodes_[1]; }
  double weight(int i) const;
  double max_weight() const;
  std::vector<double> weights() const;

  // Set leaf i to w and refresh its ancestors.
  void update(int i, double w);

  // Replace every leaf. Sizes must match.
  void assign(const std::vector<double>& weights);

  // Reset every leaf to the same value.
  void fill(double value);

  // Index of the leaf owning position u in the prefix-sum order, u in
  // [0, total()). Zero-total subtrees are never entered, so the returned
  // leaf always has positive weight.
  int sample(double u) const;

  // Nodes visited by the most recent sample() or update(); exposed so the
  // logarithmic path-length contract is testable.
  std::size_t last_path_length() const { return last_path_; }

 private:
  void rebuild();
  void validate_leaves() const;

  int n_ = 0;    // leaf count
  int cap_ = 1;  // leaves padded to a power of two; leaf i lives at cap_ + i
  std::vector<double> nodes_;
  mutable std::size_t last_path_ = 0;
};

}  // namespace mabs
