#include <doctest.h>

#include <cmath>
#include <vector>

#include "mabs/rng.hpp"
#include "mabs/weight_tree.hpp"

using mabs::Rng;
using mabs::WeightTree;

namespace {

// Linear-scan oracle for prefix-sum sampling.
int scan_sample(const std::vector<double>& w, double u) {
  int last_positive = -1;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    if (u < w[i]) return last_positive;
    u -= w[i];
  }
  return last_positive;  // rounding pushed u past the total
}

std::size_t path_budget(int n) {
  return 2 * (static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n)))) + 1);
}

}  // namespace

TEST_CASE("totals and point lookups") {
  WeightTree tree({0.0, 2.0, 0.0, 3.0});
  CHECK(tree.total() == doctest::Approx(5.0));
  CHECK(tree.size() == 4);
  CHECK(tree.weight(1) == 2.0);
  CHECK(tree.max_weight() == 3.0);
  CHECK(tree.weights() == std::vector<double>{0.0, 2.0, 0.0, 3.0});
}

TEST_CASE("sampling walks the prefix-sum order") {
  WeightTree tree({1.0, 0.0, 3.0});
  CHECK(tree.sample(2.0) == 2);
  CHECK(tree.sample(0.0) == 0);
  CHECK(tree.sample(0.999) == 0);
  CHECK(tree.sample(1.0) == 2);  // zero-weight leaf 1 is skipped
  CHECK(tree.sample(3.9999) == 2);
}

TEST_CASE("zero-weight leaves are never drawn") {
  WeightTree tree({0.0, 2.0, 0.0, 3.0});
  for (double u = 0.0; u < 5.0; u += 0.01) {
    int i = tree.sample(u);
    CHECK(tree.weight(i) > 0.0);
  }
  // boundary exactly between leaves
  CHECK(tree.sample(std::nextafter(2.0, 0.0)) == 1);
  CHECK(tree.sample(2.0) == 3);
}

TEST_CASE("update and assign refresh sums exactly") {
  WeightTree tree({1.0, 1.0, 1.0, 1.0, 1.0});
  tree.update(2, 4.0);
  CHECK(tree.total() == doctest::Approx(8.0));
  tree.assign({2.0, 0.0, 1.0, 0.0, 5.0});
  CHECK(tree.total() == doctest::Approx(8.0));
  tree.fill(0.5);
  CHECK(tree.total() == doctest::Approx(2.5));
  CHECK(tree.max_weight() == 0.5);
}

TEST_CASE("construction and mutation reject invalid weights") {
  CHECK_THROWS(WeightTree({}));
  CHECK_THROWS(WeightTree({1.0, -0.5}));
  CHECK_THROWS(WeightTree({0.0, 0.0}));
  WeightTree tree({1.0, 2.0});
  CHECK_THROWS(tree.update(0, -1.0));
  CHECK_THROWS(tree.update(5, 1.0));
  CHECK_THROWS(tree.assign({1.0}));
  CHECK_THROWS(tree.sample(-0.1));
  CHECK_THROWS(tree.sample(3.0));
  CHECK_THROWS(tree.fill(0.0));
}

TEST_CASE("tree matches the linear-scan oracle under interleaved updates") {
  Rng rng(101);
  for (int n : {2, 5, 16, 100, 257}) {
    std::vector<double> w(static_cast<std::size_t>(n));
    for (auto& x : w) x = rng.uniform();
    w[static_cast<std::size_t>(rng.uniform_index(n))] = 0.0;
    if (n > 3) w[static_cast<std::size_t>(rng.uniform_index(n))] = 0.0;
    bool all_zero = true;
    for (double x : w) all_zero = all_zero && x == 0.0;
    if (all_zero) w[0] = 1.0;

    WeightTree tree(w);
    const std::size_t budget = path_budget(n);
    for (int op = 0; op < 20000; ++op) {
      if (op % 4 == 0) {
        int i = rng.uniform_index(n);
        double x = rng.uniform() < 0.2 ? 0.0 : 10.0 * rng.uniform();
        if (x == 0.0 && tree.total() == tree.weight(i)) continue;
        tree.update(i, x);
        w[static_cast<std::size_t>(i)] = x;
        CHECK(tree.last_path_length() <= budget);
      }
      double u = rng.uniform() * tree.total();
      if (u >= tree.total()) u = std::nextafter(tree.total(), 0.0);
      int got = tree.sample(u);
      CHECK(got == scan_sample(w, u));
      CHECK(tree.last_path_length() <= budget);
    }
    double total = 0.0;
    for (double x : w) total += x;
    CHECK(tree.total() == doctest::Approx(total).epsilon(1e-12));
  }
}
