#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mabs {

struct SuiteResult {
  std::string name;
  long cases = 0;
  long failures = 0;
  std::vector<std::string> counterexamples;  // capped, one line per failure

  bool pass() const { return failures == 0; }
};

// Convexity inequality of the regret analysis over random (a, p1, p2, zeta).
SuiteResult verify_lemma1(std::uint64_t seed, long cases = 10000);

// Exact-expectation unbiasedness of all three estimators on random small
// instances: sum_i p_i g_hat(i) vs the full gradient, 1e-12 absolute.
SuiteResult verify_unbiasedness(std::uint64_t seed, int cases = 100);

// Sum tree versus a linear-scan oracle on shared positions, plus the
// logarithmic path-length contract.
SuiteResult verify_tree(std::uint64_t seed, long operations = 100000);

// Cumulative effective-variance guarantee of the bandit sampler on a small
// ridge instance run exactly at the minimum valid horizon.
SuiteResult verify_bound(std::uint64_t seed, int repeats = 5);

// selector: all | lemma1 | unbiased | tree | bound.
std::vector<SuiteResult> run_verify_suites(const std::string& selector, std::uint64_t seed);

nlohmann::ordered_json verify_report(const std::vector<SuiteResult>& results);

}  // namespace mabs
