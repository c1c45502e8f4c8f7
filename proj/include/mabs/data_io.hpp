#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "mabs/model.hpp"
#include "mabs/optimize.hpp"

namespace mabs {

enum class LabelPolicy {
  Binary,  // map {0, -1} -> -1, {1, +1} -> +1; reject anything else
  Raw      // keep labels as parsed (regression)
};

// LIBSVM text: one "label idx:val ..." line per point, 1-based strictly
// increasing indices, '#' starts a comment. Dimension is the largest index
// unless overridden. Explicit zero values are dropped.
Dataset parse_libsvm(std::istream& in, LabelPolicy policy = LabelPolicy::Binary,
                     std::optional<int> dimension = std::nullopt);
Dataset parse_libsvm_file(const std::string& path, LabelPolicy policy = LabelPolicy::Binary,
                          std::optional<int> dimension = std::nullopt);

// Canonical LIBSVM form: 1-based indices, shortest round-trip doubles.
void write_libsvm(const Dataset& data, std::ostream& out);
void write_libsvm_file(const Dataset& data, const std::string& path);

// Dense Gaussian regression data: features x_ij ~ N(m_j, s_j^2) with
// m_j ~ N(0, 1) and s_j ~ |N(0, 1)| + 0.1, labels y = <x, beta> + noise with
// beta_j ~ N(0, beta_std^2). The point of largest norm is multiplied by
// scale_c, which steers the smoothness ratio tau.
struct SyntheticConfig {
  int n = 101;
  int d = 5;
  double beta_std = 10.0;
  double noise_std = 1.0;
  double scale_c = 1.0;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  Dataset data;
  Vector beta;
  int scaled_index = 0;
};

SyntheticData generate_synthetic_full(const SyntheticConfig& cfg);
Dataset generate_synthetic(const SyntheticConfig& cfg);

// Smallest scale_c >= 1 whose generated dataset has smoothness ratio
// target_tau, found by bisection on the closed-form tau(scale_c) of the
// unscaled profile. target_tau must lie in [tau(1), n).
double scale_for_tau(const SyntheticConfig& cfg, double target_tau);

// Trace CSV: versioned header, one row per iteration with columns
// t,i,p_i,a_it,F,Ve,Vpseudo (metric columns empty off-stride), and footer
// comments carrying the final iterate, the weighted iterate sum, and the
// sampler weights. read(write(trace)) reproduces every serialized field.
inline constexpr int kTraceSchemaVersion = 1;

void write_trace_csv(const RunTrace& trace, std::ostream& out);
void write_trace_csv_file(const RunTrace& trace, const std::string& path);
RunTrace read_trace_csv(std::istream& in);
RunTrace read_trace_csv_file(const std::string& path);

// Shortest decimal form that parses back to exactly the same double; inf and
// nan spelled as literals.
std::string format_double(double x);

}  // namespace mabs
