#include "mabs/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mabs/rng.hpp"

namespace mabs {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0.0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

namespace {

double parse_double_token(const std::string& tok, const std::string& context) {
  if (tok.empty()) throw ParseError(context + ": empty number");
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size())
    throw ParseError(context + ": malformed number '" + tok + "'");
  return v;
}

long parse_long_token(const std::string& tok, const std::string& context) {
  if (tok.empty()) throw ParseError(context + ": empty integer");
  char* end = nullptr;
  long v = std::strtol(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size())
    throw ParseError(context + ": malformed integer '" + tok + "'");
  return v;
}

std::string line_context(long line_no) { return "line " + std::to_string(line_no); }

}  // namespace

Dataset parse_libsvm(std::istream& in, LabelPolicy policy, std::optional<int> dimension) {
  std::vector<DataPoint> points;
  std::string line;
  long line_no = 0;
  int max_index = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string tok;
    if (!(tokens >> tok)) continue;  // blank line

    const std::string ctx = line_context(line_no);
    double label = parse_double_token(tok, ctx + " label");
    if (policy == LabelPolicy::Binary) {
      if (label == 1.0)
        label = 1.0;
      else if (label == -1.0 || label == 0.0)
        label = -1.0;
      else
        throw ParseError(ctx + ": classification label must be 0, 1, or -1, got '" + tok + "'");
    }

    DataPoint pt;
    pt.label = label;
    int prev = -1;
    while (tokens >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        throw ParseError(ctx + ": expected index:value, got '" + tok + "'");
      long raw_index = parse_long_token(tok.substr(0, colon), ctx + " feature index");
      if (raw_index < 1) throw ParseError(ctx + ": feature indices are 1-based");
      int index = static_cast<int>(raw_index - 1);
      if (index <= prev) throw ParseError(ctx + ": feature indices must strictly increase");
      prev = index;
      double value = parse_double_token(tok.substr(colon + 1), ctx + " feature value");
      max_index = std::max(max_index, index);
      if (value != 0.0) pt.features.push_back({index, value});
    }
    points.push_back(std::move(pt));
  }
  if (points.empty()) throw ParseError("input holds no datapoints");
  int needed = max_index + 1;
  int d = dimension.value_or(std::max(needed, 1));
  if (d < needed)
    throw ParseError("dimension override " + std::to_string(d) +
                     " is smaller than the largest feature index " + std::to_string(needed));
  return Dataset(std::move(points), d);
}

Dataset parse_libsvm_file(const std::string& path, LabelPolicy policy,
                          std::optional<int> dimension) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  try {
    return parse_libsvm(in, policy, dimension);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_libsvm(const Dataset& data, std::ostream& out) {
  for (const auto& pt : data.points()) {
    out << format_double(pt.label);
    for (const auto& e : pt.features) out << ' ' << (e.index + 1) << ':' << format_double(e.value);
    out << '\n';
  }
}

void write_libsvm_file(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_libsvm(data, out);
  if (!out) throw IoError("failed writing '" + path + "'");
}

namespace {

void validate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.n < 2) throw ConfigError("synthetic data needs n >= 2");
  if (cfg.d < 1) throw ConfigError("synthetic data needs d >= 1");
  if (!(cfg.beta_std >= 0.0)) throw ConfigError("beta_std must be nonnegative");
  if (!(cfg.noise_std >= 0.0)) throw ConfigError("noise_std must be nonnegative");
  if (!(cfg.scale_c >= 1.0)) throw ConfigError("scale_c must be >= 1");
}

}  // namespace

SyntheticData generate_synthetic_full(const SyntheticConfig& cfg) {
  validate_synthetic(cfg);
  Rng rng(cfg.seed);
  Vector beta(cfg.d);
  for (int j = 0; j < cfg.d; ++j) beta[j] = rng.gaussian(0.0, cfg.beta_std);
  std::vector<double> col_mean(static_cast<std::size_t>(cfg.d));
  std::vector<double> col_std(static_cast<std::size_t>(cfg.d));
  for (int j = 0; j < cfg.d; ++j) col_mean[static_cast<std::size_t>(j)] = rng.gaussian();
  for (int j = 0; j < cfg.d; ++j)
    col_std[static_cast<std::size_t>(j)] = std::abs(rng.gaussian()) + 0.1;

  std::vector<DataPoint> points;
  points.reserve(static_cast<std::size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) {
    DataPoint pt;
    pt.features.reserve(static_cast<std::size_t>(cfg.d));
    double target = 0.0;
    for (int j = 0; j < cfg.d; ++j) {
      double x = rng.gaussian(col_mean[static_cast<std::size_t>(j)],
                              col_std[static_cast<std::size_t>(j)]);
      target += x * beta[j];
      if (x != 0.0) pt.features.push_back({j, x});
    }
    pt.label = target + rng.gaussian(0.0, cfg.noise_std);
    points.push_back(std::move(pt));
  }

  int scaled = 0;
  double best = -1.0;
  for (int i = 0; i < cfg.n; ++i) {
    double nrm = points[static_cast<std::size_t>(i)].squared_norm();
    if (nrm > best) {
      best = nrm;
      scaled = i;
    }
  }
  if (cfg.scale_c != 1.0)
    for (auto& e : points[static_cast<std::size_t>(scaled)].features) e.value *= cfg.scale_c;

  SyntheticData out{Dataset(std::move(points), cfg.d), std::move(beta), scaled};
  return out;
}

Dataset generate_synthetic(const SyntheticConfig& cfg) {
  return generate_synthetic_full(cfg).data;
}

double scale_for_tau(const SyntheticConfig& cfg, double target_tau) {
  validate_synthetic(cfg);
  SyntheticConfig base = cfg;
  base.scale_c = 1.0;
  Dataset data = generate_synthetic(base);
  ProblemSpec ridge;  // per-loss smoothness factors cancel in the ratio
  SmoothnessProfile prof = smoothness_profile(ridge, data);
  double n = static_cast<double>(data.size());
  double M = prof.max;
  double S = prof.mean * n;
  if (!(M > 0.0)) throw ConfigError("scale_for_tau: dataset has no mass");
  double tau1 = n * M / S;
  if (!(target_tau >= tau1))
    throw ConfigError("scale_for_tau: target " + format_double(target_tau) +
                      " below the unscaled ratio " + format_double(tau1));
  if (!(target_tau < n))
    throw ConfigError("scale_for_tau: target must be below n = " + format_double(n));
  // tau(c) = n c^2 M / (S - M + c^2 M) increases from tau(1) toward n, so
  // the smallest feasible scale solves it exactly.
  double c2 = target_tau * (S - M) / (M * (n - target_tau));
  return std::sqrt(std::max(c2, 1.0));
}

void write_trace_csv(const RunTrace& trace, std::ostream& out) {
  out << "# mabs-trace schema=" << kTraceSchemaVersion << '\n';
  out << "t,i,p_i,a_it,F,Ve,Vpseudo\n";
  std::size_t m = 0;
  auto metric_cells = [&](long t) -> std::string {
    if (m < trace.metrics.size() && trace.metrics[m].t == t) {
      const auto& rec = trace.metrics[m++];
      return format_double(rec.cost) + "," + format_double(rec.effective_variance) + "," +
             format_double(rec.pseudo_variance);
    }
    return ",,";
  };
  // Metric records that precede the first step (the t = 0 row).
  while (m < trace.metrics.size() &&
         (trace.steps.empty() || trace.metrics[m].t < trace.steps.front().t)) {
    const auto& rec = trace.metrics[m++];
    out << rec.t << ",,,," << format_double(rec.cost) << ','
        << format_double(rec.effective_variance) << ',' << format_double(rec.pseudo_variance)
        << '\n';
  }
  for (const auto& s : trace.steps) {
    out << s.t << ',' << s.index << ',' << format_double(s.probability) << ','
        << format_double(s.reward) << ',' << metric_cells(s.t) << '\n';
  }
  auto write_vector = [&](const char* name, const double* v, std::size_t len) {
    out << "# " << name;
    for (std::size_t k = 0; k < len; ++k) out << ' ' << format_double(v[k]);
    out << '\n';
  };
  out << "# horizon " << trace.horizon << '\n';
  out << "# diverged " << (trace.diverged ? 1 : 0) << '\n';
  write_vector("final_w", trace.final_w.data(), static_cast<std::size_t>(trace.final_w.size()));
  write_vector("weighted_sum", trace.weighted_sum.data(),
               static_cast<std::size_t>(trace.weighted_sum.size()));
  if (!trace.sampler_weights.empty())
    write_vector("sampler_weights", trace.sampler_weights.data(), trace.sampler_weights.size());
}

void write_trace_csv_file(const RunTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_trace_csv(trace, out);
  if (!out) throw IoError("failed writing '" + path + "'");
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

std::vector<double> parse_vector_tail(std::istringstream& rest, const std::string& ctx) {
  std::vector<double> v;
  std::string tok;
  while (rest >> tok) v.push_back(parse_double_token(tok, ctx));
  return v;
}

}  // namespace

RunTrace read_trace_csv(std::istream& in) {
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty trace file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "# mabs-trace schema=" + std::to_string(kTraceSchemaVersion))
    throw ParseError("unsupported trace header '" + line + "'");
  if (!std::getline(in, line)) throw ParseError("trace missing column header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,i,p_i,a_it,F,Ve,Vpseudo")
    throw ParseError("unexpected trace columns '" + line + "'");

  RunTrace trace;
  bool saw_horizon = false, saw_final = false, saw_weighted = false, saw_diverged = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string ctx = line_context(line_no);
    if (line[0] == '#') {
      std::istringstream rest(line.substr(1));
      std::string key;
      rest >> key;
      if (key == "horizon") {
        std::string tok;
        rest >> tok;
        trace.horizon = parse_long_token(tok, ctx);
        saw_horizon = true;
      } else if (key == "diverged") {
        std::string tok;
        rest >> tok;
        trace.diverged = parse_long_token(tok, ctx) != 0;
        saw_diverged = true;
      } else if (key == "final_w") {
        auto v = parse_vector_tail(rest, ctx);
        trace.final_w = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
        saw_final = true;
      } else if (key == "weighted_sum") {
        auto v = parse_vector_tail(rest, ctx);
        trace.weighted_sum =
            Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
        saw_weighted = true;
      } else if (key == "sampler_weights") {
        trace.sampler_weights = parse_vector_tail(rest, ctx);
      }
      // unknown comments are ignored
      continue;
    }
    auto cells = split_csv(line);
    if (cells.size() != 7) throw ParseError(ctx + ": expected 7 columns");
    long t = parse_long_token(cells[0], ctx);
    if (!cells[1].empty()) {
      StepRecord s;
      s.t = t;
      s.index = static_cast<int>(parse_long_token(cells[1], ctx));
      s.probability = parse_double_token(cells[2], ctx);
      s.reward = parse_double_token(cells[3], ctx);
      trace.steps.push_back(s);
    } else if (!cells[2].empty() || !cells[3].empty()) {
      throw ParseError(ctx + ": draw columns must be empty together");
    }
    if (!cells[4].empty()) {
      if (cells[5].empty() || cells[6].empty())
        throw ParseError(ctx + ": metric columns must be present together");
      trace.metrics.push_back({t, parse_double_token(cells[4], ctx),
                               parse_double_token(cells[5], ctx),
                               parse_double_token(cells[6], ctx)});
    } else if (!cells[5].empty() || !cells[6].empty()) {
      throw ParseError(ctx + ": metric columns must be present together");
    }
  }
  if (!saw_horizon || !saw_diverged || !saw_final || !saw_weighted)
    throw ParseError("trace footer incomplete");
  return trace;
}

RunTrace read_trace_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  try {
    return read_trace_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace mabs
