#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mabs/experiments.hpp"
#include "mabs/metrics.hpp"
#include "mabs/verify.hpp"

namespace py = pybind11;
using namespace mabs;

namespace {

// Route dict <-> json through the stdlib json module; config payloads are
// small, so the round trip costs nothing measurable.
nlohmann::json to_json(const py::object& obj) {
  py::object dumps = py::module_::import("json").attr("dumps");
  return nlohmann::json::parse(py::cast<std::string>(dumps(obj)));
}

py::object from_json(const nlohmann::json& j) {
  py::object loads = py::module_::import("json").attr("loads");
  return loads(j.dump());
}

Vector to_vector(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = v[static_cast<std::size_t>(i)];
  return out;
}

std::vector<double> to_std(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

ProblemSpec make_spec(const std::string& loss, const std::string& reg, double lambda) {
  ProblemSpec spec;
  spec.loss = loss_from_string(loss);
  spec.reg = reg_from_string(reg);
  spec.lambda = lambda;
  validate(spec);
  return spec;
}

ExperimentConfig config_of(const py::dict& cfg) {
  ExperimentConfig out = config_from_json(to_json(cfg));
  validate_or_throw(out);
  return out;
}

py::dict summary_of(const ExperimentConfig& cfg, const RunOutput& out) {
  return py::cast<py::dict>(from_json(summarize(cfg, out)));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bandit-driven datapoint sampling for stochastic optimizers";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("size", &Dataset::size)
      .def_property_readonly("dimension", &Dataset::dimension)
      .def("point", [](const Dataset& d, int i) {
        const DataPoint& pt = d.point(i);
        py::list idx, val;
        for (const auto& f : pt.features) {
          idx.append(f.index);
          val.append(f.value);
        }
        return py::dict(py::arg("label") = pt.label, py::arg("indices") = idx,
                        py::arg("values") = val);
      })
      .def("__len__", &Dataset::size);

  m.def(
      "load_libsvm",
      [](const std::string& path, const std::string& labels, std::optional<int> dimension) {
        LabelPolicy policy = labels == "binary" ? LabelPolicy::Binary
                           : labels == "raw"    ? LabelPolicy::Raw
                                                : throw ConfigError("labels must be binary or raw");
        return parse_libsvm_file(path, policy, dimension);
      },
      py::arg("path"), py::arg("labels") = "binary", py::arg("dimension") = py::none());

  m.def(
      "synthetic",
      [](int n, int d, double beta_std, double noise_std, double scale_c, std::uint64_t seed) {
        SyntheticConfig cfg{n, d, beta_std, noise_std, scale_c, seed};
        return generate_synthetic(cfg);
      },
      py::arg("n") = 101, py::arg("d") = 5, py::arg("beta_std") = 10.0,
      py::arg("noise_std") = 1.0, py::arg("scale_c") = 1.0, py::arg("seed") = 0);

  m.def(
      "scale_for_tau",
      [](double target_tau, int n, int d, double beta_std, double noise_std, std::uint64_t seed) {
        SyntheticConfig cfg{n, d, beta_std, noise_std, 1.0, seed};
        return scale_for_tau(cfg, target_tau);
      },
      py::arg("target_tau"), py::arg("n") = 101, py::arg("d") = 5, py::arg("beta_std") = 10.0,
      py::arg("noise_std") = 1.0, py::arg("seed") = 0);

  m.def(
      "smoothness",
      [](const std::string& loss, const Dataset& data) {
        SmoothnessProfile prof = smoothness_profile(make_spec(loss, "none", 0.0), data);
        return py::dict(py::arg("per_point") = prof.per_point, py::arg("max") = prof.max,
                        py::arg("mean") = prof.mean, py::arg("tau") = prof.tau);
      },
      py::arg("loss"), py::arg("data"));

  m.def(
      "full_cost",
      [](const std::string& loss, const std::string& reg, double lam, const Dataset& data,
         const std::vector<double>& w) {
        return full_cost(make_spec(loss, reg, lam), data, to_vector(w));
      },
      py::arg("loss"), py::arg("reg"), py::arg("lam"), py::arg("data"), py::arg("w"));

  m.def(
      "full_gradient",
      [](const std::string& loss, const Dataset& data, const std::vector<double>& w) {
        return to_std(full_gradient(make_spec(loss, "none", 0.0), data, to_vector(w)));
      },
      py::arg("loss"), py::arg("data"), py::arg("w"));

  m.def(
      "prox",
      [](const std::string& reg, double lam, const std::vector<double>& v, double step) {
        return to_std(prox(make_spec("ridge", reg, lam), to_vector(v), step));
      },
      py::arg("reg"), py::arg("lam"), py::arg("v"), py::arg("step"));

  m.def("effective_variance", &effective_variance, py::arg("rewards"), py::arg("p"));

  m.def(
      "pseudo_variance",
      [](const std::string& loss, const std::string& reg, double lam, const Dataset& data,
         const std::vector<double>& w, const std::vector<double>& p) {
        VarianceReport rep = pseudo_variance(make_spec(loss, reg, lam), data, to_vector(w), p);
        return py::dict(py::arg("effective") = rep.effective,
                        py::arg("centering") = rep.centering, py::arg("pseudo") = rep.pseudo);
      },
      py::arg("loss"), py::arg("reg"), py::arg("lam"), py::arg("data"), py::arg("w"),
      py::arg("p"));

  m.def(
      "optimal_stepwise_p",
      [](const std::string& loss, const Dataset& data, const std::vector<double>& w) {
        return optimal_stepwise_p(make_spec(loss, "none", 0.0), data, to_vector(w)).p;
      },
      py::arg("loss"), py::arg("data"), py::arg("w"));

  m.def(
      "optimal_static_p",
      [](const std::vector<std::vector<double>>& reward_history) {
        return optimal_static_p(reward_history).p;
      },
      py::arg("reward_history"));

  m.def("mabs_delta", &mabs_delta, py::arg("n"), py::arg("horizon"), py::arg("a_sq_mean"),
        py::arg("eta") = 0.4, py::arg("horizon_scale") = 1.0);
  m.def("mabs_min_horizon", &mabs_min_horizon, py::arg("reward_bounds"),
        py::arg("horizon_scale") = 1.0);

  m.def(
      "run_experiment",
      [](const py::dict& cfg_dict) {
        ExperimentConfig cfg = config_of(cfg_dict);
        Dataset data = load_dataset(cfg);
        RunOutput out;
        {
          py::gil_scoped_release release;
          out = run_repeats(cfg, data);
        }
        return summary_of(cfg, out);
      },
      py::arg("config"));

  m.def(
      "tau_sweep",
      [](const py::dict& cfg_dict, const std::vector<double>& taus,
         const std::vector<std::string>& samplers) {
        ExperimentConfig cfg = config_of(cfg_dict);
        std::vector<SamplerKind> kinds;
        for (const auto& s : samplers) kinds.push_back(sampler_from_string(s));
        std::vector<TauSweepRow> rows;
        {
          py::gil_scoped_release release;
          rows = tau_sweep(cfg, taus, kinds);
        }
        py::list out;
        for (const auto& r : rows)
          out.append(py::dict(py::arg("tau") = r.tau, py::arg("scale_c") = r.scale_c,
                              py::arg("sampler") = to_string(r.sampler),
                              py::arg("mean_final_cost_gap") = r.mean_final_cost_gap,
                              py::arg("mean_final_effective_variance") =
                                  r.mean_final_effective_variance));
        return out;
      },
      py::arg("config"), py::arg("taus"),
      py::arg("samplers") = std::vector<std::string>{"uniform", "is-smoothness", "mabs"});

  m.def(
      "stability_sweep",
      [](const py::dict& cfg_dict, const std::vector<double>& gammas,
         const std::vector<std::string>& samplers) {
        ExperimentConfig cfg = config_of(cfg_dict);
        Dataset data = load_dataset(cfg);
        std::vector<SamplerKind> kinds;
        for (const auto& s : samplers) kinds.push_back(sampler_from_string(s));
        std::vector<StabilityRow> rows;
        {
          py::gil_scoped_release release;
          rows = stability_sweep(cfg, data, gammas, kinds);
        }
        py::list out;
        for (const auto& r : rows) {
          py::dict row(py::arg("gamma") = r.gamma, py::arg("sampler") = to_string(r.sampler),
                       py::arg("estimator") = to_string(r.algorithm),
                       py::arg("diverged_fraction") = r.diverged_fraction,
                       py::arg("repeats") = r.repeats);
          row["mean_final_cost"] =
              r.mean_final_cost ? py::cast(*r.mean_final_cost) : py::none();
          out.append(row);
        }
        return out;
      },
      py::arg("config"), py::arg("gammas"),
      py::arg("samplers") = std::vector<std::string>{"uniform", "is-smoothness", "mabs"});

  m.def(
      "verify",
      [](const std::string& suite, std::uint64_t seed) {
        std::vector<SuiteResult> results;
        {
          py::gil_scoped_release release;
          results = run_verify_suites(suite, seed);
        }
        py::list out;
        for (const auto& r : results)
          out.append(py::dict(py::arg("name") = r.name, py::arg("cases") = r.cases,
                              py::arg("failures") = r.failures, py::arg("passed") = r.pass()));
        return out;
      },
      py::arg("suite") = "all", py::arg("seed") = 20240915);
}
