#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "calibra/bridge.hpp"
#include "calibra/csvio.hpp"
#include "calibra/design.hpp"
#include "calibra/freq.hpp"
#include "calibra/jzs.hpp"
#include "calibra/sbc.hpp"
#include "calibra/scenario.hpp"

namespace py = pybind11;
using namespace calibra;

namespace {

ScenarioSpec resolve_scenario(const std::string& scenario) {
  if (!scenario.empty() && scenario.front() == '{') {
    return scenario_from_json(scenario);
  }
  return load_scenario(scenario);
}

ContrastScheme make_scheme(const std::string& kind,
                           const std::optional<MatrixXd>& rows) {
  ContrastScheme s;
  if (kind == "sum") {
    s.kind = ContrastKind::kSum;
  } else if (kind == "treatment-grand-mean") {
    s.kind = ContrastKind::kTreatmentGrandMean;
  } else if (kind == "helmert-scaled") {
    s.kind = ContrastKind::kHelmertScaled;
  } else if (kind == "hypothesis-matrix") {
    s.kind = ContrastKind::kHypothesisMatrix;
  } else {
    throw std::invalid_argument("unknown contrast kind '" + kind + "'");
  }
  s.hypothesis_rows = rows;
  return s;
}

py::dict dataset_to_dict(const Dataset& d) {
  py::dict out;
  out["subj"] = d.trials.subj;
  out["item"] = d.trials.item;
  out["cell"] = d.trials.cell;
  out["y"] = VectorXd(d.y);
  std::vector<std::string> factor_names;
  for (const auto& f : d.trials.factors) factor_names.push_back(f.name);
  out["factors"] = factor_names;
  return out;
}

py::dict records_to_dict(const std::vector<SbcRecord>& records) {
  std::vector<int> run, true_model, bridge_iters;
  std::vector<std::string> analysis_id, effect_id, warn_flags;
  std::vector<double> log_bf10, post_p1, rhat_max, sweep_value;
  for (const auto& r : records) {
    run.push_back(r.run);
    true_model.push_back(r.true_model);
    analysis_id.push_back(r.analysis_id);
    effect_id.push_back(r.effect_id);
    log_bf10.push_back(r.log_bf10);
    post_p1.push_back(r.post_p1);
    rhat_max.push_back(r.rhat_max);
    bridge_iters.push_back(r.bridge_iters);
    warn_flags.push_back(r.warn_flags);
    sweep_value.push_back(r.sweep_value);
  }
  py::dict out;
  out["run"] = run;
  out["true_model"] = true_model;
  out["analysis_id"] = analysis_id;
  out["effect_id"] = effect_id;
  out["log_bf10"] = log_bf10;
  out["post_p1"] = post_p1;
  out["rhat_max"] = rhat_max;
  out["bridge_iters"] = bridge_iters;
  out["warn_flags"] = warn_flags;
  out["sweep_value"] = sweep_value;
  return out;
}

}  // namespace

PYBIND11_MODULE(_calibra, m) {
  m.doc() = "Simulation-based calibration of Bayes factors for "
            "repeated-measures designs";

  m.def(
      "qmatrix", [](int alpha) { return qmatrix(alpha).q; }, py::arg("alpha"),
      "Orthonormal sum-to-zero projection columns for a factor with `alpha` "
      "levels");

  m.def(
      "contrast_matrix",
      [](const std::string& kind, int alpha,
         const std::optional<MatrixXd>& rows) {
        return contrast_matrix(make_scheme(kind, rows), alpha);
      },
      py::arg("kind"), py::arg("alpha"), py::arg("hypothesis_rows") = py::none());

  m.def("preset_names", &preset_names);
  m.def(
      "scenario_json",
      [](const std::string& name) { return scenario_to_json(load_scenario(name)); },
      py::arg("scenario"));

  m.def(
      "simulate_dataset",
      [](const std::string& scenario, std::optional<std::uint64_t> seed) {
        const ScenarioSpec spec = resolve_scenario(scenario);
        return dataset_to_dict(
            generate_example_dataset(spec, seed.value_or(spec.seed)));
      },
      py::arg("scenario"), py::arg("seed") = py::none());

  m.def(
      "bf_report",
      [](const std::string& scenario, std::optional<std::uint64_t> seed) {
        const ScenarioSpec spec = resolve_scenario(scenario);
        const std::uint64_t s = seed.value_or(spec.seed);
        const auto rows = analyze_dataset(spec, generate_example_dataset(spec, s), s);
        py::list out;
        for (const auto& r : rows) {
          py::dict d;
          d["analysis_id"] = r.analysis_id;
          d["effect_id"] = r.effect_id;
          d["log_bf10"] = r.log_bf10;
          d["bf10"] = r.bf10;
          d["post_p1"] = r.post_p1;
          d["warn_flags"] = r.warn_flags;
          out.append(d);
        }
        return out;
      },
      py::arg("scenario"), py::arg("seed") = py::none());

  m.def(
      "run_sbc",
      [](const std::string& scenario, std::optional<int> n_sims,
         std::optional<std::uint64_t> seed, int jobs) {
        const ScenarioSpec spec = resolve_scenario(scenario);
        SbcOverrides ov;
        ov.n_sims = n_sims;
        ov.seed = seed;
        ov.jobs = jobs;
        return records_to_dict(run_sbc(spec, ov));
      },
      py::arg("scenario"), py::arg("n_sims") = py::none(),
      py::arg("seed") = py::none(), py::arg("jobs") = 1);

  m.def(
      "summarize_sbc",
      [](const std::string& scenario, std::optional<int> n_sims,
         std::optional<std::uint64_t> seed, int jobs) {
        const ScenarioSpec spec = resolve_scenario(scenario);
        SbcOverrides ov;
        ov.n_sims = n_sims;
        ov.seed = seed;
        ov.jobs = jobs;
        const auto records = run_sbc(spec, ov);
        py::list out;
        for (const auto& row : summarize(records, spec.sbc.prior_p1)) {
          py::dict d;
          d["analysis_id"] = row.analysis_id;
          d["effect_id"] = row.effect_id;
          d["n"] = row.n;
          d["mean_post_p1"] = row.mean_post_p1;
          d["ci_lo"] = row.ci_lo;
          d["ci_hi"] = row.ci_hi;
          d["prior_p1"] = row.prior_p1;
          out.append(d);
        }
        return out;
      },
      py::arg("scenario"), py::arg("n_sims") = py::none(),
      py::arg("seed") = py::none(), py::arg("jobs") = 1);

  m.def(
      "alpha_power_sim",
      [](const std::string& scenario, bool power, std::optional<int> n_sims,
         std::optional<std::uint64_t> seed, int jobs) {
        const ScenarioSpec spec = resolve_scenario(scenario);
        const auto curve = alpha_power_sim(spec, power, n_sims, seed, jobs);
        py::list out;
        for (const auto& p : curve) {
          py::dict d;
          d["analysis_id"] = p.analysis_id;
          d["effect_id"] = p.effect_id;
          d["sd_true"] = p.sd_true;
          d["n_reject"] = p.n_reject;
          d["n_sims"] = p.n_sims;
          d["ci_lo"] = p.ci_lo;
          d["ci_hi"] = p.ci_hi;
          out.append(d);
        }
        return out;
      },
      py::arg("scenario"), py::arg("power") = false,
      py::arg("n_sims") = py::none(), py::arg("seed") = py::none(),
      py::arg("jobs") = 1);

  m.def(
      "jzs_ttest_bf",
      [](const std::vector<double>& x, double scale, double prior_p1) {
        const ModelComparison c = jzs_ttest_bf(x, scale, prior_p1);
        return py::make_tuple(c.bf10, c.log_bf10, c.post_p1);
      },
      py::arg("x"), py::arg("scale") = kTtestDefaultScale,
      py::arg("prior_p1") = 0.5,
      "One-sample JZS t-test Bayes factor; returns (bf10, log_bf10, post_p1)");

  m.def(
      "jzs_linreg_bf",
      [](const std::vector<double>& x, const std::vector<double>& y,
         double scale, double prior_p1) {
        const ModelComparison c = jzs_linreg_bf(x, y, scale, prior_p1);
        return py::make_tuple(c.bf10, c.log_bf10, c.post_p1);
      },
      py::arg("x"), py::arg("y"), py::arg("scale") = kRegressionDefaultScale,
      py::arg("prior_p1") = 0.5);

  m.def("posterior_model_prob", &posterior_model_prob, py::arg("bf10"),
        py::arg("prior_p1"));

  m.def(
      "min_f",
      [](double f1, double df1, double f2, double df2) {
        const MinFResult r = min_f(f1, df1, f2, df2);
        return py::make_tuple(r.min_f,
                              r.df_den ? py::cast(*r.df_den) : py::none());
      },
      py::arg("f1"), py::arg("df1_den"), py::arg("f2"), py::arg("df2_den"));

  m.attr("TTEST_DEFAULT_SCALE") = kTtestDefaultScale;
  m.attr("REGRESSION_DEFAULT_SCALE") = kRegressionDefaultScale;
  m.attr("__version__") = "0.1.0";
}
