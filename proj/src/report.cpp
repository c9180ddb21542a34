#include "calibra/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "calibra/csvio.hpp"
#include "calibra/stats.hpp"

namespace calibra {

namespace fs = std::filesystem;

void restore_sweep_values(const ScenarioSpec& spec,
                          std::vector<SbcRecord>& records) {
  if (!spec.sweep) return;
  int n_runs = 0;
  for (const auto& r : records) n_runs = std::max(n_runs, r.run + 1);
  for (auto& r : records) {
    if (std::isnan(r.sweep_value)) {
      r.sweep_value = spec.sweep_value(r.run, n_runs);
    }
  }
}

std::vector<SweepBin> sweep_bins(const ScenarioSpec& spec,
                                 const std::vector<SbcRecord>& records,
                                 int n_bins) {
  std::vector<SweepBin> bins;
  if (!spec.sweep) return bins;
  const double lo = spec.sweep->from;
  const double hi = spec.sweep->to;
  const double width = (hi - lo) / n_bins;
  std::map<std::tuple<std::string, std::string, int>, std::vector<double>> acc;
  for (const auto& r : records) {
    if (std::isnan(r.post_p1) || std::isnan(r.sweep_value)) continue;
    int b = width > 0 ? static_cast<int>((r.sweep_value - lo) / width) : 0;
    b = std::clamp(b, 0, n_bins - 1);
    acc[{r.analysis_id, r.effect_id, b}].push_back(r.post_p1);
  }
  for (const auto& [key, values] : acc) {
    SweepBin bin;
    bin.analysis_id = std::get<0>(key);
    bin.effect_id = std::get<1>(key);
    bin.center = lo + (std::get<2>(key) + 0.5) * width;
    bin.n = static_cast<int>(values.size());
    bin.mean = mean(values);
    if (bin.n >= 2) {
      const double half = 1.959963984540054 * sample_sd(values) /
                          std::sqrt(static_cast<double>(bin.n));
      bin.ci_lo = std::max(0.0, bin.mean - half);
      bin.ci_hi = std::min(1.0, bin.mean + half);
    } else {
      bin.ci_lo = bin.ci_hi = bin.mean;
    }
    bins.push_back(bin);
  }
  return bins;
}

std::vector<SweepFit> sweep_fits(const ScenarioSpec& spec,
                                 const std::vector<SbcRecord>& records) {
  std::vector<SweepFit> fits;
  if (!spec.sweep) return fits;
  std::map<std::pair<std::string, std::string>,
           std::pair<std::vector<double>, std::vector<double>>>
      acc;
  for (const auto& r : records) {
    if (std::isnan(r.post_p1) || std::isnan(r.sweep_value)) continue;
    auto& [xs, ys] = acc[{r.analysis_id, r.effect_id}];
    xs.push_back(r.sweep_value);
    ys.push_back(r.post_p1);
  }
  for (const auto& [key, xy] : acc) {
    if (xy.first.size() < 3) continue;
    const LogisticFit lf = logistic_fit(xy.first, xy.second);
    fits.push_back(SweepFit{key.first, key.second, lf.intercept, lf.slope});
  }
  return fits;
}

ReportStatus write_sbc_outputs(const std::string& out_dir,
                               const ScenarioSpec& spec,
                               const std::vector<SbcRecord>& records) {
  fs::create_directories(out_dir);
  write_records_csv((fs::path(out_dir) / "records.csv").string(), records);

  const auto summary = summarize(records, spec.sbc.prior_p1);
  write_summary_csv((fs::path(out_dir) / "summary.csv").string(), summary);

  const auto tests = calibration_tests(spec, records);
  write_calibration_csv((fs::path(out_dir) / "calibration.csv").string(),
                        tests);

  {
    std::ofstream svg(fs::path(out_dir) / "calibration.svg");
    svg << render_calibration_svg(summary, spec.sbc.prior_p1,
                                  spec.name + ": mean posterior P(H1)");
  }
  if (spec.sweep) {
    std::vector<SbcRecord> with_sweep = records;
    restore_sweep_values(spec, with_sweep);
    const auto bins = sweep_bins(spec, with_sweep);
    const auto fits = sweep_fits(spec, with_sweep);
    std::ofstream svg(fs::path(out_dir) / "sweep.svg");
    svg << render_sweep_svg(bins, fits, spec.sbc.prior_p1, spec.sweep->from,
                            spec.sweep->to,
                            spec.name + ": posterior P(H1) vs swept SD");
  }

  ReportStatus st;
  st.n_records = static_cast<int>(records.size());
  for (const auto& r : records) {
    if (std::isnan(r.post_p1)) ++st.n_failed;
  }
  return st;
}

void write_freq_outputs(const std::string& out_dir, const ScenarioSpec& spec,
                        const ErrorRateCurve& curve, const std::string& mode) {
  fs::create_directories(out_dir);
  write_curve_csv((fs::path(out_dir) / (mode + "_curve.csv")).string(), curve);
  std::ofstream svg(fs::path(out_dir) / (mode + "_curve.svg"));
  svg << render_curve_svg(curve, spec.freq.alpha_level,
                          spec.name + ": " + mode + " rejection rates");
}

}  // namespace calibra
