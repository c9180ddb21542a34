#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "calibra/csvio.hpp"
#include "calibra/report.hpp"
#include "calibra/sbc.hpp"
#include "calibra/svg.hpp"

using namespace calibra;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("dataset CSV round trip preserves layout and responses") {
  const ScenarioSpec spec = preset_scenario("gibson_wu");
  const Dataset d = generate_example_dataset(spec, 99);
  const std::string path = temp_path("calibra_test_dataset.csv");
  write_dataset_csv(path, d);
  const Dataset back = read_dataset_csv(path, spec);
  REQUIRE(back.trials.n_rows() == d.trials.n_rows());
  CHECK(back.trials.n_subj == d.trials.n_subj);
  CHECK(back.trials.n_item == d.trials.n_item);
  for (long r = 0; r < d.trials.n_rows(); ++r) {
    CHECK(back.trials.subj[r] == d.trials.subj[r]);
    CHECK(back.trials.item[r] == d.trials.item[r]);
    CHECK(back.trials.cell[r] == d.trials.cell[r]);
    CHECK(back.y(r) == doctest::Approx(d.y(r)).epsilon(1e-9));
  }
  std::remove(path.c_str());
}

TEST_CASE("dataset CSV header mismatches are rejected") {
  const std::string path = temp_path("calibra_bad_header.csv");
  {
    std::ofstream out(path);
    out << "subject,item,X,y\n";
  }
  CHECK_THROWS(read_dataset_csv(path, preset_scenario("gibson_wu")));
  std::remove(path.c_str());
}

TEST_CASE("records CSV round trip") {
  std::vector<SbcRecord> records;
  for (int i = 0; i < 5; ++i) {
    SbcRecord r;
    r.run = i;
    r.true_model = i % 2;
    r.analysis_id = "agg";
    r.effect_id = "X";
    r.log_bf10 = 0.1 * i - 0.2;
    r.post_p1 = 0.4 + 0.01 * i;
    r.rhat_max = 1.01;
    r.bridge_iters = 12 + i;
    r.warn_flags = i == 3 ? "bridge did not converge" : "";
    records.push_back(r);
  }
  const std::string path = temp_path("calibra_records.csv");
  write_records_csv(path, records);
  const auto back = read_records_csv(path);
  REQUIRE(back.size() == records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    CHECK(back[i].run == records[i].run);
    CHECK(back[i].true_model == records[i].true_model);
    CHECK(back[i].log_bf10 == doctest::Approx(records[i].log_bf10));
    CHECK(back[i].post_p1 == doctest::Approx(records[i].post_p1));
    CHECK(back[i].bridge_iters == records[i].bridge_iters);
    CHECK(back[i].warn_flags == records[i].warn_flags);
  }
  std::remove(path.c_str());
}

TEST_CASE("numeric formatting is stable") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-1.25e-7) == "-1.25e-07");
}

TEST_CASE("svg renderers emit well-formed panels with embedded data") {
  std::vector<SummaryRow> rows;
  SummaryRow r;
  r.analysis_id = "aggregated";
  r.effect_id = "c2vs1";
  r.n = 100;
  r.mean_post_p1 = 0.62;
  r.ci_lo = 0.58;
  r.ci_hi = 0.66;
  r.prior_p1 = 0.5;
  rows.push_back(r);
  r.effect_id = "c3vs1";
  r.mean_post_p1 = 0.41;
  rows.push_back(r);
  const std::string svg = render_calibration_svg(rows, 0.5, "demo");
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("<!-- data:") != std::string::npos);
  CHECK(svg.find("c3vs1") != std::string::npos);

  ErrorRateCurve curve;
  ErrorRatePoint p;
  p.analysis_id = "aggregated";
  p.effect_id = "X";
  p.sd_true = 0.25;
  p.n_reject = 50;
  p.n_sims = 500;
  p.ci_lo = 0.08;
  p.ci_hi = 0.12;
  curve.push_back(p);
  const std::string curve_svg = render_curve_svg(curve, 0.05, "alpha");
  CHECK(curve_svg.find("<svg") == 0);
  CHECK(curve_svg.find("</svg>") != std::string::npos);
}

TEST_CASE("report writer emits the full output set") {
  ScenarioSpec s = preset_scenario("toy");
  s.sbc.n_sims = 40;
  const auto records = run_sbc(s);
  const std::string dir = temp_path("calibra_report_test");
  const ReportStatus st = write_sbc_outputs(dir, s, records);
  CHECK(st.n_records == 40);
  CHECK(st.n_failed == 0);
  CHECK(std::filesystem::exists(dir + "/records.csv"));
  CHECK(std::filesystem::exists(dir + "/summary.csv"));
  CHECK(std::filesystem::exists(dir + "/calibration.csv"));
  CHECK(std::filesystem::exists(dir + "/calibration.svg"));
  std::filesystem::remove_all(dir);
}
