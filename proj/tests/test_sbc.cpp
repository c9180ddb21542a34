#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "calibra/report.hpp"
#include "calibra/sbc.hpp"
#include "calibra/scenario.hpp"
#include "calibra/stats.hpp"

using namespace calibra;

namespace {

/// Small collapsed scenario that a test can run in a second or two.
ScenarioSpec mini_collapsed() {
  ScenarioSpec s = preset_scenario("sim1_1_desk");
  s.design.n_subj = 6;
  s.design.n_rep = 2;
  s.sbc.n_sims = 2;
  s.mcmc.n_warmup = 300;
  s.mcmc.n_draws = 400;
  s.mcmc.thin = 1;
  return s;
}

}  // namespace

TEST_CASE("prior recovery: exact-BF toy keeps the average posterior at 0.5") {
  const ScenarioSpec toy = preset_scenario("toy");
  const auto records = run_sbc(toy);
  REQUIRE(records.size() == 500);
  std::vector<double> post;
  for (const auto& r : records) post.push_back(r.post_p1);
  const double m = mean(post);
  // 99% binomial-style bound with sd <= 0.5: 2.576 * 0.5 / sqrt(500).
  CHECK(std::abs(m - 0.5) < 2.576 * 0.5 / std::sqrt(500.0));
}

TEST_CASE("toy scenario with prior 0.2 recovers 0.2") {
  ScenarioSpec toy = preset_scenario("toy");
  toy.sbc.prior_p1 = 0.2;
  toy.sbc.n_sims = 800;
  const auto records = run_sbc(toy);
  std::vector<double> post;
  for (const auto& r : records) post.push_back(r.post_p1);
  CHECK(std::abs(mean(post) - 0.2) < 2.576 * 0.4 / std::sqrt(800.0));
}

TEST_CASE("sbc records are deterministic and job-count independent") {
  const ScenarioSpec s = mini_collapsed();
  SbcOverrides one;
  one.jobs = 1;
  SbcOverrides four;
  four.jobs = 4;
  const auto a = run_sbc(s, one);
  const auto b = run_sbc(s, one);
  const auto c = run_sbc(s, four);
  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() == c.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].run == b[i].run);
    CHECK(a[i].analysis_id == b[i].analysis_id);
    CHECK(a[i].effect_id == b[i].effect_id);
    CHECK(a[i].log_bf10 == b[i].log_bf10);
    CHECK(a[i].post_p1 == b[i].post_p1);
    CHECK(a[i].log_bf10 == c[i].log_bf10);
    CHECK(a[i].true_model == c[i].true_model);
  }
}

TEST_CASE("all analyses of a run consume the same simulated dataset") {
  const ScenarioSpec s = mini_collapsed();
  const auto records = run_sbc(s);
  std::map<int, std::set<std::string>> digests;
  for (const auto& r : records) digests[r.run].insert(r.params_digest);
  for (const auto& [run, set] : digests) CHECK(set.size() == 1);
}

TEST_CASE("a single-run SBC yields fully populated records") {
  ScenarioSpec s = mini_collapsed();
  s.sbc.n_sims = 1;
  const auto records = run_sbc(s);
  REQUIRE(records.size() == 4);  // 2 analyses x 2 effects
  for (const auto& r : records) {
    CHECK(r.run == 0);
    CHECK((r.true_model == 0 || r.true_model == 1));
    CHECK(std::isfinite(r.log_bf10));
    CHECK(r.post_p1 >= 0.0);
    CHECK(r.post_p1 <= 1.0);
    CHECK(r.bridge_iters > 0);
  }
}

TEST_CASE("summarize reproduces the hand-computed normal CI") {
  std::vector<SbcRecord> records;
  // 100 values with mean 0.6 and sample SD exactly 0.2.
  const double c = 0.2 * std::sqrt(99.0 / 100.0);
  for (int i = 0; i < 100; ++i) {
    SbcRecord r;
    r.run = i;
    r.analysis_id = "a";
    r.effect_id = "e";
    r.post_p1 = 0.6 + ((i % 2 == 0) ? c : -c);
    records.push_back(r);
  }
  const auto rows = summarize(records, 0.5);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].mean_post_p1 == doctest::Approx(0.6));
  CHECK(rows[0].sd_post_p1 == doctest::Approx(0.2));
  CHECK(rows[0].ci_hi - rows[0].mean_post_p1 ==
        doctest::Approx(0.0392).epsilon(1e-3));
}

TEST_CASE("constant records give a zero-width interval and skipped tests") {
  std::vector<SbcRecord> records;
  for (int i = 0; i < 20; ++i) {
    SbcRecord r;
    r.run = i;
    r.analysis_id = "a";
    r.effect_id = "e";
    r.post_p1 = 0.5;
    records.push_back(r);
  }
  const auto rows = summarize(records, 0.5);
  CHECK(rows[0].mean_post_p1 == doctest::Approx(0.5));
  CHECK(rows[0].ci_hi - rows[0].ci_lo == doctest::Approx(0.0));

  ScenarioSpec dummy = preset_scenario("toy");
  const auto tests = calibration_tests(dummy, records);
  REQUIRE_FALSE(tests.empty());
  for (const auto& t : tests) {
    if (t.test == "vs_prior") CHECK(t.skipped);
  }
}

TEST_CASE("unbiased synthetic records favor the null calibration test") {
  RngStream rng(600);
  std::vector<SbcRecord> records;
  for (int i = 0; i < 200; ++i) {
    SbcRecord r;
    r.run = i;
    r.analysis_id = "a";
    r.effect_id = "e";
    r.post_p1 = std::clamp(0.5 + rng.normal(0.0, 0.15), 0.0, 1.0);
    records.push_back(r);
  }
  ScenarioSpec dummy = preset_scenario("toy");
  const auto tests = calibration_tests(dummy, records);
  bool found = false;
  for (const auto& t : tests) {
    if (t.test == "vs_prior" && std::abs(t.scale - 0.7) < 0.06) {
      CHECK(t.bf10 < 1.0);  // BF01 > 1
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("failed analyses are recorded, not dropped") {
  ScenarioSpec s = mini_collapsed();
  s.sbc.n_sims = 1;
  // Request an item random effect in a design without items.
  s.analyses[1].random_columns["item"] = {"(Intercept)"};
  const auto records = run_sbc(s);
  REQUIRE(records.size() == 4);
  int failed = 0;
  for (const auto& r : records) {
    if (std::isnan(r.post_p1)) {
      CHECK(r.warn_flags.find("error:") == 0);
      ++failed;
    }
  }
  CHECK(failed == 2);
  const auto rows = summarize(records, 0.5);
  for (const auto& row : rows) {
    if (row.analysis_id == s.analyses[1].id) CHECK(row.n_failed == 1);
  }
}

TEST_CASE("scenario JSON round-trips and rejects unknown keys") {
  for (const std::string name :
       {"sim1_1", "sim1_4", "sim1_7", "sim2_1", "appendix_e", "toy"}) {
    const ScenarioSpec a = preset_scenario(name);
    const ScenarioSpec b = scenario_from_json(scenario_to_json(a));
    CHECK(a.name == b.name);
    CHECK(a.family == b.family);
    CHECK(a.design.n_subj == b.design.n_subj);
    CHECK(a.effects.size() == b.effects.size());
    CHECK(a.analyses.size() == b.analyses.size());
    CHECK(a.sbc.n_sims == b.sbc.n_sims);
    CHECK(a.sbc.prior_p1 == b.sbc.prior_p1);
    CHECK(a.seed == b.seed);
    CHECK(scenario_to_json(a) == scenario_to_json(b));
  }
  CHECK_THROWS_AS(scenario_from_json("{\"nam\":\"x\"}"), ConfigError);
  CHECK_THROWS_AS(scenario_from_json("{\"name\":\"x\",\"bogus\":1}"),
                  ConfigError);
  CHECK_THROWS_AS(scenario_from_json("not json"), ConfigError);
  CHECK_THROWS_AS(
      scenario_from_json(
          "{\"toy\":{\"n_obs\":5},\"sbc\":{\"prior_p1\":1.5}}"),
      ConfigError);
  CHECK_THROWS_AS(preset_scenario("nope"), ConfigError);
}

TEST_CASE("sweep values interpolate the configured range") {
  const ScenarioSpec s = preset_scenario("sim2_1");
  CHECK(s.sweep_value(0, 125) == doctest::Approx(0.0));
  CHECK(s.sweep_value(124, 125) == doctest::Approx(0.5));
  CHECK(s.sweep_value(62, 125) == doctest::Approx(0.25));
  const ScenarioSpec t = preset_scenario("toy");
  CHECK(std::isnan(t.sweep_value(3, 10)));
}

TEST_CASE("sweep bins and logistic fits cover each analysis and effect") {
  ScenarioSpec s = preset_scenario("sim2_1");
  std::vector<SbcRecord> records;
  RngStream rng(601);
  for (int i = 0; i < 120; ++i) {
    SbcRecord r;
    r.run = i;
    r.analysis_id = i % 2 == 0 ? "aggregated" : "non-aggregated";
    r.effect_id = "X";
    r.sweep_value = s.sweep_value(i, 120);
    r.post_p1 =
        std::clamp(0.2 + r.sweep_value * 0.8 + rng.normal(0.0, 0.05), 0.0, 1.0);
    records.push_back(r);
  }
  const auto bins = sweep_bins(s, records);
  CHECK(bins.size() > 6);
  const auto fits = sweep_fits(s, records);
  REQUIRE(fits.size() == 2);
  for (const auto& f : fits) CHECK(f.slope > 0.0);
}
