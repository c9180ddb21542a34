#include <doctest.h>

#include <cmath>

#include "calibra/design.hpp"
#include "calibra/freq.hpp"
#include "calibra/stats.hpp"

using namespace calibra;

namespace {

struct Fixture {
  TrialTable trials;
  DesignMatrixBundle bundle;
  Dataset data;
};

Fixture sim_three_level(int n_subj, int n_rep, unsigned seed,
                        bool empirical = false) {
  DesignSpec d;
  d.factors = {{"X", {"X1", "X2", "X3"}, true, false}};
  d.n_subj = n_subj;
  d.n_rep = n_rep;
  RngStream rng(seed);
  Fixture f;
  f.trials = build_trial_table(d, rng);
  f.bundle = expand_design(
      f.trials, {{ContrastKind::kTreatmentGrandMean, std::nullopt}});
  LmmParams p;
  p.beta = VectorXd(3);
  p.beta << 200.0, 20.0, 20.0;
  p.sd_subj = VectorXd(3);
  p.sd_subj << 20.0, 90.0, 10.0;
  p.rho_subj = MatrixXd::Identity(3, 3);
  p.sigma = 50.0;
  SimulateOptions opts;
  opts.empirical = empirical;
  f.data = simulate(f.trials, f.bundle, p, opts, rng);
  return f;
}

}  // namespace

TEST_CASE("GLS with no random effects equals OLS") {
  const Fixture f = sim_three_level(6, 3, 500);
  FreqModelSpec spec;
  spec.fixed_columns = {0, 1, 2};
  RngStream rng(501);
  const FreqFit fit = lmm_ml_fit(f.data, f.bundle, spec, rng);
  const VectorXd beta_ols = ols(f.bundle.x, f.data.y);
  CHECK((fit.beta_hat - beta_ols).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("optimum beats a random search over the variance parameters") {
  const Fixture f = sim_three_level(4, 2, 502);
  FreqModelSpec spec;
  spec.fixed_columns = {0, 1, 2};
  spec.random_blocks = {{"subj", {0}}};
  RngStream rng(503);
  const FreqFit fit = lmm_ml_fit(f.data, f.bundle, spec, rng);
  CHECK(fit.converged);

  RngStream search(504);
  for (int k = 0; k < 100; ++k) {
    VectorXd theta(2);
    theta << search.uniform(-3.0, 6.0), search.uniform(-3.0, 6.0);
    CHECK(fit.loglik >= lmm_profiled_loglik(f.data, f.bundle, spec, theta) - 1e-6);
  }
}

TEST_CASE("non-aggregated SEs track the slope SDs; aggregated SEs are tied") {
  const Fixture f = sim_three_level(20, 10, 506, true);
  FreqModelSpec non_agg;
  non_agg.fixed_columns = {0, 1, 2};
  non_agg.random_blocks = {{"subj", {0, 1, 2}}};
  RngStream rng(507);
  const FreqFit fit_raw = lmm_ml_fit(f.data, f.bundle, non_agg, rng);
  CHECK(fit_raw.beta_hat(1) == doctest::Approx(20.0).epsilon(1e-6));
  CHECK(fit_raw.beta_hat(2) == doctest::Approx(20.0).epsilon(1e-6));
  CHECK(fit_raw.se(1) > 2.0 * fit_raw.se(2));

  const Dataset agg = aggregate(f.data, AggregationLevel::kBySubject);
  const DesignMatrixBundle agg_bundle = expand_design(
      agg.trials, {{ContrastKind::kTreatmentGrandMean, std::nullopt}});
  FreqModelSpec agg_spec;
  agg_spec.fixed_columns = {0, 1, 2};
  agg_spec.random_blocks = {{"subj", {0}}};
  RngStream rng2(508);
  const FreqFit fit_agg = lmm_ml_fit(agg, agg_bundle, agg_spec, rng2);
  CHECK(fit_agg.se(1) == doctest::Approx(fit_agg.se(2)).epsilon(1e-6));
}

TEST_CASE("repeated-measures F is zero when group means are equal") {
  DesignSpec d;
  d.factors = {{"X", {"a", "b", "c"}, true, false}};
  d.n_subj = 5;
  d.n_rep = 1;
  RngStream rng(509);
  Dataset data;
  data.trials = build_trial_table(d, rng);
  data.aggregation = AggregationLevel::kBySubject;
  data.y.resize(15);
  for (long r = 0; r < 15; ++r) {
    data.y(r) = 3.0 + data.trials.subj[r];  // subject shifts, no condition effect
  }
  const AnovaF f = rm_anova_f(data);
  CHECK(f.f == doctest::Approx(0.0));
  CHECK(f.df_num == doctest::Approx(2.0));
  CHECK(f.df_den == doctest::Approx(8.0));
}

TEST_CASE("two-level repeated-measures F equals the squared paired t") {
  DesignSpec d;
  d.factors = {{"X", {"a", "b"}, true, false}};
  d.n_subj = 14;
  d.n_rep = 1;
  RngStream rng(510);
  Dataset data;
  data.trials = build_trial_table(d, rng);
  data.aggregation = AggregationLevel::kBySubject;
  data.y.resize(28);
  std::vector<double> diffs(14);
  for (int s = 0; s < 14; ++s) {
    const double base = rng.normal(10.0, 2.0);
    data.y(2 * s) = base + rng.normal(0.5, 1.0);
    data.y(2 * s + 1) = base + rng.normal(0.0, 1.0);
    diffs[s] = data.y(2 * s) - data.y(2 * s + 1);
  }
  const AnovaF f = rm_anova_f(data);
  const double t = mean(diffs) / (sample_sd(diffs) / std::sqrt(14.0));
  CHECK(f.f == doctest::Approx(t * t).epsilon(1e-8));
}

TEST_CASE("null-simulation rejection rate sits at the nominal level") {
  // Spherical data: equal random-effect variances. 10^4 repetitions of the
  // one-factor F test at alpha = 0.05.
  RngStream rng(511);
  const int reps = 10000;
  int rejected = 0;
  DesignSpec d;
  d.factors = {{"X", {"a", "b", "c"}, true, false}};
  d.n_subj = 12;
  d.n_rep = 1;
  const TrialTable trials = build_trial_table(rng.bits() % 2 == 0 ? d : d, rng);
  for (int rep = 0; rep < reps; ++rep) {
    Dataset data;
    data.trials = trials;
    data.aggregation = AggregationLevel::kBySubject;
    data.y.resize(trials.n_rows());
    for (int s = 0; s < 12; ++s) {
      const double subj = rng.normal(0.0, 1.0);
      for (int c = 0; c < 3; ++c) data.y(3 * s + c) = subj + rng.normal();
    }
    const AnovaF f = rm_anova_f(data);
    if (f_test_p_value(f.f, f.df_num, f.df_den) < 0.05) ++rejected;
  }
  const double rate = static_cast<double>(rejected) / reps;
  CHECK(rate > 0.045);
  CHECK(rate < 0.055);
}

TEST_CASE("min-F combination rule") {
  SUBCASE("symmetry: equal Fs halve") {
    const MinFResult r = min_f(6.0, 20.0, 6.0, 30.0);
    CHECK(r.min_f == doctest::Approx(3.0));
  }
  SUBCASE("one statistic dominating recovers the other") {
    const MinFResult r = min_f(5.0, 19.0, 1e9, 19.0);
    CHECK(r.min_f == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(*r.df_den == doctest::Approx(19.0).epsilon(1e-4));
  }
  SUBCASE("worked example: F1 = F2 = 8, both denominator dfs 19") {
    const MinFResult r = min_f(8.0, 19.0, 8.0, 19.0);
    CHECK(r.min_f == doctest::Approx(4.0));
    // (F1+F2)^2 / (F1^2/df2 + F2^2/df1) = 256 / (64/19 + 64/19) = 38.
    CHECK(*r.df_den == doctest::Approx(38.0));
  }
  SUBCASE("degenerate zero statistics") {
    const MinFResult r = min_f(0.0, 10.0, 0.0, 12.0);
    CHECK(r.min_f == 0.0);
    CHECK_FALSE(r.df_den.has_value());
    CHECK_THROWS_AS(min_f(-1.0, 10.0, 2.0, 10.0), std::invalid_argument);
  }
}
