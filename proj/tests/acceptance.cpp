// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Runs the desk-scale presets end to end, so expect tens of
// minutes on a single core.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "calibra/bridge.hpp"
#include "calibra/collapsed.hpp"
#include "calibra/csvio.hpp"
#include "calibra/design.hpp"
#include "calibra/jzs.hpp"
#include "calibra/quadrature.hpp"
#include "calibra/report.hpp"
#include "calibra/sbc.hpp"
#include "calibra/stats.hpp"

using namespace calibra;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("%s criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double v) { return format_double(v); }

const SummaryRow& row_for(const std::vector<SummaryRow>& rows,
                          const std::string& analysis,
                          const std::string& effect) {
  for (const auto& r : rows) {
    if (r.analysis_id == analysis && r.effect_id == effect) return r;
  }
  throw std::runtime_error("missing summary row " + analysis + "/" + effect);
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// --- 1: calibration identity on the exact-BF conjugate toy ---------------

void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioSpec toy = preset_scenario("toy");
  toy.sbc.n_sims = 500;
  const auto records = run_sbc(toy);
  std::vector<double> post;
  for (const auto& r : records) post.push_back(r.post_p1);
  const double m = mean(post);
  const double dt = elapsed_s(t0);
  const bool pass = std::abs(m - 0.5) < 0.03 && dt < 60.0;
  report(1, pass,
         "exact-BF toy, 500 runs: |mean post - 0.5| = " +
             fmt(std::abs(m - 0.5)) + " (< 0.03), runtime " + fmt(dt) + "s");
}

// --- 2: contrast-level calibration under violated sphericity --------------

void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioSpec spec = preset_scenario("sim1_1_desk");
  const auto records = run_sbc(spec);
  const auto rows = summarize(records, spec.sbc.prior_p1);
  const SummaryRow& agg_large = row_for(rows, "aggregated", "c2vs1");
  const SummaryRow& agg_small = row_for(rows, "aggregated", "c3vs1");
  const SummaryRow& raw_large = row_for(rows, "non-aggregated", "c2vs1");
  const SummaryRow& raw_small = row_for(rows, "non-aggregated", "c3vs1");

  const bool agg_ok = agg_large.mean_post_p1 > 0.55 && agg_large.ci_lo > 0.5 &&
                      agg_small.mean_post_p1 < 0.45 && agg_small.ci_hi < 0.5;
  const bool raw_ok = raw_large.ci_lo <= 0.5 && raw_large.ci_hi >= 0.5 &&
                      raw_small.ci_lo <= 0.5 && raw_small.ci_hi >= 0.5;
  report(2, agg_ok && raw_ok,
         "unequal slope SDs (100 runs): aggregated means " +
             fmt(agg_large.mean_post_p1) + "/" + fmt(agg_small.mean_post_p1) +
             " biased away from 0.5; non-aggregated CIs [" +
             fmt(raw_large.ci_lo) + "," + fmt(raw_large.ci_hi) + "] / [" +
             fmt(raw_small.ci_lo) + "," + fmt(raw_small.ci_hi) +
             "] cover 0.5; runtime " + fmt(elapsed_s(t0)) + "s");
}

// --- 3: omnibus factor test stays calibrated under aggregation ------------

void criterion_3() {
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioSpec spec = preset_scenario("sim1_5_desk");
  const auto records = run_sbc(spec);
  const auto rows = summarize(records, spec.sbc.prior_p1);
  const SummaryRow& agg = row_for(rows, "aggregated", "cs");
  const bool pass = agg.ci_lo <= 0.5 && agg.ci_hi >= 0.5;
  report(3, pass,
         "aggregated omnibus CI [" + fmt(agg.ci_lo) + "," + fmt(agg.ci_hi) +
             "] contains 0.5; runtime " + fmt(elapsed_s(t0)) + "s");
}

// --- 4: g-prior omnibus test under violated sphericity --------------------

void criterion_4() {
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioSpec spec = preset_scenario("sim1_7_desk");
  const auto records = run_sbc(spec);
  const auto rows = summarize(records, spec.sbc.prior_p1);
  const SummaryRow& agg = row_for(rows, "aggregated", "X");
  const SummaryRow& raw = row_for(rows, "non-aggregated", "X");

  const ScenarioSpec sph = preset_scenario("sim1_7_spherical_desk");
  const auto sph_records = run_sbc(sph);
  const auto sph_rows = summarize(sph_records, sph.sbc.prior_p1);
  const SummaryRow& sph_raw = row_for(sph_rows, "non-aggregated", "X");

  const bool pass = agg.mean_post_p1 < 0.45 &&
                    std::abs(raw.mean_post_p1 - 0.5) <
                        std::abs(agg.mean_post_p1 - 0.5) &&
                    sph_raw.ci_lo <= 0.5 && sph_raw.ci_hi >= 0.5;
  report(4, pass,
         "shared-g omnibus (200 runs): aggregated mean " +
             fmt(agg.mean_post_p1) + " < 0.45, non-aggregated mean " +
             fmt(raw.mean_post_p1) + " closer to 0.5, spherical variant CI [" +
             fmt(sph_raw.ci_lo) + "," + fmt(sph_raw.ci_hi) +
             "] covers 0.5; runtime " + fmt(elapsed_s(t0)) + "s");
}

// --- 5: g-prior 2x2 with unequal slope scales ------------------------------

void criterion_5() {
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioSpec spec = preset_scenario("sim1_8_desk");
  const auto records = run_sbc(spec);
  const auto rows = summarize(records, spec.sbc.prior_p1);
  const SummaryRow& agg_a = row_for(rows, "aggregated", "A");
  const SummaryRow& agg_b = row_for(rows, "aggregated", "B");
  const SummaryRow& agg_ab = row_for(rows, "aggregated", "A:B");
  const SummaryRow& raw_a = row_for(rows, "non-aggregated", "A");
  const SummaryRow& raw_b = row_for(rows, "non-aggregated", "B");
  const SummaryRow& raw_ab = row_for(rows, "non-aggregated", "A:B");

  const bool agg_ok = agg_a.mean_post_p1 < 0.45 && agg_b.mean_post_p1 < 0.45 &&
                      agg_ab.mean_post_p1 > 0.55;
  const bool raw_ok = raw_a.ci_lo <= 0.5 && raw_a.ci_hi >= 0.5 &&
                      raw_b.ci_lo <= 0.5 && raw_b.ci_hi >= 0.5 &&
                      raw_ab.mean_post_p1 < 0.5;
  report(5, agg_ok && raw_ok,
         "2x2 g-prior (300 runs): aggregated means A/B/AB = " +
             fmt(agg_a.mean_post_p1) + "/" + fmt(agg_b.mean_post_p1) + "/" +
             fmt(agg_ab.mean_post_p1) + "; non-aggregated A/B CIs cover 0.5, " +
             "interaction mean " + fmt(raw_ab.mean_post_p1) +
             " < 0.5; runtime " + fmt(elapsed_s(t0)) + "s");
}

// --- 6: item-variance sweep ------------------------------------------------

void criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioSpec spec = preset_scenario("sim2_1_desk");
  auto records = run_sbc(spec);
  restore_sweep_values(spec, records);

  auto regression_bf = [&](const std::string& analysis) {
    std::vector<double> sds, posts;
    for (const auto& r : records) {
      if (r.analysis_id != analysis || std::isnan(r.post_p1)) continue;
      sds.push_back(r.sweep_value);
      posts.push_back(r.post_p1);
    }
    return jzs_linreg_bf(sds, posts, kRegressionDefaultScale).bf10;
  };
  const double bf_agg = regression_bf("aggregated");
  const double bf_raw = regression_bf("non-aggregated");
  const auto fits = sweep_fits(spec, records);
  double slope_agg = 0.0;
  for (const auto& f : fits) {
    if (f.analysis_id == "aggregated") slope_agg = f.slope;
  }
  const bool pass = slope_agg > 0.0 && bf_agg > 3.0 && bf_raw < 3.0;
  report(6, pass,
         "item-SD sweep (60 runs): aggregated logistic slope " +
             fmt(slope_agg) + " > 0 with regression BF10 " + fmt(bf_agg) +
             " > 3; non-aggregated BF10 " + fmt(bf_raw) + " < 3; runtime " +
             fmt(elapsed_s(t0)) + "s");
}

// --- 7: frequentist alpha rates under violated sphericity -----------------

void criterion_7() {
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioSpec spec = preset_scenario("appendix_a");
  const ErrorRateCurve curve = alpha_power_sim(spec, false, 1000);
  auto rate = [&](const std::string& analysis, const std::string& effect) {
    for (const auto& p : curve) {
      if (p.analysis_id == analysis && p.effect_id == effect) {
        return static_cast<double>(p.n_reject) / p.n_sims;
      }
    }
    throw std::runtime_error("missing curve point");
  };
  const double agg_small = rate("aggregated", "c3vs1");
  const double agg_large = rate("aggregated", "c2vs1");
  const double raw_small = rate("non-aggregated", "c3vs1");
  const double raw_large = rate("non-aggregated", "c2vs1");
  const double dt = elapsed_s(t0);
  const bool pass = agg_small < 0.02 && agg_large > 0.10 &&
                    raw_small >= 0.02 && raw_small <= 0.08 &&
                    raw_large >= 0.02 && raw_large <= 0.08 && dt < 600.0;
  report(7, pass,
         "1000 null sims: aggregated alpha " + fmt(agg_small) + " (<0.02) / " +
             fmt(agg_large) + " (>0.10); non-aggregated " + fmt(raw_small) +
             ", " + fmt(raw_large) + " in [0.02, 0.08]; runtime " + fmt(dt) +
             "s (< 600s)");
}

// --- 8: frequentist alpha inflation from ignored item variance -------------

void criterion_8() {
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioSpec spec = preset_scenario("appendix_e_desk");
  const ErrorRateCurve curve = alpha_power_sim(spec, false, 500);
  auto point = [&](const std::string& analysis, double sd) -> const ErrorRatePoint& {
    for (const auto& p : curve) {
      if (p.analysis_id == analysis && std::abs(p.sd_true - sd) < 1e-9) {
        return p;
      }
    }
    throw std::runtime_error("missing curve point");
  };
  const double agg_r0 =
      static_cast<double>(point("aggregated", 0.0).n_reject) / 500.0;
  const double agg_r5 =
      static_cast<double>(point("aggregated", 0.5).n_reject) / 500.0;
  // Non-aggregated arm: flat (no trend in the rejection rate over the swept
  // SD) and consistent with the nominal level (pooled rate inside the 95%
  // binomial band around 0.05).
  int raw_k = 0, raw_n = 0;
  std::vector<double> xs;
  std::vector<int> ys;
  std::string raw_detail;
  for (double sd : {0.0, 0.25, 0.5}) {
    const ErrorRatePoint& p = point("non-aggregated", sd);
    raw_k += p.n_reject;
    raw_n += p.n_sims;
    for (int i = 0; i < p.n_sims; ++i) {
      xs.push_back(sd);
      ys.push_back(i < p.n_reject ? 1 : 0);
    }
    raw_detail += (raw_detail.empty() ? "" : "/") +
                  fmt(static_cast<double>(p.n_reject) / p.n_sims);
  }
  const double pooled = static_cast<double>(raw_k) / raw_n;
  const double band =
      1.959963984540054 * std::sqrt(0.05 * 0.95 / raw_n);
  const LogisticFit raw_fit = logistic_fit(xs, ys);
  const bool raw_ok =
      std::abs(pooled - 0.05) < band && std::abs(raw_fit.z_slope) < 3.0;
  const bool pass = agg_r5 >= 3.0 * agg_r0 && agg_r5 > 0.0 && raw_ok;
  report(8, pass,
         "item-variance alpha (500 sims): aggregated " + fmt(agg_r0) + " -> " +
             fmt(agg_r5) + " (>= 3x); non-aggregated rates " + raw_detail +
             ", pooled " + fmt(pooled) + " within 0.05 +- " + fmt(band) +
             ", trend z = " + fmt(raw_fit.z_slope) + " (|z| < 3); runtime " +
             fmt(elapsed_s(t0)) + "s");
}

// --- 9: oracle equivalences -------------------------------------------------

void criterion_9() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;

  {  // collapsed_loglik vs brute-force Monte Carlo integration
    DesignSpec d;
    d.factors = {{"X", {"a", "b"}, true, false}};
    d.n_subj = 2;
    d.n_rep = 1;
    RngStream rng(42);
    TrialTable trials = build_trial_table(d, rng);
    const DesignMatrixBundle bundle =
        expand_design(trials, {{ContrastKind::kSum, std::nullopt}});
    Dataset data;
    data.trials = trials;
    data.y = VectorXd(4);
    data.y << 0.6, -1.1, 1.9, 0.3;
    ModelSpec spec;
    spec.fixed_columns = {0};
    spec.random_blocks = {{"subj", {0}}};
    spec.priors.beta_intercept = {0.0, 1.0};
    const CollapsedModel m(data, bundle, spec);
    Phi phi;
    phi.sds = VectorXd(1);
    phi.sds << 1.1;
    phi.log_sigma = std::log(0.8);
    const double impl = m.collapsed_loglik(phi);
    const long n_draws = 1000000;
    std::vector<double> logw(n_draws);
    RngStream orng(43);
    for (long k = 0; k < n_draws; ++k) {
      const double beta = orng.normal(0.0, 1.0);
      const double b1 = orng.normal(0.0, 1.1);
      const double b2 = orng.normal(0.0, 1.1);
      double lw = 0.0;
      for (int i = 0; i < 4; ++i) {
        lw += normal_log_pdf(data.y(i), beta + (trials.subj[i] == 0 ? b1 : b2),
                             0.8);
      }
      logw[k] = lw;
    }
    const double oracle = log_mean_exp(logw);
    double var = 0.0;
    for (double lw : logw) {
      const double w = std::exp(lw - oracle);
      var += (w - 1.0) * (w - 1.0);
    }
    var /= (n_draws - 1.0);
    const double se = std::sqrt(var / n_draws);
    const bool ok = std::abs(impl - oracle) < 3.0 * se;
    pass = pass && ok;
    detail += "collapsed vs MC |d|=" + fmt(std::abs(impl - oracle)) +
              " (3se=" + fmt(3.0 * se) + ")";
  }

  {  // bridge vs quadrature on d = 1
    RngStream rng(44);
    const int n = 25;
    VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = rng.normal(0.3, 1.0);
    auto lp = [&](const VectorXd& u) {
      double v = normal_log_pdf(u(0), 0.0, 1.0);
      for (int i = 0; i < n; ++i) v += normal_log_pdf(y(i), u(0), 1.0);
      return v;
    };
    const double post_var = 1.0 / (1.0 + n);
    const double post_mean = post_var * y.sum();
    PosteriorDraws draws;
    draws.n_chains = 4;
    draws.draws.resize(8000, 1);
    draws.lp.resize(8000);
    draws.chain.resize(8000);
    for (int i = 0; i < 8000; ++i) {
      draws.draws(i, 0) = rng.normal(post_mean, std::sqrt(post_var));
      draws.lp(i) = lp(draws.draws.row(i).transpose());
      draws.chain[i] = i / 2000;
    }
    RngStream brng(45);
    const double est = bridge_logml(draws, lp, {}, brng).log_ml;
    const double oracle = log_integrate([&](double t) {
      VectorXd u(1);
      u << t;
      return lp(u);
    });
    const bool ok = std::abs(est - oracle) < 0.01;
    pass = pass && ok;
    detail += "; bridge vs quadrature |d|=" + fmt(std::abs(est - oracle));
  }

  {  // jzs t-test vs Monte Carlo oracle
    const int n = 30;
    const double t_target = 2.5;
    std::vector<double> x(n);
    const double mu = t_target / std::sqrt(static_cast<double>(n));
    for (int i = 0; i < n; ++i) x[i] = mu + ((i % 2 == 0) ? 1.0 : -1.0);
    const double m0 = mean(x), s0 = sample_sd(x);
    for (int i = 0; i < n; ++i) x[i] = mu + (x[i] - m0) / s0;
    const ModelComparison quad = jzs_ttest_bf(x, kTtestDefaultScale);
    RngStream rng(46);
    const long draws = 1000000;
    const double nu = n - 1.0, t2 = t_target * t_target;
    std::vector<double> logw(draws);
    for (long k = 0; k < draws; ++k) {
      const double g = ScaledInvChiSq{1.0, kTtestDefaultScale}.sample(rng);
      const double c = 1.0 + n * g;
      logw[k] = -0.5 * std::log(c) -
                0.5 * (nu + 1.0) * std::log1p(t2 / (c * nu)) +
                0.5 * (nu + 1.0) * std::log1p(t2 / nu);
    }
    const double oracle = log_mean_exp(logw);
    double var = 0.0;
    for (double lw : logw) {
      const double w = std::exp(lw - oracle);
      var += (w - 1.0) * (w - 1.0);
    }
    var /= (draws - 1.0);
    const double se = std::sqrt(var / draws);
    const bool ok = std::abs(quad.log_bf10 - oracle) < 3.0 * se;
    pass = pass && ok;
    detail += "; ttest vs MC |d|=" + fmt(std::abs(quad.log_bf10 - oracle));
  }

  {  // qmatrix eigen identity
    double worst = 0.0;
    for (int alpha = 2; alpha <= 6; ++alpha) {
      const QMatrix qm = qmatrix(alpha);
      const MatrixXd centering =
          MatrixXd::Identity(alpha, alpha) -
          MatrixXd::Constant(alpha, alpha, 1.0 / alpha);
      worst = std::max(worst,
                       (centering * qm.q - qm.q).cwiseAbs().maxCoeff());
    }
    const bool ok = worst < 1e-12;
    pass = pass && ok;
    detail += "; qmatrix identity max err " + fmt(worst);
  }
  report(9, pass, detail + "; runtime " + fmt(elapsed_s(t0)) + "s");
}

// --- 10: byte-identical records across reruns and job counts --------------

void criterion_10() {
  const auto t0 = std::chrono::steady_clock::now();
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "calibra_acceptance_c10";
  fs::create_directories(dir);
  auto records_bytes = [&](const ScenarioSpec& spec, int jobs,
                           const std::string& tag) {
    SbcOverrides ov;
    ov.jobs = jobs;
    const auto records = run_sbc(spec, ov);
    const std::string path = (dir / (tag + ".csv")).string();
    write_records_csv(path, records);
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  ScenarioSpec toy = preset_scenario("toy");
  const std::string a = records_bytes(toy, 1, "toy_a");
  const std::string b = records_bytes(toy, 1, "toy_b");
  const std::string c = records_bytes(toy, 8, "toy_c");

  ScenarioSpec mini = preset_scenario("sim1_1_desk");
  mini.design.n_subj = 6;
  mini.design.n_rep = 2;
  mini.sbc.n_sims = 4;
  mini.mcmc.n_warmup = 300;
  mini.mcmc.n_draws = 400;
  mini.mcmc.thin = 1;
  const std::string d = records_bytes(mini, 1, "mini_a");
  const std::string e = records_bytes(mini, 8, "mini_b");
  fs::remove_all(dir);

  const bool pass = a == b && a == c && d == e && !a.empty() && !d.empty();
  report(10, pass,
         std::string("records.csv byte-identical across reruns and ") +
             "--jobs 1 vs 8 (toy and collapsed pipelines); runtime " +
             fmt(elapsed_s(t0)) + "s");
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion_1();
  criterion_9();
  criterion_10();
  criterion_7();
  criterion_8();
  criterion_4();
  criterion_5();
  criterion_3();
  criterion_2();
  criterion_6();
  std::printf("%s: %d criterion(s) failed, total runtime %.0fs\n",
              g_failures == 0 ? "ALL PASS" : "FAILURES", g_failures,
              elapsed_s(t0));
  return g_failures == 0 ? 0 : 1;
}
