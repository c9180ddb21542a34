#include <doctest.h>

#include <cmath>

#include "calibra/bridge.hpp"
#include "calibra/collapsed.hpp"
#include "calibra/design.hpp"
#include "calibra/quadrature.hpp"
#include "calibra/simulate.hpp"
#include "calibra/stats.hpp"

using namespace calibra;

namespace {

/// Fills a PosteriorDraws container with exact samples u ~ N(mean, sd I).
PosteriorDraws exact_normal_draws(int d, int n_chains, int per_chain,
                                  double mean, double sd,
                                  const std::function<double(const VectorXd&)>& lp,
                                  RngStream& rng) {
  PosteriorDraws out;
  out.n_chains = n_chains;
  out.draws.resize(n_chains * per_chain, d);
  out.lp.resize(n_chains * per_chain);
  out.chain.resize(n_chains * per_chain);
  for (int c = 0; c < n_chains; ++c) {
    for (int i = 0; i < per_chain; ++i) {
      const int row = c * per_chain + i;
      for (int j = 0; j < d; ++j) out.draws(row, j) = rng.normal(mean, sd);
      out.lp(row) = lp(out.draws.row(row).transpose());
      out.chain[row] = c;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("bridge recovers a known normalizing constant") {
  const int d = 3;
  const double log_c = 2.7;  // target = exp(log_c) * N(0, I)
  auto lp = [&](const VectorXd& u) {
    double v = log_c;
    for (int i = 0; i < d; ++i) v += normal_log_pdf(u(i));
    return v;
  };
  RngStream rng(800);
  const PosteriorDraws draws = exact_normal_draws(d, 4, 2000, 0.0, 1.0, lp, rng);
  RngStream brng(801);
  const BridgeResult res = bridge_logml(draws, lp, {}, brng);
  CHECK(res.warnings.empty());
  CHECK(std::abs(res.log_ml - log_c) < 0.02);
}

TEST_CASE("bridge matches adaptive quadrature on a 1-D conjugate model") {
  // y_i ~ N(theta, 1), theta ~ N(0, 1). Posterior is normal; draws exact.
  RngStream rng(802);
  const int n = 20;
  VectorXd y(n);
  for (int i = 0; i < n; ++i) y(i) = rng.normal(0.4, 1.0);
  auto lp = [&](const VectorXd& u) {
    double v = normal_log_pdf(u(0), 0.0, 1.0);
    for (int i = 0; i < n; ++i) v += normal_log_pdf(y(i), u(0), 1.0);
    return v;
  };
  const double post_var = 1.0 / (1.0 + n);
  const double post_mean = post_var * y.sum();
  const PosteriorDraws draws = exact_normal_draws(
      1, 4, 2000, post_mean, std::sqrt(post_var), lp, rng);
  RngStream brng(803);
  const BridgeResult res = bridge_logml(draws, lp, {}, brng);
  const double oracle = log_integrate([&](double t) {
    VectorXd u(1);
    u << t;
    return lp(u);
  });
  CHECK(std::abs(res.log_ml - oracle) < 0.01);
}

TEST_CASE("bridge estimates are invariant to affine reparameterization") {
  const int d = 2;
  auto lp = [&](const VectorXd& u) {
    return 1.3 + normal_log_pdf(u(0), 0.5, 1.4) + normal_log_pdf(u(1), -1.0, 0.6);
  };
  RngStream rng(804);
  PosteriorDraws draws;
  draws.n_chains = 4;
  draws.draws.resize(4 * 1500, d);
  draws.lp.resize(4 * 1500);
  draws.chain.resize(4 * 1500);
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 1500; ++i) {
      const int row = c * 1500 + i;
      draws.draws(row, 0) = rng.normal(0.5, 1.4);
      draws.draws(row, 1) = rng.normal(-1.0, 0.6);
      draws.lp(row) = lp(draws.draws.row(row).transpose());
      draws.chain[row] = c;
    }
  }
  RngStream brng1(805);
  const double base = bridge_logml(draws, lp, {}, brng1).log_ml;

  // x = A u + b with A = [[2, 0.3], [0, 0.5]].
  MatrixXd a(2, 2);
  a << 2.0, 0.3, 0.0, 0.5;
  VectorXd b(2);
  b << 3.0, -2.0;
  const MatrixXd a_inv = a.inverse();
  const double log_det_a = std::log(std::abs(a.determinant()));
  auto lp_t = [&](const VectorXd& x) {
    return lp(a_inv * (x - b)) - log_det_a;
  };
  PosteriorDraws tdraws = draws;
  for (int row = 0; row < tdraws.draws.rows(); ++row) {
    const VectorXd x = a * draws.draws.row(row).transpose() + b;
    tdraws.draws.row(row) = x.transpose();
    tdraws.lp(row) = lp_t(x);
  }
  RngStream brng2(806);
  const double transformed = bridge_logml(tdraws, lp_t, {}, brng2).log_ml;
  CHECK(std::abs(base - transformed) < 0.05);
}

TEST_CASE("bayes factor arithmetic") {
  CHECK(bayes_factor(13.0, 13.0).bf10 == doctest::Approx(1.0));
  CHECK(bayes_factor(13.0 + std::log(10.0), 13.0).bf10 ==
        doctest::Approx(10.0));
  CHECK_THROWS_AS(bayes_factor(kNegInf, 0.0), std::invalid_argument);
}

TEST_CASE("posterior model probability identities and monotonicity") {
  CHECK(posterior_model_prob(1.0, 0.5) == doctest::Approx(0.5));
  CHECK(posterior_model_prob(3.0, 0.5) == doctest::Approx(0.75));
  CHECK(posterior_model_prob(4.0, 0.2) == doctest::Approx(0.5));
  double prev = 0.0;
  for (double bf : {0.1, 0.5, 1.0, 2.0, 10.0, 100.0}) {
    const double p = posterior_model_prob(bf, 0.3);
    CHECK(p > prev);
    prev = p;
  }
  prev = 0.0;
  for (double prior : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const double p = posterior_model_prob(2.0, prior);
    CHECK(p > prev);
    prev = p;
  }
  CHECK_THROWS_AS(posterior_model_prob(1.0, 0.0), std::invalid_argument);
  // Extreme Bayes factors stay in [0, 1] without overflow.
  CHECK(posterior_model_prob_log(800.0, 0.5) == doctest::Approx(1.0));
  CHECK(posterior_model_prob_log(-800.0, 0.5) == doctest::Approx(0.0));
}

TEST_CASE("bridge antisymmetry and replication stability on a real fit") {
  // Small unequal-slope dataset; H1 and H0 fits, two replications each.
  DesignSpec d;
  d.factors = {{"X", {"X1", "X2", "X3"}, true, false}};
  d.n_subj = 20;
  d.n_rep = 10;
  RngStream rng(807);
  const TrialTable trials = build_trial_table(d, rng);
  const DesignMatrixBundle bundle = expand_design(
      trials, {{ContrastKind::kTreatmentGrandMean, std::nullopt}});
  LmmParams p;
  p.beta = VectorXd(3);
  p.beta << 200.0, 20.0, 20.0;
  p.sd_subj = VectorXd(3);
  p.sd_subj << 20.0, 90.0, 10.0;
  p.rho_subj = MatrixXd::Identity(3, 3);
  p.sigma = 50.0;
  const Dataset data = simulate(trials, bundle, p, {}, rng);

  PriorSpec priors;
  priors.beta_intercept = {200.0, 20.0};
  priors.beta_contrast_sd = 20.0;
  priors.sd_random_scale = 50.0;
  priors.sd_residual_scale = 20.0;
  ModelSpec h1;
  h1.fixed_columns = {0, 1, 2};
  h1.random_blocks = {{"subj", {0, 1, 2}}};
  h1.priors = priors;
  ModelSpec h0 = h1;
  h0.fixed_columns = {0, 1};

  auto fit_logml = [&](const ModelSpec& spec, std::uint64_t seed) {
    const CollapsedModel m(data, bundle, spec);
    const McmcConfig cfg;  // production defaults
    RngStream mrng(seed);
    const PosteriorDraws draws = m.run_mcmc(cfg, mrng);
    RngStream brng(seed + 1);
    return bridge_logml(
               draws,
               [&](const VectorXd& u) {
                 return m.log_posterior_unconstrained(u);
               },
               {}, brng)
        .log_ml;
  };
  const double l1a = fit_logml(h1, 900), l1b = fit_logml(h1, 902);
  const double l0a = fit_logml(h0, 904), l0b = fit_logml(h0, 906);

  // Two independent pipelines give nearly the same log BF.
  CHECK(std::abs((l1a - l0a) - (l1b - l0b)) < 0.05);
  // Antisymmetry: BF(M1,M0) from one replication against BF(M0,M1) from the
  // other, within twice the replication spread.
  const double sd_rep = std::sqrt((l1a - l1b) * (l1a - l1b) +
                                  (l0a - l0b) * (l0a - l0b));
  CHECK(std::abs((l1a - l0a) + (l0b - l1b)) <= 2.0 * sd_rep + 0.02);
}
