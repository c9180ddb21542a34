#include <doctest.h>

#include <cmath>
#include <vector>

#include "calibra/rng.hpp"
#include "calibra/stats.hpp"

using namespace calibra;

TEST_CASE("log_sum_exp handles extreme magnitudes") {
  std::vector<double> v{-1000.0, -1000.0};
  CHECK(log_sum_exp(v) == doctest::Approx(-1000.0 + std::log(2.0)));
  CHECK(log_sum_exp(kNegInf, -3.0) == doctest::Approx(-3.0));
  std::vector<double> big{700.0, 701.0};
  CHECK(log_sum_exp(big) ==
        doctest::Approx(701.0 + std::log1p(std::exp(-1.0))));
}

TEST_CASE("wilson interval brackets the point estimate") {
  const BinomialCi ci = wilson_ci(50, 1000);
  CHECK(ci.p_hat == doctest::Approx(0.05));
  CHECK(ci.lo < 0.05);
  CHECK(ci.hi > 0.05);
  CHECK(ci.lo > 0.03);
  CHECK(ci.hi < 0.07);
  const BinomialCi zero = wilson_ci(0, 100);
  CHECK(zero.lo == 0.0);
  CHECK(zero.hi > 0.0);
}

TEST_CASE("ks test accepts the right cdf and rejects a wrong one") {
  RngStream rng(7);
  std::vector<double> x(2000);
  for (auto& v : x) v = rng.normal();
  const KsResult good = ks_test(x, [](double t) { return normal_cdf(t); });
  CHECK(good.p_value > 0.01);
  const KsResult bad =
      ks_test(x, [](double t) { return normal_cdf(t, 0.5, 1.0); });
  CHECK(bad.p_value < 1e-6);
}

TEST_CASE("logistic regression recovers a known slope") {
  RngStream rng(11);
  std::vector<double> x(4000);
  std::vector<int> y(4000);
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.uniform(-2.0, 2.0);
    const double p = 1.0 / (1.0 + std::exp(-(0.5 + 1.5 * x[i])));
    y[i] = rng.bernoulli(p) ? 1 : 0;
  }
  const LogisticFit fit = logistic_fit(x, y);
  CHECK(fit.converged);
  CHECK(fit.slope == doctest::Approx(1.5).epsilon(0.15));
  CHECK(fit.z_slope > 5.0);
}

TEST_CASE("split rhat separates mixed from unmixed chains") {
  RngStream rng(3);
  std::vector<std::vector<double>> good(4), bad(4);
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 500; ++i) {
      good[c].push_back(rng.normal());
      bad[c].push_back(rng.normal() + 2.0 * c);
    }
  }
  CHECK(split_rhat(good) < 1.02);
  CHECK(split_rhat(bad) > 1.5);
  CHECK(effective_sample_size(good) > 1000.0);
}

TEST_CASE("ols rejects rank-deficient designs") {
  MatrixXd x(4, 2);
  x << 1, 2, 1, 2, 1, 2, 1, 2;
  VectorXd y(4);
  y << 1, 2, 3, 4;
  CHECK_THROWS_AS(ols(x, y), std::invalid_argument);
}

TEST_CASE("svd pseudoinverse inverts square full-rank matrices") {
  MatrixXd m(3, 3);
  m << 2, 0, 1, 0, 3, 0, 1, 0, 2;
  const MatrixXd pinv = svd_pinv(m);
  CHECK((m * pinv - MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("student t and chi-square wrappers match known values") {
  CHECK(t_test_p_value(0.0, 10.0) == doctest::Approx(1.0));
  CHECK(t_test_p_value(2.228, 10.0) == doctest::Approx(0.05).epsilon(0.01));
  CHECK(chisq_quantile(0.5, 1.0) == doctest::Approx(0.4549364).epsilon(1e-5));
  CHECK(f_test_p_value(0.0, 2, 10) == doctest::Approx(1.0));
}
