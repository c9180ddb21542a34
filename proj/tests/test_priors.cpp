#include <doctest.h>

#include <cmath>
#include <vector>

#include "calibra/priors.hpp"
#include "calibra/simulate.hpp"
#include "calibra/stats.hpp"

using namespace calibra;

TEST_CASE("half-normal density at zero has the closed form 2*phi(0)") {
  CHECK(HalfNormal{1.0}.log_pdf(0.0) ==
        doctest::Approx(std::log(2.0 / std::sqrt(2.0 * M_PI))));
  CHECK(HalfNormal{1.0}.log_pdf(-0.1) == kNegInf);
  CHECK_THROWS_AS(HalfNormal{0.0}.log_pdf(1.0), std::invalid_argument);
}

TEST_CASE("normal sampler hits its mean within the Monte Carlo bound") {
  RngStream rng(42);
  const Normal d{200.0, 20.0};
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += d.sample(rng);
  CHECK(std::abs(sum / n - 200.0) < 0.5);
}

TEST_CASE("densities integrate to one on a grid") {
  auto trapezoid = [](auto log_pdf, double lo, double hi, int n) {
    double acc = 0.0;
    const double h = (hi - lo) / n;
    for (int i = 0; i <= n; ++i) {
      const double w = (i == 0 || i == n) ? 0.5 : 1.0;
      acc += w * std::exp(log_pdf(lo + i * h));
    }
    return acc * h;
  };
  CHECK(trapezoid([](double x) { return Normal{1.0, 2.0}.log_pdf(x); }, -20.0,
                  22.0, 20000) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(trapezoid([](double x) { return HalfNormal{1.5}.log_pdf(x); }, 0.0,
                  20.0, 20000) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(trapezoid([](double x) { return Cauchy{0.0, 1.0}.log_pdf(x); }, -3000.0,
                  3000.0, 2000000) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("2x2 LKJ(2) off-diagonal matches its closed-form distribution") {
  // Density proportional to (1 - r^2); CDF = 1/2 + 3r/4 - r^3/4.
  RngStream rng(5);
  std::vector<double> r;
  for (int i = 0; i < 20000; ++i) r.push_back(sample_lkj(2, 2.0, rng)(0, 1));
  const KsResult ks = ks_test(
      r, [](double t) { return 0.5 + 0.75 * t - 0.25 * t * t * t; });
  CHECK(ks.p_value > 0.01);
}

TEST_CASE("2x2 LKJ(1) off-diagonal is uniform") {
  RngStream rng(6);
  std::vector<double> r;
  for (int i = 0; i < 20000; ++i) r.push_back(sample_lkj(2, 1.0, rng)(0, 1));
  const KsResult ks = ks_test(r, [](double t) { return (t + 1.0) / 2.0; });
  CHECK(ks.p_value > 0.01);
}

TEST_CASE("LKJ draws are valid correlation matrices") {
  RngStream rng(7);
  CHECK(sample_lkj(1, 2.0, rng).rows() == 1);
  CHECK(sample_lkj(1, 2.0, rng)(0, 0) == 1.0);
  for (int i = 0; i < 10000; ++i) {
    const MatrixXd r = sample_lkj(3, 2.0, rng);
    CHECK((r - r.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(r(0, 0) - 1.0) < 1e-12);
    Eigen::LLT<MatrixXd> llt(r);
    REQUIRE(llt.info() == Eigen::Success);
  }
}

TEST_CASE("scaled inverse chi-square mixes normals into a Cauchy") {
  RngStream rng(8);
  const ScaledInvChiSq mix{1.0, 1.0};
  std::vector<double> draws;
  for (int i = 0; i < 100000; ++i) {
    const double var = mix.sample(rng);
    draws.push_back(rng.normal(0.0, std::sqrt(var)));
  }
  const KsResult ks =
      ks_test(draws, [](double t) { return cauchy_cdf(t, 0.0, 1.0); });
  CHECK(ks.p_value > 0.01);
}

TEST_CASE("scaled inverse chi-square median matches quantile inversion") {
  RngStream rng(9);
  std::vector<double> draws;
  for (int i = 0; i < 100000; ++i) {
    draws.push_back(ScaledInvChiSq{1.0, 1.0}.sample(rng));
  }
  std::sort(draws.begin(), draws.end());
  const double median = draws[draws.size() / 2];
  const double oracle = 1.0 / chisq_quantile(0.5, 1.0);  // ~2.198
  CHECK(median == doctest::Approx(oracle).epsilon(0.03));
  CHECK(ScaledInvChiSq{1.0, 1.0}.log_pdf(0.0) == kNegInf);
  CHECK(std::isinf(ScaledInvChiSq{1.0, 1.0}.log_pdf(0.0)));
}

TEST_CASE("samplers are deterministic under a fixed seed") {
  RngStream a(123), b(123);
  for (int i = 0; i < 100; ++i) {
    CHECK(Normal{0, 1}.sample(a) == Normal{0, 1}.sample(b));
  }
}

TEST_CASE("cpc jacobian log-determinant matches finite differences") {
  for (int dim : {3, 4}) {
    const int nz = dim * (dim - 1) / 2;
    VectorXd z(nz);
    RngStream rng(17 + dim);
    for (int i = 0; i < nz; ++i) z(i) = rng.uniform(-0.6, 0.6);

    auto offdiag = [&](const VectorXd& zz) {
      const MatrixXd r = cpc_to_corr(zz, dim);
      VectorXd v(nz);
      int idx = 0;
      for (int i = 1; i < dim; ++i) {
        for (int j = 0; j < i; ++j) v(idx++) = r(i, j);
      }
      return v;
    };
    const double h = 1e-6;
    MatrixXd jac(nz, nz);
    for (int j = 0; j < nz; ++j) {
      VectorXd zp = z, zm = z;
      zp(j) += h;
      zm(j) -= h;
      jac.col(j) = (offdiag(zp) - offdiag(zm)) / (2.0 * h);
    }
    const double fd_logdet = std::log(std::abs(jac.determinant()));
    CHECK(fd_logdet == doctest::Approx(cpc_jacobian_log_det(z, dim)).epsilon(1e-5));
  }
}

TEST_CASE("unconstrained LKJ density is consistent with the matrix density") {
  const int dim = 3;
  RngStream rng(21);
  VectorXd y(3);
  for (int i = 0; i < 3; ++i) y(i) = rng.uniform(-1.0, 1.0);
  const VectorXd z = y.array().tanh();
  const MatrixXd r = cpc_to_corr(z, dim);
  double tanh_jac = 0.0;
  for (int i = 0; i < 3; ++i) tanh_jac += std::log1p(-z(i) * z(i));
  const double via_matrix =
      lkj_log_pdf(r, 2.0) + cpc_jacobian_log_det(z, dim) + tanh_jac;
  CHECK(lkj_unconstrained_log_pdf(y, dim, 2.0) ==
        doctest::Approx(via_matrix).epsilon(1e-10));
}

TEST_CASE("corr_to_cpc inverts cpc_to_corr") {
  RngStream rng(23);
  const MatrixXd r = sample_lkj(4, 1.5, rng);
  const VectorXd z = corr_to_cpc(r);
  CHECK((cpc_to_corr(z, 4) - r).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("draw_lmm_params honors pins and yields finite log priors") {
  PriorSpec prior;
  prior.beta_intercept = {200.0, 20.0};
  prior.beta_contrast_sd = 20.0;
  prior.sd_random_scale = 150.0;
  prior.sd_residual_scale = 20.0;
  RandomEffectLayout layout{3, 3, 0};
  RngStream rng(31);

  SUBCASE("slope SDs pinned at 90 and 10") {
    ParamPins pins;
    pins.sd_subj = {std::nullopt, 90.0, 10.0};
    const LmmParams p = draw_lmm_params(prior, layout, pins, rng);
    CHECK(p.sd_subj(1) == 90.0);
    CHECK(p.sd_subj(2) == 10.0);
    CHECK(p.sd_subj(0) >= 0.0);
  }
  SUBCASE("PIT5-style pins") {
    ParamPins pins;
    RandomEffectLayout l5{5, 5, 0};
    pins.sd_subj = {std::nullopt, 10.0, 2.0, 2.0, 0.1};
    const LmmParams p = draw_lmm_params(prior, l5, pins, rng);
    CHECK(p.sd_subj(4) == 0.1);
  }
  SUBCASE("no pins: everything drawn, prior density finite") {
    ParamPins pins;
    const LmmParams p = draw_lmm_params(prior, layout, pins, rng);
    CHECK(std::isfinite(lmm_params_log_prior(prior, p, pins)));
  }
}
