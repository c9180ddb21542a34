#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace calibra {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double log_sum_exp(std::span<const double> v);

inline double log_mean_exp(std::span<const double> v) {
  return log_sum_exp(v) - std::log(static_cast<double>(v.size()));
}

double mean(std::span<const double> v);
double sample_variance(std::span<const double> v);
inline double sample_sd(std::span<const double> v) {
  return std::sqrt(sample_variance(v));
}

/// Standard normal density and CDF.
double normal_pdf(double x, double mean = 0.0, double sd = 1.0);
double normal_log_pdf(double x, double mean = 0.0, double sd = 1.0);
double normal_cdf(double x, double mean = 0.0, double sd = 1.0);
double normal_quantile(double p);

/// Two-sided p-value for a t statistic with df degrees of freedom.
double t_test_p_value(double t, double df);
double student_t_cdf(double x, double df);

/// Upper-tail probability of an F statistic.
double f_test_p_value(double f, double df1, double df2);

double chisq_cdf(double x, double df);
double chisq_quantile(double p, double df);

double cauchy_cdf(double x, double loc, double scale);

double lgamma_fn(double x);
double log_beta_fn(double a, double b);

/// Wilson score interval for a binomial proportion.
struct BinomialCi {
  double p_hat = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};
BinomialCi wilson_ci(int successes, int n, double level = 0.95);

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};
template <typename Cdf>
KsResult ks_test(std::vector<double> x, Cdf cdf) {
  std::sort(x.begin(), x.end());
  const int n = static_cast<int>(x.size());
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = cdf(x[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
  }
  KsResult r;
  r.statistic = d;
  // Asymptotic Kolmogorov distribution with the Stephens small-sample tweak.
  const double rn = std::sqrt(static_cast<double>(n));
  const double lam = (rn + 0.12 + 0.11 / rn) * d;
  double p = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = sign * 2.0 * std::exp(-2.0 * j * j * lam * lam);
    p += term;
    sign = -sign;
    if (std::abs(term) < 1e-12) break;
  }
  r.p_value = std::clamp(p, 0.0, 1.0);
  return r;
}

/// Logistic regression of a binary outcome on a single covariate via IRLS.
struct LogisticFit {
  double intercept = 0.0;
  double slope = 0.0;
  double se_slope = 0.0;
  double z_slope = 0.0;
  bool converged = false;
  double predict(double x) const {
    return 1.0 / (1.0 + std::exp(-(intercept + slope * x)));
  }
};
LogisticFit logistic_fit(std::span<const double> x, std::span<const int> y);
/// Quasi-binomial variant for fractional responses in [0, 1].
LogisticFit logistic_fit(std::span<const double> x, std::span<const double> y);

/// Split-Rhat over post-warmup chains laid out as draws[chain][iter].
double split_rhat(const std::vector<std::vector<double>>& chains);

/// Effective sample size from pooled chains (Geyer initial positive sequence).
double effective_sample_size(const std::vector<std::vector<double>>& chains);

/// Ordinary least squares; throws on rank deficiency.
VectorXd ols(const MatrixXd& x, const VectorXd& y);

/// Moore-Penrose pseudoinverse via SVD (tolerance relative to largest
/// singular value). Used both in production code and as an independent
/// oracle for contrast construction.
MatrixXd svd_pinv(const MatrixXd& m, double tol = 1e-12);

}  // namespace calibra
