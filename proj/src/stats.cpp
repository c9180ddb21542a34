#include "calibra/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace calibra {

double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

double normal_log_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * M_PI);
}

double normal_cdf(double x, double mean, double sd) {
  return boost::math::cdf(boost::math::normal_distribution<>(mean, sd), x);
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<>(0.0, 1.0), p);
}

double student_t_cdf(double x, double df) {
  return boost::math::cdf(boost::math::students_t_distribution<>(df), x);
}

double t_test_p_value(double t, double df) {
  const double tail =
      boost::math::cdf(boost::math::students_t_distribution<>(df), -std::abs(t));
  return 2.0 * tail;
}

double f_test_p_value(double f, double df1, double df2) {
  if (f <= 0.0) return 1.0;
  return boost::math::cdf(
      boost::math::complement(boost::math::fisher_f_distribution<>(df1, df2), f));
}

double chisq_cdf(double x, double df) {
  return boost::math::cdf(boost::math::chi_squared_distribution<>(df), x);
}

double chisq_quantile(double p, double df) {
  return boost::math::quantile(boost::math::chi_squared_distribution<>(df), p);
}

double cauchy_cdf(double x, double loc, double scale) {
  return 0.5 + std::atan2(x - loc, scale) / M_PI;
}

double lgamma_fn(double x) { return boost::math::lgamma(x); }

double log_beta_fn(double a, double b) {
  return boost::math::lgamma(a) + boost::math::lgamma(b) -
         boost::math::lgamma(a + b);
}

BinomialCi wilson_ci(int successes, int n, double level) {
  BinomialCi ci;
  if (n == 0) return ci;
  const double z = normal_quantile(0.5 + level / 2.0);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  ci.p_hat = p;
  ci.lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  ci.hi = successes == n ? 1.0 : std::min(1.0, center + half);
  return ci;
}

LogisticFit logistic_fit(std::span<const double> x, std::span<const int> y) {
  std::vector<double> yd(y.begin(), y.end());
  return logistic_fit(x, std::span<const double>(yd));
}

LogisticFit logistic_fit(std::span<const double> x, std::span<const double> y) {
  const int n = static_cast<int>(x.size());
  LogisticFit fit;
  Eigen::Vector2d beta = Eigen::Vector2d::Zero();
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (int i = 0; i < n; ++i) {
      const double eta = beta(0) + beta(1) * x[i];
      const double mu = 1.0 / (1.0 + std::exp(-eta));
      const double w = std::max(mu * (1.0 - mu), 1e-12);
      const Eigen::Vector2d xi(1.0, x[i]);
      g += (y[i] - mu) * xi;
      h += w * xi * xi.transpose();
    }
    const Eigen::Vector2d step = h.ldlt().solve(g);
    beta += step;
    if (step.norm() < 1e-10) {
      fit.converged = true;
      Eigen::Matrix2d cov = h.inverse();
      fit.intercept = beta(0);
      fit.slope = beta(1);
      fit.se_slope = std::sqrt(std::max(cov(1, 1), 0.0));
      fit.z_slope = fit.se_slope > 0 ? fit.slope / fit.se_slope : 0.0;
      return fit;
    }
    // Perfect separation pushes coefficients to infinity; cap and stop.
    if (beta.norm() > 1e4) break;
  }
  fit.intercept = beta(0);
  fit.slope = beta(1);
  return fit;
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> halves;
  for (const auto& c : chains) {
    const int half = static_cast<int>(c.size()) / 2;
    if (half < 2) continue;
    halves.emplace_back(c.begin(), c.begin() + half);
    halves.emplace_back(c.begin() + half, c.begin() + 2 * half);
  }
  const int m = static_cast<int>(halves.size());
  if (m < 2) return 1.0;
  const int n = static_cast<int>(halves[0].size());
  std::vector<double> means(m), vars(m);
  for (int j = 0; j < m; ++j) {
    means[j] = mean(halves[j]);
    vars[j] = sample_variance(halves[j]);
  }
  const double grand = mean(means);
  double b = 0.0;
  for (int j = 0; j < m; ++j) b += (means[j] - grand) * (means[j] - grand);
  b *= static_cast<double>(n) / (m - 1);
  const double w = mean(vars);
  if (w <= 0.0) return 1.0;
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

double effective_sample_size(const std::vector<std::vector<double>>& chains) {
  // Pairwise-sum truncated autocorrelation estimate, averaged over chains.
  double total = 0.0;
  for (const auto& c : chains) {
    const int n = static_cast<int>(c.size());
    if (n < 4) {
      total += n;
      continue;
    }
    const double m = mean(c);
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = c[i] - m;
    double c0 = 0.0;
    for (int i = 0; i < n; ++i) c0 += d[i] * d[i];
    c0 /= n;
    if (c0 <= 0.0) {
      total += n;
      continue;
    }
    double sum_rho = 0.0;
    for (int lag = 1; lag + 1 < n; lag += 2) {
      double g1 = 0.0, g2 = 0.0;
      for (int i = 0; i + lag < n; ++i) g1 += d[i] * d[i + lag];
      for (int i = 0; i + lag + 1 < n; ++i) g2 += d[i] * d[i + lag + 1];
      g1 /= n * c0;
      g2 /= n * c0;
      if (g1 + g2 < 0.0) break;
      sum_rho += g1 + g2;
    }
    total += n / (1.0 + 2.0 * sum_rho);
  }
  return total;
}

VectorXd ols(const MatrixXd& x, const VectorXd& y) {
  Eigen::ColPivHouseholderQR<MatrixXd> qr(x);
  if (qr.rank() < x.cols()) {
    throw std::invalid_argument("ols: design matrix is rank deficient");
  }
  return qr.solve(y);
}

MatrixXd svd_pinv(const MatrixXd& m, double tol) {
  Eigen::JacobiSVD<MatrixXd> svd(m,
                                 Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& s = svd.singularValues();
  const double cutoff = tol * s(0);
  VectorXd inv = VectorXd::Zero(s.size());
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace calibra
