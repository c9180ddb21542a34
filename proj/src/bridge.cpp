#include "calibra/bridge.hpp"

#include <cmath>
#include <stdexcept>

#include "calibra/stats.hpp"

namespace calibra {

namespace {

struct MvnProposal {
  VectorXd mean;
  MatrixXd chol;  // lower factor of the covariance
  double logdet = 0.0;

  double log_pdf(const VectorXd& x) const {
    const int d = static_cast<int>(mean.size());
    const VectorXd z =
        chol.triangularView<Eigen::Lower>().solve(x - mean);
    return -0.5 * (d * std::log(2.0 * M_PI) + logdet + z.squaredNorm());
  }
  VectorXd sample(RngStream& rng) const {
    VectorXd z(mean.size());
    for (int i = 0; i < z.size(); ++i) z(i) = rng.normal();
    return mean + chol * z;
  }
};

}  // namespace

BridgeResult bridge_logml(const PosteriorDraws& draws,
                          const std::function<double(const VectorXd&)>& log_post,
                          const BridgeConfig& config, RngStream& rng) {
  const int d = static_cast<int>(draws.draws.cols());
  const int per_chain = static_cast<int>(draws.draws.rows()) / draws.n_chains;
  const int half = per_chain / 2;
  if (half < 1) throw std::invalid_argument("bridge_logml: too few draws");

  // Split halves: proposal moments from the first half of every chain,
  // estimator samples from the second half.
  std::vector<int> fit_rows, est_rows;
  for (int c = 0; c < draws.n_chains; ++c) {
    for (int i = 0; i < half; ++i) fit_rows.push_back(c * per_chain + i);
    for (int i = half; i < per_chain; ++i) est_rows.push_back(c * per_chain + i);
  }

  MvnProposal prop;
  {
    const int nf = static_cast<int>(fit_rows.size());
    prop.mean = VectorXd::Zero(d);
    for (int r : fit_rows) prop.mean += draws.draws.row(r).transpose();
    prop.mean /= nf;
    MatrixXd cov = MatrixXd::Zero(d, d);
    for (int r : fit_rows) {
      const VectorXd v = draws.draws.row(r).transpose() - prop.mean;
      cov += v * v.transpose();
    }
    cov /= (nf - 1);
    cov.diagonal().array() += 1e-10 + 1e-8 * cov.diagonal().mean();
    Eigen::LLT<MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("bridge_logml: proposal covariance not PD");
    }
    prop.chol = llt.matrixL();
    for (int i = 0; i < d; ++i) prop.logdet += 2.0 * std::log(prop.chol(i, i));
  }

  const int n1 = static_cast<int>(est_rows.size());
  const int n2 = n1;
  std::vector<double> l1(n1);  // log_post - log_prop at posterior draws
  for (int i = 0; i < n1; ++i) {
    const VectorXd x = draws.draws.row(est_rows[i]).transpose();
    l1[i] = draws.lp(est_rows[i]) - prop.log_pdf(x);
  }
  std::vector<double> l2(n2);  // same ratio at proposal draws
  int n_finite = 0;
  for (int j = 0; j < n2; ++j) {
    const VectorXd x = prop.sample(rng);
    l2[j] = log_post(x) - prop.log_pdf(x);
    if (l2[j] != kNegInf) ++n_finite;
  }
  if (n_finite == 0) {
    throw std::runtime_error(
        "bridge_logml: every proposal draw has zero posterior density");
  }

  const double log_s1 =
      std::log(static_cast<double>(n1) / static_cast<double>(n1 + n2));
  const double log_s2 =
      std::log(static_cast<double>(n2) / static_cast<double>(n1 + n2));

  BridgeResult res;
  res.proposal_mean = prop.mean;
  res.proposal_cov = prop.chol * prop.chol.transpose();

  double lr = log_mean_exp(l2);  // simple importance-sampling start
  double rel = 0.0;
  int iter = 0;
  std::vector<double> num(n2), den(n1);
  for (; iter < config.max_iter; ++iter) {
    for (int j = 0; j < n2; ++j) {
      num[j] = l2[j] == kNegInf
                   ? kNegInf
                   : l2[j] - log_sum_exp(log_s1 + l2[j], log_s2 + lr);
    }
    for (int i = 0; i < n1; ++i) {
      den[i] = -log_sum_exp(log_s1 + l1[i], log_s2 + lr);
    }
    const double lr_new = log_mean_exp(num) - log_mean_exp(den);
    rel = std::abs(std::expm1(lr - lr_new));
    lr = lr_new;
    if (rel < config.tol) {
      ++iter;
      break;
    }
  }
  res.log_ml = lr;
  res.n_iterations = iter;
  res.rel_change = rel;
  if (rel >= config.tol) {
    res.warnings.push_back("bridge did not converge: rel_change=" +
                           std::to_string(rel));
  }
  return res;
}

ModelComparison bayes_factor(double log_ml1, double log_ml0, double prior_p1) {
  if (!std::isfinite(log_ml1) || !std::isfinite(log_ml0)) {
    throw std::invalid_argument("bayes_factor: non-finite log marginal");
  }
  ModelComparison cmp;
  cmp.log_bf10 = log_ml1 - log_ml0;
  cmp.bf10 = std::exp(cmp.log_bf10);
  cmp.prior_p1 = prior_p1;
  cmp.post_p1 = posterior_model_prob_log(cmp.log_bf10, prior_p1);
  return cmp;
}

double posterior_model_prob_log(double log_bf10, double prior_p1) {
  if (!(prior_p1 > 0.0 && prior_p1 < 1.0)) {
    throw std::invalid_argument("prior_p1 must be in (0, 1)");
  }
  const double log_prior_odds = std::log(prior_p1) - std::log1p(-prior_p1);
  const double log_post_odds = log_bf10 + log_prior_odds;
  // post = odds / (1 + odds), computed stably on both tails
  if (log_post_odds > 0.0) {
    return 1.0 / (1.0 + std::exp(-log_post_odds));
  }
  const double e = std::exp(log_post_odds);
  return e / (1.0 + e);
}

double posterior_model_prob(double bf10, double prior_p1) {
  return posterior_model_prob_log(std::log(bf10), prior_p1);
}

}  // namespace calibra
