#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "calibra/collapsed.hpp"
#include "calibra/rng.hpp"

namespace calibra {

struct BridgeConfig {
  double tol = 1e-10;
  int max_iter = 1000;
};

struct BridgeResult {
  double log_ml = 0.0;
  int n_iterations = 0;
  double rel_change = 0.0;
  VectorXd proposal_mean;
  MatrixXd proposal_cov;
  std::vector<std::string> warnings;
};

/// Iterative optimal-bridge estimate of the log normalizing constant of
/// exp(log_post) from posterior draws. The first half of each chain fits a
/// moment-matched multivariate-normal proposal; the second half enters the
/// estimator together with fresh proposal draws. All averaging runs in log
/// space.
BridgeResult bridge_logml(const PosteriorDraws& draws,
                          const std::function<double(const VectorXd&)>& log_post,
                          const BridgeConfig& config, RngStream& rng);

struct ModelComparison {
  double bf10 = 1.0;
  double log_bf10 = 0.0;
  double prior_p1 = 0.5;
  double post_p1 = 0.5;
};

/// log BF and BF from two log marginal likelihoods.
ModelComparison bayes_factor(double log_ml1, double log_ml0,
                             double prior_p1 = 0.5);

double posterior_model_prob(double bf10, double prior_p1);
double posterior_model_prob_log(double log_bf10, double prior_p1);

}  // namespace calibra
