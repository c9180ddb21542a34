#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "calibra/design.hpp"
#include "calibra/rng.hpp"

namespace calibra {

enum class Family { kNormal, kLognormal };

enum class AggregationLevel { kNone, kBySubject, kByItem };

/// One concrete parameter draw for data generation.
struct LmmParams {
  VectorXd beta;       // fixed effects, intercept first
  VectorXd sd_subj;    // SD per subject random column
  VectorXd sd_item;    // SD per item random column (empty if no items)
  MatrixXd rho_subj;   // correlation matrices, unit diagonal
  MatrixXd rho_item;
  double sigma = 1.0;  // residual SD on the (log-)latent scale
  Family family = Family::kNormal;
};

struct Dataset {
  TrialTable trials;
  VectorXd y;  // observed scale (lognormal responses are exponentiated)
  Family family = Family::kNormal;
  AggregationLevel aggregation = AggregationLevel::kNone;
};

struct SimulateOptions {
  bool empirical = false;  // force OLS fixed estimates to equal beta exactly
  /// Columns of X used in the empirical adjustment (defaults to all).
  std::vector<int> empirical_columns;
};

/// Draws responses y = X beta + Z_s b_s + Z_i b_i + eps on the latent scale;
/// the lognormal family exponentiates afterwards. Random effects per group
/// level are MVN(0, diag(sd) * rho * diag(sd)).
Dataset simulate(const TrialTable& trials, const DesignMatrixBundle& design,
                 const LmmParams& params, const SimulateOptions& opts,
                 RngStream& rng);

/// Shifts y so that the OLS estimate on X equals beta_true exactly:
/// y' = y + X (beta_true - beta_ols(y)).
VectorXd enforce_empirical(const VectorXd& y_latent, const MatrixXd& x,
                           const VectorXd& beta_true);

/// Collapses to one row per (group, condition cell); the response is the
/// arithmetic mean of raw-scale responses. For lognormal data the log
/// transform therefore happens after averaging, in the analysis step.
Dataset aggregate(const Dataset& data, AggregationLevel by);

}  // namespace calibra
