#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "calibra/collapsed.hpp"
#include "calibra/simulate.hpp"

namespace calibra {

struct FreqFit {
  VectorXd beta_hat;
  VectorXd se;
  VectorXd t;
  VectorXd p;
  VectorXd vc_hat;   // random-effect SDs in layout order, residual SD last
  double loglik = 0.0;
  double df = 1.0;   // t-test degrees of freedom
  bool converged = true;
};

struct FreqModelSpec {
  std::vector<int> fixed_columns;
  /// Diagonal (uncorrelated) random effects: each listed column gets an
  /// independent variance shared across the grouping's levels.
  std::vector<RandomBlockSpec> random_blocks;
  Family family = Family::kNormal;  // lognormal fits run on log responses
};

/// ML fit of a Gaussian LMM with diagonal random effects. Coefficients are
/// profiled out by GLS; the log SDs are maximized by a derivative-free
/// simplex with random restarts. Inference uses t with df = n_subj - 1.
FreqFit lmm_ml_fit(const Dataset& data, const DesignMatrixBundle& design,
                   const FreqModelSpec& spec, RngStream& rng,
                   int n_restarts = 5);

/// Profiled ML log likelihood at theta = (log sd per random term..., log
/// sigma); the objective lmm_ml_fit maximizes.
double lmm_profiled_loglik(const Dataset& data, const DesignMatrixBundle& design,
                           const FreqModelSpec& spec,
                           const Eigen::VectorXd& theta);

struct AnovaF {
  double f = 0.0;
  double df_num = 0.0;
  double df_den = 0.0;
};

/// Classical one-factor repeated-measures F on an aggregated table (one row
/// per group x condition). Called on by-subject data this is F1, on by-item
/// data F2.
AnovaF rm_anova_f(const Dataset& aggregated);

struct MinFResult {
  double min_f = 0.0;
  double df_num = 0.0;
  std::optional<double> df_den;  // undefined when F1 + F2 == 0
};

/// Conservative combination of by-subject and by-item F statistics:
/// minF' = F1 F2 / (F1 + F2), df_den = (F1+F2)^2 / (F1^2/df2 + F2^2/df1).
MinFResult min_f(double f1, double df1_den, double f2, double df2_den);

/// One grid point of a type-I-error or power curve.
struct ErrorRatePoint {
  std::string analysis_id;
  std::string effect_id;
  double sd_true = 0.0;
  int n_reject = 0;
  int n_sims = 0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

using ErrorRateCurve = std::vector<ErrorRatePoint>;

}  // namespace calibra
