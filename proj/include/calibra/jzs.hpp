#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "calibra/bridge.hpp"
#include "calibra/priors.hpp"
#include "calibra/rng.hpp"
#include "calibra/simulate.hpp"

namespace calibra {

/// Orthonormal eigenvectors (eigenvalue 1) of the centering matrix
/// I_alpha - J_alpha / alpha; columns sum to zero and Q'Q = I.
struct QMatrix {
  int alpha = 0;
  MatrixXd q;  // alpha x (alpha - 1)
};
QMatrix qmatrix(int alpha);

/// One model term: a block of design columns sharing a single g with a
/// scaled inverse chi-square prior of the given scale.
struct JzsTerm {
  std::string label;
  MatrixXd x;      // n x k design block
  double g_scale = 0.5;
};

/// Linear model y = mu + sigma_eps * sum_f X_f theta_f + eps with a flat
/// prior on mu and Jeffreys prior on sigma_eps^2.
struct JzsModel {
  std::vector<JzsTerm> terms;
  long n = 0;
};

/// Log marginal density of y given fixed g (mu and sigma integrated out):
/// depends on the data through the quadratic form of centered y under
/// (I + sum_f g_f X_f X_f')^-1 with exponent -(n-1)/2.
double jzs_logml(const VectorXd& y, const JzsModel& model, const VectorXd& g);

/// Repeated-evaluation helper: cross products are precomputed once.
class JzsMarginal {
 public:
  JzsMarginal(const VectorXd& y, const JzsModel& model);
  double log_ml(const VectorXd& g) const;
  int n_terms() const { return static_cast<int>(sizes_.size()); }

 private:
  long n_ = 0;
  double yty_ = 0.0, sum_y_ = 0.0;
  MatrixXd utu_;
  VectorXd uty_, ut1_;
  std::vector<int> sizes_;  // columns per term
};

struct GIntegrationConfig {
  long n_mc_draws = 100000;
  double quad_rel_tol = 1e-8;
  double mc_se_warn = 0.05;
  bool force_generic = false;  // bypass the balanced-design fast path
};

struct JzsBfResult {
  ModelComparison comparison;
  double mc_se_log_bf = 0.0;  // zero when quadrature was used
  std::string method;         // "quadrature" or "monte-carlo"
  std::vector<std::string> warnings;
};

/// ANOVA-style comparison description in terms of factor / grouping labels.
/// Fixed terms are factor names or colon-joined interactions ("A", "A:B");
/// random terms are "subj", "item" or factor:grouping interactions
/// ("X:subj"). The null model drops `test_terms` from the fixed terms and
/// always retains every random term.
struct JzsAnovaSpec {
  std::vector<std::string> fixed_terms;
  std::vector<std::string> random_terms;
  std::vector<std::string> test_terms;
  GPriorScales scales;
  double prior_p1 = 0.5;
};

/// Default Bayes factor for a balanced repeated-measures comparison, with
/// g-priors integrated by adaptive quadrature (<= 2 g's) or plain Monte
/// Carlo from the g prior (with reported MC error) above that.
JzsBfResult jzs_anova_bf(const Dataset& data, const JzsAnovaSpec& spec,
                         const GIntegrationConfig& config, RngStream& rng);

/// Builds the design block for one term label on a trial table.
MatrixXd jzs_term_block(const TrialTable& trials, const std::string& label);

/// One-sample t test Bayes factor with Cauchy(0, r) effect-size prior.
ModelComparison jzs_ttest_bf(std::span<const double> x, double scale,
                             double prior_p1 = 0.5);

/// Simple-regression Bayes factor: single standardized covariate with a
/// Cauchy(0, r) prior on the standardized slope.
ModelComparison jzs_linreg_bf(std::span<const double> x,
                              std::span<const double> y, double scale,
                              double prior_p1 = 0.5);

/// Package-style default prior scales.
inline constexpr double kTtestDefaultScale = 0.7071067811865476;   // sqrt(2)/2
inline constexpr double kRegressionDefaultScale = 0.3535533905932738;  // sqrt(2)/4

}  // namespace calibra
