#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "calibra/priors.hpp"
#include "calibra/simulate.hpp"

namespace calibra {

/// Random-effect structure of one grouping inside a model: which X columns
/// vary by group level.
struct RandomBlockSpec {
  std::string grouping;       // "subj" or "item"
  std::vector<int> columns;   // indices into the design matrix
};

/// A fitted-model description. H1/H0 pairs differ only in fixed_columns;
/// the random-effect specification is shared.
struct ModelSpec {
  std::vector<int> fixed_columns;            // must contain the intercept (0)
  std::vector<RandomBlockSpec> random_blocks;
  PriorSpec priors;
  Family family = Family::kNormal;
};

/// Variance/correlation parameters the sampler moves over. Coefficients
/// (fixed effects and random effects) are integrated out analytically.
struct Phi {
  VectorXd sds;     // concatenated random-effect SDs, grouping by grouping
  VectorXd corr_z;  // unconstrained canonical-partial-correlation coords
  double log_sigma = 0.0;
};

struct McmcConfig {
  int n_chains = 4;
  int n_warmup = 1500;
  int n_draws = 2000;  // kept draws per chain
  int thin = 3;        // sampler iterations per kept draw
  double target_accept = 0.30;
  double rhat_threshold = 1.05;
  int max_init_tries = 10;
};

struct PosteriorDraws {
  MatrixXd draws;            // (n_chains * n_draws) x d, unconstrained scale
  VectorXd lp;               // log posterior at each draw
  std::vector<int> chain;    // chain id per draw
  int n_chains = 0;
  VectorXd rhat;             // per coordinate
  VectorXd ess;
  VectorXd accept_rate;      // per chain, post-warmup
  bool converged = true;
  std::string warning;
};

/// brms-style Bayesian LMM with every Gaussian coefficient integrated out:
/// y ~ N(X m_beta, X S_beta X' + sum_g Z_g G_g Z_g' + sigma^2 I) given Phi.
/// Likelihood evaluations go through the Woodbury identity on the m x m
/// inner matrix (m = #coefficients), which is exact and much cheaper than
/// factoring the n x n covariance; the dense route exists as a cross-check.
class CollapsedModel {
 public:
  CollapsedModel(const Dataset& data, const DesignMatrixBundle& design,
                 ModelSpec spec);

  int dim() const { return dim_; }
  int n_obs() const { return n_; }
  const ModelSpec& spec() const { return spec_; }

  /// Collapsed log marginal density of the data given Phi.
  double collapsed_loglik(const Phi& phi) const;

  /// Same quantity via an explicit n x n Cholesky; test/reference path.
  double collapsed_loglik_dense(const Phi& phi) const;

  /// Log posterior density on the unconstrained scale (exp transform for
  /// SDs and sigma, tanh'd canonical partial correlations for rho),
  /// including Jacobians. Returns -inf instead of throwing.
  double log_posterior_unconstrained(const VectorXd& u) const;

  Phi unpack(const VectorXd& u) const;
  VectorXd pack(const Phi& phi) const;

  /// Draws an initial point from the parameter priors.
  VectorXd draw_unconstrained_from_prior(RngStream& rng) const;

  PosteriorDraws run_mcmc(const McmcConfig& config, RngStream& rng) const;

  struct GroupBlock {
    std::string grouping;
    std::vector<int> columns;
    int n_levels = 0;
    int q = 0;
    int u_offset = 0;   // column offset of this block inside U (after fixed)
    int sd_offset = 0;  // offset into Phi::sds
    int z_offset = 0;   // offset into Phi::corr_z
  };
  const std::vector<GroupBlock>& groups() const { return groups_; }

 private:
  double loglik_impl(const Phi& phi, bool dense) const;

  ModelSpec spec_;
  int n_ = 0;
  int p_ = 0;            // retained fixed columns
  int m_ = 0;            // total U columns
  int dim_ = 0;          // Phi dimension
  std::vector<GroupBlock> groups_;
  MatrixXd u_;           // n x m (kept for the dense path)
  VectorXd r_;           // response minus prior-mean fit
  MatrixXd utu_;
  VectorXd utr_;
  double rtr_ = 0.0;
  VectorXd prior_sd_fixed_;
  double loglik_const_ = 0.0;  // lognormal change-of-variable term
};

}  // namespace calibra
