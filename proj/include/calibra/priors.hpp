#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "calibra/rng.hpp"

namespace calibra {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Scalar distributions
// ---------------------------------------------------------------------------

struct Normal {
  double mean = 0.0;
  double sd = 1.0;
  double sample(RngStream& rng) const;
  double log_pdf(double x) const;
};

/// Half-normal on [0, inf): |Z| * scale.
struct HalfNormal {
  double scale = 1.0;
  double sample(RngStream& rng) const;
  double log_pdf(double x) const;
};

struct Cauchy {
  double loc = 0.0;
  double scale = 1.0;
  double sample(RngStream& rng) const;
  double log_pdf(double x) const;
};

/// Scaled inverse chi-square for a variance: x = df * scale^2 / chisq(df).
/// With df = 1 this is the mixing distribution that turns Normal(0, sigma)
/// into Cauchy(0, scale).
struct ScaledInvChiSq {
  double df = 1.0;
  double scale = 1.0;  // scale of the implied Cauchy, i.e. sqrt of the
                       // scale parameter of the variance distribution
  double sample(RngStream& rng) const;
  double log_pdf(double x) const;
};

// ---------------------------------------------------------------------------
// LKJ correlation matrices and the canonical-partial-correlation transform
// ---------------------------------------------------------------------------

/// Beta shape for the canonical partial correlation in column j (1-based)
/// of a dim x dim LKJ(eta) matrix.
inline double lkj_cpc_beta_shape(double eta, int dim, int j) {
  return eta + (dim - 1.0 - j) / 2.0;
}

/// Draws a correlation matrix from LKJ(eta) via independent canonical
/// partial correlations (onion construction).
MatrixXd sample_lkj(int dim, double eta, RngStream& rng);

/// Unnormalized-free LKJ log density on the space of correlation matrices:
/// (eta-1) * logdet(R) - log C_d(eta).
double lkj_log_pdf(const MatrixXd& r, double eta);

/// Lower-triangular Cholesky factor with unit-norm rows built from canonical
/// partial correlations z (strict lower triangle, stored row-major as
/// z_21, z_31, z_32, ...). R = L L'.
MatrixXd cpc_to_cholesky(const VectorXd& z, int dim);

inline MatrixXd cpc_to_corr(const VectorXd& z, int dim) {
  const MatrixXd l = cpc_to_cholesky(z, dim);
  return l * l.transpose();
}

/// Recovers canonical partial correlations from a correlation matrix.
VectorXd corr_to_cpc(const MatrixXd& r);

/// log |det dR/dz| of the map from canonical partial correlations to the
/// free elements of the correlation matrix.
double cpc_jacobian_log_det(const VectorXd& z, int dim);

/// Log prior of unconstrained correlation coordinates y (z = tanh(y)) under
/// LKJ(eta), including the tanh Jacobian. Evaluating the prior directly in
/// y-space keeps the MCMC density and the onion sampler in exact agreement.
double lkj_unconstrained_log_pdf(const VectorXd& y, int dim, double eta);

// ---------------------------------------------------------------------------
// LMM parameter priors
// ---------------------------------------------------------------------------

struct PriorSpec {
  Normal beta_intercept{0.0, 10.0};
  double beta_contrast_sd = 10.0;
  double sd_random_scale = 1.0;    // one half-normal scale for all random SDs
  double sd_residual_scale = 1.0;
  double lkj_eta = 2.0;
};

/// Default scales of the scaled inverse chi-square g-priors.
struct GPriorScales {
  double fixed_scale = 0.5;
  double random_scale = 1.0;
};

/// Which parameters a scenario pins to constants instead of sampling.
struct ParamPins {
  std::vector<std::optional<double>> beta;      // per fixed column
  std::vector<std::optional<double>> sd_subj;   // per subject random column
  std::vector<std::optional<double>> sd_item;   // per item random column
  std::optional<double> sigma;
  bool zero_correlations = false;
};

struct RandomEffectLayout {
  int n_fixed = 1;
  int n_subj_terms = 0;
  int n_item_terms = 0;
};

struct LmmParams;  // defined in simulate.hpp

LmmParams draw_lmm_params(const PriorSpec& prior, const RandomEffectLayout& layout,
                          const ParamPins& pins, RngStream& rng);

/// Joint log prior density of a parameter draw (pinned entries excluded).
double lmm_params_log_prior(const PriorSpec& prior, const LmmParams& params,
                            const ParamPins& pins);

}  // namespace calibra
