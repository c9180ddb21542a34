#include "calibra/priors.hpp"

#include <cmath>
#include <stdexcept>

#include "calibra/simulate.hpp"
#include "calibra/stats.hpp"

namespace calibra {

double Normal::sample(RngStream& rng) const {
  if (sd <= 0.0) throw std::invalid_argument("Normal: sd must be > 0");
  return rng.normal(mean, sd);
}

double Normal::log_pdf(double x) const {
  if (sd <= 0.0) throw std::invalid_argument("Normal: sd must be > 0");
  return normal_log_pdf(x, mean, sd);
}

double HalfNormal::sample(RngStream& rng) const {
  if (scale <= 0.0) throw std::invalid_argument("HalfNormal: scale must be > 0");
  return std::abs(rng.normal(0.0, scale));
}

double HalfNormal::log_pdf(double x) const {
  if (scale <= 0.0) throw std::invalid_argument("HalfNormal: scale must be > 0");
  if (x < 0.0) return kNegInf;
  return std::log(2.0) + normal_log_pdf(x, 0.0, scale);
}

double Cauchy::sample(RngStream& rng) const {
  if (scale <= 0.0) throw std::invalid_argument("Cauchy: scale must be > 0");
  return rng.cauchy(loc, scale);
}

double Cauchy::log_pdf(double x) const {
  if (scale <= 0.0) throw std::invalid_argument("Cauchy: scale must be > 0");
  const double z = (x - loc) / scale;
  return -std::log(M_PI * scale * (1.0 + z * z));
}

double ScaledInvChiSq::sample(RngStream& rng) const {
  if (scale <= 0.0) throw std::invalid_argument("ScaledInvChiSq: scale > 0");
  return df * scale * scale / rng.chisq(df);
}

double ScaledInvChiSq::log_pdf(double x) const {
  if (scale <= 0.0) throw std::invalid_argument("ScaledInvChiSq: scale > 0");
  if (x <= 0.0) return kNegInf;
  const double nu = df;
  const double tau2 = scale * scale;
  return 0.5 * nu * std::log(nu * tau2 / 2.0) - lgamma_fn(0.5 * nu) -
         (1.0 + 0.5 * nu) * std::log(x) - nu * tau2 / (2.0 * x);
}

MatrixXd cpc_to_cholesky(const VectorXd& z, int dim) {
  MatrixXd l = MatrixXd::Zero(dim, dim);
  l(0, 0) = 1.0;
  int idx = 0;
  for (int i = 1; i < dim; ++i) {
    double rem = 1.0;  // product of (1 - z^2) along the row so far
    for (int j = 0; j < i; ++j) {
      const double zij = z(idx++);
      l(i, j) = zij * std::sqrt(rem);
      rem *= (1.0 - zij * zij);
    }
    l(i, i) = std::sqrt(std::max(rem, 0.0));
  }
  return l;
}

VectorXd corr_to_cpc(const MatrixXd& r) {
  const int dim = static_cast<int>(r.rows());
  Eigen::LLT<MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("corr_to_cpc: matrix not positive definite");
  }
  const MatrixXd l = llt.matrixL();
  VectorXd z(dim * (dim - 1) / 2);
  int idx = 0;
  for (int i = 1; i < dim; ++i) {
    double rem = 1.0;
    for (int j = 0; j < i; ++j) {
      const double zij = l(i, j) / std::sqrt(rem);
      z(idx++) = zij;
      rem *= (1.0 - zij * zij);
    }
  }
  return z;
}

double cpc_jacobian_log_det(const VectorXd& z, int dim) {
  // dr_ij/dz_ij = L_jj * prod_{k<j} sqrt(1 - z_ik^2); the Jacobian is
  // triangular in the shared (2,1),(3,1),(3,2),... ordering.
  std::vector<std::vector<double>> zs(dim, std::vector<double>(dim, 0.0));
  int idx = 0;
  for (int i = 1; i < dim; ++i) {
    for (int j = 0; j < i; ++j) zs[i][j] = z(idx++);
  }
  double logdet = 0.0;
  for (int i = 1; i < dim; ++i) {
    for (int j = 0; j < i; ++j) {
      for (int k = 0; k < j; ++k) {
        logdet += 0.5 * std::log1p(-zs[j][k] * zs[j][k]);  // L_jj part
        logdet += 0.5 * std::log1p(-zs[i][k] * zs[i][k]);
      }
    }
  }
  return logdet;
}

MatrixXd sample_lkj(int dim, double eta, RngStream& rng) {
  if (dim < 1) throw std::invalid_argument("sample_lkj: dim >= 1");
  if (eta <= 0.0) throw std::invalid_argument("sample_lkj: eta > 0");
  if (dim == 1) return MatrixXd::Identity(1, 1);
  VectorXd z(dim * (dim - 1) / 2);
  int idx = 0;
  for (int i = 1; i < dim; ++i) {
    for (int j = 0; j < i; ++j) {
      const double b = lkj_cpc_beta_shape(eta, dim, j + 1);
      z(idx++) = 2.0 * rng.beta(b, b) - 1.0;
    }
  }
  return cpc_to_corr(z, dim);
}

double lkj_log_pdf(const MatrixXd& r, double eta) {
  // Normalized density via the vine factorization: independent symmetric
  // betas on the canonical partial correlations, divided by the CPC -> R
  // Jacobian. Equals (eta - 1) logdet(R) - log C_d(eta).
  const int dim = static_cast<int>(r.rows());
  if (dim == 1) return 0.0;
  Eigen::LLT<MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) return kNegInf;
  const VectorXd z = corr_to_cpc(r);
  double lp = 0.0;
  int idx = 0;
  for (int i = 1; i < dim; ++i) {
    for (int j = 0; j < i; ++j) {
      const double b = lkj_cpc_beta_shape(eta, dim, j + 1);
      const double zij = z(idx++);
      lp += (b - 1.0) * std::log1p(-zij * zij) - log_beta_fn(b, b) -
            (2.0 * b - 1.0) * std::log(2.0);
    }
  }
  return lp - cpc_jacobian_log_det(z, dim);
}

double lkj_unconstrained_log_pdf(const VectorXd& y, int dim, double eta) {
  double lp = 0.0;
  int idx = 0;
  for (int i = 1; i < dim; ++i) {
    for (int j = 0; j < i; ++j) {
      const double b = lkj_cpc_beta_shape(eta, dim, j + 1);
      const double z = std::tanh(y(idx++));
      const double log1mz2 = std::log1p(-z * z);
      // scaled beta density at z plus the tanh Jacobian log(1 - z^2)
      lp += (b - 1.0) * log1mz2 - log_beta_fn(b, b) -
            (2.0 * b - 1.0) * std::log(2.0) + log1mz2;
    }
  }
  return lp;
}

LmmParams draw_lmm_params(const PriorSpec& prior, const RandomEffectLayout& layout,
                          const ParamPins& pins, RngStream& rng) {
  LmmParams p;
  p.beta.resize(layout.n_fixed);
  for (int j = 0; j < layout.n_fixed; ++j) {
    if (j < static_cast<int>(pins.beta.size()) && pins.beta[j]) {
      p.beta(j) = *pins.beta[j];
    } else if (j == 0) {
      p.beta(j) = prior.beta_intercept.sample(rng);
    } else {
      p.beta(j) = Normal{0.0, prior.beta_contrast_sd}.sample(rng);
    }
  }
  const HalfNormal sd_prior{prior.sd_random_scale};
  auto draw_sds = [&](int q, const std::vector<std::optional<double>>& pin) {
    VectorXd sds(q);
    for (int k = 0; k < q; ++k) {
      if (k < static_cast<int>(pin.size()) && pin[k]) {
        sds(k) = *pin[k];
      } else {
        sds(k) = sd_prior.sample(rng);
      }
    }
    return sds;
  };
  p.sd_subj = draw_sds(layout.n_subj_terms, pins.sd_subj);
  p.sd_item = draw_sds(layout.n_item_terms, pins.sd_item);
  if (layout.n_subj_terms > 0) {
    p.rho_subj = pins.zero_correlations
                     ? MatrixXd::Identity(layout.n_subj_terms, layout.n_subj_terms)
                     : sample_lkj(layout.n_subj_terms, prior.lkj_eta, rng);
  }
  if (layout.n_item_terms > 0) {
    p.rho_item = pins.zero_correlations
                     ? MatrixXd::Identity(layout.n_item_terms, layout.n_item_terms)
                     : sample_lkj(layout.n_item_terms, prior.lkj_eta, rng);
  }
  p.sigma = pins.sigma ? *pins.sigma
                       : HalfNormal{prior.sd_residual_scale}.sample(rng);
  return p;
}

double lmm_params_log_prior(const PriorSpec& prior, const LmmParams& params,
                            const ParamPins& pins) {
  double lp = 0.0;
  for (int j = 0; j < params.beta.size(); ++j) {
    if (j < static_cast<int>(pins.beta.size()) && pins.beta[j]) continue;
    lp += j == 0 ? prior.beta_intercept.log_pdf(params.beta(j))
                 : Normal{0.0, prior.beta_contrast_sd}.log_pdf(params.beta(j));
  }
  const HalfNormal sd_prior{prior.sd_random_scale};
  for (int k = 0; k < params.sd_subj.size(); ++k) {
    if (k < static_cast<int>(pins.sd_subj.size()) && pins.sd_subj[k]) continue;
    lp += sd_prior.log_pdf(params.sd_subj(k));
  }
  for (int k = 0; k < params.sd_item.size(); ++k) {
    if (k < static_cast<int>(pins.sd_item.size()) && pins.sd_item[k]) continue;
    lp += sd_prior.log_pdf(params.sd_item(k));
  }
  if (!pins.zero_correlations) {
    if (params.rho_subj.rows() > 1) lp += lkj_log_pdf(params.rho_subj, prior.lkj_eta);
    if (params.rho_item.rows() > 1) lp += lkj_log_pdf(params.rho_item, prior.lkj_eta);
  }
  if (!pins.sigma) lp += HalfNormal{prior.sd_residual_scale}.log_pdf(params.sigma);
  return lp;
}

}  // namespace calibra
