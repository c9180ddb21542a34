#include "calibra/collapsed.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "calibra/optim.hpp"
#include "calibra/stats.hpp"

namespace calibra {

namespace {

std::string phi_to_string(const Phi& phi) {
  std::ostringstream os;
  os << "phi{sds=[";
  for (int i = 0; i < phi.sds.size(); ++i) {
    os << (i ? "," : "") << phi.sds(i);
  }
  os << "], z=[";
  for (int i = 0; i < phi.corr_z.size(); ++i) {
    os << (i ? "," : "") << phi.corr_z(i);
  }
  os << "], log_sigma=" << phi.log_sigma << "}";
  return os.str();
}

}  // namespace

CollapsedModel::CollapsedModel(const Dataset& data,
                               const DesignMatrixBundle& design, ModelSpec spec)
    : spec_(std::move(spec)) {
  n_ = static_cast<int>(data.y.size());
  p_ = static_cast<int>(spec_.fixed_columns.size());
  if (p_ == 0 || spec_.fixed_columns[0] != 0) {
    throw std::invalid_argument("model must retain the intercept column");
  }

  VectorXd y_latent(n_);
  if (spec_.family == Family::kLognormal) {
    for (int i = 0; i < n_; ++i) {
      if (data.y(i) <= 0.0) {
        throw std::invalid_argument("lognormal family requires positive responses");
      }
      y_latent(i) = std::log(data.y(i));
      loglik_const_ -= y_latent(i);  // d(log y)/dy = 1/y
    }
  } else {
    y_latent = data.y;
  }

  // Fixed-effect prior moments; the prior mean is folded into the residual.
  prior_sd_fixed_.resize(p_);
  VectorXd m_beta(p_);
  for (int j = 0; j < p_; ++j) {
    const bool intercept = spec_.fixed_columns[j] == 0;
    m_beta(j) = intercept ? spec_.priors.beta_intercept.mean : 0.0;
    prior_sd_fixed_(j) =
        intercept ? spec_.priors.beta_intercept.sd : spec_.priors.beta_contrast_sd;
  }

  int u_cols = p_;
  for (const auto& rb : spec_.random_blocks) {
    GroupBlock gb;
    gb.grouping = rb.grouping;
    gb.columns = rb.columns;
    gb.q = static_cast<int>(rb.columns.size());
    const RandomBlocks& src = rb.grouping == "item" ? design.item : design.subj;
    if (rb.grouping == "item" && !design.has_item) {
      throw std::invalid_argument("model requests item effects but design has none");
    }
    gb.n_levels = src.n_levels;
    gb.u_offset = u_cols - p_;
    u_cols += gb.q * gb.n_levels;
    groups_.push_back(gb);
  }
  m_ = u_cols;

  int sd_off = 0, z_off = 0;
  for (auto& gb : groups_) {
    gb.sd_offset = sd_off;
    gb.z_offset = z_off;
    sd_off += gb.q;
    z_off += gb.q * (gb.q - 1) / 2;
  }
  dim_ = sd_off + z_off + 1;

  u_.resize(n_, m_);
  for (int j = 0; j < p_; ++j) u_.col(j) = design.x.col(spec_.fixed_columns[j]);
  for (const auto& gb : groups_) {
    const RandomBlocks& src = gb.grouping == "item" ? design.item : design.subj;
    for (int level = 0; level < gb.n_levels; ++level) {
      for (int k = 0; k < gb.q; ++k) {
        const int uc = p_ + gb.u_offset + level * gb.q + k;
        for (int r = 0; r < n_; ++r) {
          u_(r, uc) = src.group[r] == level ? design.x(r, gb.columns[k]) : 0.0;
        }
      }
    }
  }

  r_ = y_latent - u_.leftCols(p_) * m_beta;
  utu_ = u_.transpose() * u_;
  utr_ = u_.transpose() * r_;
  rtr_ = r_.dot(r_);
}

Phi CollapsedModel::unpack(const VectorXd& u) const {
  if (u.size() != dim_) throw std::invalid_argument("bad Phi dimension");
  Phi phi;
  int n_sd = 0, n_z = 0;
  for (const auto& gb : groups_) {
    n_sd += gb.q;
    n_z += gb.q * (gb.q - 1) / 2;
  }
  phi.sds = u.head(n_sd).array().exp();
  phi.corr_z = u.segment(n_sd, n_z);
  phi.log_sigma = u(dim_ - 1);
  return phi;
}

VectorXd CollapsedModel::pack(const Phi& phi) const {
  VectorXd u(dim_);
  int n_sd = static_cast<int>(phi.sds.size());
  u.head(n_sd) = phi.sds.array().log();
  u.segment(n_sd, phi.corr_z.size()) = phi.corr_z;
  u(dim_ - 1) = phi.log_sigma;
  return u;
}

double CollapsedModel::loglik_impl(const Phi& phi, bool dense) const {
  const double sigma2 = std::exp(2.0 * phi.log_sigma);
  if (!std::isfinite(sigma2) || sigma2 <= 0.0) {
    throw std::invalid_argument("collapsed_loglik: bad sigma at " +
                                phi_to_string(phi));
  }

  // Active columns: coefficients whose prior variance is exactly zero are
  // pinned at their prior mean and leave the model.
  std::vector<int> active;
  std::vector<double> dinv_diag_blocks;  // placeholder for fixed part
  active.reserve(m_);
  for (int j = 0; j < p_; ++j) {
    if (prior_sd_fixed_(j) > 0.0) active.push_back(j);
  }
  // Per-grouping inverse covariance block (shared across levels).
  struct BlockInv {
    std::vector<int> keep;  // active term indices within the block
    MatrixXd ginv;
    double logdet_g = 0.0;
  };
  std::vector<BlockInv> block_invs(groups_.size());
  double logdet_d = 0.0;
  for (size_t b = 0; b < groups_.size(); ++b) {
    const auto& gb = groups_[b];
    BlockInv bi;
    for (int k = 0; k < gb.q; ++k) {
      if (phi.sds(gb.sd_offset + k) > 0.0) bi.keep.push_back(k);
    }
    const int qa = static_cast<int>(bi.keep.size());
    if (qa > 0) {
      const int nz = gb.q * (gb.q - 1) / 2;
      const MatrixXd corr =
          cpc_to_corr(phi.corr_z.segment(gb.z_offset, nz).array().tanh(), gb.q);
      MatrixXd g(qa, qa);
      for (int a = 0; a < qa; ++a) {
        for (int c = 0; c < qa; ++c) {
          g(a, c) = phi.sds(gb.sd_offset + bi.keep[a]) *
                    phi.sds(gb.sd_offset + bi.keep[c]) *
                    corr(bi.keep[a], bi.keep[c]);
        }
      }
      Eigen::LLT<MatrixXd> llt(g);
      if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("collapsed_loglik: non-PD block at " +
                                    phi_to_string(phi));
      }
      const MatrixXd l = llt.matrixL();
      double ld = 0.0;
      for (int a = 0; a < qa; ++a) ld += 2.0 * std::log(l(a, a));
      bi.ginv = llt.solve(MatrixXd::Identity(qa, qa));
      bi.logdet_g = ld;
      logdet_d += gb.n_levels * ld;
    }
    for (int level = 0; level < gb.n_levels; ++level) {
      for (int k : bi.keep) {
        active.push_back(p_ + gb.u_offset + level * gb.q + k);
      }
    }
    block_invs[b] = std::move(bi);
  }
  for (int j = 0; j < p_; ++j) {
    if (prior_sd_fixed_(j) > 0.0) {
      logdet_d += 2.0 * std::log(prior_sd_fixed_(j));
    }
  }

  const int ma = static_cast<int>(active.size());
  double logdet_m = 0.0;
  double quad = rtr_;

  if (ma > 0) {
    MatrixXd m_mat(ma, ma);
    VectorXd utr_a(ma);
    const bool all_active = ma == m_;
    if (all_active) {
      m_mat = utu_;
      utr_a = utr_;
    } else {
      for (int a = 0; a < ma; ++a) {
        utr_a(a) = utr_(active[a]);
        for (int c = 0; c < ma; ++c) m_mat(a, c) = utu_(active[a], active[c]);
      }
    }
    // M = sigma^2 D^-1 + U'U, with D^-1 assembled blockwise.
    {
      int pos = 0;
      for (int j = 0; j < p_; ++j) {
        if (prior_sd_fixed_(j) > 0.0) {
          m_mat(pos, pos) +=
              sigma2 / (prior_sd_fixed_(j) * prior_sd_fixed_(j));
          ++pos;
        }
      }
      for (size_t b = 0; b < groups_.size(); ++b) {
        const auto& bi = block_invs[b];
        const int qa = static_cast<int>(bi.keep.size());
        for (int level = 0; level < groups_[b].n_levels; ++level) {
          for (int a = 0; a < qa; ++a) {
            for (int c = 0; c < qa; ++c) {
              m_mat(pos + a, pos + c) += sigma2 * bi.ginv(a, c);
            }
          }
          pos += qa;
        }
      }
    }
    if (dense) {
      // Reference route: factor the n x n covariance directly.
      MatrixXd ua(n_, ma);
      for (int a = 0; a < ma; ++a) ua.col(a) = u_.col(active[a]);
      MatrixXd d = MatrixXd::Zero(ma, ma);
      int pos = 0;
      for (int j = 0; j < p_; ++j) {
        if (prior_sd_fixed_(j) > 0.0) {
          d(pos, pos) = prior_sd_fixed_(j) * prior_sd_fixed_(j);
          ++pos;
        }
      }
      for (size_t b = 0; b < groups_.size(); ++b) {
        const auto& bi = block_invs[b];
        const int qa = static_cast<int>(bi.keep.size());
        if (qa == 0) continue;
        Eigen::LLT<MatrixXd> llt_g(bi.ginv);
        const MatrixXd g = llt_g.solve(MatrixXd::Identity(qa, qa));
        for (int level = 0; level < groups_[b].n_levels; ++level) {
          d.block(pos, pos, qa, qa) = g;
          pos += qa;
        }
      }
      MatrixXd v = ua * d * ua.transpose();
      v.diagonal().array() += sigma2;
      Eigen::LLT<MatrixXd> llt(v);
      if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("collapsed_loglik: non-PD covariance at " +
                                    phi_to_string(phi));
      }
      const MatrixXd l = llt.matrixL();
      double logdet_v = 0.0;
      for (int i = 0; i < n_; ++i) logdet_v += 2.0 * std::log(l(i, i));
      const double quad_v = r_.dot(llt.solve(r_));
      return -0.5 * (n_ * std::log(2.0 * M_PI) + logdet_v + quad_v) +
             loglik_const_;
    }
    Eigen::LLT<MatrixXd> llt(m_mat);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("collapsed_loglik: non-PD inner matrix at " +
                                  phi_to_string(phi));
    }
    const MatrixXd l = llt.matrixL();
    for (int a = 0; a < ma; ++a) logdet_m += 2.0 * std::log(l(a, a));
    quad -= utr_a.dot(llt.solve(utr_a));
  }

  const double logdet_v =
      (n_ - ma) * std::log(sigma2) + logdet_d + logdet_m;
  return -0.5 * (n_ * std::log(2.0 * M_PI) + logdet_v + quad / sigma2) +
         loglik_const_;
}

double CollapsedModel::collapsed_loglik(const Phi& phi) const {
  return loglik_impl(phi, false);
}

double CollapsedModel::collapsed_loglik_dense(const Phi& phi) const {
  return loglik_impl(phi, true);
}

double CollapsedModel::log_posterior_unconstrained(const VectorXd& u) const {
  try {
    const Phi phi = unpack(u);
    for (int i = 0; i < u.size(); ++i) {
      if (!std::isfinite(u(i))) return kNegInf;
    }
    double lp = collapsed_loglik(phi);

    const HalfNormal sd_prior{spec_.priors.sd_random_scale};
    int sd_idx = 0;
    for (const auto& gb : groups_) {
      for (int k = 0; k < gb.q; ++k, ++sd_idx) {
        const double sd = phi.sds(sd_idx);
        lp += sd_prior.log_pdf(sd) + std::log(sd);  // exp-transform Jacobian
      }
      if (gb.q > 1) {
        const int nz = gb.q * (gb.q - 1) / 2;
        lp += lkj_unconstrained_log_pdf(phi.corr_z.segment(gb.z_offset, nz),
                                        gb.q, spec_.priors.lkj_eta);
      }
    }
    const double sigma = std::exp(phi.log_sigma);
    lp += HalfNormal{spec_.priors.sd_residual_scale}.log_pdf(sigma) +
          phi.log_sigma;
    return std::isfinite(lp) ? lp : kNegInf;
  } catch (const std::exception&) {
    return kNegInf;
  }
}

VectorXd CollapsedModel::draw_unconstrained_from_prior(RngStream& rng) const {
  Phi phi;
  int n_sd = 0, n_z = 0;
  for (const auto& gb : groups_) {
    n_sd += gb.q;
    n_z += gb.q * (gb.q - 1) / 2;
  }
  phi.sds.resize(n_sd);
  phi.corr_z.resize(n_z);
  const HalfNormal sd_prior{spec_.priors.sd_random_scale};
  for (int i = 0; i < n_sd; ++i) {
    phi.sds(i) = std::max(sd_prior.sample(rng), 1e-8);
  }
  for (const auto& gb : groups_) {
    int idx = gb.z_offset;
    for (int i = 1; i < gb.q; ++i) {
      for (int j = 0; j < i; ++j) {
        const double b = lkj_cpc_beta_shape(spec_.priors.lkj_eta, gb.q, j + 1);
        const double z =
            std::clamp(2.0 * rng.beta(b, b) - 1.0, -0.999999, 0.999999);
        phi.corr_z(idx++) = std::atanh(z);
      }
    }
  }
  phi.log_sigma =
      std::log(std::max(HalfNormal{spec_.priors.sd_residual_scale}.sample(rng),
                        1e-8));
  return pack(phi);
}

PosteriorDraws CollapsedModel::run_mcmc(const McmcConfig& config,
                                        RngStream& rng) const {
  const int d = dim_;
  const int total = config.n_chains * config.n_draws;
  PosteriorDraws out;
  out.draws.resize(total, d);
  out.lp.resize(total);
  out.chain.resize(total);
  out.n_chains = config.n_chains;
  out.accept_rate.resize(config.n_chains);

  // Rough posterior mode shared by all chains: best of a few prior draws,
  // polished by a short simplex run. Removes the burn-in transient that a
  // random-walk sampler would otherwise spend most of the warmup on.
  RngStream mode_rng(rng.bits(), 0x10de);
  VectorXd mode;
  {
    double best_lp = kNegInf;
    for (int attempt = 0; attempt < config.max_init_tries; ++attempt) {
      const VectorXd u0 = draw_unconstrained_from_prior(mode_rng);
      const double lp0 = log_posterior_unconstrained(u0);
      if (lp0 > best_lp) {
        best_lp = lp0;
        mode = u0;
      }
    }
    if (!std::isfinite(best_lp)) {
      throw std::runtime_error(
          "run_mcmc: no finite initial log posterior after restarts");
    }
    NelderMeadOptions opts;
    opts.initial_step = 0.5;
    opts.max_eval = 200 * d;
    opts.f_tol = 1e-6;
    const NelderMeadResult res = nelder_mead(
        [&](const VectorXd& u) {
          const double lp = log_posterior_unconstrained(u);
          return std::isfinite(lp) ? -lp : 1e30;
        },
        mode, opts);
    if (std::isfinite(res.fmin) && -res.fmin > best_lp) mode = res.x;
  }

  // Chain state survives warmup so the sampling pass can resume from it.
  std::vector<VectorXd> chain_u(config.n_chains);
  std::vector<double> chain_lp(config.n_chains);
  std::vector<RngStream> chain_rngs;
  std::vector<double> chain_log_scale(config.n_chains, 0.0);
  VectorXd pool_mean = VectorXd::Zero(d);
  MatrixXd pool_cov = MatrixXd::Zero(d, d);
  long pool_n = 0;

  for (int c = 0; c < config.n_chains; ++c) {
    chain_rngs.emplace_back(rng.bits(), c);
    RngStream& chain_rng = chain_rngs.back();

    VectorXd u = mode;
    double lp = kNegInf;
    for (int attempt = 0; attempt < config.max_init_tries; ++attempt) {
      for (int i = 0; i < d; ++i) u(i) = mode(i) + 0.2 * chain_rng.normal();
      lp = log_posterior_unconstrained(u);
      if (std::isfinite(lp)) break;
    }
    if (!std::isfinite(lp)) {
      u = mode;
      lp = log_posterior_unconstrained(u);
    }

    // Warmup: random-walk Metropolis with running covariance adaptation and
    // a Robbins-Monro scale correction toward the target acceptance rate.
    // The initial proposal shape comes from finite-difference curvatures at
    // the mode so the adaptation starts near the right per-coordinate scale.
    MatrixXd prop_chol = MatrixXd::Identity(d, d) * (0.1 / std::sqrt(d));
    {
      const double h = 0.05;
      const double lp_mode = log_posterior_unconstrained(mode);
      for (int i = 0; i < d; ++i) {
        VectorXd up = mode, dn = mode;
        up(i) += h;
        dn(i) -= h;
        const double lp_up = log_posterior_unconstrained(up);
        const double lp_dn = log_posterior_unconstrained(dn);
        const double curv = -(lp_up - 2.0 * lp_mode + lp_dn) / (h * h);
        double sd_i = std::isfinite(curv) && curv > 1e-6
                          ? 1.0 / std::sqrt(curv)
                          : 1.0;
        prop_chol(i, i) = std::clamp(sd_i, 1e-3, 10.0);
      }
    }
    double log_scale = 0.0;
    VectorXd mean_acc = VectorXd::Zero(d);
    MatrixXd cov_acc = MatrixXd::Zero(d, d);
    long n_acc = 0;
    const double base = 2.38 / std::sqrt(static_cast<double>(d));

    auto propose = [&](const VectorXd& cur, double scale_mult) {
      VectorXd z(d);
      for (int i = 0; i < d; ++i) z(i) = chain_rng.normal();
      return VectorXd(cur + scale_mult * (prop_chol * z));
    };

    for (int iter = 0; iter < config.n_warmup; ++iter) {
      const double mult = base * std::exp(log_scale);
      const VectorXd cand = propose(u, mult);
      const double cand_lp = log_posterior_unconstrained(cand);
      const bool accept =
          std::log(chain_rng.uniform()) < cand_lp - lp;
      if (accept) {
        u = cand;
        lp = cand_lp;
      }
      const double gamma =
          std::min(0.25, 5.0 / std::pow(static_cast<double>(iter + 1), 0.7));
      log_scale += gamma * ((accept ? 1.0 : 0.0) - config.target_accept);

      if (iter == config.n_warmup / 3) {
        // Discard the transient before estimating the proposal shape.
        mean_acc.setZero();
        cov_acc.setZero();
        n_acc = 0;
      }
      ++n_acc;
      const VectorXd delta = u - mean_acc;
      mean_acc += delta / static_cast<double>(n_acc);
      cov_acc += delta * (u - mean_acc).transpose();
      if (iter >= 150 && n_acc > 3 * d && (iter % 25) == 0) {
        MatrixXd cov = cov_acc / static_cast<double>(n_acc - 1);
        cov.diagonal().array() += 1e-8;
        Eigen::LLT<MatrixXd> llt(cov);
        if (llt.info() == Eigen::Success) prop_chol = llt.matrixL();
      }
      if (iter >= config.n_warmup / 2) {
        ++pool_n;
        const VectorXd pd = u - pool_mean;
        pool_mean += pd / static_cast<double>(pool_n);
        pool_cov += pd * (u - pool_mean).transpose();
      }
    }
    chain_u[c] = u;
    chain_lp[c] = lp;
    chain_log_scale[c] = log_scale;
  }

  // One frozen proposal shared by every chain, estimated from the pooled
  // second halves of all warmup runs. A shared kernel keeps the chains
  // exchangeable, which is what split-Rhat assumes.
  MatrixXd shared_chol = MatrixXd::Identity(d, d) * (0.1 / std::sqrt(d));
  if (pool_n > 2 * d) {
    MatrixXd cov = pool_cov / static_cast<double>(pool_n - 1);
    cov.diagonal().array() += 1e-8;
    Eigen::LLT<MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) shared_chol = llt.matrixL();
  }
  std::vector<double> scales_sorted = chain_log_scale;
  std::sort(scales_sorted.begin(), scales_sorted.end());
  const double shared_log_scale = scales_sorted[scales_sorted.size() / 2];
  const double base = 2.38 / std::sqrt(static_cast<double>(d));
  const double mult = base * std::exp(shared_log_scale);

  for (int c = 0; c < config.n_chains; ++c) {
    RngStream& chain_rng = chain_rngs[c];
    VectorXd u = chain_u[c];
    double lp = chain_lp[c];
    long accepted = 0;
    const int thin = std::max(1, config.thin);
    const long total_iters = static_cast<long>(config.n_draws) * thin;
    for (long iter = 0; iter < total_iters; ++iter) {
      VectorXd z(d);
      for (int i = 0; i < d; ++i) z(i) = chain_rng.normal();
      const VectorXd cand = u + mult * (shared_chol * z);
      const double cand_lp = log_posterior_unconstrained(cand);
      if (std::log(chain_rng.uniform()) < cand_lp - lp) {
        u = cand;
        lp = cand_lp;
        ++accepted;
      }
      if ((iter + 1) % thin == 0) {
        const int row = c * config.n_draws + static_cast<int>((iter + 1) / thin) - 1;
        out.draws.row(row) = u.transpose();
        out.lp(row) = lp;
        out.chain[row] = c;
      }
    }
    out.accept_rate(c) = static_cast<double>(accepted) / total_iters;
  }

  out.rhat.resize(d);
  out.ess.resize(d);
  for (int j = 0; j < d; ++j) {
    std::vector<std::vector<double>> chains(config.n_chains);
    for (int c = 0; c < config.n_chains; ++c) {
      chains[c].resize(config.n_draws);
      for (int i = 0; i < config.n_draws; ++i) {
        chains[c][i] = out.draws(c * config.n_draws + i, j);
      }
    }
    out.rhat(j) = split_rhat(chains);
    out.ess(j) = effective_sample_size(chains);
  }
  const double max_rhat = out.rhat.maxCoeff();
  if (max_rhat > config.rhat_threshold) {
    out.converged = false;
    out.warning = "rhat=" + std::to_string(max_rhat);
  }
  if (std::getenv("CALIBRA_MCMC_DEBUG")) {
    std::ostringstream os;
    os << "mcmc d=" << d << " accept=" << out.accept_rate.transpose()
       << "\n rhat=" << out.rhat.transpose() << "\n ess=" << out.ess.transpose()
       << "\n";
    std::fputs(os.str().c_str(), stderr);
  }
  return out;
}

}  // namespace calibra
