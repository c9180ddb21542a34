#include "calibra/freq.hpp"

#include <cmath>
#include <stdexcept>

#include "calibra/optim.hpp"
#include "calibra/stats.hpp"

namespace calibra {

namespace {

struct LmmWork {
  MatrixXd x;           // n x p fixed design
  MatrixXd u;           // n x m random-effect columns
  std::vector<int> term_of_col;  // U column -> variance index
  int n_vc = 0;         // number of distinct random variances
  VectorXd y;
  int n_subj = 1;

  MatrixXd xtx, utx, utu;
  VectorXd xty, uty;
  double yty = 0.0;
};

/// Profiled ML log likelihood at theta = (log sds..., log sigma); also
/// returns the GLS coefficients and their covariance.
double profiled_loglik(const LmmWork& w, const VectorXd& theta,
                       VectorXd* beta_out = nullptr,
                       MatrixXd* cov_out = nullptr) {
  const int p = static_cast<int>(w.x.cols());
  const int m = static_cast<int>(w.u.cols());
  const long n = w.y.size();
  const double sigma2 = std::exp(2.0 * theta(w.n_vc));

  MatrixXd xtvx;
  VectorXd xtvy;
  double ytvy, logdet_v;
  if (m > 0) {
    MatrixXd m_mat = w.utu;
    double logdet_d = 0.0;
    for (int j = 0; j < m; ++j) {
      const double var_j = std::exp(2.0 * theta(w.term_of_col[j]));
      m_mat(j, j) += sigma2 / var_j;
      logdet_d += std::log(var_j);
    }
    Eigen::LLT<MatrixXd> llt(m_mat);
    if (llt.info() != Eigen::Success) return kNegInf;
    double logdet_m = 0.0;
    const MatrixXd l = llt.matrixL();
    for (int j = 0; j < m; ++j) logdet_m += 2.0 * std::log(l(j, j));
    logdet_v = (n - m) * std::log(sigma2) + logdet_d + logdet_m;
    const MatrixXd sol_x = llt.solve(w.utx);
    const VectorXd sol_y = llt.solve(w.uty);
    xtvx = (w.xtx - w.utx.transpose() * sol_x) / sigma2;
    xtvy = (w.xty - w.utx.transpose() * sol_y) / sigma2;
    ytvy = (w.yty - w.uty.dot(sol_y)) / sigma2;
  } else {
    logdet_v = n * std::log(sigma2);
    xtvx = w.xtx / sigma2;
    xtvy = w.xty / sigma2;
    ytvy = w.yty / sigma2;
  }
  Eigen::LLT<MatrixXd> llt_b(xtvx);
  if (llt_b.info() != Eigen::Success) return kNegInf;
  const VectorXd beta = llt_b.solve(xtvy);
  const double quad = ytvy - beta.dot(xtvy);
  if (beta_out) *beta_out = beta;
  if (cov_out) *cov_out = llt_b.solve(MatrixXd::Identity(p, p));
  return -0.5 * (n * std::log(2.0 * M_PI) + logdet_v + quad);
}

LmmWork build_work(const Dataset& data, const DesignMatrixBundle& design,
                   const FreqModelSpec& spec) {
  LmmWork w;
  const long n = data.y.size();
  w.y.resize(n);
  if (spec.family == Family::kLognormal) {
    for (long i = 0; i < n; ++i) {
      if (data.y(i) <= 0.0) {
        throw std::invalid_argument("lognormal fit requires positive responses");
      }
      w.y(i) = std::log(data.y(i));
    }
  } else {
    w.y = data.y;
  }

  const int p = static_cast<int>(spec.fixed_columns.size());
  w.x.resize(n, p);
  for (int j = 0; j < p; ++j) w.x.col(j) = design.x.col(spec.fixed_columns[j]);
  w.n_subj = design.subj.n_levels;

  int m = 0;
  for (const auto& rb : spec.random_blocks) {
    const RandomBlocks& src = rb.grouping == "item" ? design.item : design.subj;
    m += static_cast<int>(rb.columns.size()) * src.n_levels;
  }
  w.u.resize(n, m);
  int col = 0;
  for (const auto& rb : spec.random_blocks) {
    const RandomBlocks& src = rb.grouping == "item" ? design.item : design.subj;
    for (int k : rb.columns) {
      for (int level = 0; level < src.n_levels; ++level) {
        for (long r = 0; r < n; ++r) {
          w.u(r, col) = src.group[r] == level ? design.x(r, k) : 0.0;
        }
        w.term_of_col.push_back(w.n_vc);
        ++col;
      }
      ++w.n_vc;
    }
  }

  w.xtx = w.x.transpose() * w.x;
  w.xty = w.x.transpose() * w.y;
  w.yty = w.y.dot(w.y);
  if (m > 0) {
    w.utx = w.u.transpose() * w.x;
    w.uty = w.u.transpose() * w.y;
    w.utu = w.u.transpose() * w.u;
  }
  return w;
}

}  // namespace

double lmm_profiled_loglik(const Dataset& data,
                           const DesignMatrixBundle& design,
                           const FreqModelSpec& spec,
                           const Eigen::VectorXd& theta) {
  return profiled_loglik(build_work(data, design, spec), theta);
}

FreqFit lmm_ml_fit(const Dataset& data, const DesignMatrixBundle& design,
                   const FreqModelSpec& spec, RngStream& rng, int n_restarts) {
  LmmWork w = build_work(data, design, spec);
  const long n = w.y.size();
  const int p = static_cast<int>(w.x.cols());

  const int d = w.n_vc + 1;
  const double sd_y = std::max(sample_sd(std::span<const double>(
                                   w.y.data(), static_cast<size_t>(n))),
                               1e-6);
  auto objective = [&](const VectorXd& theta) {
    for (int i = 0; i < theta.size(); ++i) {
      if (!std::isfinite(theta(i)) || theta(i) > 30.0) return 1e30;
    }
    const double ll = profiled_loglik(w, theta);
    return std::isfinite(ll) ? -ll : 1e30;
  };

  NelderMeadResult best;
  best.fmin = 1e300;
  for (int restart = 0; restart < n_restarts; ++restart) {
    VectorXd theta0(d);
    for (int i = 0; i < d; ++i) {
      theta0(i) = std::log(sd_y) +
                  (restart == 0 ? (i == d - 1 ? 0.0 : -1.0)
                                : rng.normal(0.0, 1.5));
    }
    NelderMeadOptions opts;
    opts.initial_step = 0.8;
    opts.max_eval = 2000;
    const NelderMeadResult r = nelder_mead(objective, theta0, opts);
    if (r.fmin < best.fmin) best = r;
  }

  FreqFit fit;
  fit.converged = best.converged && best.fmin < 1e29;
  VectorXd beta;
  MatrixXd cov;
  fit.loglik = profiled_loglik(w, best.x, &beta, &cov);
  fit.beta_hat = beta;
  fit.vc_hat.resize(d);
  for (int i = 0; i < d; ++i) fit.vc_hat(i) = std::exp(best.x(i));
  fit.se.resize(p);
  fit.t.resize(p);
  fit.p.resize(p);
  // t degrees of freedom: smallest grouping with random effects minus one
  // (n_subj - 1 for subject-only models); residual df without random terms.
  int min_levels = 0;
  for (const auto& rb : spec.random_blocks) {
    const int levels =
        rb.grouping == "item" ? design.item.n_levels : design.subj.n_levels;
    min_levels = min_levels == 0 ? levels : std::min(min_levels, levels);
  }
  fit.df = min_levels > 0 ? std::max(1, min_levels - 1)
                          : std::max<long>(1, n - p);
  for (int j = 0; j < p; ++j) {
    fit.se(j) = std::sqrt(std::max(cov(j, j), 0.0));
    fit.t(j) = fit.se(j) > 0.0 ? fit.beta_hat(j) / fit.se(j) : 0.0;
    fit.p(j) = t_test_p_value(fit.t(j), fit.df);
  }
  return fit;
}

AnovaF rm_anova_f(const Dataset& aggregated) {
  const TrialTable& tr = aggregated.trials;
  if (tr.factors.size() != 1) {
    throw std::invalid_argument("rm_anova_f: one-factor designs only");
  }
  if (aggregated.aggregation == AggregationLevel::kNone) {
    throw std::invalid_argument("rm_anova_f: aggregated table required");
  }
  const bool by_subj = aggregated.aggregation == AggregationLevel::kBySubject;
  const int ng = by_subj ? tr.n_subj : tr.n_item;
  const int alpha = tr.factors[0].n_levels();
  MatrixXd cellmat = MatrixXd::Constant(ng, alpha, std::nan(""));
  for (long r = 0; r < tr.n_rows(); ++r) {
    const int g = by_subj ? tr.subj[r] : tr.item[r];
    cellmat(g, tr.cell[r]) = aggregated.y(r);
  }
  if (cellmat.hasNaN()) {
    throw std::invalid_argument("rm_anova_f: missing cells");
  }
  const double grand = cellmat.mean();
  const VectorXd cond_means = cellmat.colwise().mean();
  const VectorXd group_means = cellmat.rowwise().mean();
  double ss_cond = 0.0;
  for (int c = 0; c < alpha; ++c) {
    ss_cond += ng * (cond_means(c) - grand) * (cond_means(c) - grand);
  }
  double ss_err = 0.0;
  for (int g = 0; g < ng; ++g) {
    for (int c = 0; c < alpha; ++c) {
      const double resid =
          cellmat(g, c) - cond_means(c) - group_means(g) + grand;
      ss_err += resid * resid;
    }
  }
  AnovaF out;
  out.df_num = alpha - 1.0;
  out.df_den = (alpha - 1.0) * (ng - 1.0);
  const double ms_cond = ss_cond / out.df_num;
  const double ms_err = ss_err / out.df_den;
  out.f = ms_err > 0.0 ? ms_cond / ms_err : 0.0;
  return out;
}

MinFResult min_f(double f1, double df1_den, double f2, double df2_den) {
  if (f1 < 0.0 || f2 < 0.0) {
    throw std::invalid_argument("min_f: F statistics must be >= 0");
  }
  MinFResult r;
  if (f1 + f2 == 0.0) {
    r.min_f = 0.0;
    r.df_den.reset();
    return r;
  }
  r.min_f = f1 * f2 / (f1 + f2);
  r.df_den = (f1 + f2) * (f1 + f2) /
             (f1 * f1 / df2_den + f2 * f2 / df1_den);
  return r;
}

}  // namespace calibra
