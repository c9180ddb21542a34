#include "calibra/jzs.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "calibra/quadrature.hpp"
#include "calibra/stats.hpp"

namespace calibra {

namespace {

std::vector<std::string> split_label(const std::string& label) {
  std::vector<std::string> parts;
  std::stringstream ss(label);
  std::string part;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  return parts;
}

double sichisq_log_pdf(double g, double scale) {
  return ScaledInvChiSq{1.0, scale}.log_pdf(g);
}

}  // namespace

QMatrix qmatrix(int alpha) {
  if (alpha < 2) throw std::invalid_argument("qmatrix: alpha >= 2 required");
  QMatrix qm;
  qm.alpha = alpha;
  qm.q = MatrixXd::Zero(alpha, alpha - 1);
  // Unit-norm Helmert basis: orthonormal and orthogonal to the ones vector,
  // hence eigenvectors of I - J/alpha with eigenvalue one.
  for (int k = 0; k < alpha - 1; ++k) {
    const double norm = std::sqrt(static_cast<double>(k + 1) * (k + 2));
    for (int j = 0; j <= k; ++j) qm.q(j, k) = 1.0 / norm;
    qm.q(k + 1, k) = -(k + 1.0) / norm;
  }
  return qm;
}

JzsMarginal::JzsMarginal(const VectorXd& y, const JzsModel& model) {
  n_ = model.n;
  if (y.size() != n_) throw std::invalid_argument("JzsMarginal: y size mismatch");
  yty_ = y.dot(y);
  sum_y_ = y.sum();
  int m = 0;
  for (const auto& t : model.terms) {
    if (t.x.rows() != n_) {
      throw std::invalid_argument("JzsMarginal: term rows mismatch");
    }
    sizes_.push_back(static_cast<int>(t.x.cols()));
    m += sizes_.back();
  }
  MatrixXd u(n_, m);
  int off = 0;
  for (const auto& t : model.terms) {
    u.middleCols(off, t.x.cols()) = t.x;
    off += static_cast<int>(t.x.cols());
  }
  utu_ = u.transpose() * u;
  uty_ = u.transpose() * y;
  ut1_ = u.colwise().sum().transpose();
}

double JzsMarginal::log_ml(const VectorXd& g) const {
  const int n_terms = static_cast<int>(sizes_.size());
  if (g.size() != n_terms) throw std::invalid_argument("log_ml: g size mismatch");
  for (int f = 0; f < n_terms; ++f) {
    if (!(g(f) > 0.0) || !std::isfinite(g(f))) {
      throw std::invalid_argument("log_ml: g must be finite positive");
    }
  }
  const int m = static_cast<int>(utu_.rows());
  double a, b, ymy, logdet_v;
  if (m == 0) {
    a = static_cast<double>(n_);
    b = sum_y_;
    ymy = yty_;
    logdet_v = 0.0;
  } else {
    // V = I + U diag(g per column) U'; Woodbury through M = D^-1 + U'U.
    MatrixXd m_mat = utu_;
    double logdet_d = 0.0;
    int pos = 0;
    for (int f = 0; f < n_terms; ++f) {
      for (int k = 0; k < sizes_[f]; ++k, ++pos) {
        m_mat(pos, pos) += 1.0 / g(f);
        logdet_d += std::log(g(f));
      }
    }
    Eigen::LLT<MatrixXd> llt(m_mat);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("jzs_logml: singular covariance");
    }
    double logdet_m = 0.0;
    const MatrixXd l = llt.matrixL();
    for (int i = 0; i < m; ++i) logdet_m += 2.0 * std::log(l(i, i));
    logdet_v = logdet_d + logdet_m;
    const VectorXd my = llt.solve(uty_);
    const VectorXd m1 = llt.solve(ut1_);
    ymy = yty_ - uty_.dot(my);
    a = n_ - ut1_.dot(m1);
    b = sum_y_ - ut1_.dot(my);
  }
  const double q = ymy - b * b / a;
  const double nm1 = static_cast<double>(n_ - 1);
  return -0.5 * nm1 * std::log(2.0 * M_PI) - 0.5 * logdet_v -
         0.5 * std::log(a) + lgamma_fn(0.5 * nm1) -
         0.5 * nm1 * std::log(0.5 * q);
}

double jzs_logml(const VectorXd& y, const JzsModel& model, const VectorXd& g) {
  return JzsMarginal(y, model).log_ml(g);
}

MatrixXd jzs_term_block(const TrialTable& trials, const std::string& label) {
  const long n = trials.n_rows();
  const auto parts = split_label(label);
  // Factor parts are Q-transformed cell patterns; grouping parts ("subj",
  // "item") stay plain indicators.
  MatrixXd block = MatrixXd::Ones(n, 1);
  for (const auto& part : parts) {
    MatrixXd piece;
    if (part == "subj" || part == "item") {
      const bool is_subj = part == "subj";
      const int levels = is_subj ? trials.n_subj : trials.n_item;
      if (levels <= 0) {
        throw std::invalid_argument("term '" + label + "': no " + part +
                                    " grouping in the data");
      }
      piece = MatrixXd::Zero(n, levels);
      for (long r = 0; r < n; ++r) {
        const int gidx = is_subj ? trials.subj[r] : trials.item[r];
        piece(r, gidx) = 1.0;
      }
    } else {
      int fidx = -1;
      for (size_t f = 0; f < trials.factors.size(); ++f) {
        if (trials.factors[f].name == part) fidx = static_cast<int>(f);
      }
      if (fidx < 0) throw std::invalid_argument("unknown factor '" + part + "'");
      const int alpha = trials.factors[fidx].n_levels();
      const MatrixXd q = qmatrix(alpha).q;
      piece.resize(n, alpha - 1);
      for (long r = 0; r < n; ++r) {
        const int level = trials.level_of(trials.cell[r], fidx);
        piece.row(r) = q.row(level);
      }
    }
    // Columnwise product expansion (khatri-rao over rows).
    MatrixXd next(n, block.cols() * piece.cols());
    for (int a = 0; a < block.cols(); ++a) {
      for (int b = 0; b < piece.cols(); ++b) {
        next.col(a * piece.cols() + b) =
            block.col(a).cwiseProduct(piece.col(b));
      }
    }
    block = std::move(next);
  }
  return block;
}

// ---------------------------------------------------------------------------
// Balanced subject-only fast path
// ---------------------------------------------------------------------------

namespace {

/// Marginal evaluator exploiting the S x C x R structure of a balanced
/// subject-only design: V is block diagonal in the subject-mean /
/// subject-deviation / replicate-deviation basis, with C x C blocks.
class BalancedMarginal {
 public:
  static std::unique_ptr<BalancedMarginal> try_build(const Dataset& data,
                                                     const JzsModel& model);

  double log_ml(const VectorXd& g) const {
    const int c = static_cast<int>(fixed_pat_.front().rows());
    MatrixXd f = MatrixXd::Zero(c, c);
    MatrixXd w = MatrixXd::Zero(c, c);
    for (size_t t = 0; t < fixed_pat_.size(); ++t) {
      if (fixed_term_g_[t] >= 0) {
        f += g(fixed_term_g_[t]) * fixed_pat_[t] * fixed_pat_[t].transpose();
      }
    }
    for (size_t t = 0; t < rand_pat_.size(); ++t) {
      w += g(rand_term_g_[t]) * rand_pat_[t] * rand_pat_[t].transpose();
    }
    const double sr = static_cast<double>(s_) * r_;
    MatrixXd b_mean = MatrixXd::Identity(c, c) + sr * f + r_ * w;
    MatrixXd b_dev = MatrixXd::Identity(c, c) + r_ * w;
    Eigen::LLT<MatrixXd> llt_mean(b_mean), llt_dev(b_dev);
    if (llt_mean.info() != Eigen::Success || llt_dev.info() != Eigen::Success) {
      throw std::runtime_error("balanced jzs: singular covariance");
    }
    double logdet = 0.0;
    for (int i = 0; i < c; ++i) {
      logdet += 2.0 * std::log(MatrixXd(llt_mean.matrixL())(i, i));
      logdet += 2.0 * (s_ - 1) * std::log(MatrixXd(llt_dev.matrixL())(i, i));
    }
    const VectorXd bm_a = llt_mean.solve(a_);
    const VectorXd bm_1 = llt_mean.solve(VectorXd::Ones(c));
    const double yvy =
        a_.dot(bm_a) + (llt_dev.solve(e_)).trace() + yy_dev_;
    const double quad_a = sr * bm_1.sum();
    const double quad_b = std::sqrt(sr) * bm_a.sum();
    const double q = yvy - quad_b * quad_b / quad_a;
    const double nm1 = static_cast<double>(n_ - 1);
    return -0.5 * nm1 * std::log(2.0 * M_PI) - 0.5 * logdet -
           0.5 * std::log(quad_a) + lgamma_fn(0.5 * nm1) -
           0.5 * nm1 * std::log(0.5 * q);
  }

 private:
  long n_ = 0;
  int s_ = 0;
  double r_ = 0.0;
  VectorXd a_;      // subject-mean projection of y, length C
  MatrixXd e_;      // subject-deviation scatter, C x C
  double yy_dev_ = 0.0;
  std::vector<MatrixXd> fixed_pat_;  // per-cell patterns, C x k
  std::vector<int> fixed_term_g_;
  std::vector<MatrixXd> rand_pat_;
  std::vector<int> rand_term_g_;
};

std::unique_ptr<BalancedMarginal> BalancedMarginal::try_build(
    const Dataset& data, const JzsModel& model) {
  const TrialTable& tr = data.trials;
  if (tr.n_item > 0) return nullptr;
  const int s = tr.n_subj;
  const int c = tr.n_cells();
  const long n = tr.n_rows();
  if (s < 2 || n % (static_cast<long>(s) * c) != 0) return nullptr;
  const long reps = n / (static_cast<long>(s) * c);
  // Balance check: every (subject, cell) must occur exactly `reps` times.
  std::vector<int> counts(static_cast<size_t>(s) * c, 0);
  for (long r = 0; r < n; ++r) {
    counts[static_cast<size_t>(tr.subj[r]) * c + tr.cell[r]]++;
  }
  for (int v : counts) {
    if (v != reps) return nullptr;
  }

  auto bm = std::make_unique<BalancedMarginal>();
  bm->n_ = n;
  bm->s_ = s;
  bm->r_ = static_cast<double>(reps);

  // Per-cell patterns for each term; terms whose columns are not constant
  // within (subject, cell) disqualify the fast path.
  int g_index = 0;
  for (const auto& term : model.terms) {
    const auto parts = split_label(term.label);
    bool has_subj = false;
    for (const auto& p : parts) {
      if (p == "item") return nullptr;
      if (p == "subj") has_subj = true;
    }
    // Column extraction below assumes pattern-major layout, i.e. the
    // grouping is the last label part.
    if (has_subj && parts.back() != "subj") return nullptr;
    // Recover the per-cell pattern from the first subject's rows.
    MatrixXd pat = MatrixXd::Zero(c, term.x.cols());
    std::vector<bool> seen(c, false);
    for (long r = 0; r < n; ++r) {
      if (tr.subj[r] != 0) continue;
      const int cell = tr.cell[r];
      if (!seen[cell]) {
        pat.row(cell) = term.x.row(r);
        seen[cell] = true;
      }
    }
    if (has_subj) {
      // Columns belong to (pattern, subject) pairs; keep the pattern part.
      // Column layout from jzs_term_block: pattern-major over subjects.
      const int k = static_cast<int>(term.x.cols()) / s;
      MatrixXd sub(c, k);
      for (int j = 0; j < k; ++j) sub.col(j) = pat.col(j * s + 0);
      bm->rand_pat_.push_back(sub);
      bm->rand_term_g_.push_back(g_index);
    } else {
      bm->fixed_pat_.push_back(pat);
      bm->fixed_term_g_.push_back(g_index);
    }
    ++g_index;
  }
  if (bm->fixed_pat_.empty()) {
    bm->fixed_pat_.push_back(MatrixXd::Zero(c, 1));
    bm->fixed_term_g_.push_back(-1);
  }

  // Projections of y.
  MatrixXd m = MatrixXd::Zero(s, c);
  double yty = 0.0;
  for (long r = 0; r < n; ++r) {
    m(tr.subj[r], tr.cell[r]) += data.y(r);
    yty += data.y(r) * data.y(r);
  }
  m /= std::sqrt(bm->r_);  // sqrt(R) * per-cell mean
  bm->a_ = m.colwise().sum().transpose() / std::sqrt(static_cast<double>(s));
  bm->e_ = m.transpose() * m - bm->a_ * bm->a_.transpose();
  bm->yy_dev_ = yty - m.squaredNorm();
  return bm;
}

struct LogMlIntegral {
  double log_ml = 0.0;
  double mc_se = 0.0;
  bool quadrature = true;
};

template <typename Eval>
LogMlIntegral integrate_g(const Eval& eval, const std::vector<double>& scales,
                          const GIntegrationConfig& config, RngStream& rng) {
  LogMlIntegral out;
  const int k = static_cast<int>(scales.size());
  if (k == 0) {
    out.log_ml = eval(VectorXd());
    return out;
  }
  auto guarded = [&](const VectorXd& gv) {
    for (int i = 0; i < gv.size(); ++i) {
      if (!(gv(i) > 0.0) || !(gv(i) < 1e250)) return kNegInf;
    }
    try {
      return eval(gv);
    } catch (const std::exception&) {
      return kNegInf;
    }
  };
  if (k == 1) {
    out.log_ml = log_integrate([&](double t) {
      const double g = std::exp(t);
      VectorXd gv(1);
      gv(0) = g;
      const double v = guarded(gv);
      return v == kNegInf ? kNegInf : v + sichisq_log_pdf(g, scales[0]) + t;
    });
    return out;
  }
  if (k == 2) {
    out.log_ml = log_integrate_2d([&](double t0, double t1) {
      VectorXd gv(2);
      gv(0) = std::exp(t0);
      gv(1) = std::exp(t1);
      const double v = guarded(gv);
      return v == kNegInf ? kNegInf
                          : v + sichisq_log_pdf(gv(0), scales[0]) + t0 +
                                sichisq_log_pdf(gv(1), scales[1]) + t1;
    });
    return out;
  }
  // Monte Carlo from the g prior.
  out.quadrature = false;
  const long nd = config.n_mc_draws;
  std::vector<double> logs(nd);
  VectorXd gv(k);
  for (long i = 0; i < nd; ++i) {
    for (int f = 0; f < k; ++f) {
      gv(f) = ScaledInvChiSq{1.0, scales[f]}.sample(rng);
    }
    logs[i] = eval(gv);
  }
  const double lme = log_mean_exp(logs);
  out.log_ml = lme;
  // Relative MC error of the mean of exp(logs).
  double var = 0.0;
  for (double l : logs) {
    const double w = std::exp(l - lme);  // weight relative to the mean
    var += (w - 1.0) * (w - 1.0);
  }
  var /= static_cast<double>(nd - 1);
  out.mc_se = std::sqrt(var / static_cast<double>(nd));
  return out;
}

}  // namespace

JzsBfResult jzs_anova_bf(const Dataset& data, const JzsAnovaSpec& spec,
                         const GIntegrationConfig& config, RngStream& rng) {
  for (const auto& t : spec.test_terms) {
    if (std::find(spec.fixed_terms.begin(), spec.fixed_terms.end(), t) ==
        spec.fixed_terms.end()) {
      throw std::invalid_argument("test term '" + t + "' not in fixed terms");
    }
  }
  auto build_model = [&](bool null_model) {
    JzsModel m;
    m.n = data.trials.n_rows();
    for (const auto& label : spec.fixed_terms) {
      if (null_model &&
          std::find(spec.test_terms.begin(), spec.test_terms.end(), label) !=
              spec.test_terms.end()) {
        continue;
      }
      m.terms.push_back(
          {label, jzs_term_block(data.trials, label), spec.scales.fixed_scale});
    }
    for (const auto& label : spec.random_terms) {
      m.terms.push_back(
          {label, jzs_term_block(data.trials, label), spec.scales.random_scale});
    }
    return m;
  };

  auto marginal = [&](const JzsModel& model, RngStream& mc_rng) {
    std::vector<double> scales;
    for (const auto& t : model.terms) scales.push_back(t.g_scale);
    auto fast = config.force_generic
                    ? nullptr
                    : BalancedMarginal::try_build(data, model);
    if (fast) {
      return integrate_g([&](const VectorXd& g) { return fast->log_ml(g); },
                         scales, config, mc_rng);
    }
    JzsMarginal slow(data.y, model);
    return integrate_g([&](const VectorXd& g) { return slow.log_ml(g); },
                       scales, config, mc_rng);
  };

  RngStream rng_full(rng.bits()), rng_null(rng.bits());
  const JzsModel full = build_model(false);
  const JzsModel null = build_model(true);
  const LogMlIntegral ml1 = marginal(full, rng_full);
  const LogMlIntegral ml0 = marginal(null, rng_null);

  JzsBfResult res;
  res.comparison = bayes_factor(ml1.log_ml, ml0.log_ml, spec.prior_p1);
  res.mc_se_log_bf = std::sqrt(ml1.mc_se * ml1.mc_se + ml0.mc_se * ml0.mc_se);
  res.method = ml1.quadrature && ml0.quadrature ? "quadrature" : "monte-carlo";
  if (res.mc_se_log_bf > config.mc_se_warn) {
    res.warnings.push_back("mc se of log BF = " +
                           std::to_string(res.mc_se_log_bf));
  }
  return res;
}

ModelComparison jzs_ttest_bf(std::span<const double> x, double scale,
                             double prior_p1) {
  const int n = static_cast<int>(x.size());
  if (n < 2) throw std::invalid_argument("jzs_ttest_bf: n >= 2 required");
  const double m = mean(x);
  const double sd = sample_sd(x);
  if (!(sd > 0.0)) throw std::invalid_argument("jzs_ttest_bf: zero variance");
  const double t = m / (sd / std::sqrt(static_cast<double>(n)));
  const double nu = n - 1.0;
  const double t2 = t * t;

  const double log_null = -0.5 * (nu + 1.0) * std::log1p(t2 / nu);
  const double log_alt = log_integrate([&](double lg) {
    const double g = std::exp(lg);
    if (!(g > 0.0) || !std::isfinite(g)) return kNegInf;
    const double c = 1.0 + n * g;
    return -0.5 * std::log(c) -
           0.5 * (nu + 1.0) * std::log1p(t2 / (c * nu)) +
           sichisq_log_pdf(g, scale) + lg;
  });
  return bayes_factor(log_alt, log_null, prior_p1);
}

ModelComparison jzs_linreg_bf(std::span<const double> x,
                              std::span<const double> y, double scale,
                              double prior_p1) {
  const int n = static_cast<int>(x.size());
  if (n < 3 || y.size() != x.size()) {
    throw std::invalid_argument("jzs_linreg_bf: need n >= 3 paired values");
  }
  const double mx = mean(x);
  double vx = 0.0;
  for (double xi : x) vx += (xi - mx) * (xi - mx);
  vx /= n;
  if (!(vx > 0.0)) throw std::invalid_argument("jzs_linreg_bf: constant covariate");

  VectorXd yv(n);
  for (int i = 0; i < n; ++i) yv(i) = y[i];
  JzsModel model;
  model.n = n;
  JzsTerm term;
  term.label = "x";
  term.x.resize(n, 1);
  for (int i = 0; i < n; ++i) term.x(i, 0) = (x[i] - mx) / std::sqrt(vx);
  term.g_scale = scale;
  model.terms.push_back(term);

  // Exact collinearity: the alternative's marginal diverges and the
  // evidence against the null is unbounded.
  {
    const VectorXd xt = term.x.col(0);
    const double ybar = yv.mean();
    const VectorXd yc = yv.array() - ybar;
    const double sxy = xt.dot(yc);
    const double sxx = xt.dot(xt);
    const double resid_ss = yc.squaredNorm() - sxy * sxy / sxx;
    if (resid_ss <= 1e-12 * std::max(yc.squaredNorm(), 1e-300)) {
      ModelComparison cmp;
      cmp.log_bf10 = std::numeric_limits<double>::infinity();
      cmp.bf10 = std::numeric_limits<double>::infinity();
      cmp.prior_p1 = prior_p1;
      cmp.post_p1 = 1.0;
      return cmp;
    }
  }

  JzsMarginal marg(yv, model);
  const double log_alt = log_integrate([&](double lg) {
    VectorXd g(1);
    g(0) = std::exp(lg);
    if (!(g(0) > 0.0) || !(g(0) < 1e250)) return kNegInf;
    try {
      return marg.log_ml(g) + sichisq_log_pdf(g(0), scale) + lg;
    } catch (const std::exception&) {
      return kNegInf;
    }
  });
  const double log_null = jzs_logml(yv, JzsModel{{}, n}, VectorXd());
  return bayes_factor(log_alt, log_null, prior_p1);
}

}  // namespace calibra
