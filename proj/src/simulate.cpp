#include "calibra/simulate.hpp"

#include <map>
#include <stdexcept>

#include "calibra/stats.hpp"

namespace calibra {

namespace {

/// Per-level random effect draws stacked into an n_levels x q matrix.
MatrixXd draw_group_effects(int n_levels, const VectorXd& sd, const MatrixXd& rho,
                            RngStream& rng) {
  const int q = static_cast<int>(sd.size());
  MatrixXd cov = sd.asDiagonal() * rho * sd.asDiagonal();
  // Zero SDs make the covariance singular; factor the positive sub-block.
  std::vector<int> active;
  for (int k = 0; k < q; ++k) {
    if (sd(k) > 0.0) active.push_back(k);
  }
  MatrixXd effects = MatrixXd::Zero(n_levels, q);
  if (active.empty()) return effects;
  MatrixXd sub(active.size(), active.size());
  for (size_t a = 0; a < active.size(); ++a) {
    for (size_t b = 0; b < active.size(); ++b) {
      sub(a, b) = cov(active[a], active[b]);
    }
  }
  Eigen::LLT<MatrixXd> llt(sub);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("random-effect covariance not positive definite");
  }
  const MatrixXd l = llt.matrixL();
  for (int g = 0; g < n_levels; ++g) {
    VectorXd zvec(active.size());
    for (int k = 0; k < zvec.size(); ++k) zvec(k) = rng.normal();
    const VectorXd b = l * zvec;
    for (size_t a = 0; a < active.size(); ++a) effects(g, active[a]) = b(a);
  }
  return effects;
}

}  // namespace

VectorXd enforce_empirical(const VectorXd& y_latent, const MatrixXd& x,
                           const VectorXd& beta_true) {
  const VectorXd beta_hat = ols(x, y_latent);
  return y_latent + x * (beta_true - beta_hat);
}

Dataset simulate(const TrialTable& trials, const DesignMatrixBundle& design,
                 const LmmParams& params, const SimulateOptions& opts,
                 RngStream& rng) {
  const long n = trials.n_rows();
  if (design.x.rows() != n) {
    throw std::invalid_argument("simulate: design does not match trials");
  }
  const int p = static_cast<int>(params.beta.size());
  if (p > design.x.cols()) {
    throw std::invalid_argument("simulate: more betas than design columns");
  }
  VectorXd y = design.x.leftCols(p) * params.beta;

  const int q_s = static_cast<int>(params.sd_subj.size());
  if (q_s > 0) {
    const MatrixXd b_subj =
        draw_group_effects(design.subj.n_levels, params.sd_subj,
                           params.rho_subj.rows() == q_s
                               ? params.rho_subj
                               : MatrixXd::Identity(q_s, q_s),
                           rng);
    for (long r = 0; r < n; ++r) {
      const int g = design.subj.group[r];
      for (int k = 0; k < q_s; ++k) {
        y(r) += design.subj.covariates(r, k) * b_subj(g, k);
      }
    }
  }
  const int q_i = static_cast<int>(params.sd_item.size());
  if (q_i > 0) {
    if (!design.has_item) {
      throw std::invalid_argument("simulate: item SDs given but design has no items");
    }
    const MatrixXd b_item =
        draw_group_effects(design.item.n_levels, params.sd_item,
                           params.rho_item.rows() == q_i
                               ? params.rho_item
                               : MatrixXd::Identity(q_i, q_i),
                           rng);
    for (long r = 0; r < n; ++r) {
      const int g = design.item.group[r];
      for (int k = 0; k < q_i; ++k) {
        y(r) += design.item.covariates(r, k) * b_item(g, k);
      }
    }
  }
  for (long r = 0; r < n; ++r) y(r) += rng.normal(0.0, params.sigma);

  if (opts.empirical) {
    MatrixXd x_emp;
    if (opts.empirical_columns.empty()) {
      x_emp = design.x.leftCols(p);
    } else {
      x_emp.resize(n, opts.empirical_columns.size());
      for (size_t j = 0; j < opts.empirical_columns.size(); ++j) {
        x_emp.col(j) = design.x.col(opts.empirical_columns[j]);
      }
    }
    y = enforce_empirical(y, x_emp, params.beta.head(x_emp.cols()));
  }

  Dataset d;
  d.trials = trials;
  d.family = params.family;
  d.y = params.family == Family::kLognormal ? y.array().exp().matrix() : y;
  return d;
}

Dataset aggregate(const Dataset& data, AggregationLevel by) {
  if (data.aggregation != AggregationLevel::kNone) {
    throw std::invalid_argument("aggregate: data is already aggregated");
  }
  if (by == AggregationLevel::kNone) return data;
  const bool by_subj = by == AggregationLevel::kBySubject;
  if (!by_subj && data.trials.n_item <= 0) {
    throw std::invalid_argument("aggregate: no item factor present");
  }
  const int n_groups = by_subj ? data.trials.n_subj : data.trials.n_item;
  const int cells = data.trials.n_cells();

  MatrixXd sums = MatrixXd::Zero(n_groups, cells);
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(n_groups, cells);
  for (long r = 0; r < data.trials.n_rows(); ++r) {
    const int g = by_subj ? data.trials.subj[r] : data.trials.item[r];
    const int c = data.trials.cell[r];
    sums(g, c) += data.y(r);
    counts(g, c) += 1;
  }

  Dataset out;
  out.family = data.family;
  out.aggregation = by;
  out.trials.factors = data.trials.factors;
  out.trials.n_subj = by_subj ? n_groups : 0;
  out.trials.n_item = by_subj ? 0 : n_groups;
  std::vector<double> ys;
  for (int g = 0; g < n_groups; ++g) {
    for (int c = 0; c < cells; ++c) {
      if (counts(g, c) == 0) {
        throw std::invalid_argument("aggregate: empty group x condition cell");
      }
      out.trials.subj.push_back(by_subj ? g : -1);
      out.trials.item.push_back(by_subj ? -1 : g);
      out.trials.cell.push_back(c);
      out.trials.replicate.push_back(0);
      ys.push_back(sums(g, c) / counts(g, c));
    }
  }
  out.y = Eigen::Map<VectorXd>(ys.data(), ys.size());
  return out;
}

}  // namespace calibra
