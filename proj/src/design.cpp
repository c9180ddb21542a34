#include "calibra/design.hpp"

#include <set>
#include <stdexcept>

#include "calibra/stats.hpp"

namespace calibra {

void FactorSpec::validate() const {
  if (levels.size() < 2) {
    throw std::invalid_argument("factor '" + name + "' needs >= 2 levels");
  }
  std::set<std::string> uniq(levels.begin(), levels.end());
  if (uniq.size() != levels.size()) {
    throw std::invalid_argument("factor '" + name + "' has duplicate levels");
  }
}

int DesignSpec::n_cells() const {
  int c = 1;
  for (const auto& f : factors) c *= f.n_levels();
  return c;
}

long DesignSpec::expected_rows() const {
  if (assignment == Assignment::kLatinSquare) {
    return static_cast<long>(n_subj) * n_item * n_rep;
  }
  long rows = static_cast<long>(n_subj) * n_cells() * n_rep;
  if (n_item > 0) rows *= n_item;
  return rows;
}

void DesignSpec::validate() const {
  if (factors.empty()) throw std::invalid_argument("design has no factors");
  for (const auto& f : factors) f.validate();
  if (n_subj < 1) throw std::invalid_argument("n_subj must be >= 1");
  if (n_rep < 1) throw std::invalid_argument("n_rep must be >= 1");
  if (assignment == Assignment::kLatinSquare) {
    if (n_item < 1) {
      throw std::invalid_argument("latin-square design needs items");
    }
    if (n_item % n_cells() != 0) {
      throw std::invalid_argument(
          "latin-square design needs n_item divisible by the number of "
          "condition cells");
    }
  }
}

int TrialTable::n_cells() const {
  int c = 1;
  for (const auto& f : factors) c *= f.n_levels();
  return c;
}

int TrialTable::level_of(int cell_index, int factor_index) const {
  // Cells enumerate factor levels row-major: the last factor varies fastest.
  int div = 1;
  for (int f = static_cast<int>(factors.size()) - 1; f > factor_index; --f) {
    div *= factors[f].n_levels();
  }
  return (cell_index / div) % factors[factor_index].n_levels();
}

TrialTable build_trial_table(const DesignSpec& spec, RngStream& /*rng*/) {
  spec.validate();
  TrialTable t;
  t.factors = spec.factors;
  t.n_subj = spec.n_subj;
  t.n_item = spec.n_item;
  const int cells = spec.n_cells();

  if (spec.assignment == Assignment::kLatinSquare) {
    // Items are split into `cells` groups by index order; the group-to-cell
    // assignment rotates with the subject index.
    const int per_group = spec.n_item / cells;
    for (int s = 0; s < spec.n_subj; ++s) {
      for (int i = 0; i < spec.n_item; ++i) {
        const int group = i / per_group;
        const int cell = (group + s) % cells;
        for (int r = 0; r < spec.n_rep; ++r) {
          t.subj.push_back(s);
          t.item.push_back(i);
          t.cell.push_back(cell);
          t.replicate.push_back(r);
        }
      }
    }
    return t;
  }

  for (int s = 0; s < spec.n_subj; ++s) {
    for (int c = 0; c < cells; ++c) {
      if (spec.n_item > 0) {
        for (int i = 0; i < spec.n_item; ++i) {
          for (int r = 0; r < spec.n_rep; ++r) {
            t.subj.push_back(s);
            t.item.push_back(i);
            t.cell.push_back(c);
            t.replicate.push_back(r);
          }
        }
      } else {
        for (int r = 0; r < spec.n_rep; ++r) {
          t.subj.push_back(s);
          t.item.push_back(-1);
          t.cell.push_back(c);
          t.replicate.push_back(r);
        }
      }
    }
  }
  return t;
}

MatrixXd hypothesis_matrix(const ContrastScheme& scheme, int alpha) {
  if (alpha < 2) throw std::invalid_argument("contrast needs alpha >= 2");
  MatrixXd h(alpha, alpha);
  h.row(0).setConstant(1.0 / alpha);  // grand-mean intercept row
  switch (scheme.kind) {
    case ContrastKind::kTreatmentGrandMean: {
      // Hypotheses: level k+1 minus level 1, k = 1..alpha-1.
      for (int k = 1; k < alpha; ++k) {
        h.row(k).setZero();
        h(k, 0) = -1.0;
        h(k, k) = 1.0;
      }
      break;
    }
    case ContrastKind::kHypothesisMatrix: {
      if (!scheme.hypothesis_rows) {
        throw std::invalid_argument("hypothesis scheme without rows");
      }
      const MatrixXd& rows = *scheme.hypothesis_rows;
      if (rows.rows() != alpha - 1 || rows.cols() != alpha) {
        throw std::invalid_argument("hypothesis rows must be (alpha-1) x alpha");
      }
      for (int k = 0; k < alpha - 1; ++k) {
        if (std::abs(rows.row(k).sum()) > 1e-12) {
          throw std::invalid_argument("hypothesis rows must sum to zero");
        }
        h.row(k + 1) = rows.row(k);
      }
      break;
    }
    case ContrastKind::kSum:
    case ContrastKind::kHelmertScaled: {
      // These schemes are defined by their contrast matrix; the hypothesis
      // matrix is its generalized inverse.
      MatrixXd c = contrast_matrix(scheme, alpha);
      MatrixXd aug(alpha, alpha);
      aug.col(0).setOnes();
      aug.rightCols(alpha - 1) = c;
      return svd_pinv(aug);
    }
  }
  return h;
}

MatrixXd contrast_matrix(const ContrastScheme& scheme, int alpha) {
  if (alpha < 2) throw std::invalid_argument("contrast needs alpha >= 2");
  switch (scheme.kind) {
    case ContrastKind::kSum: {
      MatrixXd c = MatrixXd::Zero(alpha, alpha - 1);
      for (int k = 0; k < alpha - 1; ++k) {
        c(k, k) = 1.0;
        c(alpha - 1, k) = -1.0;
      }
      return c;
    }
    case ContrastKind::kHelmertScaled: {
      // Orthonormal basis of the complement of the ones vector: unit-length
      // Helmert columns. Column k contrasts level k+1 against the mean of
      // levels 1..k.
      MatrixXd c = MatrixXd::Zero(alpha, alpha - 1);
      for (int k = 0; k < alpha - 1; ++k) {
        const double norm = std::sqrt(static_cast<double>(k + 1) * (k + 2));
        for (int j = 0; j <= k; ++j) c(j, k) = 1.0 / norm;
        c(k + 1, k) = -(k + 1.0) / norm;
      }
      return c;
    }
    case ContrastKind::kTreatmentGrandMean:
    case ContrastKind::kHypothesisMatrix: {
      const MatrixXd h = hypothesis_matrix(scheme, alpha);
      Eigen::FullPivLU<MatrixXd> lu(h);
      if (!lu.isInvertible()) {
        throw std::invalid_argument("hypothesis matrix is rank deficient");
      }
      const MatrixXd inv = lu.inverse();
      return inv.rightCols(alpha - 1);
    }
  }
  throw std::logic_error("unreachable contrast kind");
}

DesignMatrixBundle expand_design(const TrialTable& trials,
                                 const std::vector<ContrastScheme>& schemes) {
  if (schemes.size() != trials.factors.size()) {
    throw std::invalid_argument("one contrast scheme per factor required");
  }
  const long n = trials.n_rows();
  const int n_factors = static_cast<int>(trials.factors.size());

  // Per-factor contrast codes indexed by level.
  std::vector<MatrixXd> codes(n_factors);
  for (int f = 0; f < n_factors; ++f) {
    codes[f] = contrast_matrix(schemes[f], trials.factors[f].n_levels());
  }

  // Main-effect columns laid out per factor, then all pairwise interaction
  // products, then higher orders (factor lists are short in practice).
  std::vector<std::string> names{"(Intercept)"};
  std::vector<VectorXd> cols;
  std::vector<std::vector<int>> col_factor_sets;  // factors entering each column
  cols.emplace_back(VectorXd::Ones(n));
  col_factor_sets.push_back({});

  std::vector<std::vector<int>> main_cols_per_factor(n_factors);
  for (int f = 0; f < n_factors; ++f) {
    const auto& fac = trials.factors[f];
    for (int k = 0; k < fac.n_levels() - 1; ++k) {
      VectorXd col(n);
      for (long r = 0; r < n; ++r) {
        col(r) = codes[f](trials.level_of(trials.cell[r], f), k);
      }
      main_cols_per_factor[f].push_back(static_cast<int>(cols.size()));
      cols.push_back(col);
      std::string nm = fac.name + "." + fac.levels[k + 1] + "vs" + fac.levels[0];
      if (schemes[f].kind == ContrastKind::kSum ||
          schemes[f].kind == ContrastKind::kHelmertScaled ||
          schemes[f].kind == ContrastKind::kHypothesisMatrix) {
        nm = fac.name + (fac.n_levels() > 2 ? "." + std::to_string(k + 1) : "");
      }
      names.push_back(nm);
      col_factor_sets.push_back({f});
    }
  }

  // Interactions: products of one main-effect column per participating
  // factor, for every subset of size >= 2.
  const int n_subsets = 1 << n_factors;
  for (int mask = 1; mask < n_subsets; ++mask) {
    if (__builtin_popcount(static_cast<unsigned>(mask)) < 2) continue;
    std::vector<int> members;
    for (int f = 0; f < n_factors; ++f) {
      if (mask & (1 << f)) members.push_back(f);
    }
    // Cartesian product over the member factors' contrast columns.
    std::vector<int> idx(members.size(), 0);
    while (true) {
      VectorXd col = VectorXd::Ones(n);
      std::string nm;
      for (size_t m = 0; m < members.size(); ++m) {
        const int ci = main_cols_per_factor[members[m]][idx[m]];
        col = col.cwiseProduct(cols[ci]);
        if (!nm.empty()) nm += ":";
        nm += names[ci];
      }
      cols.push_back(col);
      names.push_back(nm);
      col_factor_sets.push_back(members);
      size_t pos = 0;
      while (pos < members.size()) {
        if (++idx[pos] <
            static_cast<int>(main_cols_per_factor[members[pos]].size())) {
          break;
        }
        idx[pos] = 0;
        ++pos;
      }
      if (pos == members.size()) break;
    }
  }

  DesignMatrixBundle b;
  const int p = static_cast<int>(cols.size());
  b.x.resize(n, p);
  for (int j = 0; j < p; ++j) b.x.col(j) = cols[j];
  b.column_names = names;

  b.subj.grouping = "subj";
  b.subj.group = trials.subj;
  b.subj.n_levels = trials.n_subj;
  b.subj.covariates = b.x;
  b.subj.column_names = names;

  b.has_item = trials.n_item > 0;
  if (b.has_item) {
    b.item.grouping = "item";
    b.item.group = trials.item;
    b.item.n_levels = trials.n_item;
    b.item.covariates = b.x;
    b.item.column_names = names;
  }
  return b;
}

}  // namespace calibra
