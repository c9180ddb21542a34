#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "calibra/rng.hpp"

namespace calibra {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// One experimental factor: a name plus at least two ordered levels, varied
/// within subjects and/or within items.
struct FactorSpec {
  std::string name;
  std::vector<std::string> levels;
  bool within_subject = true;
  bool within_item = false;

  int n_levels() const { return static_cast<int>(levels.size()); }
  void validate() const;
};

enum class Assignment { kFullCrossing, kLatinSquare };

struct DesignSpec {
  std::vector<FactorSpec> factors;
  int n_subj = 0;
  int n_item = 0;  // 0: no item factor
  int n_rep = 1;
  Assignment assignment = Assignment::kFullCrossing;

  int n_cells() const;
  long expected_rows() const;
  void validate() const;
};

enum class ContrastKind {
  kHypothesisMatrix,
  kSum,
  kTreatmentGrandMean,
  kHelmertScaled,
};

struct ContrastScheme {
  ContrastKind kind = ContrastKind::kTreatmentGrandMean;
  /// Rows of the hypothesis matrix, (alpha-1) x alpha, each summing to zero.
  /// Only used for kHypothesisMatrix.
  std::optional<MatrixXd> hypothesis_rows;
};

/// Long-format experimental layout before any responses exist. The cell
/// index enumerates factor-level combinations in row-major order over the
/// factor list.
struct TrialTable {
  std::vector<int> subj;           // 0-based subject index
  std::vector<int> item;           // 0-based item index, -1 if no items
  std::vector<int> cell;           // condition cell index
  std::vector<int> replicate;      // replicate counter within (unit, cell)
  std::vector<FactorSpec> factors; // factor metadata carried along
  int n_subj = 0;
  int n_item = 0;

  long n_rows() const { return static_cast<long>(subj.size()); }
  int n_cells() const;
  /// Level index of `factor` for a given cell.
  int level_of(int cell_index, int factor_index) const;
};

/// Per-grouping random-effect block structure: which group level each row
/// belongs to plus the covariate values replicated from X.
struct RandomBlocks {
  std::string grouping;        // "subj" or "item"
  std::vector<int> group;      // row -> group level
  int n_levels = 0;
  MatrixXd covariates;         // n x q, one column per random term
  std::vector<std::string> column_names;
};

struct DesignMatrixBundle {
  MatrixXd x;                          // n x p fixed-effect matrix, intercept first
  std::vector<std::string> column_names;
  RandomBlocks subj;
  RandomBlocks item;                   // empty when the design has no items
  bool has_item = false;
};

/// Builds one row per planned observation. Latin-square assignment
/// partitions items into `cells` groups by index order and rotates the
/// group-to-cell map with the subject index, so conditions balance over
/// items within subject and over subjects within item.
TrialTable build_trial_table(const DesignSpec& spec, RngStream& rng);

/// alpha x (alpha-1) contrast matrix for the given scheme. For hypothesis
/// style schemes this is the generalized inverse of the hypothesis matrix
/// augmented with a grand-mean intercept row, excluding the intercept
/// column.
MatrixXd contrast_matrix(const ContrastScheme& scheme, int alpha);

/// The hypothesis matrix (including the grand-mean intercept row) implied by
/// a scheme; inverse companion of contrast_matrix.
MatrixXd hypothesis_matrix(const ContrastScheme& scheme, int alpha);

/// Expands a trial table into numeric design matrices: intercept, one
/// column per contrast, and elementwise-product interaction columns for
/// multi-factor designs. Z blocks replicate all X columns per grouping;
/// models select subsets later.
DesignMatrixBundle expand_design(const TrialTable& trials,
                                 const std::vector<ContrastScheme>& schemes);

}  // namespace calibra
