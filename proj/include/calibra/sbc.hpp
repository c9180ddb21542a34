#pragma once

#include <optional>
#include <string>
#include <vector>

#include "calibra/freq.hpp"
#include "calibra/scenario.hpp"

namespace calibra {

/// One SBC result row: (run, analysis, effect).
struct SbcRecord {
  int run = 0;
  int true_model = 0;  // 1 if the effect was present in the generating model
  std::string analysis_id;
  std::string effect_id;
  double log_bf10 = 0.0;
  double post_p1 = 0.5;
  double rhat_max = 0.0;
  int bridge_iters = 0;
  std::string warn_flags;
  // Not part of the CSV schema:
  double sweep_value = std::numeric_limits<double>::quiet_NaN();
  std::string params_digest;
};

struct SbcOverrides {
  std::optional<int> n_sims;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

/// Full SBC loop: per run draw each tested effect's presence from the model
/// prior, draw parameters (respecting pins and sweeps), simulate one
/// dataset, and push it through every configured analysis. Deterministic
/// given the master seed, independent of the job count.
std::vector<SbcRecord> run_sbc(const ScenarioSpec& spec,
                               const SbcOverrides& overrides = {});

struct SummaryRow {
  std::string analysis_id;
  std::string effect_id;
  int n = 0;
  int n_failed = 0;
  double mean_post_p1 = 0.0;
  double sd_post_p1 = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double prior_p1 = 0.5;
};

/// Per-analysis, per-effect mean posterior model probability with a normal
/// approximation 95% CI.
std::vector<SummaryRow> summarize(const std::vector<SbcRecord>& records,
                                  double prior_p1);

struct CalibrationTestRow {
  std::string analysis_id;
  std::string effect_id;
  std::string test;   // "vs_prior", "paired:<a>|<b>", "regression"
  double scale = 0.0;
  double log_bf10 = 0.0;
  double bf10 = 0.0;
  bool skipped = false;
};

/// Default sensitivity grid for the Cauchy prior scale.
std::vector<double> default_scale_grid();

/// Bayesian checks of the calibration identity: one-sample JZS t-tests of
/// post_p1 against the prior over a scale grid, paired tests between
/// effects, and (for sweep scenarios) a JZS regression of post_p1 on the
/// swept value.
std::vector<CalibrationTestRow> calibration_tests(
    const ScenarioSpec& spec, const std::vector<SbcRecord>& records,
    const std::vector<double>& scale_grid = default_scale_grid());

/// Analyzes one concrete dataset with every non-freq analysis arm of the
/// scenario; used by the single-dataset BF command.
struct BfReportRow {
  std::string analysis_id;
  std::string effect_id;
  double log_bf10 = 0.0;
  double bf10 = 1.0;
  double post_p1 = 0.5;
  double rhat_max = 0.0;
  int bridge_iters = 0;
  std::string warn_flags;
};
std::vector<BfReportRow> analyze_dataset(const ScenarioSpec& spec,
                                         const Dataset& data,
                                         std::uint64_t seed);

/// Exemplary dataset generation for a scenario (pins applied, all effects
/// present, optional empirical mode).
Dataset generate_example_dataset(const ScenarioSpec& spec, std::uint64_t seed);

/// Frequentist type-I-error / power loops over the scenario's freq analysis
/// arms: per grid point of the SD sweep (or the pinned values when no grid
/// is set), simulate under the null (or with freq.effect_beta added) and
/// count rejections at the alpha level.
ErrorRateCurve alpha_power_sim(const ScenarioSpec& spec, bool power_mode,
                               std::optional<int> n_sims_override = {},
                               std::optional<std::uint64_t> seed_override = {},
                               int jobs = 1);

}  // namespace calibra
