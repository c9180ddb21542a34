#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "calibra/bridge.hpp"
#include "calibra/collapsed.hpp"
#include "calibra/design.hpp"
#include "calibra/jzs.hpp"
#include "calibra/priors.hpp"
#include "calibra/simulate.hpp"

namespace calibra {

/// Raised on invalid scenario files; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class PipelineKind { kCollapsedBridge, kJzs, kFreq };

struct AnalysisSpec {
  std::string id;
  PipelineKind pipeline = PipelineKind::kCollapsedBridge;
  AggregationLevel view = AggregationLevel::kNone;
  /// collapsed / freq: random-effect layout as design column names per grouping
  std::map<std::string, std::vector<std::string>> random_columns;
  /// jzs: model terms by label
  std::vector<std::string> jzs_fixed_terms;
  std::vector<std::string> jzs_random_terms;
};

struct EffectSpec {
  std::string id;
  /// collapsed/freq: design column names dropped under H0 (for freq, the
  /// columns whose t-tests define the effect). jzs: fixed term labels.
  std::vector<std::string> drop;
};

struct SweepSpec {
  std::string target;                 // "sd_subj" | "sd_item" | "jzs_scale"
  std::vector<std::string> columns;   // design column names (sd targets)
  std::vector<std::string> terms;     // generative term labels (jzs_scale)
  double from = 0.0;
  double to = 0.5;
};

struct PinsSpec {
  std::map<std::string, double> beta;
  std::map<std::string, double> sd_subj;
  std::map<std::string, double> sd_item;
  std::optional<double> sigma;
  bool zero_correlations = false;
};

struct JzsGenTerm {
  std::string label;
  std::vector<double> scales;  // one shared scale, or one per contrast column
};

struct JzsSettings {
  GPriorScales scales;
  std::vector<JzsGenTerm> gen_random_terms;
  double gen_mu = 0.0;
  double gen_sigma = 1.0;
};

struct ToySpec {
  int n_obs = 10;
  double sigma0 = 1.0;
  double tau = 1.0;
};

struct SbcSettings {
  int n_sims = 100;
  double prior_p1 = 0.5;
};

struct FreqSettings {
  int n_sims = 1000;
  double alpha_level = 0.05;
  std::map<std::string, double> effect_beta;  // added under power mode
  std::vector<double> sd_grid;                // sweep grid, empty = single point
};

struct ScenarioSpec {
  std::string name;
  std::string description;
  Family family = Family::kNormal;
  DesignSpec design;
  std::map<std::string, ContrastScheme> contrasts;  // factor name -> scheme
  PriorSpec priors;
  PinsSpec pins;
  std::optional<SweepSpec> sweep;
  std::vector<EffectSpec> effects;
  std::vector<AnalysisSpec> analyses;
  std::optional<ToySpec> toy;
  JzsSettings jzs;
  SbcSettings sbc;
  FreqSettings freq;
  McmcConfig mcmc;
  BridgeConfig bridge;
  GIntegrationConfig integration;
  bool empirical = false;  // exemplary single-dataset generation
  std::uint64_t seed = 1;

  bool is_toy() const { return toy.has_value(); }
  bool is_jzs_generative() const { return !jzs.gen_random_terms.empty(); }

  /// Swept parameter value for a given run index.
  double sweep_value(int run, int n_sims) const;
};

/// Deterministic derived structures, computed once per scenario.
struct ScenarioRuntime {
  TrialTable trials;
  DesignMatrixBundle bundle;
  std::vector<ContrastScheme> schemes_in_factor_order;
  ParamPins pins;                 // resolved to positional indices
  RandomEffectLayout gen_layout;  // full random structure for generation

  int column_index(const std::string& name) const;
  std::vector<int> column_indices(const std::vector<std::string>& names) const;
};

ScenarioRuntime compile_scenario(const ScenarioSpec& spec);

/// Strict JSON (de)serialization; unknown keys are rejected.
ScenarioSpec scenario_from_json(const std::string& json_text);
std::string scenario_to_json(const ScenarioSpec& spec);

/// Built-in scenario presets by name (sim1_1, sim1_1_prior50, sim1_2, ...,
/// plus desk-scale and example variants). Throws ConfigError on unknown
/// names.
ScenarioSpec preset_scenario(const std::string& name);
std::vector<std::string> preset_names();

/// Loads a scenario: an existing file path is parsed as JSON, otherwise the
/// argument is treated as a preset name.
ScenarioSpec load_scenario(const std::string& path_or_preset);

}  // namespace calibra
