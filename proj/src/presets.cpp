#include <functional>
#include <map>

#include "calibra/scenario.hpp"

namespace calibra {

namespace {

FactorSpec factor(const std::string& name, std::vector<std::string> levels,
                  bool within_item = false) {
  FactorSpec f;
  f.name = name;
  f.levels = std::move(levels);
  f.within_subject = true;
  f.within_item = within_item;
  return f;
}

ContrastScheme treatment_grand_mean() {
  return {ContrastKind::kTreatmentGrandMean, std::nullopt};
}

ContrastScheme pm_half() {
  // 2-level coding +0.5 / -0.5 via an explicit hypothesis row.
  MatrixXd rows(1, 2);
  rows << 1.0, -1.0;
  return {ContrastKind::kHypothesisMatrix, rows};
}

ContrastScheme sum_contrast() { return {ContrastKind::kSum, std::nullopt}; }

AnalysisSpec collapsed_arm(const std::string& id, AggregationLevel view,
                           std::map<std::string, std::vector<std::string>> random) {
  AnalysisSpec a;
  a.id = id;
  a.pipeline = PipelineKind::kCollapsedBridge;
  a.view = view;
  a.random_columns = std::move(random);
  return a;
}

AnalysisSpec jzs_arm(const std::string& id, AggregationLevel view,
                     std::vector<std::string> fixed,
                     std::vector<std::string> random) {
  AnalysisSpec a;
  a.id = id;
  a.pipeline = PipelineKind::kJzs;
  a.view = view;
  a.jzs_fixed_terms = std::move(fixed);
  a.jzs_random_terms = std::move(random);
  return a;
}

AnalysisSpec freq_arm(const std::string& id, AggregationLevel view,
                      std::map<std::string, std::vector<std::string>> random) {
  AnalysisSpec a;
  a.id = id;
  a.pipeline = PipelineKind::kFreq;
  a.view = view;
  a.random_columns = std::move(random);
  return a;
}

// --- Issue 1: three-level within-subject design, unequal slope SDs --------

ScenarioSpec base_three_level() {
  ScenarioSpec s;
  s.family = Family::kNormal;
  s.design.factors = {factor("X", {"X1", "X2", "X3"})};
  s.design.n_subj = 20;
  s.design.n_rep = 10;
  s.contrasts["X"] = treatment_grand_mean();
  s.priors.beta_intercept = {200.0, 20.0};
  s.priors.beta_contrast_sd = 20.0;
  s.priors.sd_random_scale = 150.0;
  s.priors.sd_residual_scale = 20.0;
  s.priors.lkj_eta = 2.0;
  s.pins.sd_subj = {{"X.X2vsX1", 90.0}, {"X.X3vsX1", 10.0}};
  s.effects = {{"c2vs1", {"X.X2vsX1"}}, {"c3vs1", {"X.X3vsX1"}}};
  s.analyses = {
      collapsed_arm("aggregated", AggregationLevel::kBySubject,
                    {{"subj", {"(Intercept)"}}}),
      collapsed_arm("non-aggregated", AggregationLevel::kNone,
                    {{"subj", {"(Intercept)", "X.X2vsX1", "X.X3vsX1"}}})};
  s.sbc = {250, 0.5};
  return s;
}

ScenarioSpec sim1_1() {
  ScenarioSpec s = base_three_level();
  s.name = "sim1_1";
  s.description =
      "Null-hypothesis BFs for two contrasts with unequal random-slope SDs "
      "(90 vs 10), aggregated vs non-aggregated Bayesian LMM.";
  s.seed = 1101;
  return s;
}

ScenarioSpec sim1_1_prior50() {
  ScenarioSpec s = sim1_1();
  s.name = "sim1_1_prior50";
  s.description = "sim1_1 with half-normal prior scale 50 for random SDs.";
  s.priors.sd_random_scale = 50.0;
  s.seed = 1102;
  return s;
}

ScenarioSpec sim1_1_desk() {
  ScenarioSpec s = sim1_1();
  s.name = "sim1_1_desk";
  s.design.n_subj = 10;
  s.design.n_rep = 5;
  s.sbc.n_sims = 100;
  s.seed = 1103;
  return s;
}

ScenarioSpec sim1_1_example() {
  ScenarioSpec s = sim1_1();
  s.name = "sim1_1_example";
  s.description = "One exemplary dataset with exact fixed effects.";
  s.pins.beta = {{"(Intercept)", 200.0}, {"X.X2vsX1", 20.0}, {"X.X3vsX1", 20.0}};
  s.pins.sd_subj = {{"(Intercept)", 20.0}, {"X.X2vsX1", 90.0}, {"X.X3vsX1", 10.0}};
  s.pins.sigma = 50.0;
  s.pins.zero_correlations = true;
  s.priors.sd_random_scale = 50.0;  // analysis priors of the worked example
  s.empirical = true;
  s.sbc.n_sims = 1;
  s.seed = 1104;
  return s;
}

// --- Issue 1: PIT designs -------------------------------------------------

ScenarioSpec sim1_2() {
  ScenarioSpec s;
  s.name = "sim1_2";
  s.description =
      "Three-level PIT design, empirically informed priors, slope SDs 10/0.";
  s.family = Family::kNormal;
  s.design.factors = {factor("cs", {"neutral", "appetitive", "aversive"})};
  s.design.n_subj = 15;
  s.design.n_rep = 3;
  s.contrasts["cs"] = treatment_grand_mean();
  s.priors.beta_intercept = {5.0, 5.0};
  s.priors.beta_contrast_sd = 2.0;
  s.priors.sd_random_scale = 10.0;
  s.priors.sd_residual_scale = 10.0;
  s.pins.sd_subj = {{"cs.appetitivevsneutral", 10.0},
                    {"cs.aversivevsneutral", 0.0}};
  s.effects = {{"app_vs_neu", {"cs.appetitivevsneutral"}},
               {"ave_vs_neu", {"cs.aversivevsneutral"}}};
  s.analyses = {
      collapsed_arm("aggregated", AggregationLevel::kBySubject,
                    {{"subj", {"(Intercept)"}}}),
      collapsed_arm(
          "non-aggregated", AggregationLevel::kNone,
          {{"subj",
            {"(Intercept)", "cs.appetitivevsneutral", "cs.aversivevsneutral"}}})};
  s.sbc = {500, 0.5};
  s.seed = 1201;
  return s;
}

ScenarioSpec sim1_3() {
  ScenarioSpec s;
  s.name = "sim1_3";
  s.description =
      "Five-level parametric PIT design, slope SDs 2/10/2/0.1 across the "
      "four treatment contrasts.";
  s.family = Family::kNormal;
  s.design.factors = {factor("cs", {"e0", "p1", "p2", "m1", "m2"})};
  s.design.n_subj = 10;
  s.design.n_rep = 3;
  s.contrasts["cs"] = treatment_grand_mean();
  s.priors.beta_intercept = {5.0, 5.0};
  s.priors.beta_contrast_sd = 2.0;
  s.priors.sd_random_scale = 10.0;
  s.priors.sd_residual_scale = 5.0;
  s.pins.sd_subj = {{"cs.p1vse0", 2.0},
                    {"cs.p2vse0", 10.0},
                    {"cs.m1vse0", 2.0},
                    {"cs.m2vse0", 0.1}};
  s.effects = {{"p1_vs_0", {"cs.p1vse0"}},
               {"p2_vs_0", {"cs.p2vse0"}},
               {"m1_vs_0", {"cs.m1vse0"}},
               {"m2_vs_0", {"cs.m2vse0"}}};
  s.analyses = {
      collapsed_arm("aggregated", AggregationLevel::kBySubject,
                    {{"subj", {"(Intercept)"}}}),
      collapsed_arm("non-aggregated", AggregationLevel::kNone,
                    {{"subj",
                      {"(Intercept)", "cs.p1vse0", "cs.p2vse0", "cs.m1vse0",
                       "cs.m2vse0"}}})};
  s.sbc = {200, 0.5};
  s.seed = 1301;
  return s;
}

// --- Issue 1: two-step 2 x 2 design --------------------------------------

ScenarioSpec sim1_4() {
  ScenarioSpec s;
  s.name = "sim1_4";
  s.description =
      "2x2 two-step design (reward x transition) on choice-repetition "
      "proportions; interaction slope SD 0.4, main-effect slope SDs 0.";
  s.family = Family::kNormal;
  s.design.factors = {factor("reward", {"rew", "norew"}),
                      factor("transition", {"common", "rare"})};
  s.design.n_subj = 10;
  s.design.n_rep = 5;
  s.contrasts["reward"] = pm_half();
  s.contrasts["transition"] = pm_half();
  s.priors.beta_intercept = {0.7, 0.1};
  s.priors.beta_contrast_sd = 0.2;
  s.priors.sd_random_scale = 0.2;
  s.priors.sd_residual_scale = 0.5;
  s.pins.sd_subj = {{"reward", 0.0},
                    {"transition", 0.0},
                    {"reward:transition", 0.4}};
  s.effects = {{"reward", {"reward"}},
               {"transition", {"transition"}},
               {"interaction", {"reward:transition"}}};
  s.analyses = {
      collapsed_arm("aggregated", AggregationLevel::kBySubject,
                    {{"subj", {"(Intercept)"}}}),
      collapsed_arm("aggregated-slopes", AggregationLevel::kBySubject,
                    {{"subj", {"(Intercept)", "reward", "transition"}}}),
      collapsed_arm("non-aggregated", AggregationLevel::kNone,
                    {{"subj",
                      {"(Intercept)", "reward", "transition",
                       "reward:transition"}}})};
  s.sbc = {200, 0.5};
  s.seed = 1401;
  return s;
}

// --- Issue 1: omnibus factor tests ----------------------------------------

ScenarioSpec sim1_5() {
  ScenarioSpec s = sim1_2();
  s.name = "sim1_5";
  s.description = "Omnibus factor test on the three-level PIT design.";
  s.effects = {{"cs", {"cs.appetitivevsneutral", "cs.aversivevsneutral"}}};
  s.seed = 1501;
  return s;
}

ScenarioSpec sim1_5_desk() {
  ScenarioSpec s = sim1_5();
  s.name = "sim1_5_desk";
  s.sbc.n_sims = 100;
  s.seed = 1502;
  return s;
}

ScenarioSpec sim1_6() {
  ScenarioSpec s = sim1_3();
  s.name = "sim1_6";
  s.description = "Omnibus factor test on the five-level PIT design.";
  s.effects = {
      {"cs", {"cs.p1vse0", "cs.p2vse0", "cs.m1vse0", "cs.m2vse0"}}};
  s.seed = 1601;
  return s;
}

// --- Issue 1: JZS / g-prior analyses --------------------------------------

ScenarioSpec sim1_7() {
  ScenarioSpec s;
  s.name = "sim1_7";
  s.description =
      "Omnibus g-prior ANOVA on a 3-level design; random-slope scales 0.1 "
      "vs 10 violate sphericity while the model assumes a shared g.";
  s.family = Family::kNormal;
  s.design.factors = {factor("X", {"X1", "X2", "X3"})};
  s.design.n_subj = 30;
  s.design.n_rep = 3;
  s.contrasts["X"] = {ContrastKind::kHelmertScaled, std::nullopt};
  s.jzs.gen_random_terms = {{"subj", {1.0}}, {"X:subj", {0.1, 10.0}}};
  s.effects = {{"X", {"X"}}};
  s.analyses = {
      jzs_arm("aggregated", AggregationLevel::kBySubject, {"X"}, {"subj"}),
      jzs_arm("non-aggregated", AggregationLevel::kNone, {"X"},
              {"subj", "X:subj"})};
  s.sbc = {500, 0.5};
  s.seed = 1701;
  return s;
}

ScenarioSpec sim1_7_desk() {
  ScenarioSpec s = sim1_7();
  s.name = "sim1_7_desk";
  s.sbc.n_sims = 200;
  s.seed = 1702;
  return s;
}

ScenarioSpec sim1_7_spherical() {
  ScenarioSpec s = sim1_7();
  s.name = "sim1_7_spherical";
  s.description =
      "Sphericity-respecting variant: one shared random-slope scale equal "
      "to the analysis default.";
  s.jzs.gen_random_terms = {{"subj", {1.0}}, {"X:subj", {1.0}}};
  s.seed = 1703;
  return s;
}

ScenarioSpec sim1_7_spherical_desk() {
  ScenarioSpec s = sim1_7_spherical();
  s.name = "sim1_7_spherical_desk";
  s.sbc.n_sims = 200;
  s.seed = 1704;
  return s;
}

ScenarioSpec sim1_8() {
  ScenarioSpec s;
  s.name = "sim1_8";
  s.description =
      "2x2 g-prior ANOVA; random-slope scales 0.001 (mains) vs 1 "
      "(interaction).";
  s.family = Family::kNormal;
  s.design.factors = {factor("A", {"a1", "a2"}), factor("B", {"b1", "b2"})};
  s.design.n_subj = 30;
  s.design.n_rep = 4;
  s.contrasts["A"] = {ContrastKind::kHelmertScaled, std::nullopt};
  s.contrasts["B"] = {ContrastKind::kHelmertScaled, std::nullopt};
  s.jzs.gen_random_terms = {{"subj", {1.0}},
                            {"A:subj", {0.001}},
                            {"B:subj", {0.001}},
                            {"A:B:subj", {1.0}}};
  s.effects = {{"A", {"A"}}, {"B", {"B"}}, {"A:B", {"A:B"}}};
  s.analyses = {
      jzs_arm("aggregated", AggregationLevel::kBySubject, {"A", "B", "A:B"},
              {"subj"}),
      jzs_arm("aggregated-slopes", AggregationLevel::kBySubject,
              {"A", "B", "A:B"}, {"subj", "A:subj", "B:subj"}),
      jzs_arm("non-aggregated", AggregationLevel::kNone, {"A", "B", "A:B"},
              {"subj", "A:subj", "B:subj", "A:B:subj"})};
  s.sbc = {1000, 0.5};
  s.seed = 1801;
  return s;
}

ScenarioSpec sim1_8_desk() {
  ScenarioSpec s = sim1_8();
  s.name = "sim1_8_desk";
  s.sbc.n_sims = 300;
  s.analyses = {s.analyses[0], s.analyses[2]};
  s.seed = 1802;
  return s;
}

// --- Issue 2: item variance ------------------------------------------------

ScenarioSpec gibson_wu_base() {
  ScenarioSpec s;
  s.family = Family::kLognormal;
  s.design.factors = {factor("X", {"obj", "subj_rel"}, true)};
  s.design.n_subj = 42;
  s.design.n_item = 16;
  s.design.n_rep = 1;
  s.design.assignment = Assignment::kLatinSquare;
  s.contrasts["X"] = sum_contrast();
  s.priors.beta_intercept = {6.0, 0.6};
  s.priors.beta_contrast_sd = 0.1;
  s.priors.sd_random_scale = 0.1;
  s.priors.sd_residual_scale = 0.5;
  return s;
}

ScenarioSpec sim2_1() {
  ScenarioSpec s = gibson_wu_base();
  s.name = "sim2_1";
  s.description =
      "Latin-square reading-time design with crossed subject/item effects; "
      "the item slope SD sweeps 0..0.5 while by-subject aggregation ignores "
      "items.";
  s.sweep = SweepSpec{"sd_item", {"X"}, {}, 0.0, 0.5};
  s.effects = {{"X", {"X"}}};
  s.analyses = {
      collapsed_arm("aggregated", AggregationLevel::kBySubject,
                    {{"subj", {"(Intercept)"}}}),
      collapsed_arm("non-aggregated", AggregationLevel::kNone,
                    {{"subj", {"(Intercept)", "X"}},
                     {"item", {"(Intercept)", "X"}}})};
  s.sbc = {125, 0.2};
  s.seed = 2101;
  return s;
}

ScenarioSpec sim2_1_desk() {
  ScenarioSpec s = sim2_1();
  s.name = "sim2_1_desk";
  s.sbc.n_sims = 60;
  s.seed = 2102;
  return s;
}

ScenarioSpec gibson_wu_example() {
  ScenarioSpec s = gibson_wu_base();
  s.name = "gibson_wu";
  s.description = "One exemplary latin-square dataset (exact fixed effects).";
  s.pins.beta = {{"(Intercept)", 6.0}, {"X", -0.10}};
  s.pins.sd_subj = {{"(Intercept)", 0.24}, {"X", 0.11}};
  s.pins.sd_item = {{"(Intercept)", 0.18}, {"X", 0.25}};
  s.pins.sigma = 0.51;
  s.pins.zero_correlations = true;
  s.empirical = true;
  s.effects = {{"X", {"X"}}};
  s.analyses = {
      collapsed_arm("aggregated", AggregationLevel::kBySubject,
                    {{"subj", {"(Intercept)"}}}),
      collapsed_arm("non-aggregated", AggregationLevel::kNone,
                    {{"subj", {"(Intercept)", "X"}},
                     {"item", {"(Intercept)", "X"}}})};
  s.sbc = {1, 0.2};
  s.seed = 2103;
  return s;
}

ScenarioSpec sim2_2() {
  ScenarioSpec s;
  s.name = "sim2_2";
  s.description =
      "g-prior analysis of the latin-square design; the item slope scale "
      "sweeps 0..0.5.";
  s.family = Family::kNormal;
  s.design.factors = {factor("X", {"obj", "subj_rel"}, true)};
  s.design.n_subj = 42;
  s.design.n_item = 16;
  s.design.n_rep = 1;
  s.design.assignment = Assignment::kLatinSquare;
  s.contrasts["X"] = {ContrastKind::kHelmertScaled, std::nullopt};
  s.jzs.gen_random_terms = {{"subj", {1.0}},
                            {"item", {1.0}},
                            {"X:subj", {1.0}},
                            {"X:item", {1.0}}};
  s.sweep = SweepSpec{"jzs_scale", {}, {"X:item"}, 0.0, 0.5};
  s.effects = {{"X", {"X"}}};
  s.analyses = {
      jzs_arm("aggregated", AggregationLevel::kBySubject, {"X"}, {"subj"}),
      jzs_arm("non-aggregated", AggregationLevel::kNone, {"X"},
              {"subj", "item", "X:subj", "X:item"})};
  s.sbc = {500, 0.2};
  s.seed = 2201;
  return s;
}

ScenarioSpec sim2_3() {
  ScenarioSpec s = sim2_2();
  s.name = "sim2_3";
  s.description = "Four-level variant of the item-variance g-prior analysis.";
  s.design.factors = {factor("X", {"x1", "x2", "x3", "x4"}, true)};
  s.design.n_subj = 40;
  s.design.n_item = 20;
  s.seed = 2301;
  return s;
}

ScenarioSpec sim2_4() {
  ScenarioSpec s;
  s.name = "sim2_4";
  s.description =
      "2x2 latin-square design with crossed random effects; item slope SDs "
      "sweep together.";
  s.family = Family::kNormal;
  s.design.factors = {factor("A", {"a1", "a2"}, true),
                      factor("B", {"b1", "b2"}, true)};
  s.design.n_subj = 16;
  s.design.n_item = 8;
  s.design.n_rep = 1;
  s.design.assignment = Assignment::kLatinSquare;
  s.contrasts["A"] = pm_half();
  s.contrasts["B"] = pm_half();
  s.priors.beta_intercept = {0.7, 0.1};
  s.priors.beta_contrast_sd = 0.2;
  s.priors.sd_random_scale = 0.2;
  s.priors.sd_residual_scale = 0.5;
  s.sweep = SweepSpec{"sd_item", {"A", "B", "A:B"}, {}, 0.0, 0.5};
  s.effects = {{"A", {"A"}}, {"B", {"B"}}, {"A:B", {"A:B"}}};
  s.analyses = {
      collapsed_arm("aggregated", AggregationLevel::kBySubject,
                    {{"subj", {"(Intercept)"}}}),
      collapsed_arm("non-aggregated", AggregationLevel::kNone,
                    {{"subj", {"(Intercept)", "A", "B", "A:B"}},
                     {"item", {"(Intercept)", "A", "B", "A:B"}}})};
  s.sbc = {200, 0.2};
  s.seed = 2401;
  return s;
}

// --- Frequentist appendices ------------------------------------------------

ScenarioSpec appendix_a() {
  ScenarioSpec s;
  s.name = "appendix_a";
  s.description =
      "Type-I error and power of ML-fit LMMs on the 3-level design with "
      "slope SDs 90/10, aggregated vs non-aggregated.";
  s.family = Family::kNormal;
  s.design.factors = {factor("X", {"X1", "X2", "X3"})};
  s.design.n_subj = 20;
  s.design.n_rep = 10;
  s.contrasts["X"] = treatment_grand_mean();
  s.pins.beta = {{"(Intercept)", 200.0}, {"X.X2vsX1", 0.0}, {"X.X3vsX1", 0.0}};
  s.pins.sd_subj = {{"(Intercept)", 20.0}, {"X.X2vsX1", 90.0},
                    {"X.X3vsX1", 10.0}};
  s.pins.sigma = 50.0;
  s.pins.zero_correlations = true;
  s.effects = {{"c2vs1", {"X.X2vsX1"}}, {"c3vs1", {"X.X3vsX1"}}};
  s.analyses = {
      freq_arm("aggregated", AggregationLevel::kBySubject,
               {{"subj", {"(Intercept)"}}}),
      freq_arm("non-aggregated", AggregationLevel::kNone,
               {{"subj", {"(Intercept)", "X.X2vsX1", "X.X3vsX1"}}})};
  s.freq.n_sims = 1000;
  s.freq.effect_beta = {{"X.X2vsX1", 20.0}, {"X.X3vsX1", 20.0}};
  s.seed = 3101;
  return s;
}

ScenarioSpec appendix_e() {
  ScenarioSpec s = gibson_wu_base();
  s.name = "appendix_e";
  s.description =
      "Type-I error of ML-fit LMMs under item variance: rejection rate as a "
      "function of the item slope SD.";
  s.pins.beta = {{"(Intercept)", 6.0}, {"X", 0.0}};
  s.pins.sd_subj = {{"(Intercept)", 0.24}, {"X", 0.11}};
  s.pins.sd_item = {{"(Intercept)", 0.18}, {"X", 0.0}};
  s.pins.sigma = 0.51;
  s.pins.zero_correlations = true;
  s.sweep = SweepSpec{"sd_item", {"X"}, {}, 0.0, 0.5};
  s.effects = {{"X", {"X"}}};
  s.analyses = {
      freq_arm("aggregated", AggregationLevel::kBySubject,
               {{"subj", {"(Intercept)"}}}),
      freq_arm("non-aggregated", AggregationLevel::kNone,
               {{"subj", {"(Intercept)", "X"}}, {"item", {"(Intercept)", "X"}}})};
  s.freq.n_sims = 1000;
  s.freq.effect_beta = {{"X", -0.10}};
  s.freq.sd_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  s.seed = 3201;
  return s;
}

ScenarioSpec appendix_e_desk() {
  ScenarioSpec s = appendix_e();
  s.name = "appendix_e_desk";
  s.freq.n_sims = 500;
  s.freq.sd_grid = {0.0, 0.25, 0.5};
  s.seed = 3202;
  return s;
}

ScenarioSpec toy_scenario() {
  ScenarioSpec s;
  s.name = "toy";
  s.description =
      "Conjugate normal-mean toy with an exactly computed Bayes factor; "
      "checks the calibration identity itself.";
  s.toy = ToySpec{10, 1.0, 1.0};
  s.effects = {{"theta", {}}};
  s.sbc = {500, 0.5};
  s.seed = 4001;
  return s;
}

using Maker = std::function<ScenarioSpec()>;

const std::vector<std::pair<std::string, Maker>>& registry() {
  static const std::vector<std::pair<std::string, Maker>> reg = {
      {"sim1_1", sim1_1},
      {"sim1_1_prior50", sim1_1_prior50},
      {"sim1_1_desk", sim1_1_desk},
      {"sim1_1_example", sim1_1_example},
      {"sim1_2", sim1_2},
      {"sim1_3", sim1_3},
      {"sim1_4", sim1_4},
      {"sim1_5", sim1_5},
      {"sim1_5_desk", sim1_5_desk},
      {"sim1_6", sim1_6},
      {"sim1_7", sim1_7},
      {"sim1_7_desk", sim1_7_desk},
      {"sim1_7_spherical", sim1_7_spherical},
      {"sim1_7_spherical_desk", sim1_7_spherical_desk},
      {"sim1_8", sim1_8},
      {"sim1_8_desk", sim1_8_desk},
      {"sim2_1", sim2_1},
      {"sim2_1_desk", sim2_1_desk},
      {"gibson_wu", gibson_wu_example},
      {"sim2_2", sim2_2},
      {"sim2_3", sim2_3},
      {"sim2_4", sim2_4},
      {"appendix_a", appendix_a},
      {"appendix_e", appendix_e},
      {"appendix_e_desk", appendix_e_desk},
      {"toy", toy_scenario},
  };
  return reg;
}

}  // namespace

ScenarioSpec preset_scenario(const std::string& name) {
  for (const auto& [n, make] : registry()) {
    if (n == name) return make();
  }
  throw ConfigError("unknown scenario preset '" + name + "'");
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [n, make] : registry()) names.push_back(n);
  return names;
}

}  // namespace calibra
