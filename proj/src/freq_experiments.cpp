#include <atomic>
#include <cmath>

#include "calibra/parallel.hpp"
#include "calibra/sbc.hpp"
#include "calibra/stats.hpp"

namespace calibra {

namespace {
constexpr std::uint64_t kTagFreqSim = 0x11;
}

ErrorRateCurve alpha_power_sim(const ScenarioSpec& spec, bool power_mode,
                               std::optional<int> n_sims_override,
                               std::optional<std::uint64_t> seed_override,
                               int jobs) {
  const ScenarioRuntime rt = compile_scenario(spec);
  const std::uint64_t seed = seed_override.value_or(spec.seed);
  const int n_sims = n_sims_override.value_or(spec.freq.n_sims);

  std::vector<const AnalysisSpec*> arms;
  for (const auto& a : spec.analyses) {
    if (a.pipeline == PipelineKind::kFreq) arms.push_back(&a);
  }
  if (arms.empty()) throw ConfigError("scenario has no freq analysis arms");
  if (spec.effects.empty()) throw ConfigError("scenario has no tested effects");

  std::vector<double> grid = spec.freq.sd_grid;
  if (grid.empty()) grid.push_back(std::numeric_limits<double>::quiet_NaN());

  ErrorRateCurve curve;
  if (n_sims == 0) return curve;

  for (size_t gi = 0; gi < grid.size(); ++gi) {
    // reject[arm][effect] counters
    std::vector<std::vector<std::atomic<int>>> reject(arms.size());
    for (auto& v : reject) {
      v = std::vector<std::atomic<int>>(spec.effects.size());
    }
    std::atomic<int> n_ok{0};

    parallel_for(n_sims, jobs, [&](int sim) {
      RngStream rng(seed, kTagFreqSim, gi, sim);
      ParamPins pins = rt.pins;
      if (spec.sweep && !std::isnan(grid[gi])) {
        auto& target =
            spec.sweep->target == "sd_item" ? pins.sd_item : pins.sd_subj;
        for (int idx : rt.column_indices(spec.sweep->columns)) {
          target[idx] = grid[gi];
        }
      }
      LmmParams params = draw_lmm_params(spec.priors, rt.gen_layout, pins, rng);
      params.family = spec.family;
      if (power_mode) {
        for (const auto& [name, value] : spec.freq.effect_beta) {
          params.beta(rt.column_index(name)) = value;
        }
      }
      SimulateOptions opts;
      const Dataset data = simulate(rt.trials, rt.bundle, params, opts, rng);
      ++n_ok;
      for (size_t aidx = 0; aidx < arms.size(); ++aidx) {
        const AnalysisSpec& a = *arms[aidx];
        const Dataset view = a.view == AggregationLevel::kNone
                                 ? data
                                 : aggregate(data, a.view);
        const DesignMatrixBundle bundle =
            expand_design(view.trials, rt.schemes_in_factor_order);
        FreqModelSpec fm;
        fm.fixed_columns.resize(bundle.column_names.size());
        for (size_t j = 0; j < bundle.column_names.size(); ++j) {
          fm.fixed_columns[j] = static_cast<int>(j);
        }
        for (const std::string grouping : {"subj", "item"}) {
          auto it = a.random_columns.find(grouping);
          if (it == a.random_columns.end() || it->second.empty()) continue;
          RandomBlockSpec rb;
          rb.grouping = grouping;
          for (const auto& name : it->second) {
            rb.columns.push_back(rt.column_index(name));
          }
          fm.random_blocks.push_back(rb);
        }
        fm.family = spec.family;
        RngStream fit_rng(seed, kTagFreqSim + 1, gi,
                          static_cast<std::uint64_t>(sim) * 16 + aidx);
        const FreqFit fit = lmm_ml_fit(view, bundle, fm, fit_rng);
        for (size_t ei = 0; ei < spec.effects.size(); ++ei) {
          bool rejected = false;
          for (int col : rt.column_indices(spec.effects[ei].drop)) {
            if (fit.p(col) < spec.freq.alpha_level) rejected = true;
          }
          if (rejected) reject[aidx][ei].fetch_add(1);
        }
      }
    });

    for (size_t aidx = 0; aidx < arms.size(); ++aidx) {
      for (size_t ei = 0; ei < spec.effects.size(); ++ei) {
        ErrorRatePoint pt;
        pt.analysis_id = arms[aidx]->id;
        pt.effect_id = spec.effects[ei].id;
        pt.sd_true = grid[gi];
        pt.n_reject = reject[aidx][ei].load();
        pt.n_sims = n_ok.load();
        const BinomialCi ci = wilson_ci(pt.n_reject, pt.n_sims);
        pt.ci_lo = ci.lo;
        pt.ci_hi = ci.hi;
        curve.push_back(pt);
      }
    }
  }
  return curve;
}

}  // namespace calibra
