#include "calibra/sbc.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "calibra/freq.hpp"
#include "calibra/parallel.hpp"
#include "calibra/quadrature.hpp"
#include "calibra/stats.hpp"

namespace calibra {

namespace {

constexpr std::uint64_t kTagModel = 0x01;
constexpr std::uint64_t kTagParams = 0x02;
constexpr std::uint64_t kTagMcmc = 0x03;
constexpr std::uint64_t kTagBridge = 0x04;
constexpr std::uint64_t kTagJzs = 0x05;
constexpr std::uint64_t kTagFreq = 0x06;

std::string fnv_digest(std::span<const double> values) {
  std::uint64_t h = 1469598103934665603ull;
  for (double v : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xff;
      h *= 1099511628211ull;
    }
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

std::string join_warnings(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (p.empty()) continue;
    if (!out.empty()) out += ";";
    out += p;
  }
  return out;
}

double toy_log_ml_h1(const VectorXd& y, const ToySpec& toy) {
  return log_integrate([&](double theta) {
    double lp = normal_log_pdf(theta, 0.0, toy.tau);
    for (int i = 0; i < y.size(); ++i) {
      lp += normal_log_pdf(y(i), theta, toy.sigma0);
    }
    return lp;
  });
}

double toy_log_ml_h0(const VectorXd& y, const ToySpec& toy) {
  double lp = 0.0;
  for (int i = 0; i < y.size(); ++i) {
    lp += normal_log_pdf(y(i), 0.0, toy.sigma0);
  }
  return lp;
}

struct GenerationResult {
  Dataset data;
  std::string digest;
};

/// Collapsed-pipeline generation: LMM parameters from their priors with
/// pins and sweep applied, tested effects zeroed when absent.
GenerationResult generate_collapsed(const ScenarioSpec& spec,
                                    const ScenarioRuntime& rt,
                                    const std::vector<int>& true_model,
                                    double sweep_value, RngStream& rng) {
  ParamPins pins = rt.pins;
  if (spec.sweep && spec.sweep->target != "jzs_scale") {
    auto& target =
        spec.sweep->target == "sd_item" ? pins.sd_item : pins.sd_subj;
    for (int idx : rt.column_indices(spec.sweep->columns)) {
      target[idx] = sweep_value;
    }
  }
  LmmParams params = draw_lmm_params(spec.priors, rt.gen_layout, pins, rng);
  params.family = spec.family;
  for (size_t e = 0; e < spec.effects.size(); ++e) {
    if (true_model[e]) continue;
    for (int idx : rt.column_indices(spec.effects[e].drop)) {
      params.beta(idx) = 0.0;
    }
  }
  GenerationResult out;
  std::vector<double> digest_values(params.beta.data(),
                                    params.beta.data() + params.beta.size());
  for (int i = 0; i < params.sd_subj.size(); ++i) {
    digest_values.push_back(params.sd_subj(i));
  }
  for (int i = 0; i < params.sd_item.size(); ++i) {
    digest_values.push_back(params.sd_item(i));
  }
  digest_values.push_back(params.sigma);
  out.digest = fnv_digest(digest_values);
  SimulateOptions opts;
  opts.empirical = false;
  out.data = simulate(rt.trials, rt.bundle, params, opts, rng);
  return out;
}

/// g-prior generation: per-term standardized effects with scaled
/// inverse-chi-square effect variances, residual scale fixed.
GenerationResult generate_jzs(const ScenarioSpec& spec,
                              const ScenarioRuntime& rt,
                              const std::vector<int>& true_model,
                              double sweep_value, RngStream& rng) {
  const TrialTable& tr = rt.trials;
  const long n = tr.n_rows();
  VectorXd y = VectorXd::Zero(n);
  std::vector<double> digest_values;

  // Fixed terms: union over the analyses, in first-seen order.
  std::vector<std::string> fixed_labels;
  for (const auto& a : spec.analyses) {
    for (const auto& label : a.jzs_fixed_terms) {
      if (std::find(fixed_labels.begin(), fixed_labels.end(), label) ==
          fixed_labels.end()) {
        fixed_labels.push_back(label);
      }
    }
  }
  for (const auto& label : fixed_labels) {
    bool present = true;
    for (size_t e = 0; e < spec.effects.size(); ++e) {
      if (!true_model[e] &&
          std::find(spec.effects[e].drop.begin(), spec.effects[e].drop.end(),
                    label) != spec.effects[e].drop.end()) {
        present = false;
      }
    }
    if (!present) continue;
    const MatrixXd block = jzs_term_block(tr, label);
    const double sig2 =
        ScaledInvChiSq{1.0, spec.jzs.scales.fixed_scale}.sample(rng);
    const double sig = std::sqrt(sig2);
    for (int k = 0; k < block.cols(); ++k) {
      const double theta = rng.normal(0.0, sig);
      digest_values.push_back(theta);
      y += block.col(k) * theta;
    }
  }
  for (const auto& term : spec.jzs.gen_random_terms) {
    std::vector<double> scales = term.scales;
    if (spec.sweep && spec.sweep->target == "jzs_scale" &&
        std::find(spec.sweep->terms.begin(), spec.sweep->terms.end(),
                  term.label) != spec.sweep->terms.end()) {
      std::fill(scales.begin(), scales.end(), sweep_value);
    }
    const MatrixXd block = jzs_term_block(tr, term.label);
    const int groups = static_cast<int>(scales.size());
    if (block.cols() % groups != 0) {
      throw ConfigError("term '" + term.label +
                        "': scales do not divide the column count");
    }
    const int per_group = static_cast<int>(block.cols()) / groups;
    for (int g = 0; g < groups; ++g) {
      double sig = 0.0;
      if (scales[g] > 0.0) {
        sig = std::sqrt(ScaledInvChiSq{1.0, scales[g]}.sample(rng));
      }
      for (int k = 0; k < per_group; ++k) {
        const double theta = sig > 0.0 ? rng.normal(0.0, sig) : 0.0;
        y += block.col(g * per_group + k) * theta;
      }
      digest_values.push_back(sig);
    }
  }
  for (long i = 0; i < n; ++i) y(i) += rng.normal();
  y = (spec.jzs.gen_mu + spec.jzs.gen_sigma * y.array()).matrix();

  GenerationResult out;
  out.digest = fnv_digest(digest_values);
  out.data.trials = tr;
  out.data.y = y;
  out.data.family = Family::kNormal;
  return out;
}

std::vector<RandomBlockSpec> resolve_random_blocks(
    const AnalysisSpec& a, const DesignMatrixBundle& bundle) {
  std::vector<RandomBlockSpec> blocks;
  // Subject block first for a stable Phi layout.
  for (const std::string grouping : {"subj", "item"}) {
    auto it = a.random_columns.find(grouping);
    if (it == a.random_columns.end() || it->second.empty()) continue;
    RandomBlockSpec rb;
    rb.grouping = grouping;
    for (const auto& name : it->second) {
      int idx = -1;
      for (size_t j = 0; j < bundle.column_names.size(); ++j) {
        if (bundle.column_names[j] == name) idx = static_cast<int>(j);
      }
      if (idx < 0) throw ConfigError("unknown random column '" + name + "'");
      rb.columns.push_back(idx);
    }
    blocks.push_back(rb);
  }
  return blocks;
}

/// Runs every configured analysis of one dataset; appends one record per
/// (analysis, effect).
void analyze_into(const ScenarioSpec& spec, const ScenarioRuntime& rt,
                  const Dataset& data, const std::vector<int>& true_model,
                  int run, double sweep_value, const std::string& digest,
                  std::uint64_t seed, std::vector<SbcRecord>& sink) {
  for (size_t ai = 0; ai < spec.analyses.size(); ++ai) {
    const AnalysisSpec& a = spec.analyses[ai];
    if (a.pipeline == PipelineKind::kFreq) continue;

    auto blank_record = [&](size_t ei) {
      SbcRecord rec;
      rec.run = run;
      rec.true_model = true_model[ei];
      rec.analysis_id = a.id;
      rec.effect_id = spec.effects[ei].id;
      rec.sweep_value = sweep_value;
      rec.params_digest = digest;
      return rec;
    };
    auto fail_all = [&](const std::string& why) {
      for (size_t ei = 0; ei < spec.effects.size(); ++ei) {
        SbcRecord rec = blank_record(ei);
        rec.log_bf10 = std::numeric_limits<double>::quiet_NaN();
        rec.post_p1 = std::numeric_limits<double>::quiet_NaN();
        rec.warn_flags = "error:" + why;
        sink.push_back(rec);
      }
    };

    try {
      const Dataset view = a.view == AggregationLevel::kNone
                               ? data
                               : aggregate(data, a.view);
      if (a.pipeline == PipelineKind::kJzs) {
        for (size_t ei = 0; ei < spec.effects.size(); ++ei) {
          SbcRecord rec = blank_record(ei);
          try {
            JzsAnovaSpec jspec;
            jspec.fixed_terms = a.jzs_fixed_terms;
            jspec.random_terms = a.jzs_random_terms;
            jspec.test_terms = spec.effects[ei].drop;
            jspec.scales = spec.jzs.scales;
            jspec.prior_p1 = spec.sbc.prior_p1;
            RngStream jrng(seed, kTagJzs, run,
                           ai * 256 + ei);
            const JzsBfResult r =
                jzs_anova_bf(view, jspec, spec.integration, jrng);
            rec.log_bf10 = r.comparison.log_bf10;
            rec.post_p1 = r.comparison.post_p1;
            rec.warn_flags = join_warnings(r.warnings);
          } catch (const std::exception& e) {
            rec.log_bf10 = std::numeric_limits<double>::quiet_NaN();
            rec.post_p1 = std::numeric_limits<double>::quiet_NaN();
            rec.warn_flags = std::string("error:") + e.what();
          }
          sink.push_back(rec);
        }
        continue;
      }

      // Collapsed + bridge: one full fit, one null fit per effect.
      const DesignMatrixBundle bundle =
          expand_design(view.trials, rt.schemes_in_factor_order);
      ModelSpec m1;
      m1.fixed_columns.resize(bundle.column_names.size());
      for (size_t j = 0; j < bundle.column_names.size(); ++j) {
        m1.fixed_columns[j] = static_cast<int>(j);
      }
      m1.random_blocks = resolve_random_blocks(a, bundle);
      m1.priors = spec.priors;
      m1.family = spec.family;

      const CollapsedModel full(view, bundle, m1);
      RngStream mcmc_rng1(seed, kTagMcmc, run, ai * 256);
      const PosteriorDraws d1 = full.run_mcmc(spec.mcmc, mcmc_rng1);
      RngStream bridge_rng1(seed, kTagBridge, run, ai * 256);
      const BridgeResult b1 = bridge_logml(
          d1,
          [&](const VectorXd& u) { return full.log_posterior_unconstrained(u); },
          spec.bridge, bridge_rng1);

      for (size_t ei = 0; ei < spec.effects.size(); ++ei) {
        SbcRecord rec = blank_record(ei);
        try {
          const std::vector<int> drop_idx =
              rt.column_indices(spec.effects[ei].drop);
          ModelSpec m0 = m1;
          m0.fixed_columns.clear();
          for (int j = 0; j < static_cast<int>(bundle.column_names.size());
               ++j) {
            if (std::find(drop_idx.begin(), drop_idx.end(), j) ==
                drop_idx.end()) {
              m0.fixed_columns.push_back(j);
            }
          }
          const CollapsedModel null_model(view, bundle, m0);
          RngStream mcmc_rng0(seed, kTagMcmc, run, ai * 256 + ei + 1);
          const PosteriorDraws d0 = null_model.run_mcmc(spec.mcmc, mcmc_rng0);
          RngStream bridge_rng0(seed, kTagBridge, run, ai * 256 + ei + 1);
          const BridgeResult b0 = bridge_logml(
              d0,
              [&](const VectorXd& u) {
                return null_model.log_posterior_unconstrained(u);
              },
              spec.bridge, bridge_rng0);

          const ModelComparison cmp =
              bayes_factor(b1.log_ml, b0.log_ml, spec.sbc.prior_p1);
          rec.log_bf10 = cmp.log_bf10;
          rec.post_p1 = cmp.post_p1;
          rec.rhat_max = std::max(d1.rhat.maxCoeff(), d0.rhat.maxCoeff());
          rec.bridge_iters = std::max(b1.n_iterations, b0.n_iterations);
          std::vector<std::string> warns;
          warns.push_back(d1.warning);
          warns.push_back(d0.warning);
          for (const auto& w : b1.warnings) warns.push_back(w);
          for (const auto& w : b0.warnings) warns.push_back(w);
          rec.warn_flags = join_warnings(warns);
        } catch (const std::exception& e) {
          rec.log_bf10 = std::numeric_limits<double>::quiet_NaN();
          rec.post_p1 = std::numeric_limits<double>::quiet_NaN();
          rec.warn_flags = std::string("error:") + e.what();
        }
        sink.push_back(rec);
      }
    } catch (const std::exception& e) {
      fail_all(e.what());
    }
  }
}

}  // namespace

std::vector<SbcRecord> run_sbc(const ScenarioSpec& spec,
                               const SbcOverrides& overrides) {
  const int n_sims = overrides.n_sims.value_or(spec.sbc.n_sims);
  const std::uint64_t seed = overrides.seed.value_or(spec.seed);
  if (n_sims < 1) throw ConfigError("n_sims must be >= 1");

  if (spec.is_toy()) {
    const ToySpec toy = *spec.toy;
    const std::string effect_id =
        spec.effects.empty() ? "theta" : spec.effects[0].id;
    std::vector<SbcRecord> records(n_sims);
    parallel_for(n_sims, overrides.jobs, [&](int run) {
      RngStream rng(seed, kTagModel, run);
      const bool h1 = rng.bernoulli(spec.sbc.prior_p1);
      const double theta = h1 ? rng.normal(0.0, toy.tau) : 0.0;
      VectorXd y(toy.n_obs);
      for (int i = 0; i < toy.n_obs; ++i) {
        y(i) = rng.normal(theta, toy.sigma0);
      }
      const double log_bf = toy_log_ml_h1(y, toy) - toy_log_ml_h0(y, toy);
      SbcRecord rec;
      rec.run = run;
      rec.true_model = h1 ? 1 : 0;
      rec.analysis_id = "exact";
      rec.effect_id = effect_id;
      rec.log_bf10 = log_bf;
      rec.post_p1 = posterior_model_prob_log(log_bf, spec.sbc.prior_p1);
      records[run] = rec;
    });
    return records;
  }

  bool any_non_freq = false;
  for (const auto& a : spec.analyses) {
    if (a.pipeline != PipelineKind::kFreq) any_non_freq = true;
  }
  if (!any_non_freq) {
    throw ConfigError("scenario has no Bayesian analysis arms for SBC");
  }
  if (spec.effects.empty()) throw ConfigError("scenario has no tested effects");

  const ScenarioRuntime rt = compile_scenario(spec);
  std::vector<std::vector<SbcRecord>> slots(n_sims);
  parallel_for(n_sims, overrides.jobs, [&](int run) {
    RngStream model_rng(seed, kTagModel, run);
    std::vector<int> true_model(spec.effects.size());
    for (size_t e = 0; e < spec.effects.size(); ++e) {
      true_model[e] = model_rng.bernoulli(spec.sbc.prior_p1) ? 1 : 0;
    }
    const double sweep_value = spec.sweep_value(run, n_sims);
    RngStream param_rng(seed, kTagParams, run);
    GenerationResult gen =
        spec.is_jzs_generative()
            ? generate_jzs(spec, rt, true_model, sweep_value, param_rng)
            : generate_collapsed(spec, rt, true_model, sweep_value, param_rng);
    analyze_into(spec, rt, gen.data, true_model, run, sweep_value, gen.digest,
                 seed, slots[run]);
  });

  std::vector<SbcRecord> records;
  for (auto& s : slots) {
    for (auto& r : s) records.push_back(std::move(r));
  }
  return records;
}

std::vector<SummaryRow> summarize(const std::vector<SbcRecord>& records,
                                  double prior_p1) {
  std::vector<SummaryRow> rows;
  auto find_row = [&](const SbcRecord& rec) -> SummaryRow& {
    for (auto& r : rows) {
      if (r.analysis_id == rec.analysis_id && r.effect_id == rec.effect_id) {
        return r;
      }
    }
    rows.push_back(SummaryRow{rec.analysis_id, rec.effect_id});
    return rows.back();
  };
  std::map<std::pair<std::string, std::string>, std::vector<double>> values;
  for (const auto& rec : records) {
    SummaryRow& row = find_row(rec);
    if (std::isnan(rec.post_p1)) {
      ++row.n_failed;
    } else {
      values[{rec.analysis_id, rec.effect_id}].push_back(rec.post_p1);
    }
  }
  for (auto& row : rows) {
    const auto& v = values[{row.analysis_id, row.effect_id}];
    row.n = static_cast<int>(v.size());
    row.prior_p1 = prior_p1;
    if (row.n == 0) continue;
    row.mean_post_p1 = mean(v);
    if (row.n >= 2) {
      row.sd_post_p1 = sample_sd(v);
      const double half = 1.959963984540054 * row.sd_post_p1 / std::sqrt(row.n);
      row.ci_lo = row.mean_post_p1 - half;
      row.ci_hi = row.mean_post_p1 + half;
    } else {
      row.ci_lo = row.ci_hi = row.mean_post_p1;
    }
  }
  return rows;
}

std::vector<double> default_scale_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 14; ++i) grid.push_back(0.2 + i * (1.3 / 13.0));
  return grid;
}

std::vector<CalibrationTestRow> calibration_tests(
    const ScenarioSpec& spec, const std::vector<SbcRecord>& records,
    const std::vector<double>& scale_grid) {
  std::vector<CalibrationTestRow> out;
  const double prior = spec.sbc.prior_p1;

  struct Group {
    std::string analysis_id, effect_id;
    std::vector<double> post;   // valid values
    std::vector<double> sweep;  // aligned sweep values
    std::map<int, double> by_run;
  };
  std::vector<Group> groups;
  auto group_of = [&](const SbcRecord& r) -> Group& {
    for (auto& g : groups) {
      if (g.analysis_id == r.analysis_id && g.effect_id == r.effect_id) {
        return g;
      }
    }
    groups.push_back(Group{r.analysis_id, r.effect_id});
    return groups.back();
  };
  for (const auto& r : records) {
    Group& g = group_of(r);
    if (std::isnan(r.post_p1)) continue;
    g.post.push_back(r.post_p1);
    g.sweep.push_back(r.sweep_value);
    g.by_run[r.run] = r.post_p1;
  }

  auto push_ttest = [&](const std::string& analysis, const std::string& effect,
                        const std::string& test, double scale,
                        const std::vector<double>& x) {
    CalibrationTestRow row{analysis, effect, test, scale};
    if (x.size() < 2 || sample_sd(x) <= 0.0) {
      row.skipped = true;
    } else {
      const ModelComparison cmp = jzs_ttest_bf(x, scale);
      row.log_bf10 = cmp.log_bf10;
      row.bf10 = cmp.bf10;
    }
    out.push_back(row);
  };

  for (const auto& g : groups) {
    std::vector<double> centered(g.post.size());
    for (size_t i = 0; i < g.post.size(); ++i) centered[i] = g.post[i] - prior;
    for (double scale : scale_grid) {
      push_ttest(g.analysis_id, g.effect_id, "vs_prior", scale, centered);
    }
    if (spec.sweep && !g.post.empty()) {
      std::vector<double> scales = scale_grid;
      scales.insert(scales.begin(), kRegressionDefaultScale);
      for (double scale : scales) {
        CalibrationTestRow row{g.analysis_id, g.effect_id, "regression", scale};
        bool constant = sample_sd(g.post) <= 0.0;
        if (g.post.size() < 3 || constant) {
          row.skipped = true;
        } else {
          const ModelComparison cmp = jzs_linreg_bf(g.sweep, g.post, scale);
          row.log_bf10 = cmp.log_bf10;
          row.bf10 = cmp.bf10;
        }
        out.push_back(row);
      }
    }
  }
  // Paired comparisons between effects within an analysis.
  for (size_t i = 0; i < groups.size(); ++i) {
    for (size_t j = i + 1; j < groups.size(); ++j) {
      if (groups[i].analysis_id != groups[j].analysis_id) continue;
      std::vector<double> diffs;
      for (const auto& [run, v] : groups[i].by_run) {
        auto it = groups[j].by_run.find(run);
        if (it != groups[j].by_run.end()) diffs.push_back(v - it->second);
      }
      for (double scale : scale_grid) {
        push_ttest(groups[i].analysis_id,
                   groups[i].effect_id + "|" + groups[j].effect_id, "paired",
                   scale, diffs);
      }
    }
  }
  return out;
}

Dataset generate_example_dataset(const ScenarioSpec& spec, std::uint64_t seed) {
  if (spec.is_toy()) throw ConfigError("toy scenarios have no datasets");
  const ScenarioRuntime rt = compile_scenario(spec);
  RngStream rng(seed, kTagParams, 0);
  const std::vector<int> all_present(spec.effects.size(), 1);
  if (spec.is_jzs_generative()) {
    return generate_jzs(spec, rt, all_present,
                        spec.sweep ? spec.sweep->to : 0.0, rng)
        .data;
  }
  ParamPins pins = rt.pins;
  LmmParams params = draw_lmm_params(spec.priors, rt.gen_layout, pins, rng);
  params.family = spec.family;
  SimulateOptions opts;
  opts.empirical = spec.empirical;
  if (spec.empirical) {
    for (int j = 0; j < params.beta.size(); ++j) {
      opts.empirical_columns.push_back(j);
    }
  }
  return simulate(rt.trials, rt.bundle, params, opts, rng);
}

std::vector<BfReportRow> analyze_dataset(const ScenarioSpec& spec,
                                         const Dataset& data,
                                         std::uint64_t seed) {
  const ScenarioRuntime rt = compile_scenario(spec);
  std::vector<int> all_present(spec.effects.size(), 1);
  std::vector<SbcRecord> records;
  analyze_into(spec, rt, data, all_present, 0,
               std::numeric_limits<double>::quiet_NaN(), "", seed, records);
  std::vector<BfReportRow> rows;
  for (const auto& r : records) {
    rows.push_back(BfReportRow{r.analysis_id, r.effect_id, r.log_bf10,
                               std::exp(r.log_bf10), r.post_p1, r.rhat_max,
                               r.bridge_iters, r.warn_flags});
  }
  return rows;
}

}  // namespace calibra
