#include "calibra/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace calibra {

using nlohmann::json;

double ScenarioSpec::sweep_value(int run, int n_sims) const {
  if (!sweep) return std::numeric_limits<double>::quiet_NaN();
  if (n_sims <= 1) return sweep->from;
  return sweep->from + (sweep->to - sweep->from) * run / (n_sims - 1.0);
}

int ScenarioRuntime::column_index(const std::string& name) const {
  for (size_t j = 0; j < bundle.column_names.size(); ++j) {
    if (bundle.column_names[j] == name) return static_cast<int>(j);
  }
  throw ConfigError("unknown design column '" + name + "'");
}

std::vector<int> ScenarioRuntime::column_indices(
    const std::vector<std::string>& names) const {
  std::vector<int> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(column_index(n));
  return out;
}

ScenarioRuntime compile_scenario(const ScenarioSpec& spec) {
  ScenarioRuntime rt;
  if (spec.is_toy()) return rt;
  spec.design.validate();
  for (const auto& f : spec.design.factors) {
    if (!spec.contrasts.count(f.name)) {
      throw ConfigError("no contrast scheme for factor '" + f.name + "'");
    }
    rt.schemes_in_factor_order.push_back(spec.contrasts.at(f.name));
  }
  RngStream dummy(0);
  rt.trials = build_trial_table(spec.design, dummy);
  rt.bundle = expand_design(rt.trials, rt.schemes_in_factor_order);

  const int p = static_cast<int>(rt.bundle.column_names.size());
  rt.pins.beta.assign(p, std::nullopt);
  rt.pins.sd_subj.assign(p, std::nullopt);
  rt.pins.sd_item.assign(p, std::nullopt);
  for (const auto& [name, value] : spec.pins.beta) {
    rt.pins.beta[rt.column_index(name)] = value;
  }
  for (const auto& [name, value] : spec.pins.sd_subj) {
    rt.pins.sd_subj[rt.column_index(name)] = value;
  }
  for (const auto& [name, value] : spec.pins.sd_item) {
    rt.pins.sd_item[rt.column_index(name)] = value;
  }
  rt.pins.sigma = spec.pins.sigma;
  rt.pins.zero_correlations = spec.pins.zero_correlations;

  rt.gen_layout.n_fixed = p;
  rt.gen_layout.n_subj_terms = p;
  rt.gen_layout.n_item_terms = spec.design.n_item > 0 ? p : 0;
  return rt;
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

namespace {

void check_keys(const json& j, const std::string& ctx,
                const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(ctx + ": object expected");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError(ctx + ": unknown key '" + it.key() + "'");
    }
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

Family family_from_string(const std::string& s) {
  if (s == "normal") return Family::kNormal;
  if (s == "lognormal") return Family::kLognormal;
  throw ConfigError("unknown family '" + s + "'");
}
std::string family_to_string(Family f) {
  return f == Family::kNormal ? "normal" : "lognormal";
}

ContrastKind contrast_kind_from_string(const std::string& s) {
  if (s == "hypothesis-matrix") return ContrastKind::kHypothesisMatrix;
  if (s == "sum") return ContrastKind::kSum;
  if (s == "treatment-grand-mean") return ContrastKind::kTreatmentGrandMean;
  if (s == "helmert-scaled") return ContrastKind::kHelmertScaled;
  throw ConfigError("unknown contrast kind '" + s + "'");
}
std::string contrast_kind_to_string(ContrastKind k) {
  switch (k) {
    case ContrastKind::kHypothesisMatrix: return "hypothesis-matrix";
    case ContrastKind::kSum: return "sum";
    case ContrastKind::kTreatmentGrandMean: return "treatment-grand-mean";
    case ContrastKind::kHelmertScaled: return "helmert-scaled";
  }
  return "?";
}

AggregationLevel view_from_string(const std::string& s) {
  if (s == "raw") return AggregationLevel::kNone;
  if (s == "by-subject") return AggregationLevel::kBySubject;
  if (s == "by-item") return AggregationLevel::kByItem;
  throw ConfigError("unknown data view '" + s + "'");
}
std::string view_to_string(AggregationLevel v) {
  switch (v) {
    case AggregationLevel::kNone: return "raw";
    case AggregationLevel::kBySubject: return "by-subject";
    case AggregationLevel::kByItem: return "by-item";
  }
  return "?";
}

PipelineKind pipeline_from_string(const std::string& s) {
  if (s == "collapsed") return PipelineKind::kCollapsedBridge;
  if (s == "jzs") return PipelineKind::kJzs;
  if (s == "freq") return PipelineKind::kFreq;
  throw ConfigError("unknown pipeline '" + s + "'");
}
std::string pipeline_to_string(PipelineKind p) {
  switch (p) {
    case PipelineKind::kCollapsedBridge: return "collapsed";
    case PipelineKind::kJzs: return "jzs";
    case PipelineKind::kFreq: return "freq";
  }
  return "?";
}

void parse_prior_block(const json& j, const std::string& ctx,
                       const std::string& expect_dist, PriorSpec& out) {
  check_keys(j, ctx, {"dist", "mean", "sd", "scale", "eta"});
  const std::string dist = j.at("dist").get<std::string>();
  if (dist != expect_dist) {
    throw ConfigError(ctx + ": expected dist '" + expect_dist + "', got '" +
                      dist + "'");
  }
  if (ctx.ends_with("beta_intercept")) {
    out.beta_intercept = {j.at("mean").get<double>(), j.at("sd").get<double>()};
  } else if (ctx.ends_with("beta_contrasts")) {
    if (get_or<double>(j, "mean", 0.0) != 0.0) {
      throw ConfigError(ctx + ": contrast prior mean must be 0");
    }
    out.beta_contrast_sd = j.at("sd").get<double>();
  } else if (ctx.ends_with("sd_random")) {
    out.sd_random_scale = j.at("scale").get<double>();
  } else if (ctx.ends_with("sd_residual")) {
    out.sd_residual_scale = j.at("scale").get<double>();
  } else if (ctx.ends_with("corr")) {
    out.lkj_eta = j.at("eta").get<double>();
  }
}

}  // namespace

ScenarioSpec scenario_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scenario JSON parse error: ") + e.what());
  }
  check_keys(j, "scenario",
             {"name", "description", "family", "seed", "design", "contrasts",
              "priors", "pins", "sweep", "effects", "analyses", "toy", "jzs",
              "sbc", "freq", "mcmc", "bridge", "integration", "empirical"});
  ScenarioSpec s;
  s.name = get_or<std::string>(j, "name", "scenario");
  s.description = get_or<std::string>(j, "description", "");
  s.family = family_from_string(get_or<std::string>(j, "family", "normal"));
  s.seed = get_or<std::uint64_t>(j, "seed", 1);
  s.empirical = get_or<bool>(j, "empirical", false);

  if (j.contains("toy")) {
    const json& t = j.at("toy");
    check_keys(t, "toy", {"n_obs", "sigma0", "tau"});
    ToySpec toy;
    toy.n_obs = get_or<int>(t, "n_obs", 10);
    toy.sigma0 = get_or<double>(t, "sigma0", 1.0);
    toy.tau = get_or<double>(t, "tau", 1.0);
    s.toy = toy;
  }

  if (j.contains("design")) {
    const json& d = j.at("design");
    check_keys(d, "design",
               {"factors", "n_subj", "n_item", "n_rep", "assignment"});
    for (const json& fj : d.at("factors")) {
      check_keys(fj, "factor",
                 {"name", "levels", "within_subject", "within_item"});
      FactorSpec f;
      f.name = fj.at("name").get<std::string>();
      f.levels = fj.at("levels").get<std::vector<std::string>>();
      f.within_subject = get_or<bool>(fj, "within_subject", true);
      f.within_item = get_or<bool>(fj, "within_item", false);
      s.design.factors.push_back(f);
    }
    s.design.n_subj = d.at("n_subj").get<int>();
    s.design.n_item = get_or<int>(d, "n_item", 0);
    s.design.n_rep = get_or<int>(d, "n_rep", 1);
    const std::string assign =
        get_or<std::string>(d, "assignment", "full-crossing");
    if (assign == "full-crossing") {
      s.design.assignment = Assignment::kFullCrossing;
    } else if (assign == "latin-square") {
      s.design.assignment = Assignment::kLatinSquare;
    } else {
      throw ConfigError("unknown assignment '" + assign + "'");
    }
  }

  if (j.contains("contrasts")) {
    for (auto it = j.at("contrasts").begin(); it != j.at("contrasts").end();
         ++it) {
      const json& cj = it.value();
      check_keys(cj, "contrast", {"kind", "rows"});
      ContrastScheme scheme;
      scheme.kind = contrast_kind_from_string(cj.at("kind").get<std::string>());
      if (cj.contains("rows")) {
        const auto rows = cj.at("rows").get<std::vector<std::vector<double>>>();
        MatrixXd m(rows.size(), rows.empty() ? 0 : rows[0].size());
        for (size_t r = 0; r < rows.size(); ++r) {
          for (size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
        }
        scheme.hypothesis_rows = m;
      }
      s.contrasts[it.key()] = scheme;
    }
  }

  if (j.contains("priors")) {
    const json& p = j.at("priors");
    check_keys(p, "priors",
               {"beta_intercept", "beta_contrasts", "sd_random", "sd_residual",
                "corr"});
    if (p.contains("beta_intercept")) {
      parse_prior_block(p.at("beta_intercept"), "priors.beta_intercept",
                        "normal", s.priors);
    }
    if (p.contains("beta_contrasts")) {
      parse_prior_block(p.at("beta_contrasts"), "priors.beta_contrasts",
                        "normal", s.priors);
    }
    if (p.contains("sd_random")) {
      parse_prior_block(p.at("sd_random"), "priors.sd_random", "halfnormal",
                        s.priors);
    }
    if (p.contains("sd_residual")) {
      parse_prior_block(p.at("sd_residual"), "priors.sd_residual", "halfnormal",
                        s.priors);
    }
    if (p.contains("corr")) {
      parse_prior_block(p.at("corr"), "priors.corr", "lkj", s.priors);
    }
  }

  if (j.contains("pins")) {
    const json& p = j.at("pins");
    check_keys(p, "pins",
               {"beta", "sd_subj", "sd_item", "sigma", "zero_correlations"});
    if (p.contains("beta")) {
      s.pins.beta = p.at("beta").get<std::map<std::string, double>>();
    }
    if (p.contains("sd_subj")) {
      s.pins.sd_subj = p.at("sd_subj").get<std::map<std::string, double>>();
    }
    if (p.contains("sd_item")) {
      s.pins.sd_item = p.at("sd_item").get<std::map<std::string, double>>();
    }
    if (p.contains("sigma") && !p.at("sigma").is_null()) {
      s.pins.sigma = p.at("sigma").get<double>();
    }
    s.pins.zero_correlations = get_or<bool>(p, "zero_correlations", false);
  }

  if (j.contains("sweep")) {
    const json& w = j.at("sweep");
    check_keys(w, "sweep", {"target", "columns", "terms", "from", "to"});
    SweepSpec sweep;
    sweep.target = w.at("target").get<std::string>();
    if (sweep.target != "sd_subj" && sweep.target != "sd_item" &&
        sweep.target != "jzs_scale") {
      throw ConfigError("unknown sweep target '" + sweep.target + "'");
    }
    sweep.columns = get_or<std::vector<std::string>>(w, "columns", {});
    sweep.terms = get_or<std::vector<std::string>>(w, "terms", {});
    sweep.from = get_or<double>(w, "from", 0.0);
    sweep.to = get_or<double>(w, "to", 0.5);
    s.sweep = sweep;
  }

  if (j.contains("effects")) {
    for (const json& ej : j.at("effects")) {
      check_keys(ej, "effect", {"id", "drop"});
      EffectSpec e;
      e.id = ej.at("id").get<std::string>();
      e.drop = ej.at("drop").get<std::vector<std::string>>();
      s.effects.push_back(e);
    }
  }

  if (j.contains("analyses")) {
    for (const json& aj : j.at("analyses")) {
      check_keys(aj, "analysis",
                 {"id", "pipeline", "data", "random", "jzs_fixed", "jzs_random"});
      AnalysisSpec a;
      a.id = aj.at("id").get<std::string>();
      a.pipeline =
          pipeline_from_string(get_or<std::string>(aj, "pipeline", "collapsed"));
      a.view = view_from_string(get_or<std::string>(aj, "data", "raw"));
      if (aj.contains("random")) {
        a.random_columns =
            aj.at("random")
                .get<std::map<std::string, std::vector<std::string>>>();
        for (const auto& [grouping, cols] : a.random_columns) {
          if (grouping != "subj" && grouping != "item") {
            throw ConfigError("unknown grouping '" + grouping + "'");
          }
          (void)cols;
        }
      }
      a.jzs_fixed_terms = get_or<std::vector<std::string>>(aj, "jzs_fixed", {});
      a.jzs_random_terms = get_or<std::vector<std::string>>(aj, "jzs_random", {});
      s.analyses.push_back(a);
    }
  }

  if (j.contains("jzs")) {
    const json& z = j.at("jzs");
    check_keys(z, "jzs",
               {"fixed_scale", "random_scale", "gen_random_terms", "gen_mu",
                "gen_sigma"});
    s.jzs.scales.fixed_scale = get_or<double>(z, "fixed_scale", 0.5);
    s.jzs.scales.random_scale = get_or<double>(z, "random_scale", 1.0);
    s.jzs.gen_mu = get_or<double>(z, "gen_mu", 0.0);
    s.jzs.gen_sigma = get_or<double>(z, "gen_sigma", 1.0);
    if (z.contains("gen_random_terms")) {
      for (const json& tj : z.at("gen_random_terms")) {
        check_keys(tj, "jzs.gen_random_terms", {"label", "scales"});
        JzsGenTerm t;
        t.label = tj.at("label").get<std::string>();
        t.scales = tj.at("scales").get<std::vector<double>>();
        s.jzs.gen_random_terms.push_back(t);
      }
    }
  }

  if (j.contains("sbc")) {
    const json& b = j.at("sbc");
    check_keys(b, "sbc", {"n_sims", "prior_p1"});
    s.sbc.n_sims = get_or<int>(b, "n_sims", 100);
    s.sbc.prior_p1 = get_or<double>(b, "prior_p1", 0.5);
    if (!(s.sbc.prior_p1 > 0.0 && s.sbc.prior_p1 < 1.0)) {
      throw ConfigError("sbc.prior_p1 must be in (0, 1)");
    }
    if (s.sbc.n_sims < 1) throw ConfigError("sbc.n_sims must be >= 1");
  }

  if (j.contains("freq")) {
    const json& f = j.at("freq");
    check_keys(f, "freq", {"n_sims", "alpha_level", "effect_beta", "sd_grid"});
    s.freq.n_sims = get_or<int>(f, "n_sims", 1000);
    s.freq.alpha_level = get_or<double>(f, "alpha_level", 0.05);
    if (f.contains("effect_beta")) {
      s.freq.effect_beta =
          f.at("effect_beta").get<std::map<std::string, double>>();
    }
    s.freq.sd_grid = get_or<std::vector<double>>(f, "sd_grid", {});
  }

  if (j.contains("mcmc")) {
    const json& m = j.at("mcmc");
    check_keys(m, "mcmc",
               {"n_chains", "n_warmup", "n_draws", "thin", "target_accept"});
    s.mcmc.n_chains = get_or<int>(m, "n_chains", 4);
    s.mcmc.n_warmup = get_or<int>(m, "n_warmup", 1500);
    s.mcmc.n_draws = get_or<int>(m, "n_draws", 2000);
    s.mcmc.thin = get_or<int>(m, "thin", 3);
    s.mcmc.target_accept = get_or<double>(m, "target_accept", 0.30);
  }
  if (j.contains("bridge")) {
    const json& b = j.at("bridge");
    check_keys(b, "bridge", {"tol", "max_iter"});
    s.bridge.tol = get_or<double>(b, "tol", 1e-10);
    s.bridge.max_iter = get_or<int>(b, "max_iter", 1000);
  }
  if (j.contains("integration")) {
    const json& i = j.at("integration");
    check_keys(i, "integration", {"n_mc_draws"});
    s.integration.n_mc_draws = get_or<long>(i, "n_mc_draws", 100000);
  }

  // Cross-field validation happens in compile_scenario; basic shape checks
  // here keep error messages close to the file.
  if (!s.is_toy() && s.design.factors.empty()) {
    throw ConfigError("scenario needs a design (or a toy block)");
  }
  return s;
}

std::string scenario_to_json(const ScenarioSpec& s) {
  json j;
  j["name"] = s.name;
  if (!s.description.empty()) j["description"] = s.description;
  j["family"] = family_to_string(s.family);
  j["seed"] = s.seed;
  if (s.empirical) j["empirical"] = true;
  if (s.toy) {
    j["toy"] = {{"n_obs", s.toy->n_obs},
                {"sigma0", s.toy->sigma0},
                {"tau", s.toy->tau}};
  }
  if (!s.design.factors.empty()) {
    json d;
    d["factors"] = json::array();
    for (const auto& f : s.design.factors) {
      d["factors"].push_back({{"name", f.name},
                              {"levels", f.levels},
                              {"within_subject", f.within_subject},
                              {"within_item", f.within_item}});
    }
    d["n_subj"] = s.design.n_subj;
    d["n_item"] = s.design.n_item;
    d["n_rep"] = s.design.n_rep;
    d["assignment"] = s.design.assignment == Assignment::kFullCrossing
                          ? "full-crossing"
                          : "latin-square";
    j["design"] = d;
  }
  if (!s.contrasts.empty()) {
    json c;
    for (const auto& [name, scheme] : s.contrasts) {
      json cj;
      cj["kind"] = contrast_kind_to_string(scheme.kind);
      if (scheme.hypothesis_rows) {
        std::vector<std::vector<double>> rows;
        for (int r = 0; r < scheme.hypothesis_rows->rows(); ++r) {
          std::vector<double> row;
          for (int cc = 0; cc < scheme.hypothesis_rows->cols(); ++cc) {
            row.push_back((*scheme.hypothesis_rows)(r, cc));
          }
          rows.push_back(row);
        }
        cj["rows"] = rows;
      }
      c[name] = cj;
    }
    j["contrasts"] = c;
  }
  j["priors"] = {
      {"beta_intercept",
       {{"dist", "normal"},
        {"mean", s.priors.beta_intercept.mean},
        {"sd", s.priors.beta_intercept.sd}}},
      {"beta_contrasts",
       {{"dist", "normal"}, {"mean", 0.0}, {"sd", s.priors.beta_contrast_sd}}},
      {"sd_random",
       {{"dist", "halfnormal"}, {"scale", s.priors.sd_random_scale}}},
      {"sd_residual",
       {{"dist", "halfnormal"}, {"scale", s.priors.sd_residual_scale}}},
      {"corr", {{"dist", "lkj"}, {"eta", s.priors.lkj_eta}}}};
  {
    json p;
    if (!s.pins.beta.empty()) p["beta"] = s.pins.beta;
    if (!s.pins.sd_subj.empty()) p["sd_subj"] = s.pins.sd_subj;
    if (!s.pins.sd_item.empty()) p["sd_item"] = s.pins.sd_item;
    if (s.pins.sigma) p["sigma"] = *s.pins.sigma;
    if (s.pins.zero_correlations) p["zero_correlations"] = true;
    if (!p.empty()) j["pins"] = p;
  }
  if (s.sweep) {
    json w;
    w["target"] = s.sweep->target;
    if (!s.sweep->columns.empty()) w["columns"] = s.sweep->columns;
    if (!s.sweep->terms.empty()) w["terms"] = s.sweep->terms;
    w["from"] = s.sweep->from;
    w["to"] = s.sweep->to;
    j["sweep"] = w;
  }
  if (!s.effects.empty()) {
    j["effects"] = json::array();
    for (const auto& e : s.effects) {
      j["effects"].push_back({{"id", e.id}, {"drop", e.drop}});
    }
  }
  if (!s.analyses.empty()) {
    j["analyses"] = json::array();
    for (const auto& a : s.analyses) {
      json aj;
      aj["id"] = a.id;
      aj["pipeline"] = pipeline_to_string(a.pipeline);
      aj["data"] = view_to_string(a.view);
      if (!a.random_columns.empty()) aj["random"] = a.random_columns;
      if (!a.jzs_fixed_terms.empty()) aj["jzs_fixed"] = a.jzs_fixed_terms;
      if (!a.jzs_random_terms.empty()) aj["jzs_random"] = a.jzs_random_terms;
      j["analyses"].push_back(aj);
    }
  }
  if (s.is_jzs_generative() || s.jzs.scales.fixed_scale != 0.5 ||
      s.jzs.scales.random_scale != 1.0) {
    json z;
    z["fixed_scale"] = s.jzs.scales.fixed_scale;
    z["random_scale"] = s.jzs.scales.random_scale;
    z["gen_mu"] = s.jzs.gen_mu;
    z["gen_sigma"] = s.jzs.gen_sigma;
    z["gen_random_terms"] = json::array();
    for (const auto& t : s.jzs.gen_random_terms) {
      z["gen_random_terms"].push_back(
          {{"label", t.label}, {"scales", t.scales}});
    }
    j["jzs"] = z;
  }
  j["sbc"] = {{"n_sims", s.sbc.n_sims}, {"prior_p1", s.sbc.prior_p1}};
  if (!s.freq.effect_beta.empty() || !s.freq.sd_grid.empty()) {
    json f;
    f["n_sims"] = s.freq.n_sims;
    f["alpha_level"] = s.freq.alpha_level;
    if (!s.freq.effect_beta.empty()) f["effect_beta"] = s.freq.effect_beta;
    if (!s.freq.sd_grid.empty()) f["sd_grid"] = s.freq.sd_grid;
    j["freq"] = f;
  }
  j["mcmc"] = {{"n_chains", s.mcmc.n_chains},
               {"n_warmup", s.mcmc.n_warmup},
               {"n_draws", s.mcmc.n_draws},
               {"thin", s.mcmc.thin},
               {"target_accept", s.mcmc.target_accept}};
  j["bridge"] = {{"tol", s.bridge.tol}, {"max_iter", s.bridge.max_iter}};
  j["integration"] = {{"n_mc_draws", s.integration.n_mc_draws}};
  return j.dump(2);
}

ScenarioSpec load_scenario(const std::string& path_or_preset) {
  if (std::filesystem::exists(path_or_preset)) {
    std::ifstream in(path_or_preset);
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_from_json(ss.str());
  }
  return preset_scenario(path_or_preset);
}

}  // namespace calibra
