#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "calibra/csvio.hpp"
#include "calibra/report.hpp"
#include "calibra/sbc.hpp"
#include "calibra/scenario.hpp"

namespace {

using namespace calibra;

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("CALIBRA_SEED");
  if (!v || !*v) return std::nullopt;
  return std::strtoull(v, nullptr, 10);
}

std::uint64_t effective_seed(const ScenarioSpec& spec,
                             std::optional<std::uint64_t> cli_seed) {
  if (auto e = env_seed()) return *e;
  if (cli_seed) return *cli_seed;
  return spec.seed;
}

int cmd_simulate(const std::string& scenario, std::optional<std::uint64_t> seed,
                 const std::string& out) {
  const ScenarioSpec spec = load_scenario(scenario);
  const Dataset data = generate_example_dataset(spec, effective_seed(spec, seed));
  write_dataset_csv(out, data);
  std::cout << "wrote " << data.trials.n_rows() << " rows to " << out << "\n";
  return 0;
}

int cmd_bf(const std::string& scenario, const std::string& data_path,
           std::optional<std::uint64_t> seed, const std::string& out) {
  const ScenarioSpec spec = load_scenario(scenario);
  const std::uint64_t s = effective_seed(spec, seed);
  const Dataset data = data_path.empty()
                           ? generate_example_dataset(spec, s)
                           : read_dataset_csv(data_path, spec);
  const auto rows = analyze_dataset(spec, data, s);
  write_bf_report_csv(out, rows);
  int failed = 0;
  for (const auto& r : rows) {
    std::cout << r.analysis_id << " " << r.effect_id
              << ": log BF10 = " << format_double(r.log_bf10)
              << " post P(H1) = " << format_double(r.post_p1);
    if (!r.warn_flags.empty()) std::cout << "  [" << r.warn_flags << "]";
    std::cout << "\n";
    if (std::isnan(r.post_p1)) ++failed;
  }
  if (!rows.empty() && failed == static_cast<int>(rows.size())) return 3;
  return 0;
}

int cmd_sbc(const std::string& scenario, std::optional<int> n_sims, int jobs,
            std::optional<std::uint64_t> seed, const std::string& out_dir) {
  const ScenarioSpec spec = load_scenario(scenario);
  SbcOverrides ov;
  ov.n_sims = n_sims;
  ov.seed = effective_seed(spec, seed);
  ov.jobs = jobs;
  const auto records = run_sbc(spec, ov);
  const ReportStatus st = write_sbc_outputs(out_dir, spec, records);
  std::cout << "sbc '" << spec.name << "': " << st.n_records << " records, "
            << st.n_failed << " failed; outputs in " << out_dir << "\n";
  for (const auto& row : summarize(records, spec.sbc.prior_p1)) {
    std::cout << "  " << row.analysis_id << " / " << row.effect_id
              << ": mean post P(H1) = " << format_double(row.mean_post_p1)
              << "  ci [" << format_double(row.ci_lo) << ", "
              << format_double(row.ci_hi) << "]  n=" << row.n << "\n";
  }
  return st.all_failed() ? 3 : 0;
}

int cmd_freq(const std::string& scenario, const std::string& mode,
             std::optional<int> n_sims, int jobs,
             std::optional<std::uint64_t> seed, const std::string& out_dir) {
  const ScenarioSpec spec = load_scenario(scenario);
  if (mode != "alpha" && mode != "power") {
    throw ConfigError("mode must be alpha or power");
  }
  const ErrorRateCurve curve = alpha_power_sim(
      spec, mode == "power", n_sims, effective_seed(spec, seed), jobs);
  write_freq_outputs(out_dir, spec, curve, mode);
  for (const auto& p : curve) {
    std::cout << "  " << p.analysis_id << " / " << p.effect_id
              << (std::isnan(p.sd_true)
                      ? std::string()
                      : " @ sd=" + format_double(p.sd_true))
              << ": " << p.n_reject << "/" << p.n_sims << " rejected\n";
  }
  return 0;
}

int cmd_report(const std::string& scenario, const std::string& records_path,
               const std::string& out_dir) {
  const ScenarioSpec spec = load_scenario(scenario);
  auto records = read_records_csv(records_path);
  restore_sweep_values(spec, records);
  const ReportStatus st = write_sbc_outputs(out_dir, spec, records);
  std::cout << "report for '" << spec.name << "': " << st.n_records
            << " records; outputs in " << out_dir << "\n";
  return st.all_failed() ? 3 : 0;
}

int cmd_presets(const std::string& dump_dir) {
  for (const auto& name : preset_names()) {
    std::cout << name << "\n";
    if (!dump_dir.empty()) {
      std::filesystem::create_directories(dump_dir);
      std::ofstream out(std::filesystem::path(dump_dir) / (name + ".json"));
      out << scenario_to_json(preset_scenario(name)) << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "calibra: simulation-based calibration of Bayes factors for "
      "repeated-measures designs"};
  app.require_subcommand(1);

  std::string scenario, out = "dataset.csv", out_dir = "out", data_path;
  std::string mode = "alpha", records_path, dump_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_sims;
  int jobs = 0;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Master seed (CALIBRA_SEED overrides)");
  };

  auto* sim = app.add_subcommand("simulate", "Generate one dataset CSV");
  sim->add_option("--scenario", scenario, "Preset name or scenario JSON file")
      ->required();
  sim->add_option("--out", out, "Output CSV path")->required();
  add_seed(sim);

  auto* bf = app.add_subcommand("bf", "Bayes factors for a single dataset");
  bf->add_option("--scenario", scenario)->required();
  bf->add_option("--data", data_path, "Dataset CSV (simulated if omitted)");
  bf->add_option("--out", out, "Report CSV path")->required();
  add_seed(bf);

  auto* sbc = app.add_subcommand("sbc", "Run the SBC loop");
  sbc->add_option("--scenario", scenario)->required();
  sbc->add_option("--n-sims", n_sims, "Override the preset run count");
  sbc->add_option("--jobs", jobs, "Worker threads (0 = all cores)");
  sbc->add_option("--out-dir", out_dir)->required();
  add_seed(sbc);

  auto* freq = app.add_subcommand("freq", "Frequentist error-rate loops");
  freq->add_option("--scenario", scenario)->required();
  freq->add_option("--mode", mode, "alpha or power");
  freq->add_option("--n-sims", n_sims);
  freq->add_option("--jobs", jobs);
  freq->add_option("--out-dir", out_dir)->required();
  add_seed(freq);

  auto* rep = app.add_subcommand("report", "Rebuild summaries from records");
  rep->add_option("--scenario", scenario)->required();
  rep->add_option("--records", records_path)->required();
  rep->add_option("--out-dir", out_dir)->required();

  auto* pre = app.add_subcommand("presets", "List built-in scenarios");
  pre->add_option("--dump", dump_dir, "Write each preset as JSON into DIR");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(scenario, seed, out);
    if (bf->parsed()) return cmd_bf(scenario, data_path, seed, out);
    if (sbc->parsed()) return cmd_sbc(scenario, n_sims, jobs, seed, out_dir);
    if (freq->parsed()) {
      return cmd_freq(scenario, mode, n_sims, jobs, seed, out_dir);
    }
    if (rep->parsed()) return cmd_report(scenario, records_path, out_dir);
    if (pre->parsed()) return cmd_presets(dump_dir);
  } catch (const calibra::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
