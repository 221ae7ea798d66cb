// masr: run, sweep and verify robust MA/RIS symbiotic-radio designs.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "masr/report.hpp"

using namespace masr;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::uint64_t> seeds;
  std::string out;
  std::string scenario;
  std::vector<std::string> schemes;
  int workers = 0;
  bool relax = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seeds, "one or more seeds");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--scenario", c.scenario, "psr or csr")
      ->check(CLI::IsMember({"psr", "csr"}));
  app->add_option("--scheme", c.schemes, "proposed-sapso, proposed-pso, fpa, random-psi")
      ->check(CLI::IsMember({"proposed-sapso", "proposed-pso", "fpa", "random-psi"}));
  app->add_option("--workers", c.workers, "concurrent runs")->check(CLI::PositiveNumber);
  app->add_flag("--relax-threshold", c.relax,
                "retry an infeasible instance once with the secondary threshold halved");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_config(c.config_path);
  if (!c.seeds.empty()) cfg.seeds = c.seeds;
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (!c.scenario.empty()) cfg.scenario = scenario_from_string(c.scenario);
  if (!c.schemes.empty()) {
    cfg.schemes.clear();
    for (const auto& s : c.schemes) cfg.schemes.push_back(scheme_from_string(s));
  }
  if (c.workers > 0) cfg.workers = c.workers;
  if (c.relax) cfg.relax_threshold_on_infeasible = true;
  return cfg;
}

int finish(const RunConfig& cfg, const std::vector<RunResult>& results) {
  write_outputs(cfg.output_dir, cfg, results);
  int bad = 0;
  std::cout << kCsvHeader << '\n';
  for (const auto& r : results) {
    std::cout << csv_row(r) << '\n';
    const bool checked = cfg.verify_samples == 0 || r.verified;
    if (!r.error.empty() || !r.feasible || !checked) {
      ++bad;
      std::cerr << "run " << run_stem(r) << ": "
                << (r.error.empty() ? "robustness check failed" : r.error) << '\n';
    }
  }
  std::cerr << results.size() - bad << "/" << results.size() << " runs ok, outputs in "
            << cfg.output_dir << '\n';
  return bad == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust transmission design for RIS-aided symbiotic radio with movable antennas"};
  app.require_subcommand(1);

  Common run_opts;
  auto* run = app.add_subcommand("run", "every seed x scheme at one configuration");
  add_common(run, run_opts);

  Common sweep_opts;
  std::string axis;
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "every sweep value x seed x scheme");
  add_common(sweep, sweep_opts);
  sweep->add_option("--axis", axis, "p_max_dbm, g_u, g_bs, antennas, ris_elements, pu_count");
  sweep->add_option("--values", values, "sweep values");

  std::string result_path;
  int samples = 1000;
  std::uint64_t sample_seed = 7;
  auto* verify = app.add_subcommand("verify", "robustness sampling on a saved result");
  verify->add_option("--result", result_path, "results/<run>.json written by run or sweep")
      ->required()
      ->check(CLI::ExistingFile);
  verify->add_option("--samples", samples, "perturbation draws")->check(CLI::PositiveNumber);
  verify->add_option("--seed", sample_seed, "sampling seed");

  auto* defaults = app.add_subcommand("defaults", "print the default configuration");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      RunConfig cfg = resolve(run_opts);
      cfg.sweep_name = "none";
      cfg.validate();
      return finish(cfg, run_sweep(cfg));
    }
    if (*sweep) {
      RunConfig cfg = resolve(sweep_opts);
      if (!axis.empty()) cfg.sweep_name = axis;
      if (!values.empty()) cfg.sweep_values = values;
      if (cfg.sweep_name == "none" || cfg.sweep_values.empty())
        throw std::invalid_argument("sweep needs an axis and at least one value");
      cfg.validate();
      return finish(cfg, run_sweep(cfg));
    }
    if (*verify) {
      const SavedResult saved = load_result(result_path);
      const Instance inst(saved.config, saved.result.seed);
      const RobustnessReport rep = verify_robustness(inst, saved.result, samples, sample_seed);
      std::printf("samples %d violations %d min_sampled_rate %.6f reported_bound %.6f %s\n",
                  rep.samples, rep.violations, rep.min_sampled_rate, rep.reported_bound,
                  rep.passed() ? "PASS" : "FAIL");
      return rep.passed() ? 0 : 1;
    }
    if (*defaults) {
      std::cout << config_to_json_text(RunConfig{}) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
