#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "masr/report.hpp"

using namespace masr;

namespace {

// Small swarm so the end-to-end cases stay quick.
RunConfig quick(Scenario s) {
  RunConfig c;
  c.scenario = s;
  c.swarm.particles = 12;
  c.swarm.iterations = 12;
  c.ao_max_iterations = 4;
  c.seeds = {1};
  c.verify_samples = 300;
  return c;
}

std::string without_runtime(const std::string& row) { return row.substr(0, row.rfind(',')); }

int fields(const std::string& row) { return 1 + static_cast<int>(std::count(row.begin(), row.end(), ',')); }

}  // namespace

TEST_CASE("scheme names round trip") {
  for (Scheme s : all_schemes()) CHECK(scheme_from_string(to_string(s)) == s);
  CHECK(to_string(Scheme::random_psi) == "random-psi");
  CHECK_THROWS_AS(scheme_from_string("annealing"), std::invalid_argument);
}

TEST_CASE("config JSON round trip") {
  RunConfig c;
  c.scenario = Scenario::csr;
  c.schemes = {Scheme::fpa, Scheme::proposed_pso};
  c.g_u = 0.12;
  c.antennas = 5;
  c.swarm.particles = 33;
  c.propagation.layout.pu_centers = {{0, 60, 0}, {0, 80, 0}};
  c.seeds = {4, 9};
  const std::string text = config_to_json_text(c);
  const RunConfig back = config_from_json_text(text);
  CHECK(config_to_json_text(back) == text);
  CHECK(back.scenario == Scenario::csr);
  CHECK(back.schemes == c.schemes);
  CHECK(back.g_u == 0.12);
  CHECK(back.swarm.particles == 33);
  CHECK(back.propagation.layout.pu_centers.size() == 2);
  CHECK(back.seeds == c.seeds);
  // defaults survive too
  CHECK(config_to_json_text(config_from_json_text(config_to_json_text(RunConfig{}))) ==
        config_to_json_text(RunConfig{}));
}

TEST_CASE("unknown or invalid config keys are rejected") {
  CHECK_THROWS(config_from_json_text(R"({"system": {"antennaz": 4}})"));
  CHECK_THROWS(config_from_json_text(R"({"mystery": {}})"));
  CHECK_THROWS(config_from_json_text(R"({"system": {"antennas": 0}})"));
  CHECK_NOTHROW(config_from_json_text(R"({"system": {"antennas": 3}})"));
  CHECK(config_from_json_text(R"({"system": {"antennas": 3}})").antennas == 3);
}

TEST_CASE("sweep axes") {
  const RunConfig base;
  CHECK(apply_sweep(base, "g_u", 0.15).g_u == 0.15);
  CHECK(apply_sweep(base, "antennas", 2).antennas == 2);
  CHECK(apply_sweep(base, "p_max_dbm", 30).p_max_watt() == doctest::Approx(1.0));
  const RunConfig two = apply_sweep(base, "pu_count", 2);
  REQUIRE(two.propagation.layout.pu_centers.size() == 2);
  CHECK(two.propagation.layout.pu_centers[0].y == 60.0);
  CHECK(two.propagation.layout.pu_centers[1].y == 80.0);
  CHECK(two.sweep_name == "pu_count");
  CHECK_THROWS_AS(apply_sweep(base, "antennas", 2.5), std::invalid_argument);
  CHECK_THROWS_AS(apply_sweep(base, "bandwidth", 1), std::invalid_argument);
}

TEST_CASE("CSV header is fixed") {
  CHECK(std::string(kCsvHeader) ==
        "scenario,scheme,seed,sweep_name,sweep_value,ao_iters,rate_bpshz,secondary_snr_db,"
        "feasible,runtime_s");
}

TEST_CASE("AO traces are monotone for every scheme") {
  for (Scenario scen : {Scenario::psr, Scenario::csr}) {
    const RunConfig cfg = quick(scen);
    const Instance inst(cfg, 2);
    for (Scheme s : all_schemes()) {
      const RunResult r = alternating_optimize(inst, s);
      REQUIRE(r.error.empty());
      CHECK(r.feasible);
      REQUIRE(!r.ao_trace.empty());
      for (std::size_t i = 1; i < r.ao_trace.size(); ++i) CHECK(r.ao_trace[i] >= r.ao_trace[i - 1]);
      CHECK(r.rate == doctest::Approx(r.ao_trace.back()));
      CHECK(r.ao_iters() <= cfg.ao_max_iterations);
      CHECK(r.design.psi() == phases_from_indices(r.design.phase_index, cfg.levels));
      if (s == Scheme::fpa)
        for (const auto& it : r.iterations) CHECK_FALSE(it.positions_moved);
    }
  }
}

TEST_CASE("one sweep value gives one row per seed and scheme") {
  RunConfig cfg = quick(Scenario::csr);
  cfg.schemes = {Scheme::fpa};
  cfg.seeds = {1, 2};
  cfg.sweep_name = "g_u";
  cfg.sweep_values = {0.06};
  const auto rows = run_sweep(cfg);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.sweep_name == "g_u");
    CHECK(r.sweep_value == 0.06);
    CHECK(fields(csv_row(r)) == 10);
    CHECK(csv_row(r).rfind("csr,fpa,", 0) == 0);
  }
  CHECK(rows[0].seed == 1);
  CHECK(rows[1].seed == 2);
}

TEST_CASE("rows are deterministic apart from the runtime") {
  RunConfig cfg = quick(Scenario::psr);
  cfg.schemes = {Scheme::proposed_sapso, Scheme::random_psi};
  const auto a = run_sweep(cfg);
  cfg.workers = 2;
  const auto b = run_sweep(cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(without_runtime(csv_row(a[i])) == without_runtime(csv_row(b[i])));
}

TEST_CASE("saved results verify and reload") {
  const RunConfig cfg = quick(Scenario::csr);
  const RunResult r = run_single(cfg, 3, Scheme::proposed_sapso);
  REQUIRE(r.error.empty());
  CHECK(r.verified);
  CHECK(r.robustness.samples == cfg.verify_samples);
  CHECK(r.robustness.violations == 0);
  CHECK(r.robustness.min_sampled_rate >= r.rate - 1e-6);

  const SavedResult s = result_from_json_text(result_json(cfg, r));
  CHECK(s.result.seed == 3);
  CHECK(s.result.design.phase_index == r.design.phase_index);
  CHECK((s.result.design.w - r.design.w).norm() <= 1e-12 * r.design.w.norm());
  const Instance inst(s.config, s.result.seed);
  const RobustnessReport rep = verify_robustness(inst, s.result, 500, 99);
  CHECK(rep.passed());
  CHECK(rep.reported_bound == doctest::Approx(r.rate).epsilon(1e-9));
}

TEST_CASE("without uncertainty the sampled rate equals the nominal rate") {
  RunConfig cfg = quick(Scenario::psr);
  cfg.g_u = 0.0;
  cfg.g_bs = 0.0;
  const RunResult r = run_single(cfg, 1, Scheme::fpa);
  REQUIRE(r.error.empty());
  CHECK(r.verified);
  CHECK(r.rate == doctest::Approx(r.nominal_rate).epsilon(1e-12));
  CHECK(r.robustness.min_sampled_rate == doctest::Approx(r.nominal_rate).epsilon(1e-12));
}

TEST_CASE("outputs land in the documented files") {
  RunConfig cfg = quick(Scenario::psr);
  cfg.schemes = {Scheme::fpa};
  const auto dir = std::filesystem::temp_directory_path() / "masr_driver_test";
  std::filesystem::remove_all(dir);
  const auto rows = run_sweep(cfg);
  write_outputs(dir.string(), cfg, rows);
  std::ifstream csv(dir / "results.csv");
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  CHECK(header == kCsvHeader);
  CHECK(row == csv_row(rows[0]));
  const std::string stem = run_stem(rows[0]);
  CHECK(stem == "psr_fpa_seed1");
  CHECK(std::filesystem::exists(dir / "traces" / (stem + ".json")));
  const SavedResult s = load_result((dir / "results" / (stem + ".json")).string());
  CHECK(s.result.rate == doctest::Approx(rows[0].rate));
  std::filesystem::remove_all(dir);
}
