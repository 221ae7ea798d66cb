#include "masr/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace masr {

using nlohmann::json;

const char* const kCsvHeader =
    "scenario,scheme,seed,sweep_name,sweep_value,ao_iters,rate_bpshz,secondary_snr_db,feasible,"
    "runtime_s";

namespace {

std::string fmt(const char* f, double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

}  // namespace

std::string csv_row(const RunResult& r) {
  const bool ok = r.error.empty();
  std::ostringstream s;
  s << to_string(r.scenario) << ',' << to_string(r.scheme) << ',' << r.seed << ','
    << r.sweep_name << ',' << fmt("%g", r.sweep_value) << ',' << (ok ? r.ao_iters() : 0) << ','
    << (ok ? fmt("%.6f", r.rate) : "nan") << ',' << (ok ? fmt("%.3f", r.secondary_snr_db) : "nan")
    << ',' << (ok && r.feasible ? 1 : 0) << ',' << fmt("%.3f", r.runtime_s);
  return s.str();
}

void write_csv(const std::string& path, const std::vector<RunResult>& results) {
  std::ostringstream s;
  s << kCsvHeader << '\n';
  for (const auto& r : results) s << csv_row(r) << '\n';
  write_file(path, s.str());
}

std::string run_stem(const RunResult& r) {
  std::string stem = to_string(r.scenario) + "_" + to_string(r.scheme) + "_seed" +
                     std::to_string(r.seed);
  if (r.sweep_name != "none") stem += "_" + r.sweep_name + "_" + fmt("%g", r.sweep_value);
  return stem;
}

std::string trace_json(const RunResult& r) {
  json j;
  j["scenario"] = to_string(r.scenario);
  j["scheme"] = to_string(r.scheme);
  j["seed"] = r.seed;
  j["sweep_name"] = r.sweep_name;
  j["sweep_value"] = r.sweep_value;
  j["error"] = r.error;
  j["ao_trace"] = r.ao_trace;
  j["hit_iteration_cap"] = r.hit_iteration_cap;
  j["threshold_scale"] = r.threshold_scale;
  json its = json::array();
  for (const auto& it : r.iterations)
    its.push_back({{"transmit", it.transmit_trace},
                   {"passive", it.passive_trace},
                   {"swarm_best", it.swarm_trace},
                   {"objective", it.objective},
                   {"positions_moved", it.positions_moved}});
  j["iterations"] = its;
  j["stage_seconds"] = {{"transmit", r.times.transmit},
                        {"passive", r.times.passive},
                        {"swarm", r.times.swarm}};
  j["runtime_s"] = r.runtime_s;
  j["rate_bpshz"] = r.rate;
  j["nominal_rate_bpshz"] = r.nominal_rate;
  j["secondary_snr_db"] = r.secondary_snr_db;
  j["robustness"] = {{"samples", r.robustness.samples},
                     {"violations", r.robustness.violations},
                     {"min_sampled_rate", r.robustness.min_sampled_rate},
                     {"reported_bound", r.robustness.reported_bound},
                     {"passed", r.verified}};
  return j.dump(2);
}

std::string result_json(const RunConfig& cfg, const RunResult& r) {
  json j;
  j["config"] = json::parse(config_to_json_text(cfg));
  j["scenario"] = to_string(r.scenario);
  j["scheme"] = to_string(r.scheme);
  j["seed"] = r.seed;
  j["sweep_name"] = r.sweep_name;
  j["sweep_value"] = r.sweep_value;
  j["error"] = r.error;
  j["feasible"] = r.feasible;
  j["threshold_scale"] = r.threshold_scale;
  j["rate_bpshz"] = r.rate;
  j["secondary_snr_db"] = r.secondary_snr_db;
  j["levels"] = r.design.levels;
  j["phase_index"] = r.design.phase_index;
  json w = json::array();
  for (Eigen::Index k = 0; k < r.design.w.size(); ++k)
    w.push_back({r.design.w(k).real(), r.design.w(k).imag()});
  j["w"] = w;
  json p = json::array();
  for (const auto& x : r.design.positions) p.push_back({x.x, x.y, x.z});
  j["positions"] = p;
  return j.dump(2);
}

SavedResult result_from_json_text(const std::string& text) {
  const json j = json::parse(text);
  SavedResult s;
  s.config = config_from_json_text(j.at("config").dump());
  RunResult& r = s.result;
  r.scenario = scenario_from_string(j.at("scenario").get<std::string>());
  r.scheme = scheme_from_string(j.at("scheme").get<std::string>());
  r.seed = j.at("seed").get<std::uint64_t>();
  r.sweep_name = j.value("sweep_name", std::string("none"));
  r.sweep_value = j.value("sweep_value", 0.0);
  r.error = j.value("error", std::string());
  r.feasible = j.value("feasible", false);
  r.threshold_scale = j.value("threshold_scale", 1.0);
  r.rate = j.value("rate_bpshz", 0.0);
  r.secondary_snr_db = j.value("secondary_snr_db", 0.0);
  r.design.levels = j.at("levels").get<int>();
  r.design.phase_index = j.at("phase_index").get<std::vector<int>>();
  const json& w = j.at("w");
  r.design.w = cvec(static_cast<Eigen::Index>(w.size()));
  for (std::size_t k = 0; k < w.size(); ++k)
    r.design.w(static_cast<Eigen::Index>(k)) = cd(w[k][0].get<double>(), w[k][1].get<double>());
  for (const auto& x : j.at("positions"))
    r.design.positions.push_back({x[0].get<double>(), x[1].get<double>(), x[2].get<double>()});
  if (r.scenario != s.config.scenario)
    throw std::invalid_argument("saved result and its config disagree on the scenario");
  return s;
}

SavedResult load_result(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open result " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return result_from_json_text(ss.str());
}

void write_outputs(const std::string& dir, const RunConfig& cfg,
                   const std::vector<RunResult>& results) {
  const std::filesystem::path root(dir);
  write_csv((root / "results.csv").string(), results);
  for (const auto& r : results) {
    const std::string stem = run_stem(r);
    write_file(root / "traces" / (stem + ".json"), trace_json(r));
    if (r.error.empty()) {
      const RunConfig c = r.sweep_name == "none" ? cfg : apply_sweep(cfg, r.sweep_name, r.sweep_value);
      RunConfig one = c;
      one.scenario = r.scenario;
      write_file(root / "results" / (stem + ".json"), result_json(one, r));
    }
  }
}

}  // namespace masr
