#include "masr/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace masr {

using nlohmann::json;

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::proposed_sapso: return "proposed-sapso";
    case Scheme::proposed_pso: return "proposed-pso";
    case Scheme::fpa: return "fpa";
    case Scheme::random_psi: return "random-psi";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& s) {
  for (Scheme k : all_schemes())
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown scheme: " + s);
}

const std::vector<Scheme>& all_schemes() {
  static const std::vector<Scheme> v{Scheme::proposed_sapso, Scheme::proposed_pso, Scheme::fpa,
                                     Scheme::random_psi};
  return v;
}

ScenarioConfig RunConfig::scenario_config() const {
  ScenarioConfig s = sr;
  s.scenario = scenario;
  return s;
}

void RunConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid configuration: ") + what);
  };
  need(antennas >= 1, "antennas");
  need(levels >= 2, "levels");
  need(region_side_wavelengths > 0.0, "region_side_wavelengths");
  need(d_min_wavelengths > 0.0, "d_min_wavelengths");
  need(std::isfinite(p_max_dbm), "p_max_dbm");
  need(propagation.wavelength > 0.0, "wavelength");
  need(propagation.paths >= 1, "paths");
  need(propagation.path_gain_linear > 0.0, "path_gain");
  need(propagation.pathloss_exponent > 0.0, "pathloss_exponent");
  need(propagation.ris_elements >= 1, "ris_elements");
  need(!propagation.layout.pu_centers.empty(), "primary_users");
  need(sr.valid(), "noise / thresholds / symbol_span");
  need(g_bs >= 0.0 && g_u >= 0.0, "uncertainty levels");
  need(swarm.valid(), "swarm");
  need(ao_tolerance > 0.0 && ao_max_iterations >= 1, "ao");
  need(!seeds.empty(), "seeds");
  need(!schemes.empty(), "schemes");
  need(workers >= 1, "workers");
  need(verify_samples >= 0, "verify_samples");
  need(sweep_name == "none" || known_sweep(sweep_name), "sweep name");
  // the deterministic start must already respect the spacing
  (void)grid_positions(antennas, region(), d_min());
}

namespace {

json point(const Position3& p) { return json::array({p.x, p.y, p.z}); }

Position3 point(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("point must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <class T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const char* section) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : keys) ok = ok || it.key() == k;
    if (!ok)
      throw std::invalid_argument(std::string("unknown key '") + it.key() + "' in " + section);
  }
}

}  // namespace

RunConfig config_from_json_text(const std::string& text) {
  const json j = json::parse(text);
  RunConfig c;
  reject_unknown(j, {"scenario", "schemes", "system", "geometry", "uncertainty", "swarm", "ao",
                     "seeds", "sweep", "output_dir", "workers", "verify_samples",
                     "relax_threshold_on_infeasible"},
                 "top level");
  if (j.contains("scenario")) c.scenario = scenario_from_string(j.at("scenario").get<std::string>());
  if (j.contains("schemes")) {
    c.schemes.clear();
    for (const auto& s : j.at("schemes")) c.schemes.push_back(scheme_from_string(s.get<std::string>()));
  }
  if (j.contains("system")) {
    const json& s = j.at("system");
    reject_unknown(s, {"antennas", "ris_elements", "levels", "wavelength", "region_side_wavelengths",
                       "d_min_wavelengths", "paths", "path_gain_db", "pathloss_exponent",
                       "p_max_dbm", "noise_power", "gamma_p_min", "gamma_c_min", "symbol_span"},
                   "system");
    take(s, "antennas", c.antennas);
    take(s, "ris_elements", c.propagation.ris_elements);
    take(s, "levels", c.levels);
    take(s, "wavelength", c.propagation.wavelength);
    take(s, "region_side_wavelengths", c.region_side_wavelengths);
    take(s, "d_min_wavelengths", c.d_min_wavelengths);
    take(s, "paths", c.propagation.paths);
    if (s.contains("path_gain_db"))
      c.propagation.path_gain_linear = db_to_linear(s.at("path_gain_db").get<double>());
    take(s, "pathloss_exponent", c.propagation.pathloss_exponent);
    take(s, "p_max_dbm", c.p_max_dbm);
    take(s, "noise_power", c.sr.noise_power);
    take(s, "gamma_p_min", c.sr.gamma_p_min);
    take(s, "gamma_c_min", c.sr.gamma_c_min);
    take(s, "symbol_span", c.sr.symbol_span);
  }
  if (j.contains("geometry")) {
    const json& g = j.at("geometry");
    reject_unknown(g, {"transmitter", "ris", "primary_users"}, "geometry");
    auto& lay = c.propagation.layout;
    if (g.contains("transmitter")) lay.pt_center = point(g.at("transmitter"));
    if (g.contains("ris")) lay.ris_center = point(g.at("ris"));
    if (g.contains("primary_users")) {
      lay.pu_centers.clear();
      for (const auto& p : g.at("primary_users")) lay.pu_centers.push_back(point(p));
    }
  }
  if (j.contains("uncertainty")) {
    const json& u = j.at("uncertainty");
    reject_unknown(u, {"g_bs", "g_u"}, "uncertainty");
    take(u, "g_bs", c.g_bs);
    take(u, "g_u", c.g_u);
  }
  if (j.contains("swarm")) {
    const json& s = j.at("swarm");
    reject_unknown(s, {"particles", "iterations", "inertia", "c1", "c2", "penalty",
                       "initial_temperature", "initial_velocity", "velocity_limit"},
                   "swarm");
    take(s, "particles", c.swarm.particles);
    take(s, "iterations", c.swarm.iterations);
    take(s, "inertia", c.swarm.inertia);
    take(s, "c1", c.swarm.c1);
    take(s, "c2", c.swarm.c2);
    take(s, "penalty", c.swarm.penalty);
    take(s, "initial_temperature", c.swarm.initial_temperature);
    take(s, "initial_velocity", c.swarm.initial_velocity);
    take(s, "velocity_limit", c.swarm.velocity_limit);
  }
  if (j.contains("ao")) {
    const json& a = j.at("ao");
    reject_unknown(a, {"tolerance", "max_iterations", "transmit_max_iterations",
                       "passive_max_iterations", "passive_penalty"},
                   "ao");
    take(a, "tolerance", c.ao_tolerance);
    take(a, "max_iterations", c.ao_max_iterations);
    take(a, "transmit_max_iterations", c.transmit.max_iterations);
    take(a, "passive_max_iterations", c.passive.max_iterations);
    take(a, "passive_penalty", c.passive.penalty);
  }
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    reject_unknown(s, {"name", "values"}, "sweep");
    take(s, "name", c.sweep_name);
    take(s, "values", c.sweep_values);
  }
  take(j, "output_dir", c.output_dir);
  take(j, "workers", c.workers);
  take(j, "verify_samples", c.verify_samples);
  take(j, "relax_threshold_on_infeasible", c.relax_threshold_on_infeasible);
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

std::string config_to_json_text(const RunConfig& c) {
  json j;
  j["scenario"] = to_string(c.scenario);
  j["schemes"] = json::array();
  for (Scheme s : c.schemes) j["schemes"].push_back(to_string(s));
  j["system"] = {{"antennas", c.antennas},
                 {"ris_elements", c.propagation.ris_elements},
                 {"levels", c.levels},
                 {"wavelength", c.propagation.wavelength},
                 {"region_side_wavelengths", c.region_side_wavelengths},
                 {"d_min_wavelengths", c.d_min_wavelengths},
                 {"paths", c.propagation.paths},
                 {"path_gain_db", linear_to_db(c.propagation.path_gain_linear)},
                 {"pathloss_exponent", c.propagation.pathloss_exponent},
                 {"p_max_dbm", c.p_max_dbm},
                 {"noise_power", c.sr.noise_power},
                 {"gamma_p_min", c.sr.gamma_p_min},
                 {"gamma_c_min", c.sr.gamma_c_min},
                 {"symbol_span", c.sr.symbol_span}};
  json pus = json::array();
  for (const auto& p : c.propagation.layout.pu_centers) pus.push_back(point(p));
  j["geometry"] = {{"transmitter", point(c.propagation.layout.pt_center)},
                   {"ris", point(c.propagation.layout.ris_center)},
                   {"primary_users", pus}};
  j["uncertainty"] = {{"g_bs", c.g_bs}, {"g_u", c.g_u}};
  j["swarm"] = {{"particles", c.swarm.particles},
                {"iterations", c.swarm.iterations},
                {"inertia", c.swarm.inertia},
                {"c1", c.swarm.c1},
                {"c2", c.swarm.c2},
                {"penalty", c.swarm.penalty},
                {"initial_temperature", c.swarm.initial_temperature},
                {"initial_velocity", c.swarm.initial_velocity},
                {"velocity_limit", c.swarm.velocity_limit}};
  j["ao"] = {{"tolerance", c.ao_tolerance},
             {"max_iterations", c.ao_max_iterations},
             {"transmit_max_iterations", c.transmit.max_iterations},
             {"passive_max_iterations", c.passive.max_iterations},
             {"passive_penalty", c.passive.penalty}};
  j["seeds"] = c.seeds;
  j["sweep"] = {{"name", c.sweep_name}, {"values", c.sweep_values}};
  j["output_dir"] = c.output_dir;
  j["workers"] = c.workers;
  j["verify_samples"] = c.verify_samples;
  j["relax_threshold_on_infeasible"] = c.relax_threshold_on_infeasible;
  return j.dump(2);
}

bool known_sweep(const std::string& name) {
  return name == "p_max_dbm" || name == "g_u" || name == "g_bs" || name == "antennas" ||
         name == "ris_elements" || name == "pu_count";
}

RunConfig apply_sweep(const RunConfig& base, const std::string& name, double value) {
  RunConfig c = base;
  auto as_count = [&](double v) {
    if (v < 1.0 || std::floor(v) != v) throw std::invalid_argument(name + " must be a positive integer");
    return static_cast<int>(v);
  };
  if (name == "p_max_dbm") {
    c.p_max_dbm = value;
  } else if (name == "g_u") {
    c.g_u = value;
  } else if (name == "g_bs") {
    c.g_bs = value;
  } else if (name == "antennas") {
    c.antennas = as_count(value);
  } else if (name == "ris_elements") {
    c.propagation.ris_elements = as_count(value);
  } else if (name == "pu_count") {
    // further PUs continue along the same line, 20 m apart: 60 m, 80 m, ...
    const int n = as_count(value);
    auto& pus = c.propagation.layout.pu_centers;
    const Position3 first = pus.front();
    pus.clear();
    for (int i = 0; i < n; ++i) pus.push_back({first.x, first.y + 20.0 * i, first.z});
  } else {
    throw std::invalid_argument("unknown sweep axis: " + name);
  }
  c.sweep_name = name;
  c.validate();
  return c;
}

}  // namespace masr
