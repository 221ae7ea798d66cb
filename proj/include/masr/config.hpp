// Run configuration: JSON with nested sections, defaults at the reference setup.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "masr/beamforming.hpp"
#include "masr/swarm.hpp"

namespace masr {

enum class Scheme { proposed_sapso, proposed_pso, fpa, random_psi };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);
const std::vector<Scheme>& all_schemes();

struct RunConfig {
  Scenario scenario = Scenario::psr;
  std::vector<Scheme> schemes{Scheme::proposed_sapso};

  int antennas = 4;                    // K
  int levels = 8;                      // phase grid size
  double region_side_wavelengths = 3;  // A / lambda
  double d_min_wavelengths = 0.5;
  double p_max_dbm = 38.0;
  PropagationConfig propagation;       // lambda, paths, v-hat, nu, M, layout
  ScenarioConfig sr;                   // noise, thresholds, L
  double g_bs = 0.05;
  double g_u = 0.1;

  SwarmConfig swarm;
  ScaOptions transmit;
  PassiveOptions passive;
  double ao_tolerance = 1e-2;
  int ao_max_iterations = 25;

  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::string sweep_name = "none";
  std::vector<double> sweep_values;
  std::string output_dir = "out";
  int workers = 1;
  int verify_samples = 1000;
  bool relax_threshold_on_infeasible = false;  // halve gamma once, only on request

  double wavelength() const { return propagation.wavelength; }
  double d_min() const { return d_min_wavelengths * propagation.wavelength; }
  double p_max_watt() const { return dbm_to_watt(p_max_dbm); }
  MovementRegion region() const {
    return MovementRegion::square(region_side_wavelengths * propagation.wavelength);
  }
  ScenarioConfig scenario_config() const;
  // Throws std::invalid_argument naming the first bad field.
  void validate() const;
};

RunConfig load_config(const std::string& path);
RunConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const RunConfig& cfg);

// Sweep axes: p_max_dbm, g_u, g_bs, antennas, ris_elements, pu_count.
RunConfig apply_sweep(const RunConfig& base, const std::string& name, double value);
bool known_sweep(const std::string& name);

}  // namespace masr
