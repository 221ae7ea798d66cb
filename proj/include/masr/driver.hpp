// Alternating optimisation over (w, psi, p), benchmark schemes and sweeps.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "masr/config.hpp"

namespace masr {

// Channels, radii and placement state of one seeded instance.
struct Instance {
  RunConfig config;
  std::uint64_t seed = 0;
  ChannelGeometry geometry;
  ChannelSynthesizer synthesizer;

  Instance(const RunConfig& cfg, std::uint64_t seed);
  std::vector<UserLink> links(const Placement& p) const;
};

// Matched filter to the direct channel(s), scaled to sqrt(p_max).
cvec initial_beamformer(const std::vector<UserLink>& links, double p_max);
// Per element, the grid phase that lines the cascaded term up with the direct one.
std::vector<int> aligned_phases(const UserLink& link, const cvec& w, int levels);
// Single-element moves on the true robust objective, repeated to a fixed point.
std::vector<int> polish_phases(const std::vector<UserLink>& links, const ScenarioConfig& sc,
                               const cvec& w, std::vector<int> indices, int levels);
// Worst robust secondary SNR over the PUs, relative to the threshold.
double secondary_margin(const std::vector<UserLink>& links, const ScenarioConfig& sc,
                        const cvec& w, const cvec& psi);
// Cascaded matched filter; with several PUs, the max-min mix of the per-PU filters.
cvec cascade_beamformer(const std::vector<UserLink>& links, const ScenarioConfig& sc,
                        double p_max, const cvec& psi);
// Pushes w towards the cascaded filter until the robust secondary constraint
// holds; returns false if even the pure cascaded filter fails.
bool make_secondary_feasible(const std::vector<UserLink>& links, const ScenarioConfig& sc,
                             double p_max, const cvec& psi, cvec& w);
// Fallback start: phases aligned to each PU in turn, improved on the worst-PU
// margin, then w pulled back towards the direct matched filter.
bool search_feasible_start(const std::vector<UserLink>& links, const ScenarioConfig& sc,
                           double p_max, int levels, std::vector<int>& indices, cvec& w);

struct StageTimes {
  double transmit = 0.0;
  double passive = 0.0;
  double swarm = 0.0;
};

struct AoIteration {
  std::vector<double> transmit_trace;
  std::vector<double> passive_trace;
  std::vector<double> swarm_trace;
  double objective = 0.0;
  bool positions_moved = false;
};

struct RobustnessReport {
  int samples = 0;
  int violations = 0;
  double min_sampled_rate = 0.0;
  double reported_bound = 0.0;
  bool passed() const { return violations == 0 && min_sampled_rate >= reported_bound - 1e-6; }
};

struct RunResult {
  Scenario scenario = Scenario::psr;
  Scheme scheme = Scheme::proposed_sapso;
  std::uint64_t seed = 0;
  std::string sweep_name = "none";
  double sweep_value = 0.0;

  bool feasible = false;
  std::string error;                // stage and family on failure
  std::vector<double> ao_trace;     // robust objective, starting at the initial point
  std::vector<AoIteration> iterations;
  bool hit_iteration_cap = false;
  double threshold_scale = 1.0;     // < 1 only after an explicit relaxation

  Design design;
  double rate = 0.0;                // robust lower bound, min over PUs
  double secondary_snr_db = 0.0;    // worst case, min over PUs
  double nominal_rate = 0.0;
  StageTimes times;
  double runtime_s = 0.0;
  bool verified = false;
  RobustnessReport robustness;

  int ao_iters() const { return static_cast<int>(iterations.size()); }
};

RunResult alternating_optimize(const Instance& inst, Scheme scheme);
RunResult run_single(const RunConfig& cfg, std::uint64_t seed, Scheme scheme);

// Samples perturbations on the instance the result was solved for.
RobustnessReport verify_robustness(const Instance& inst, const RunResult& result, int n_samples,
                                   std::uint64_t sample_seed);

// Every sweep value x seed x scheme; failures become rows with feasible = false.
std::vector<RunResult> run_sweep(const RunConfig& cfg);

}  // namespace masr
