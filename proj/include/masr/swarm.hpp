// Swarm search over antenna placements with optional annealing acceptance.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "masr/beamforming.hpp"

namespace masr {

using Placement = std::vector<Position3>;

struct SwarmConfig {
  int particles = 150;
  int iterations = 150;
  double inertia = 1.2;
  double c1 = 1.4;
  double c2 = 1.4;
  double penalty = 50.0;              // per spacing violation
  double initial_temperature = 1.0;   // rate units
  bool annealing = true;              // false: plain greedy global best
  double initial_velocity = 0.1;      // fraction of each side
  double velocity_limit = 0.1;        // fraction of each side, <= 0 disables

  bool valid() const;
};

struct Particle {
  Placement position;
  Placement velocity;
  Placement best;
  double fitness = 0.0;
  double best_fitness = 0.0;
};

// Unordered pairs closer than d_min.
int violation_set_size(const Placement& p, double d_min);

// Robust objective at a placement with (w, psi) frozen, minus penalties for
// spacing violations and for a violated secondary constraint.
struct PlacementFitness {
  const ChannelSynthesizer* synthesizer = nullptr;
  ScenarioConfig scenario;
  double g_bs = 0.05;
  double g_u = 0.1;
  cvec w;
  cvec psi;
  double penalty = 50.0;
  double d_min = 0.05;

  std::vector<UserLink> links(const Placement& p) const;
  double rate(const Placement& p) const;
  double operator()(const Placement& p) const;
};

using FitnessFn = std::function<double(const Placement&)>;

// v <- w v + c1 r2 (p_own - p) + c2 r3 (p_best - p); p <- clamp(p + v).
void update_velocity_position(Particle& particle, const Placement& global_best,
                              const SwarmConfig& cfg, const MovementRegion& region, double r2,
                              double r3);
void update_velocity_position(Particle& particle, const Placement& global_best,
                              const SwarmConfig& cfg, const MovementRegion& region, Rng& rng);

double temperature_step(double T, int q, int Q);

bool sa_accept(double f_incumbent, double f_candidate, double T, Rng& rng);

struct SwarmResult {
  Placement best;               // best ever evaluated
  double best_fitness = 0.0;
  std::vector<double> trace;    // best-ever fitness after each iteration
  int accepted_worse = 0;
  int violations = 0;
};

// Particle 0 starts at `initial`; the rest are uniform in the region.
SwarmResult sa_pso(const FitnessFn& fitness, const Placement& initial,
                   const MovementRegion& region, const SwarmConfig& cfg, std::uint64_t seed,
                   double d_min);

}  // namespace masr
