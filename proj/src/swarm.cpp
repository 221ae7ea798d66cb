#include "masr/swarm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace masr {

bool SwarmConfig::valid() const {
  return particles >= 1 && iterations >= 1 && inertia > 0.0 && c1 > 0.0 && c2 > 0.0 &&
         penalty >= 0.0 && initial_temperature >= 0.0 && initial_velocity >= 0.0;
}

int violation_set_size(const Placement& p, double d_min) {
  int n = 0;
  for (std::size_t k = 0; k < p.size(); ++k)
    for (std::size_t o = k + 1; o < p.size(); ++o)
      if ((p[k] - p[o]).norm() < d_min) ++n;
  return n;
}

std::vector<UserLink> PlacementFitness::links(const Placement& p) const {
  if (!synthesizer) throw std::logic_error("fitness without a channel synthesizer");
  std::vector<UserLink> out;
  for (auto& ch : synthesizer->synthesize_all(p)) {
    const auto unc = UncertaintyModel::derive(g_bs, g_u, ch);
    out.push_back({std::move(ch), unc});
  }
  return out;
}

double PlacementFitness::rate(const Placement& p) const {
  return robust_objective(scenario, links(p), w, psi);
}

double PlacementFitness::operator()(const Placement& p) const {
  const auto l = links(p);
  double f = robust_objective(scenario, l, w, psi);
  f -= penalty * violation_set_size(p, d_min);
  if (!robust_secondary_ok(scenario, l, w, psi)) f -= penalty;
  return f;
}

namespace {

double coord(const Position3& p, int axis) { return axis == 0 ? p.x : axis == 1 ? p.y : p.z; }

double& coord(Position3& p, int axis) { return axis == 0 ? p.x : axis == 1 ? p.y : p.z; }

}  // namespace

void update_velocity_position(Particle& particle, const Placement& global_best,
                              const SwarmConfig& cfg, const MovementRegion& region, double r2,
                              double r3) {
  const std::size_t K = particle.position.size();
  if (particle.velocity.size() != K || particle.best.size() != K || global_best.size() != K)
    throw std::invalid_argument("particle shape mismatch");
  for (std::size_t k = 0; k < K; ++k) {
    for (int a = 0; a < 3; ++a) {
      const double x = coord(particle.position[k], a);
      double v = cfg.inertia * coord(particle.velocity[k], a) +
                 cfg.c1 * r2 * (coord(particle.best[k], a) - x) +
                 cfg.c2 * r3 * (coord(global_best[k], a) - x);
      if (cfg.velocity_limit > 0.0) {
        const double vmax = cfg.velocity_limit * region.side(a);
        v = std::clamp(v, -vmax, vmax);
      }
      coord(particle.velocity[k], a) = v;
      coord(particle.position[k], a) = std::clamp(x + v, region.lower(a), region.upper(a));
    }
  }
}

void update_velocity_position(Particle& particle, const Placement& global_best,
                              const SwarmConfig& cfg, const MovementRegion& region, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r2 = u(rng);
  const double r3 = u(rng);
  update_velocity_position(particle, global_best, cfg, region, r2, r3);
}

double temperature_step(double T, int q, int Q) {
  if (Q < 1 || q < 0 || q > Q) throw std::invalid_argument("temperature step out of range");
  return static_cast<double>(Q - q) / static_cast<double>(Q) * T;
}

bool sa_accept(double f_incumbent, double f_candidate, double T, Rng& rng) {
  if (f_candidate >= f_incumbent) return true;
  if (!(T > 0.0)) return false;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < std::exp((f_candidate - f_incumbent) / T);
}

SwarmResult sa_pso(const FitnessFn& fitness, const Placement& initial,
                   const MovementRegion& region, const SwarmConfig& cfg, std::uint64_t seed,
                   double d_min) {
  if (!cfg.valid()) throw std::invalid_argument("invalid swarm configuration");
  if (!region.valid()) throw std::invalid_argument("invalid movement region");
  if (initial.empty()) throw std::invalid_argument("empty placement");
  const auto S = static_cast<std::size_t>(cfg.particles);
  const std::size_t K = initial.size();

  std::vector<Rng> streams;
  for (std::size_t s = 0; s < S; ++s) {
    std::seed_seq seq{seed, static_cast<std::uint64_t>(s), std::uint64_t{0x5a}};
    streams.emplace_back(seq);
  }
  std::seed_seq sa_seq{seed, std::uint64_t{0xa11}};
  Rng sa_rng(sa_seq);

  std::vector<Particle> swarm(S);
  for (std::size_t s = 0; s < S; ++s) {
    Particle& pt = swarm[s];
    Rng& g = streams[s];
    pt.position = initial;
    pt.velocity.assign(K, Position3{});
    for (std::size_t k = 0; k < K; ++k) {
      for (int a = 0; a < 3; ++a) {
        if (s > 0) {
          std::uniform_real_distribution<double> u(region.lower(a), region.upper(a));
          coord(pt.position[k], a) = region.side(a) > 0.0 ? u(g) : region.lower(a);
        }
        const double vr = cfg.initial_velocity * region.side(a);
        std::uniform_real_distribution<double> uv(-vr, vr);
        coord(pt.velocity[k], a) = vr > 0.0 ? uv(g) : 0.0;
      }
    }
    if (s == 0)
      for (auto& p : pt.position) p = region.clamp(p);
    pt.fitness = fitness(pt.position);
    pt.best = pt.position;
    pt.best_fitness = pt.fitness;
  }

  SwarmResult res;
  auto record = [&](const Particle& pt) {
    if (violation_set_size(pt.position, d_min) != 0) return;
    if (res.best.empty() || pt.fitness > res.best_fitness) {
      res.best = pt.position;
      res.best_fitness = pt.fitness;
    }
  };
  std::size_t lead = 0;
  for (std::size_t s = 0; s < S; ++s) {
    if (swarm[s].fitness > swarm[lead].fitness) lead = s;
    record(swarm[s]);
  }
  Placement global = swarm[lead].position;
  double global_f = swarm[lead].fitness;

  std::vector<std::size_t> order(S);
  double T = cfg.initial_temperature;
  for (int q = 0; q < cfg.iterations; ++q) {
    for (std::size_t s = 0; s < S; ++s) {
      Particle& pt = swarm[s];
      update_velocity_position(pt, global, cfg, region, streams[s]);
      pt.fitness = fitness(pt.position);
      if (pt.fitness > pt.best_fitness) {
        pt.best = pt.position;
        pt.best_fitness = pt.fitness;
      }
      record(pt);
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return swarm[a].fitness > swarm[b].fitness; });
    const Particle& top = swarm[order[0]];
    if (top.fitness < global_f) {
      if (cfg.annealing && sa_accept(global_f, top.fitness, T, sa_rng)) {
        std::uniform_int_distribution<std::size_t> pick(0, (S + 1) / 2 - 1);
        const Particle& chosen = swarm[order[pick(sa_rng)]];
        global = chosen.position;
        global_f = chosen.fitness;
        ++res.accepted_worse;
      }
    } else {
      global = top.position;
      global_f = top.fitness;
    }
    res.trace.push_back(res.best.empty() ? -INFINITY : res.best_fitness);
    T = temperature_step(T, q, cfg.iterations);
  }
  if (res.best.empty()) {
    // nothing spacing-feasible was ever seen: report the least-bad placement
    res.best = global;
    res.best_fitness = global_f;
  }
  res.violations = violation_set_size(res.best, d_min);
  return res;
}

}  // namespace masr
