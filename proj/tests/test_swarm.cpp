#include "doctest.h"

#include <cmath>

#include "masr/driver.hpp"
#include "masr/swarm.hpp"

using namespace masr;

namespace {

MovementRegion region3() { return MovementRegion::square(0.3); }

Particle particle_at(const Placement& p) {
  Particle pt;
  pt.position = p;
  pt.velocity.assign(p.size(), Position3{});
  pt.best = p;
  return pt;
}

SwarmConfig small_swarm() {
  SwarmConfig c;
  c.particles = 20;
  c.iterations = 40;
  return c;
}

}  // namespace

TEST_CASE("spacing violations") {
  CHECK(violation_set_size({{0, 0, 0}}, 0.05) == 0);
  CHECK(violation_set_size({{0, 0, 0}, {0, 0, 0}}, 0.05) == 1);
  CHECK(violation_set_size({{0, 0, 0}, {0.05, 0, 0}}, 0.05) == 0);
  CHECK(violation_set_size({{0, 0, 0}, {0.049, 0, 0}}, 0.05) == 1);
  // three coincident antennas: every pair
  CHECK(violation_set_size({{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0.1, 0.1, 0}}, 0.05) == 3);

  Rng rng(51);
  std::uniform_real_distribution<double> u(-0.15, 0.15);
  for (int t = 0; t < 500; ++t) {
    Placement p;
    for (int k = 0; k < 4; ++k) p.push_back({u(rng), u(rng), 0.0});
    int brute = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        if (a < b && std::hypot(p[a].x - p[b].x, p[a].y - p[b].y) < 0.05) ++brute;
    CHECK(violation_set_size(p, 0.05) == brute);
  }
}

TEST_CASE("velocity and position update arithmetic") {
  SwarmConfig c;
  c.inertia = 1.0;
  c.c1 = 1.4;
  c.c2 = 1.4;
  c.velocity_limit = 0.0;
  Particle pt = particle_at({{0.01, -0.02, 0.0}});
  pt.velocity = {{0.002, 0.001, 0.0}};
  pt.best = {{0.03, -0.02, 0.0}};
  const Placement g{{0.0, 0.0, 0.0}};
  update_velocity_position(pt, g, c, region3(), 1.0, 1.0);
  // v = v + 1.4 (best - p) + 1.4 (g - p)
  const double vx = 0.002 + 1.4 * 0.02 + 1.4 * -0.01;
  const double vy = 0.001 + 0.0 + 1.4 * 0.02;
  CHECK(pt.velocity[0].x == doctest::Approx(vx).epsilon(1e-14));
  CHECK(pt.velocity[0].y == doctest::Approx(vy).epsilon(1e-14));
  CHECK(pt.position[0].x == doctest::Approx(0.01 + vx).epsilon(1e-14));
  CHECK(pt.position[0].y == doctest::Approx(-0.02 + vy).epsilon(1e-14));
  CHECK(pt.position[0].z == 0.0);

  // zero random weights leave only inertia
  Particle q = particle_at({{0.0, 0.0, 0.0}});
  q.velocity = {{0.01, -0.01, 0.0}};
  c.inertia = 1.2;
  update_velocity_position(q, {{0.1, 0.1, 0.0}}, c, region3(), 0.0, 0.0);
  CHECK(q.velocity[0].x == doctest::Approx(0.012));
  CHECK(q.position[0].y == doctest::Approx(-0.012));
}

TEST_CASE("velocity limit and region clamp") {
  SwarmConfig c;
  c.inertia = 1.0;
  c.velocity_limit = 0.1;  // 0.03 on a 0.3 side
  Particle pt = particle_at({{0.14, 0.0, 0.0}});
  pt.velocity = {{0.5, -0.5, 0.0}};
  update_velocity_position(pt, pt.position, c, region3(), 1.0, 1.0);
  CHECK(pt.velocity[0].x == doctest::Approx(0.03));
  CHECK(pt.velocity[0].y == doctest::Approx(-0.03));
  // 0.14 + 0.03 leaves the region and is clamped to the edge
  CHECK(pt.position[0].x == 0.15);
  CHECK(pt.position[0].y == doctest::Approx(-0.03));

  Particle bad = particle_at({{0, 0, 0}});
  CHECK_THROWS_AS(update_velocity_position(bad, {{0, 0, 0}, {0, 0, 0}}, c, region3(), 1.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("temperature schedule") {
  CHECK(temperature_step(1.0, 0, 150) == 1.0);
  CHECK(temperature_step(1.0, 150, 150) == 0.0);
  CHECK(temperature_step(1.0, 1, 150) == doctest::Approx(149.0 / 150.0));
  CHECK(temperature_step(2.0, 75, 150) == doctest::Approx(1.0));
  CHECK_THROWS_AS(temperature_step(1.0, 151, 150), std::invalid_argument);
  CHECK_THROWS_AS(temperature_step(1.0, 0, 0), std::invalid_argument);
  // applied once per iteration the schedule is the running product of (Q - q) / Q
  double T = 1.0, product = 1.0;
  for (int q = 0; q < 150; ++q) {
    const double next = temperature_step(T, q, 150);
    CHECK(next <= T);
    CHECK(next > 0.0);
    T = next;
    product *= (150.0 - q) / 150.0;
  }
  CHECK(T == doctest::Approx(product).epsilon(1e-12));
}

TEST_CASE("Metropolis acceptance") {
  Rng rng(52);
  CHECK(sa_accept(1.0, 1.0, 0.5, rng));
  CHECK(sa_accept(1.0, 2.0, 0.0, rng));
  CHECK_FALSE(sa_accept(1.0, 0.999, 0.0, rng));
  CHECK_FALSE(sa_accept(1.0, 0.0, 1e-300, rng));
  for (double gap : {0.1, 0.5, 1.0, 2.0}) {
    const double T = 0.7;
    int acc = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) acc += sa_accept(1.0, 1.0 - gap, T, rng) ? 1 : 0;
    // within one percentage point; the standard error is under 0.2 points
    CHECK(std::abs(double(acc) / n - std::exp(-gap / T)) < 0.01);
  }
}

TEST_CASE("single antenna converges on a unimodal landscape") {
  const Position3 target{0.04, -0.07, 0.0};
  const FitnessFn f = [&](const Placement& p) {
    return -100.0 * std::pow((p[0] - target).norm(), 2);
  };
  for (bool anneal : {true, false}) {
    SwarmConfig c = small_swarm();
    c.annealing = anneal;
    const SwarmResult r = sa_pso(f, {{0.0, 0.0, 0.0}}, region3(), c, 7, 0.05);
    CHECK((r.best[0] - target).norm() < 1e-2);
    CHECK(r.violations == 0);
    REQUIRE(r.trace.size() == 40);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] >= r.trace[i - 1]);
    CHECK(r.best_fitness == doctest::Approx(f(r.best)));
  }
}

TEST_CASE("best ever never loses to the incumbent placement") {
  const FitnessFn f = [](const Placement& p) {
    double s = 0.0;
    for (const auto& x : p) s += std::sin(40 * x.x) * std::cos(30 * x.y);
    return s - 50.0 * violation_set_size(p, 0.05);
  };
  const Placement init = grid_positions(4, region3(), 0.05);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SwarmResult r = sa_pso(f, init, region3(), small_swarm(), seed, 0.05);
    CHECK(r.best_fitness >= f(init));
    CHECK(r.violations == 0);
    CHECK(r.best_fitness == f(r.best));
  }
}

TEST_CASE("runs are reproducible per seed") {
  const FitnessFn f = [](const Placement& p) { return std::cos(25 * p[0].x) + std::sin(17 * p[1].y); };
  const Placement init = grid_positions(2, region3(), 0.05);
  const SwarmResult a = sa_pso(f, init, region3(), small_swarm(), 3, 0.05);
  const SwarmResult b = sa_pso(f, init, region3(), small_swarm(), 3, 0.05);
  CHECK(a.trace == b.trace);
  CHECK(a.accepted_worse == b.accepted_worse);
  for (std::size_t k = 0; k < a.best.size(); ++k) CHECK((a.best[k] - b.best[k]).norm() == 0.0);
}

TEST_CASE("annealing without accepted worse moves is plain PSO") {
  const FitnessFn f = [](const Placement& p) {
    double s = 0.0;
    for (const auto& x : p) s += std::sin(40 * x.x) * std::cos(30 * x.y);
    return s;
  };
  const Placement init = grid_positions(3, region3(), 0.05);
  for (double T0 : {0.0, 1e-12}) {
    SwarmConfig sa = small_swarm(), pso = small_swarm();
    sa.initial_temperature = T0;
    pso.annealing = false;
    const SwarmResult a = sa_pso(f, init, region3(), sa, 11, 0.05);
    const SwarmResult b = sa_pso(f, init, region3(), pso, 11, 0.05);
    REQUIRE(a.accepted_worse == 0);
    CHECK(a.trace == b.trace);
    CHECK(a.best_fitness == b.best_fitness);
  }
  // and with a real temperature the annealer does take worse moves
  SwarmConfig hot = small_swarm();
  hot.initial_temperature = 10.0;
  CHECK(sa_pso(f, init, region3(), hot, 11, 0.05).accepted_worse > 0);
}

TEST_CASE("infeasible-only landscapes report the least-bad placement") {
  // two antennas in a region too small for the spacing
  const MovementRegion tiny = MovementRegion::square(0.02);
  const FitnessFn f = [](const Placement& p) { return -50.0 * violation_set_size(p, 0.05) + p[0].x; };
  const SwarmResult r = sa_pso(f, {{0, 0, 0}, {0.005, 0, 0}}, tiny, small_swarm(), 1, 0.05);
  CHECK(r.violations == 1);
  CHECK(r.best_fitness < -49.0);
}

TEST_CASE("placement fitness is the robust rate minus penalties") {
  for (Scenario scen : {Scenario::psr, Scenario::csr}) {
    RunConfig cfg;
    cfg.scenario = scen;
    const Instance inst(cfg, 4);
    const Placement p = grid_positions(4, cfg.region(), cfg.d_min());
    const auto links = inst.links(p);
    const cvec w = initial_beamformer(links, cfg.p_max_watt());
    const cvec psi = phases_from_indices(aligned_phases(links[0], w, cfg.levels), cfg.levels);

    PlacementFitness fit;
    fit.synthesizer = &inst.synthesizer;
    fit.scenario = cfg.scenario_config();
    fit.g_bs = cfg.g_bs;
    fit.g_u = cfg.g_u;
    fit.w = w;
    fit.psi = psi;
    fit.d_min = cfg.d_min();
    const double rate = robust_objective(fit.scenario, links, w, psi);
    CHECK(fit.rate(p) == rate);
    const double sec = robust_secondary_ok(fit.scenario, links, w, psi) ? 0.0 : 50.0;
    CHECK(fit(p) == doctest::Approx(rate - sec));

    Placement clash = p;
    clash[1] = clash[0];
    const auto cl = fit.links(clash);
    const double base = robust_objective(fit.scenario, cl, w, psi) -
                        (robust_secondary_ok(fit.scenario, cl, w, psi) ? 0.0 : 50.0);
    CHECK(fit(clash) == doctest::Approx(base - 50.0));
  }
}
