#include "masr/driver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <thread>

namespace masr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Independent stream per (seed, purpose, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index = 0) {
  std::seed_seq seq{seed, purpose, index};
  std::uint32_t raw[2];
  seq.generate(raw, raw + 2);
  return (static_cast<std::uint64_t>(raw[0]) << 32) | raw[1];
}

ChannelGeometry draw_for(const RunConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  return draw_channel_geometry(cfg.propagation, rng);
}

double min_secondary_snr(const ScenarioConfig& sc, const std::vector<UserLink>& links,
                         const cvec& w, const cvec& psi) {
  double s = INFINITY;
  for (const auto& l : links)
    s = std::min(s, robust_secondary_snr(sc, l.channels, w, psi, l.uncertainty));
  return s;
}

double min_nominal_rate(const ScenarioConfig& sc, const std::vector<UserLink>& links,
                        const cvec& w, const cvec& psi) {
  std::vector<double> r;
  for (const auto& l : links) r.push_back(nominal_rate(sc, l.channels, w, psi));
  return multi_pu_objective(r);
}

struct Start {
  cvec w;
  std::vector<int> indices;
};

Start initial_point(const Instance& inst, const std::vector<UserLink>& links,
                    const ScenarioConfig& sc, Scheme scheme) {
  const RunConfig& cfg = inst.config;
  const double p_max = cfg.p_max_watt();
  Start s;
  s.w = initial_beamformer(links, p_max);
  if (scheme != Scheme::random_psi) {
    s.indices = polish_phases(links, sc, s.w, aligned_phases(links.front(), s.w, cfg.levels),
                              cfg.levels);
    cvec w = s.w;
    if (!make_secondary_feasible(links, sc, p_max, phases_from_indices(s.indices, cfg.levels), w) &&
        !search_feasible_start(links, sc, p_max, cfg.levels, s.indices, w))
      throw SubproblemInfeasible("initialization", sc.scenario == Scenario::psr ? "C2" : "C11",
                                 "no beamformer meets the secondary threshold");
    s.w = w;
    return s;
  }
  // random grid phases, redrawn until some beamformer meets the threshold
  Rng rng(derive_seed(inst.seed, 0x5051));
  std::uniform_int_distribution<int> pick(0, cfg.levels - 1);
  const int M = cfg.propagation.ris_elements;
  for (int attempt = 0; attempt < 200; ++attempt) {
    s.indices.assign(static_cast<std::size_t>(M), 0);
    for (auto& i : s.indices) i = pick(rng);
    cvec w = s.w;
    if (make_secondary_feasible(links, sc, p_max, phases_from_indices(s.indices, cfg.levels), w)) {
      s.w = w;
      return s;
    }
  }
  throw SubproblemInfeasible("initialization", sc.scenario == Scenario::psr ? "C2" : "C11",
                             "no random phase draw admits a feasible beamformer");
}

RunResult optimize_at(const Instance& inst, Scheme scheme, double threshold_scale) {
  const auto t_start = Clock::now();
  const RunConfig& cfg = inst.config;
  ScenarioConfig sc = cfg.scenario_config();
  sc.gamma_p_min *= threshold_scale;
  sc.gamma_c_min *= threshold_scale;
  const double p_max = cfg.p_max_watt();
  const MovementRegion region = cfg.region();

  RunResult res;
  res.scenario = cfg.scenario;
  res.scheme = scheme;
  res.seed = inst.seed;
  res.sweep_name = cfg.sweep_name;
  res.threshold_scale = threshold_scale;
  res.design.levels = cfg.levels;
  res.design.positions = grid_positions(cfg.antennas, region, cfg.d_min());

  std::vector<UserLink> links = inst.links(res.design.positions);
  const Start start = initial_point(inst, links, sc, scheme);
  res.design.w = start.w;
  res.design.phase_index = start.indices;
  double f = robust_objective(sc, links, res.design.w, res.design.psi());
  res.ao_trace.push_back(f);

  SwarmConfig swarm = cfg.swarm;
  swarm.annealing = scheme != Scheme::proposed_pso;

  for (int it = 0; it < cfg.ao_max_iterations; ++it) {
    AoIteration rec;
    const std::string where = "AO iteration " + std::to_string(it + 1);
    auto t0 = Clock::now();
    try {
      const TransmitResult tr =
          sca_transmit(links, sc, p_max, res.design.psi(), res.design.w, cfg.transmit);
      res.design.w = tr.w;
      rec.transmit_trace = tr.trace;
    } catch (const SubproblemInfeasible& e) {
      throw SubproblemInfeasible(e.stage(), e.family(), where + ": " + e.what());
    }
    res.times.transmit += seconds_since(t0);

    if (scheme != Scheme::random_psi) {
      t0 = Clock::now();
      const PassiveResult pr = sca_passive(links, sc, p_max, res.design.w, res.design.phase_index,
                                           cfg.levels, cfg.passive);
      res.design.phase_index = pr.indices;
      rec.passive_trace = pr.trace;
      res.times.passive += seconds_since(t0);
    }

    if (scheme != Scheme::fpa) {
      t0 = Clock::now();
      PlacementFitness fit;
      fit.synthesizer = &inst.synthesizer;
      fit.scenario = sc;
      fit.g_bs = cfg.g_bs;
      fit.g_u = cfg.g_u;
      fit.w = res.design.w;
      fit.psi = res.design.psi();
      fit.penalty = swarm.penalty;
      fit.d_min = cfg.d_min();
      const std::uint64_t sseed = derive_seed(inst.seed, 0x5a50, static_cast<std::uint64_t>(it));
      SwarmResult sr = sa_pso(fit, res.design.positions, region, swarm, sseed, fit.d_min);
      if (sr.violations > 0) {
        SwarmConfig twice = swarm;
        twice.penalty *= 2.0;
        fit.penalty = twice.penalty;
        sr = sa_pso(fit, res.design.positions, region, twice, sseed, fit.d_min);
        if (sr.violations > 0)
          throw std::runtime_error(where + ": position search found no spacing-feasible placement");
      }
      rec.swarm_trace = sr.trace;
      // the incumbent is particle 0, so this only guards round-off and the
      // secondary constraint
      const std::vector<UserLink> moved = inst.links(sr.best);
      const double f_moved = robust_objective(sc, moved, res.design.w, res.design.psi());
      const double f_here = robust_objective(sc, links, res.design.w, res.design.psi());
      if (robust_secondary_ok(sc, moved, res.design.w, res.design.psi()) && f_moved > f_here) {
        res.design.positions = sr.best;
        links = moved;
        rec.positions_moved = true;
      }
      res.times.swarm += seconds_since(t0);
    }

    const double f_new = robust_objective(sc, links, res.design.w, res.design.psi());
    rec.objective = f_new;
    res.iterations.push_back(std::move(rec));
    res.ao_trace.push_back(f_new);
    const double change = std::abs(f_new - f) / std::max(std::abs(f), 1e-12);
    f = f_new;
    if (change < cfg.ao_tolerance) break;
    if (it + 1 == cfg.ao_max_iterations) res.hit_iteration_cap = true;
  }

  res.rate = f;
  res.secondary_snr_db = linear_to_db(min_secondary_snr(sc, links, res.design.w, res.design.psi()));
  res.nominal_rate = min_nominal_rate(sc, links, res.design.w, res.design.psi());
  res.feasible = robust_secondary_ok(sc, links, res.design.w, res.design.psi());
  res.runtime_s = seconds_since(t_start);
  return res;
}

}  // namespace

Instance::Instance(const RunConfig& cfg, std::uint64_t s)
    : config(cfg), seed(s), geometry(draw_for(cfg, s)), synthesizer(geometry) {}

std::vector<UserLink> Instance::links(const Placement& p) const {
  std::vector<UserLink> out;
  for (auto& ch : synthesizer.synthesize_all(p)) {
    const auto unc = UncertaintyModel::derive(config.g_bs, config.g_u, ch);
    out.push_back({std::move(ch), unc});
  }
  return out;
}

cvec initial_beamformer(const std::vector<UserLink>& links, double p_max) {
  if (links.empty()) throw std::invalid_argument("no primary users");
  cvec w = cvec::Zero(links.front().channels.h_u.size());
  for (const auto& l : links) {
    const double n = l.channels.h_u.norm();
    if (n > 0.0) w += l.channels.h_u / n;
  }
  if (w.norm() == 0.0) w.setOnes();
  return std::sqrt(p_max) * w / w.norm();
}

std::vector<int> aligned_phases(const UserLink& link, const cvec& w, int levels) {
  const cvec g = link.channels.H_bs * w;
  const double ref = std::arg(link.channels.h_u.dot(w));
  const double step = 2.0 * std::numbers::pi / levels;
  std::vector<int> idx(static_cast<std::size_t>(g.size()));
  for (Eigen::Index m = 0; m < g.size(); ++m) {
    // conj(psi_m) g_m in phase with h_u^H w
    const long i = std::lround((std::arg(g(m)) - ref) / step);
    idx[static_cast<std::size_t>(m)] = static_cast<int>(((i % levels) + levels) % levels);
  }
  return idx;
}

std::vector<int> polish_phases(const std::vector<UserLink>& links, const ScenarioConfig& sc,
                               const cvec& w, std::vector<int> indices, int levels) {
  for (int pass = 0; pass < 50; ++pass) {
    std::vector<int> next = local_search(links, sc, w, indices, levels);
    if (next == indices) break;
    indices = std::move(next);
  }
  return indices;
}

double secondary_margin(const std::vector<UserLink>& links, const ScenarioConfig& sc,
                        const cvec& w, const cvec& psi) {
  double m = INFINITY;
  for (const auto& l : links)
    m = std::min(m, robust_secondary_snr(sc, l.channels, w, psi, l.uncertainty));
  return m / sc.secondary_threshold();
}

cvec cascade_beamformer(const std::vector<UserLink>& links, const ScenarioConfig& sc,
                        double p_max, const cvec& psi) {
  std::vector<cvec> dirs;
  for (const auto& l : links) {
    const cvec v = l.channels.H_bs.adjoint() * psi;
    dirs.push_back(v.norm() > 0.0 ? cvec(v / v.norm()) : v);
  }
  const double scale = std::sqrt(p_max);
  auto mix = [&](const std::vector<cd>& c) {
    cvec w = cvec::Zero(dirs.front().size());
    for (std::size_t u = 0; u < dirs.size(); ++u) w += c[u] * dirs[u];
    return w.norm() > 0.0 ? cvec(scale * w / w.norm()) : w;
  };
  std::vector<cd> c(dirs.size(), cd(1.0, 0.0));
  if (dirs.size() == 1) return mix(c);
  // cyclic search over each user's weight (modulus x phase), max-min margin
  double best = secondary_margin(links, sc, mix(c), psi);
  for (int sweep = 0; sweep < 3; ++sweep) {
    for (std::size_t u = 1; u < dirs.size(); ++u) {
      const cd keep = c[u];
      cd chosen = keep;
      for (int a = 0; a <= 10; ++a)
        for (int ph = 0; ph < 16; ++ph) {
          c[u] = std::polar(a / 5.0, 2.0 * std::numbers::pi * ph / 16.0);
          const double m = secondary_margin(links, sc, mix(c), psi);
          if (m > best) {
            best = m;
            chosen = c[u];
          }
        }
      c[u] = chosen;
    }
  }
  return mix(c);
}

bool make_secondary_feasible(const std::vector<UserLink>& links, const ScenarioConfig& sc,
                             double p_max, const cvec& psi, cvec& w) {
  if (robust_secondary_ok(sc, links, w, psi)) return true;
  const cvec w_dir = w / w.norm();
  cvec w_cas = cascade_beamformer(links, sc, 1.0, psi);
  if (w_cas.norm() == 0.0) return false;
  const cd c = w_dir.dot(w_cas);
  if (std::abs(c) > 0.0) w_cas *= std::conj(c) / std::abs(c);
  for (int step = 1; step <= 20; ++step) {
    const double t = step / 20.0;
    cvec v = (1.0 - t) * w_dir + t * w_cas;
    if (v.norm() == 0.0) continue;
    v *= std::sqrt(p_max) / v.norm();
    if (robust_secondary_ok(sc, links, v, psi)) {
      w = v;
      return true;
    }
  }
  return false;
}

bool search_feasible_start(const std::vector<UserLink>& links, const ScenarioConfig& sc,
                           double p_max, int levels, std::vector<int>& indices, cvec& w) {
  const cvec w_mrt = initial_beamformer(links, p_max);
  for (const auto& anchor : links) {
    std::vector<int> idx = aligned_phases(anchor, initial_beamformer({anchor}, p_max), levels);
    for (int round = 0; round < 5; ++round) {
      const cvec wc = cascade_beamformer(links, sc, p_max, phases_from_indices(idx, levels));
      // single-element moves on the worst-user margin
      double best = secondary_margin(links, sc, wc, phases_from_indices(idx, levels));
      bool moved = false;
      for (std::size_t m = 0; m < idx.size(); ++m) {
        const int keep = idx[m];
        int chosen = keep;
        for (int i = 0; i < levels; ++i) {
          idx[m] = i;
          const double g = secondary_margin(links, sc, wc, phases_from_indices(idx, levels));
          if (g > best) {
            best = g;
            chosen = i;
          }
        }
        idx[m] = chosen;
        moved = moved || chosen != keep;
      }
      cvec v = w_mrt;
      if (make_secondary_feasible(links, sc, p_max, phases_from_indices(idx, levels), v)) {
        indices = idx;
        w = v;
        return true;
      }
      if (!moved) break;
    }
  }
  return false;
}

RunResult alternating_optimize(const Instance& inst, Scheme scheme) {
  try {
    return optimize_at(inst, scheme, 1.0);
  } catch (const SubproblemInfeasible&) {
    if (!inst.config.relax_threshold_on_infeasible) throw;
  }
  return optimize_at(inst, scheme, 0.5);
}

RunResult run_single(const RunConfig& cfg, std::uint64_t seed, Scheme scheme) {
  const auto t0 = Clock::now();
  RunResult res;
  try {
    const Instance inst(cfg, seed);
    res = alternating_optimize(inst, scheme);
    if (cfg.verify_samples > 0) {
      res.robustness =
          verify_robustness(inst, res, cfg.verify_samples, derive_seed(seed, 0x7e51));
      res.verified = res.robustness.passed();
    }
  } catch (const SubproblemInfeasible& e) {
    res.feasible = false;
    res.error = e.stage() + " " + e.family() + ": " + e.what();
  } catch (const std::exception& e) {
    res.feasible = false;
    res.error = e.what();
  }
  res.scenario = cfg.scenario;
  res.scheme = scheme;
  res.seed = seed;
  res.sweep_name = cfg.sweep_name;
  res.runtime_s = seconds_since(t0);
  return res;
}

RobustnessReport verify_robustness(const Instance& inst, const RunResult& result, int n_samples,
                                   std::uint64_t sample_seed) {
  ScenarioConfig sc = inst.config.scenario_config();
  sc.gamma_p_min *= result.threshold_scale;
  sc.gamma_c_min *= result.threshold_scale;
  const auto links = inst.links(result.design.positions);
  const cvec& w = result.design.w;
  const cvec psi = result.design.psi();
  RobustnessReport rep;
  rep.reported_bound = robust_objective(sc, links, w, psi);
  rep.min_sampled_rate = INFINITY;
  Rng rng(sample_seed);
  const double threshold = sc.secondary_threshold() * (1.0 - 1e-9);
  for (int n = 0; n < n_samples; ++n) {
    std::vector<double> rates;
    bool bad = false;
    for (const auto& l : links) {
      const Perturbation d = sample_perturbation(l.uncertainty, l.channels.elements(),
                                                 l.channels.antennas(), rng);
      rates.push_back(nominal_rate(sc, l.channels, w, psi, &d));
      bad = bad || secondary_snr(sc, l.channels, w, psi, &d) < threshold;
    }
    rep.min_sampled_rate = std::min(rep.min_sampled_rate, multi_pu_objective(rates));
    if (bad) ++rep.violations;
    ++rep.samples;
  }
  return rep;
}

std::vector<RunResult> run_sweep(const RunConfig& cfg) {
  struct Job {
    RunConfig config;
    double value;
    std::uint64_t seed;
    Scheme scheme;
  };
  std::vector<Job> jobs;
  const bool swept = cfg.sweep_name != "none";
  const std::vector<double> values = swept ? cfg.sweep_values : std::vector<double>{0.0};
  for (double v : values) {
    const RunConfig c = swept ? apply_sweep(cfg, cfg.sweep_name, v) : cfg;
    for (std::uint64_t s : cfg.seeds)
      for (Scheme k : cfg.schemes) jobs.push_back({c, v, s, k});
  }
  std::vector<RunResult> out(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      out[i] = run_single(jobs[i].config, jobs[i].seed, jobs[i].scheme);
      out[i].sweep_value = jobs[i].value;
    }
  };
  const int n = std::min<int>(cfg.workers, static_cast<int>(jobs.size()));
  if (n <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return out;
}

}  // namespace masr
