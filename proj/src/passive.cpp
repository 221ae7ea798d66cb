#include <cmath>

#include "masr/beamforming.hpp"
#include "sca_common.hpp"

namespace masr {

using namespace sca_detail;

namespace {

// Shared part of both passive builders: psi = E c, sum_i c_im <= 1, and the
// linearised binary penalty -eta sum [c (1 - 2 c^r) + (c^r)^2].
LinearForm add_selection(PassiveProblem& pp, const PassiveExpansion& at, double penalty) {
  auto& p = pp.problem;
  const int M = static_cast<int>(at.psi.size());
  const int L = pp.levels;
  pp.psi_re = p.add_variables("psi_re", M);
  pp.psi_im = p.add_variables("psi_im", M);
  pp.selectors = p.add_variables("c", L * M, 0.0, 1.0);
  LinearForm pen;
  for (int m = 0; m < M; ++m) {
    LinearForm re = LinearForm().add(pp.psi_re[static_cast<std::size_t>(m)], -1.0);
    LinearForm im = LinearForm().add(pp.psi_im[static_cast<std::size_t>(m)], -1.0);
    LinearForm cap(1.0);
    for (int i = 0; i < L; ++i) {
      const int v = pp.selectors[static_cast<std::size_t>(i + L * m)];
      const cd e = grid_phase(i, L);
      re.add(v, e.real());
      im.add(v, e.imag());
      cap.add(v, -1.0);
      const double cr = at.selectors(i, m);
      pen.add(v, -penalty * (1.0 - 2.0 * cr));
      pen.constant -= penalty * cr * cr;
    }
    p.equalities.push_back(re);
    p.equalities.push_back(im);
    p.add_inequality(cap, "C3 selection " + std::to_string(m));
  }
  return pen;
}

double selection_penalty(const Eigen::MatrixXd& c, double penalty) {
  return penalty * (c.array() * (1.0 - c.array())).sum();
}

}  // namespace

cvec PassiveProblem::phases(const Eigen::VectorXd& z) const {
  cvec psi(static_cast<Eigen::Index>(psi_re.size()));
  for (std::size_t m = 0; m < psi_re.size(); ++m)
    psi(static_cast<Eigen::Index>(m)) = cd(z(psi_re[m]), z(psi_im[m]));
  return psi;
}

Eigen::MatrixXd PassiveProblem::selection(const Eigen::VectorXd& z) const {
  const int M = static_cast<int>(psi_re.size());
  Eigen::MatrixXd c(levels, M);
  for (int m = 0; m < M; ++m)
    for (int i = 0; i < levels; ++i)
      c(i, m) = std::clamp(z(selectors[static_cast<std::size_t>(i + levels * m)]), 0.0, 1.0);
  return c;
}

PassiveExpansion expansion_from_selectors(const Eigen::MatrixXd& c, int levels) {
  if (c.rows() != levels) throw std::invalid_argument("selector rows must equal levels");
  PassiveExpansion at{c, cvec::Zero(c.cols())};
  for (Eigen::Index m = 0; m < c.cols(); ++m)
    for (int i = 0; i < levels; ++i) at.psi(m) += c(i, m) * grid_phase(i, levels);
  return at;
}

PassiveProblem build_psr_passive_subproblem(const std::vector<UserLink>& links,
                                            const ScenarioConfig& sc, double p_max,
                                            const cvec& w, const PassiveExpansion& at,
                                            double penalty) {
  if (links.empty()) throw std::invalid_argument("no primary users");
  PassiveProblem pp;
  pp.levels = static_cast<int>(at.selectors.rows());
  pp.scaling = choose_scaling(links, p_max);
  const double unit = pp.scaling.unit();
  const double noise = sc.noise_power / unit;
  const double gamma = sc.required_cascaded_power() / unit;
  const Eigen::Index K = w.size(), M = at.psi.size();
  const cvec wt = w / std::sqrt(pp.scaling.power);
  const LinearForm pen = add_selection(pp, at, penalty);
  auto& p = pp.problem;
  const AffineMatrix psi = AffineMatrix::complex_vector(pp.psi_re, pp.psi_im);
  const AffineMatrix psi_r = constant_vector(at.psi);
  const AffineMatrix w_c = constant_vector(wt);

  std::vector<RateSurrogate> rates;
  for (std::size_t u = 0; u < links.size(); ++u) {
    const UserLink l = normalised(links[u], pp.scaling);
    const std::string tag = " user " + std::to_string(u);
    const double xb = l.uncertainty.xi_bs;
    const double du = worst_case_direct_amplitude(l.channels.h_u, wt, l.uncertainty.xi_u, Sense::min);
    const double eps_u = du * du;
    const double eh_r = psr_interference_bound(l, wt, at.psi);
    const double rh = floor_at(eh_r, noise);

    const int e_h = p.add_variable("eps_h" + tag, 0.0);
    const int mu_c = p.add_variable("mu_c2" + tag, 0.0);
    const int b_i = p.add_variable("b_c7" + tag, 0.0);
    pp.eps_h.push_back(e_h);

    const Amplitude cas = cascaded_amplitude(l.channels.H_bs, w_c, psi);
    const Amplitude cas_r = cascaded_amplitude(l.channels.H_bs, w_c, psi_r);
    p.lmis.push_back(robust_minorant_block(cas, cas_r, AffineMatrix(cmat::Constant(1, 1, gamma)),
                                           {{M * K, xb, mu_c}}, floor_at(rh, gamma),
                                           "C2 secondary" + tag));
    p.lmis.push_back(interference_block(scaled_variable(e_h, rh), cas.alpha, w_c, xb,
                                        static_cast<double>(M), b_i, std::sqrt(rh),
                                        "C7 interference" + tag));

    RateSurrogate r;
    LogTerm lt;
    lt.weight = 1.0 / kLn2;
    lt.argument = LinearForm(noise + eps_u).add(e_h, rh);
    r.logs.push_back(lt);
    const double den = kLn2 * (noise + eh_r);
    r.linear = LinearForm(eh_r / den - std::log2(noise + eh_r)).add(e_h, -rh / den);
    rates.push_back(std::move(r));
  }
  attach_objective(p, std::move(rates), pp.epigraph, pen);
  return pp;
}

PassiveProblem build_csr_passive_subproblem(const std::vector<UserLink>& links,
                                            const ScenarioConfig& sc, double p_max,
                                            const cvec& w, const PassiveExpansion& at,
                                            double penalty) {
  if (links.empty()) throw std::invalid_argument("no primary users");
  PassiveProblem pp;
  pp.levels = static_cast<int>(at.selectors.rows());
  pp.scaling = choose_scaling(links, p_max);
  const double unit = pp.scaling.unit();
  const double noise = sc.noise_power / unit;
  const double gamma = sc.required_cascaded_power() / unit;
  const Eigen::Index K = w.size(), M = at.psi.size();
  const cvec wt = w / std::sqrt(pp.scaling.power);
  const LinearForm pen = add_selection(pp, at, penalty);
  auto& p = pp.problem;
  const AffineMatrix psi = AffineMatrix::complex_vector(pp.psi_re, pp.psi_im);
  const AffineMatrix psi_r = constant_vector(at.psi);
  const AffineMatrix w_c = constant_vector(wt);

  std::vector<RateSurrogate> rates;
  for (std::size_t u = 0; u < links.size(); ++u) {
    const UserLink l = normalised(links[u], pp.scaling);
    const std::string tag = " user " + std::to_string(u);
    const double xu = l.uncertainty.xi_u, xb = l.uncertainty.xi_bs;

    const double dc = worst_case_cascaded_amplitude(l.channels.H_bs, at.psi, wt, xb, Sense::max,
                                                    std::sqrt(static_cast<double>(M)));
    const int mu_c = p.add_variable("mu_c11" + tag, 0.0);
    p.lmis.push_back(robust_minorant_block(
        cascaded_amplitude(l.channels.H_bs, w_c, psi),
        cascaded_amplitude(l.channels.H_bs, w_c, psi_r), AffineMatrix(cmat::Constant(1, 1, gamma)),
        {{M * K, xb, mu_c}}, floor_at(dc * dc, gamma), "C11 secondary" + tag));

    RateSurrogate r;
    for (int sign : {1, -1}) {
      const std::string st = sign > 0 ? "+" : "-";
      const cd nom = l.channels.h_u.dot(wt) +
                     static_cast<double>(sign) * at.psi.dot(l.channels.H_bs * wt);
      const double hi = std::abs(nom) + (xu + xb * std::sqrt(static_cast<double>(M))) * wt.norm();
      const double re = floor_at(hi * hi, noise);
      const int e = p.add_variable("eps" + st + tag);
      const int mu_u = p.add_variable("mu_u" + st + tag, 0.0);
      const int mu_b = p.add_variable("mu_b" + st + tag, 0.0);
      (sign > 0 ? pp.eps_u : pp.eps_h).push_back(e);
      p.lmis.push_back(robust_minorant_block(
          combined_amplitude(l.channels.h_u, l.channels.H_bs, w_c, psi, sign),
          combined_amplitude(l.channels.h_u, l.channels.H_bs, w_c, psi_r, sign),
          scaled_variable(e, re), {{K, xu, mu_u}, {M * K, xb, mu_b}}, re,
          (sign > 0 ? "C12 sum" : "C13 difference") + tag));
      LogTerm lt;
      lt.weight = 0.5 / kLn2;
      lt.argument = LinearForm(noise).add(e, re);
      r.logs.push_back(lt);
    }
    r.linear = LinearForm(-std::log2(noise));
    rates.push_back(std::move(r));
  }
  attach_objective(p, std::move(rates), pp.epigraph, pen);
  return pp;
}

double passive_relaxed_objective(const ScenarioConfig& sc, const std::vector<UserLink>& links,
                                 const cvec& w, const PassiveExpansion& at, double penalty) {
  std::vector<double> r;
  const double m = std::sqrt(static_cast<double>(at.psi.size()));
  for (const auto& l : links) {
    r.push_back(sc.scenario == Scenario::psr
                    ? psr_robust_rate_lower_bound(l.channels, w, at.psi, l.uncertainty,
                                                  sc.noise_power, m)
                    : csr_robust_rate_lower_bound(l.channels, w, at.psi, l.uncertainty,
                                                  sc.noise_power));
  }
  return multi_pu_objective(r) - selection_penalty(at.selectors, penalty);
}

std::vector<int> recover_indices(const Eigen::MatrixXd& selectors) {
  std::vector<int> out;
  for (Eigen::Index m = 0; m < selectors.cols(); ++m) {
    int best = 0;
    for (int i = 1; i < selectors.rows(); ++i)
      if (selectors(i, m) > selectors(best, m)) best = i;
    out.push_back(best);
  }
  return out;
}

std::vector<int> local_search(const std::vector<UserLink>& links, const ScenarioConfig& sc,
                              const cvec& w, std::vector<int> indices, int levels) {
  // Feasible points beat infeasible ones; ties on feasibility go by objective.
  auto score = [&](const std::vector<int>& idx) {
    const cvec psi = phases_from_indices(idx, levels);
    return std::pair<bool, double>(robust_secondary_ok(sc, links, w, psi),
                                   robust_objective(sc, links, w, psi));
  };
  auto best = score(indices);
  for (std::size_t m = 0; m < indices.size(); ++m) {
    const int keep = indices[m];
    int chosen = keep;
    for (int i = 0; i < levels; ++i) {
      if (i == keep) continue;
      indices[m] = i;
      const auto s = score(indices);
      if (s > best) {
        best = s;
        chosen = i;
      }
    }
    indices[m] = chosen;
  }
  return indices;
}

PassiveResult sca_passive(const std::vector<UserLink>& links, const ScenarioConfig& sc,
                          double p_max, const cvec& w, const std::vector<int>& incumbent,
                          int levels, const PassiveOptions& opts) {
  const Eigen::Index M = static_cast<Eigen::Index>(incumbent.size());
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(levels, M);
  for (Eigen::Index m = 0; m < M; ++m) onehot(incumbent[static_cast<std::size_t>(m)], m) = 1.0;

  PassiveResult res;
  PassiveExpansion at = expansion_from_selectors(
      (1.0 - opts.start_blend) * onehot +
          Eigen::MatrixXd::Constant(levels, M, opts.start_blend / levels),
      levels);
  if (!robust_secondary_ok(sc, links, w, at.psi)) at = expansion_from_selectors(onehot, levels);
  res.trace.push_back(passive_relaxed_objective(sc, links, w, at, opts.penalty));

  for (int r = 0; r < opts.max_iterations; ++r) {
    const PassiveProblem pp =
        sc.scenario == Scenario::psr
            ? build_psr_passive_subproblem(links, sc, p_max, w, at, opts.penalty)
            : build_csr_passive_subproblem(links, sc, p_max, w, at, opts.penalty);
    const ConicSolution sol = solve_conic(pp.problem, opts.solver);
    if (sol.status != SolveStatus::optimal) {
      ++res.solver_failures;
      break;
    }
    const PassiveExpansion next = expansion_from_selectors(pp.selection(sol.x), levels);
    if (!robust_secondary_ok(sc, links, w, next.psi)) break;
    const double f = passive_relaxed_objective(sc, links, w, next, opts.penalty);
    const double prev = res.trace.back();
    if (!(f >= prev)) break;
    at = next;
    res.trace.push_back(f);
    ++res.iterations;
    if (f - prev <= opts.relative_tolerance * std::max(1.0, std::abs(prev))) break;
  }
  res.selectors = at.selectors;
  res.recovered = recover_indices(at.selectors);
  // candidates: the projected relaxation and the incumbent, both polished
  std::vector<int> best = incumbent;
  double best_f = robust_objective(sc, links, w, phases_from_indices(incumbent, levels));
  bool best_ok = robust_secondary_ok(sc, links, w, phases_from_indices(incumbent, levels));
  res.kept_incumbent = true;
  for (const auto& start : {res.recovered, incumbent}) {
    const std::vector<int> cand = local_search(links, sc, w, start, levels);
    const cvec psi = phases_from_indices(cand, levels);
    if (!robust_secondary_ok(sc, links, w, psi)) continue;
    const double f = robust_objective(sc, links, w, psi);
    if (!best_ok || f > best_f) {
      best = cand;
      best_f = f;
      best_ok = true;
      res.kept_incumbent = false;
    }
  }
  res.indices = best;
  res.psi = phases_from_indices(res.indices, levels);
  return res;
}

}  // namespace masr
