#include <algorithm>
#include <cmath>
#include <numbers>

#include "masr/beamforming.hpp"
#include "sca_common.hpp"

namespace masr {

using namespace sca_detail;

namespace {

void add_power_soc(TransmitProblem& tp) {
  SocBlock soc;
  soc.label = "C1 power";
  for (int i : tp.w_re) soc.rows.push_back(LinearForm().add(i, 1.0));
  for (int i : tp.w_im) soc.rows.push_back(LinearForm().add(i, 1.0));
  soc.bound = LinearForm(1.0);
  tp.problem.socs.push_back(std::move(soc));
}

}  // namespace

double psr_interference_bound(const UserLink& link, const cvec& w, const cvec& psi) {
  const double m = std::sqrt(static_cast<double>(psi.size()));
  const double a = worst_case_cascaded_amplitude(link.channels.H_bs, psi, w,
                                                 link.uncertainty.xi_bs, Sense::max, m);
  return a * a;
}

cvec TransmitProblem::beamformer(const Eigen::VectorXd& z) const {
  cvec w(static_cast<Eigen::Index>(w_re.size()));
  for (std::size_t k = 0; k < w_re.size(); ++k)
    w(static_cast<Eigen::Index>(k)) = cd(z(w_re[k]), z(w_im[k]));
  return std::sqrt(scaling.power) * w;
}

TransmitProblem build_psr_transmit_subproblem(const std::vector<UserLink>& links,
                                              const ScenarioConfig& sc, double p_max,
                                              const cvec& psi, const cvec& w_n) {
  if (links.empty()) throw std::invalid_argument("no primary users");
  TransmitProblem tp;
  tp.scaling = choose_scaling(links, p_max);
  const double unit = tp.scaling.unit();
  const double noise = sc.noise_power / unit;
  const double gamma = sc.required_cascaded_power() / unit;
  const Eigen::Index K = w_n.size(), M = psi.size();
  const cvec wn = w_n / std::sqrt(tp.scaling.power);
  const double psi_sq = static_cast<double>(M);

  auto& p = tp.problem;
  tp.w_re = p.add_variables("w_re", static_cast<int>(K));
  tp.w_im = p.add_variables("w_im", static_cast<int>(K));
  add_power_soc(tp);
  const AffineMatrix w = AffineMatrix::complex_vector(tp.w_re, tp.w_im);
  const AffineMatrix wn_c = constant_vector(wn);
  const AffineMatrix psi_c = constant_vector(psi);

  std::vector<RateSurrogate> rates;
  for (std::size_t u = 0; u < links.size(); ++u) {
    const UserLink l = normalised(links[u], tp.scaling);
    const std::string tag = " user " + std::to_string(u);
    const double xu = l.uncertainty.xi_u, xb = l.uncertainty.xi_bs;

    const double du = worst_case_direct_amplitude(l.channels.h_u, wn, xu, Sense::max);
    const double ru = floor_at(du * du, 1e-12);
    const double eh_n = psr_interference_bound(l, wn, psi);
    const double rh = floor_at(eh_n, noise);

    const int e_u = p.add_variable("eps_u" + tag);
    const int e_h = p.add_variable("eps_h" + tag, 0.0);
    const int mu_c = p.add_variable("mu_c2" + tag, 0.0);
    const int mu_u = p.add_variable("mu_c6" + tag, 0.0);
    const int b_i = p.add_variable("b_c7" + tag, 0.0);
    tp.eps_u.push_back(e_u);
    tp.eps_h.push_back(e_h);

    const Amplitude cas = cascaded_amplitude(l.channels.H_bs, w, psi_c);
    const Amplitude cas_n = cascaded_amplitude(l.channels.H_bs, wn_c, psi_c);
    p.lmis.push_back(robust_minorant_block(cas, cas_n, AffineMatrix(cmat::Constant(1, 1, gamma)),
                                           {{M * K, xb, mu_c}}, floor_at(rh, gamma),
                                           "C2 secondary" + tag));

    const Amplitude dir = direct_amplitude(l.channels.h_u, w);
    const Amplitude dir_n = direct_amplitude(l.channels.h_u, wn_c);
    p.lmis.push_back(robust_minorant_block(dir, dir_n, scaled_variable(e_u, ru),
                                           {{K, xu, mu_u}}, ru, "C6 direct" + tag));

    p.lmis.push_back(interference_block(scaled_variable(e_h, rh), cas.alpha, w, xb, psi_sq, b_i,
                                        std::sqrt(rh), "C7 interference" + tag));

    // log2(eps_u + eps_h + s2) - (eps_h - eh_n) / (ln2 (s2 + eh_n)) - log2(s2 + eh_n)
    RateSurrogate r;
    LogTerm lt;
    lt.weight = 1.0 / kLn2;
    lt.argument = LinearForm(noise).add(e_u, ru).add(e_h, rh);
    r.logs.push_back(lt);
    const double den = kLn2 * (noise + eh_n);
    r.linear = LinearForm(eh_n / den - std::log2(noise + eh_n)).add(e_h, -rh / den);
    rates.push_back(std::move(r));
  }
  attach_objective(p, std::move(rates), tp.epigraph, LinearForm());
  return tp;
}

TransmitProblem build_csr_transmit_subproblem(const std::vector<UserLink>& links,
                                              const ScenarioConfig& sc, double p_max,
                                              const cvec& psi, const cvec& w_n) {
  if (links.empty()) throw std::invalid_argument("no primary users");
  TransmitProblem tp;
  tp.scaling = choose_scaling(links, p_max);
  const double unit = tp.scaling.unit();
  const double noise = sc.noise_power / unit;
  const double gamma = sc.required_cascaded_power() / unit;
  const Eigen::Index K = w_n.size(), M = psi.size();
  const cvec wn = w_n / std::sqrt(tp.scaling.power);

  auto& p = tp.problem;
  tp.w_re = p.add_variables("w_re", static_cast<int>(K));
  tp.w_im = p.add_variables("w_im", static_cast<int>(K));
  add_power_soc(tp);
  const AffineMatrix w = AffineMatrix::complex_vector(tp.w_re, tp.w_im);
  const AffineMatrix wn_c = constant_vector(wn);
  const AffineMatrix psi_c = constant_vector(psi);

  std::vector<RateSurrogate> rates;
  for (std::size_t u = 0; u < links.size(); ++u) {
    const UserLink l = normalised(links[u], tp.scaling);
    const std::string tag = " user " + std::to_string(u);
    const double xu = l.uncertainty.xi_u, xb = l.uncertainty.xi_bs;

    const double dc = worst_case_cascaded_amplitude(l.channels.H_bs, psi, wn, xb, Sense::max);
    const double rc = floor_at(dc * dc, gamma);
    const Amplitude cas = cascaded_amplitude(l.channels.H_bs, w, psi_c);
    const Amplitude cas_n = cascaded_amplitude(l.channels.H_bs, wn_c, psi_c);
    const int mu_c = p.add_variable("mu_c11" + tag, 0.0);
    p.lmis.push_back(robust_minorant_block(cas, cas_n, AffineMatrix(cmat::Constant(1, 1, gamma)),
                                           {{M * K, xb, mu_c}}, rc, "C11 secondary" + tag));

    RateSurrogate r;
    for (int sign : {1, -1}) {
      const std::string st = sign > 0 ? "+" : "-";
      const cd nom = l.channels.h_u.dot(wn) + static_cast<double>(sign) * psi.dot(l.channels.H_bs * wn);
      const double hi = std::abs(nom) + (xu + xb * psi.norm()) * wn.norm();
      const double re = floor_at(hi * hi, noise);
      const int e = p.add_variable("eps" + st + tag);
      const int mu_u = p.add_variable("mu_u" + st + tag, 0.0);
      const int mu_b = p.add_variable("mu_b" + st + tag, 0.0);
      (sign > 0 ? tp.eps_u : tp.eps_h).push_back(e);
      const Amplitude a = combined_amplitude(l.channels.h_u, l.channels.H_bs, w, psi_c, sign);
      const Amplitude an = combined_amplitude(l.channels.h_u, l.channels.H_bs, wn_c, psi_c, sign);
      p.lmis.push_back(robust_minorant_block(a, an, scaled_variable(e, re),
                                             {{K, xu, mu_u}, {M * K, xb, mu_b}}, re,
                                             (sign > 0 ? "C12 sum" : "C13 difference") + tag));
      LogTerm lt;
      lt.weight = 0.5 / kLn2;
      lt.argument = LinearForm(noise).add(e, re);
      r.logs.push_back(lt);
    }
    r.linear = LinearForm(-std::log2(noise));
    rates.push_back(std::move(r));
  }
  attach_objective(p, std::move(rates), tp.epigraph, LinearForm());
  return tp;
}

double robust_objective(const ScenarioConfig& sc, const std::vector<UserLink>& links,
                        const cvec& w, const cvec& psi) {
  std::vector<double> r;
  for (const auto& l : links) r.push_back(robust_rate(sc, l.channels, w, psi, l.uncertainty));
  return multi_pu_objective(r);
}

bool robust_secondary_ok(const ScenarioConfig& sc, const std::vector<UserLink>& links,
                         const cvec& w, const cvec& psi) {
  return std::all_of(links.begin(), links.end(), [&](const UserLink& l) {
    return robust_secondary_ok(sc, l.channels, w, psi, l.uncertainty);
  });
}

TransmitResult sca_transmit(const std::vector<UserLink>& links, const ScenarioConfig& sc,
                            double p_max, const cvec& psi, const cvec& w0,
                            const ScaOptions& opts) {
  TransmitResult res;
  res.w = w0;
  res.trace.push_back(robust_objective(sc, links, w0, psi));
  const bool start_ok = robust_secondary_ok(sc, links, w0, psi);
  bool feasible = start_ok;
  const std::string family = sc.scenario == Scenario::psr ? "C2" : "C11";
  for (int it = 0; it < opts.max_iterations; ++it) {
    const TransmitProblem tp = sc.scenario == Scenario::psr
                                   ? build_psr_transmit_subproblem(links, sc, p_max, psi, res.w)
                                   : build_csr_transmit_subproblem(links, sc, p_max, psi, res.w);
    const ConicSolution sol = solve_conic(tp.problem, opts.solver);
    if (sol.status == SolveStatus::infeasible && !start_ok && it == 0)
      throw SubproblemInfeasible("transmit", family, sol.message);
    if (sol.status != SolveStatus::optimal) {
      ++res.solver_failures;
      break;
    }
    cvec w = tp.beamformer(sol.x);
    const double cap = std::sqrt(p_max);
    if (w.norm() > cap) w *= cap / w.norm();
    if (!robust_secondary_ok(sc, links, w, psi)) break;
    const double f = robust_objective(sc, links, w, psi);
    const double prev = res.trace.back();
    if (feasible && !(f >= prev)) break;
    if (!feasible) res.trace.clear();  // trace starts at the first feasible point
    feasible = true;
    res.w = w;
    res.trace.push_back(f);
    ++res.iterations;
    if (res.trace.size() > 1 && f - prev <= opts.relative_tolerance * std::max(1.0, std::abs(prev))) break;
  }
  return res;
}

}  // namespace masr
