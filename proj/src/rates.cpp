#include "masr/rates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace masr {

std::string to_string(Scenario s) { return s == Scenario::psr ? "psr" : "csr"; }

Scenario scenario_from_string(const std::string& s) {
  if (s == "psr" || s == "PSR") return Scenario::psr;
  if (s == "csr" || s == "CSR") return Scenario::csr;
  throw std::invalid_argument("unknown scenario: " + s);
}

double ScenarioConfig::secondary_threshold() const {
  return scenario == Scenario::psr ? gamma_p_min : gamma_c_min;
}

double ScenarioConfig::required_cascaded_power() const {
  return scenario == Scenario::psr ? gamma_p_min * noise_power
                                   : gamma_c_min * noise_power / symbol_span;
}

bool ScenarioConfig::valid() const {
  return noise_power > 0.0 && gamma_p_min >= 0.0 && gamma_c_min >= 0.0 && symbol_span >= 1.0;
}

cd grid_phase(int index, int levels) {
  if (levels < 1) throw std::invalid_argument("phase levels must be positive");
  const int i = ((index % levels) + levels) % levels;
  if (i == 0) return {1.0, 0.0};
  return std::polar(1.0, 2.0 * std::numbers::pi * i / levels);
}

cvec phases_from_indices(const std::vector<int>& indices, int levels) {
  cvec psi(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t m = 0; m < indices.size(); ++m)
    psi(static_cast<Eigen::Index>(m)) = grid_phase(indices[m], levels);
  return psi;
}

ChannelSet perturbed(const ChannelSet& channels, const Perturbation& delta) {
  ChannelSet out = channels;
  out.H_bs += delta.H_bs;
  out.h_u += delta.h_u;
  return out;
}

namespace {

struct Amplitudes {
  cd direct;
  cd cascaded;
};

Amplitudes amplitudes(const ChannelSet& ch, const cvec& w, const cvec& psi,
                      const Perturbation* delta) {
  if (delta) {
    return {(ch.h_u + delta->h_u).dot(w), psi.dot((ch.H_bs + delta->H_bs) * w)};
  }
  return {ch.h_u.dot(w), psi.dot(ch.H_bs * w)};
}

}  // namespace

double psr_primary_sinr(const ChannelSet& ch, const cvec& w, const cvec& psi, double noise,
                        const Perturbation* delta) {
  const auto a = amplitudes(ch, w, psi, delta);
  return std::norm(a.direct) / (std::norm(a.cascaded) + noise);
}

double psr_rate(const ChannelSet& ch, const cvec& w, const cvec& psi, double noise,
                const Perturbation* delta) {
  return std::log2(1.0 + psr_primary_sinr(ch, w, psi, noise, delta));
}

double psr_secondary_snr(const ChannelSet& ch, const cvec& w, const cvec& psi, double noise,
                         const Perturbation* delta) {
  return std::norm(amplitudes(ch, w, psi, delta).cascaded) / noise;
}

double csr_rate(const ChannelSet& ch, const cvec& w, const cvec& psi, double noise,
                const Perturbation* delta) {
  const auto a = amplitudes(ch, w, psi, delta);
  return 0.5 * std::log2(1.0 + std::norm(a.direct + a.cascaded) / noise) +
         0.5 * std::log2(1.0 + std::norm(a.direct - a.cascaded) / noise);
}

double csr_secondary_snr(const ChannelSet& ch, const cvec& w, const cvec& psi, double noise,
                         double symbol_span, const Perturbation* delta) {
  return symbol_span * psr_secondary_snr(ch, w, psi, noise, delta);
}

double psr_robust_rate_lower_bound(const ChannelSet& ch, const cvec& w, const cvec& psi,
                                   const UncertaintyModel& unc, double noise) {
  return psr_robust_rate_lower_bound(ch, w, psi, unc, noise, psi.norm());
}

double psr_robust_rate_lower_bound(const ChannelSet& ch, const cvec& w, const cvec& psi,
                                   const UncertaintyModel& unc, double noise, double psi_norm) {
  const double num = worst_case_direct_amplitude(ch.h_u, w, unc.xi_u, Sense::min);
  const double den =
      worst_case_cascaded_amplitude(ch.H_bs, psi, w, unc.xi_bs, Sense::max, psi_norm);
  return std::log2(1.0 + num * num / (den * den + noise));
}

double csr_robust_rate_lower_bound(const ChannelSet& ch, const cvec& w, const cvec& psi,
                                   const UncertaintyModel& unc, double noise) {
  const double plus = worst_case_combined_amplitude(ch.h_u, ch.H_bs, psi, w, unc.xi_u, unc.xi_bs, 1);
  const double minus =
      worst_case_combined_amplitude(ch.h_u, ch.H_bs, psi, w, unc.xi_u, unc.xi_bs, -1);
  return 0.5 * std::log2(1.0 + plus * plus / noise) + 0.5 * std::log2(1.0 + minus * minus / noise);
}

double nominal_rate(const ScenarioConfig& sc, const ChannelSet& ch, const cvec& w,
                    const cvec& psi, const Perturbation* delta) {
  return sc.scenario == Scenario::psr ? psr_rate(ch, w, psi, sc.noise_power, delta)
                                      : csr_rate(ch, w, psi, sc.noise_power, delta);
}

double robust_rate(const ScenarioConfig& sc, const ChannelSet& ch, const cvec& w,
                   const cvec& psi, const UncertaintyModel& unc) {
  return sc.scenario == Scenario::psr
             ? psr_robust_rate_lower_bound(ch, w, psi, unc, sc.noise_power)
             : csr_robust_rate_lower_bound(ch, w, psi, unc, sc.noise_power);
}

double secondary_snr(const ScenarioConfig& sc, const ChannelSet& ch, const cvec& w,
                     const cvec& psi, const Perturbation* delta) {
  return sc.scenario == Scenario::psr
             ? psr_secondary_snr(ch, w, psi, sc.noise_power, delta)
             : csr_secondary_snr(ch, w, psi, sc.noise_power, sc.symbol_span, delta);
}

double robust_secondary_snr(const ScenarioConfig& sc, const ChannelSet& ch, const cvec& w,
                            const cvec& psi, const UncertaintyModel& unc) {
  const double a = worst_case_cascaded_amplitude(ch.H_bs, psi, w, unc.xi_bs, Sense::min);
  const double scale = sc.scenario == Scenario::psr ? 1.0 : sc.symbol_span;
  return scale * a * a / sc.noise_power;
}

bool robust_secondary_ok(const ScenarioConfig& sc, const ChannelSet& ch, const cvec& w,
                         const cvec& psi, const UncertaintyModel& unc, double rel_tol) {
  return robust_secondary_snr(sc, ch, w, psi, unc) >= sc.secondary_threshold() * (1.0 - rel_tol);
}

double multi_pu_objective(const std::vector<double>& per_user_rates) {
  if (per_user_rates.empty()) throw std::invalid_argument("no per-user rates");
  return *std::min_element(per_user_rates.begin(), per_user_rates.end());
}

}  // namespace masr
