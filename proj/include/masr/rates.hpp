// Rate and SNR expressions of both symbiotic-radio scenarios.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "masr/geometry.hpp"
#include "masr/uncertainty.hpp"

namespace masr {

enum class Scenario { psr, csr };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

struct ScenarioConfig {
  Scenario scenario = Scenario::psr;
  double noise_power = 1e-12;
  double gamma_p_min = 1e7;   // 70 dB
  double gamma_c_min = 5e8;   // 70 dB + 10 log10(L): same cascaded power as PSR
  double symbol_span = 50.0;  // L

  // Linear SNR threshold of the secondary link for this scenario.
  double secondary_threshold() const;
  // Minimum |psi^H H_bs w|^2 implied by the secondary SNR threshold.
  double required_cascaded_power() const;
  bool valid() const;
};

// Unit-modulus grid point e^{j 2 pi i / levels}.
cd grid_phase(int index, int levels);
cvec phases_from_indices(const std::vector<int>& indices, int levels);

struct Design {
  cvec w;
  std::vector<int> phase_index;
  int levels = 8;
  std::vector<Position3> positions;

  cvec psi() const { return phases_from_indices(phase_index, levels); }
};

// Channels with an optional additive estimation error.
ChannelSet perturbed(const ChannelSet& channels, const Perturbation& delta);

double psr_primary_sinr(const ChannelSet& ch, const cvec& w, const cvec& psi, double noise,
                        const Perturbation* delta = nullptr);
double psr_rate(const ChannelSet& ch, const cvec& w, const cvec& psi, double noise,
                const Perturbation* delta = nullptr);
double psr_secondary_snr(const ChannelSet& ch, const cvec& w, const cvec& psi, double noise,
                         const Perturbation* delta = nullptr);
double csr_rate(const ChannelSet& ch, const cvec& w, const cvec& psi, double noise,
                const Perturbation* delta = nullptr);
double csr_secondary_snr(const ChannelSet& ch, const cvec& w, const cvec& psi, double noise,
                         double symbol_span, const Perturbation* delta = nullptr);

double psr_robust_rate_lower_bound(const ChannelSet& ch, const cvec& w, const cvec& psi,
                                   const UncertaintyModel& unc, double noise);
// Variant with ||psi|| replaced by an explicit bound in the interference term.
double psr_robust_rate_lower_bound(const ChannelSet& ch, const cvec& w, const cvec& psi,
                                   const UncertaintyModel& unc, double noise, double psi_norm);
double csr_robust_rate_lower_bound(const ChannelSet& ch, const cvec& w, const cvec& psi,
                                   const UncertaintyModel& unc, double noise);

// Scenario-dispatched helpers.
double nominal_rate(const ScenarioConfig& sc, const ChannelSet& ch, const cvec& w,
                    const cvec& psi, const Perturbation* delta = nullptr);
double robust_rate(const ScenarioConfig& sc, const ChannelSet& ch, const cvec& w,
                   const cvec& psi, const UncertaintyModel& unc);
double secondary_snr(const ScenarioConfig& sc, const ChannelSet& ch, const cvec& w,
                     const cvec& psi, const Perturbation* delta = nullptr);
// Worst-case secondary SNR over the cascaded ball.
double robust_secondary_snr(const ScenarioConfig& sc, const ChannelSet& ch, const cvec& w,
                            const cvec& psi, const UncertaintyModel& unc);
bool robust_secondary_ok(const ScenarioConfig& sc, const ChannelSet& ch, const cvec& w,
                         const cvec& psi, const UncertaintyModel& unc, double rel_tol = 1e-9);

double multi_pu_objective(const std::vector<double>& per_user_rates);

}  // namespace masr
