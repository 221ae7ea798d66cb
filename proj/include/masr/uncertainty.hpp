// Bounded (norm-ball) CSI error model and closed-form worst cases.
#pragma once

#include "masr/geometry.hpp"

namespace masr {

enum class Sense { min, max };

struct Perturbation {
  cmat H_bs;  // Delta H_bs, M x K
  cvec h_u;   // Delta h_u, K
};

struct UncertaintyModel {
  double g_bs = 0.05;
  double g_u = 0.1;
  double xi_bs = 0.0;
  double xi_u = 0.0;

  static UncertaintyModel derive(double g_bs, double g_u, const ChannelSet& channels);
  // Recompute the radii for rebuilt channels, keeping the ratios.
  UncertaintyModel rederive(const ChannelSet& channels) const;
};

struct SamplingOptions {
  double boundary_fraction = 0.5;  // share of draws placed on the spheres
};

Perturbation sample_perturbation(const UncertaintyModel& model, Eigen::Index elements,
                                 Eigen::Index antennas, Rng& rng,
                                 const SamplingOptions& opts = {});

double worst_case_direct_amplitude(const cvec& h_u, const cvec& w, double xi_u, Sense sense);

double worst_case_cascaded_amplitude(const cmat& H_bs, const cvec& psi, const cvec& w,
                                     double xi_bs, Sense sense);

// Same, with ||psi|| replaced by an explicit bound (used for relaxed psi).
double worst_case_cascaded_amplitude(const cmat& H_bs, const cvec& psi, const cvec& w,
                                     double xi_bs, Sense sense, double psi_norm);

// Minimum over both balls of |(h_u^H + sign psi^H H_bs) w|.
double worst_case_combined_amplitude(const cvec& h_u, const cmat& H_bs, const cvec& psi,
                                     const cvec& w, double xi_u, double xi_bs, int sign);

// Perturbations attaining the closed forms above.
cvec extremal_direct_perturbation(const cvec& h_u, const cvec& w, double xi_u, Sense sense);
cmat extremal_cascaded_perturbation(const cmat& H_bs, const cvec& psi, const cvec& w,
                                    double xi_bs, Sense sense);

}  // namespace masr
