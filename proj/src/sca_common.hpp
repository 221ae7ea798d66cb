// Helpers shared by the transmit and passive subproblem builders.
#pragma once

#include <algorithm>
#include <numbers>
#include <string>
#include <vector>

#include "masr/beamforming.hpp"

namespace masr::sca_detail {

constexpr double kLn2 = std::numbers::ln2;

// Channels and radii divided by the channel scale.
inline UserLink normalised(const UserLink& l, const Scaling& s) {
  UserLink out = l;
  out.channels.h_u /= s.channel;
  out.channels.H_bs /= s.channel;
  out.channels.H_r /= s.channel;
  out.uncertainty.xi_u /= s.channel;
  out.uncertainty.xi_bs /= s.channel;
  return out;
}

inline AffineMatrix scaled_variable(int index, double scale) {
  return AffineMatrix::variable(index, cd(scale, 0.0));
}

inline AffineMatrix constant_vector(const cvec& v) { return AffineMatrix(cmat(v)); }

inline double floor_at(double v, double lo) { return std::max(v, lo); }

// One user's rate surrogate, in bits: sum of log terms plus a linear part.
struct RateSurrogate {
  std::vector<LogTerm> logs;
  LinearForm linear;
};

// Single user: maximise the surrogate directly. Several: epigraph on the minimum.
// `shared` is added to the objective in both cases.
inline void attach_objective(ConicProblem& p, std::vector<RateSurrogate> rates, int& epigraph,
                             const LinearForm& shared) {
  if (rates.size() == 1) {
    p.objective = rates[0].linear;
    for (const auto& t : shared.terms) p.objective.add(t.first, t.second);
    p.objective.constant += shared.constant;
    p.objective_logs = rates[0].logs;
    return;
  }
  epigraph = p.add_variable("t");
  p.objective = shared;
  p.objective.add(epigraph, 1.0);
  for (std::size_t u = 0; u < rates.size(); ++u) {
    LogConstraint lc;
    lc.label = "rate epigraph user " + std::to_string(u);
    lc.logs = rates[u].logs;
    lc.linear = rates[u].linear;
    lc.linear.add(epigraph, -1.0);
    p.log_constraints.push_back(std::move(lc));
  }
}

}  // namespace masr::sca_detail
