// SCA subproblems for transmit and passive beamforming, PSR and CSR.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "masr/conic.hpp"
#include "masr/rates.hpp"
#include "masr/solver.hpp"

namespace masr {

class SubproblemInfeasible : public std::runtime_error {
 public:
  SubproblemInfeasible(std::string stage, std::string family, const std::string& detail);
  const std::string& stage() const { return stage_; }
  const std::string& family() const { return family_; }

 private:
  std::string stage_;
  std::string family_;
};

// Channels and radii seen by one primary user.
struct UserLink {
  ChannelSet channels;
  UncertaintyModel uncertainty;
};

// alpha + beta^H x, with alpha (1x1) and beta (n x 1) affine in the decisions.
// The uncertainty vector is x = Delta h_u (direct), vec(conj(Delta H_bs))
// (cascaded, index m + M k) or their stack (combined).
struct Amplitude {
  AffineMatrix alpha;
  AffineMatrix beta;
};

Amplitude direct_amplitude(const cvec& h_u, const AffineMatrix& w);
// At most one of w, psi may depend on decisions.
Amplitude cascaded_amplitude(const cmat& H_bs, const AffineMatrix& w, const AffineMatrix& psi);
Amplitude combined_amplitude(const cvec& h_u, const cmat& H_bs, const AffineMatrix& w,
                             const AffineMatrix& psi, int sign);

cvec vectorize_conj(const cmat& delta_H);

// Tangent minorant of |alpha + beta^H x|^2 at a constant expansion amplitude:
// |v|^2 >= 2 Re(conj(v_n) v) - |v_n|^2.
QuadraticForm sca_minorant(const Amplitude& a, const Amplitude& expansion);

// Robust minorant >= target over the balls, the whole form divided by `scale`.
LmiBlock robust_minorant_block(const Amplitude& a, const Amplitude& expansion,
                               const AffineMatrix& target, const std::vector<BallBlock>& balls,
                               double scale, std::string label);

// eps >= |ghat + w^H X psi|^2 for all ||X|| <= xi, ||psi||^2 <= psi_norm_sq,
// with the 2x2 block rescaled by `amp` (eps ~ amp^2).
LmiBlock interference_block(const AffineMatrix& eps, const AffineMatrix& ghat,
                            const AffineMatrix& w, double xi, double psi_norm_sq,
                            int multiplier, double amp, std::string label);

// Normalisation: w = sqrt(power) w~, channels = channel * channels~.
struct Scaling {
  double power = 1.0;
  double channel = 1.0;
  double unit() const { return power * channel * channel; }
};

Scaling choose_scaling(const std::vector<UserLink>& links, double p_max);

struct TransmitProblem {
  ConicProblem problem;
  Scaling scaling;
  std::vector<int> w_re, w_im;
  std::vector<int> eps_u, eps_h;
  int epigraph = -1;

  cvec beamformer(const Eigen::VectorXd& z) const;
};

struct PassiveProblem {
  ConicProblem problem;
  Scaling scaling;
  int levels = 8;
  std::vector<int> psi_re, psi_im;
  std::vector<int> selectors;  // index i + levels * m
  std::vector<int> eps_u, eps_h;
  int epigraph = -1;

  cvec phases(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd selection(const Eigen::VectorXd& z) const;  // levels x M
};

// PSR interference expansion value (|psi^H H w| + xi sqrt(M) ||w||)^2.
double psr_interference_bound(const UserLink& link, const cvec& w, const cvec& psi);

TransmitProblem build_psr_transmit_subproblem(const std::vector<UserLink>& links,
                                              const ScenarioConfig& sc, double p_max,
                                              const cvec& psi, const cvec& w_n);
TransmitProblem build_csr_transmit_subproblem(const std::vector<UserLink>& links,
                                              const ScenarioConfig& sc, double p_max,
                                              const cvec& psi, const cvec& w_n);

struct PassiveExpansion {
  Eigen::MatrixXd selectors;  // levels x M, c^(r)
  cvec psi;                   // E c^(r)
};

PassiveExpansion expansion_from_selectors(const Eigen::MatrixXd& c, int levels);

// PSR: the direct-link term is fixed at its worst case for the given w.
PassiveProblem build_psr_passive_subproblem(const std::vector<UserLink>& links,
                                            const ScenarioConfig& sc, double p_max,
                                            const cvec& w, const PassiveExpansion& at,
                                            double penalty);
PassiveProblem build_csr_passive_subproblem(const std::vector<UserLink>& links,
                                            const ScenarioConfig& sc, double p_max,
                                            const cvec& w, const PassiveExpansion& at,
                                            double penalty);

struct ScaOptions {
  int max_iterations = 30;
  double relative_tolerance = 1e-3;
  SolverOptions solver;
};

struct TransmitResult {
  cvec w;
  std::vector<double> trace;  // robust objective per iterate, starting at w0
  int iterations = 0;
  int solver_failures = 0;
};

// Robust objective of the scenario, minimum over users.
double robust_objective(const ScenarioConfig& sc, const std::vector<UserLink>& links,
                        const cvec& w, const cvec& psi);
bool robust_secondary_ok(const ScenarioConfig& sc, const std::vector<UserLink>& links,
                         const cvec& w, const cvec& psi);

TransmitResult sca_transmit(const std::vector<UserLink>& links, const ScenarioConfig& sc,
                            double p_max, const cvec& psi, const cvec& w0,
                            const ScaOptions& opts = {});

struct PassiveOptions {
  int max_iterations = 20;
  double relative_tolerance = 1e-4;
  double penalty = 1.0;       // eta, bits per unit of sum c (1 - c)
  double start_blend = 0.5;   // c0 = (1 - blend) onehot + blend / levels
  SolverOptions solver;
};

struct PassiveResult {
  std::vector<int> indices;
  cvec psi;
  Eigen::MatrixXd selectors;      // last relaxed iterate
  std::vector<double> trace;      // relaxed penalised objective
  std::vector<int> recovered;     // indices straight after projection
  int iterations = 0;
  int solver_failures = 0;
  bool kept_incumbent = false;
};

// One pass of single-element moves on the true robust objective, keeping the
// secondary constraint satisfied.
std::vector<int> local_search(const std::vector<UserLink>& links, const ScenarioConfig& sc,
                              const cvec& w, std::vector<int> indices, int levels);

// Largest selector per element, ties to the smallest index.
std::vector<int> recover_indices(const Eigen::MatrixXd& selectors);

PassiveResult sca_passive(const std::vector<UserLink>& links, const ScenarioConfig& sc,
                          double p_max, const cvec& w, const std::vector<int>& incumbent,
                          int levels, const PassiveOptions& opts = {});

// Relaxed passive-step objective with the binary penalty.
double passive_relaxed_objective(const ScenarioConfig& sc, const std::vector<UserLink>& links,
                                 const cvec& w, const PassiveExpansion& at, double penalty);

}  // namespace masr
