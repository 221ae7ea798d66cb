#include <algorithm>
#include <cmath>

#include "masr/beamforming.hpp"

namespace masr {

SubproblemInfeasible::SubproblemInfeasible(std::string stage, std::string family,
                                           const std::string& detail)
    : std::runtime_error(stage + " subproblem infeasible (" + family + "): " + detail),
      stage_(std::move(stage)),
      family_(std::move(family)) {}

namespace {

bool is_constant(const AffineMatrix& a) { return a.terms().empty(); }

}  // namespace

Amplitude direct_amplitude(const cvec& h_u, const AffineMatrix& w) {
  if (w.rows() != h_u.size() || w.cols() != 1) throw std::invalid_argument("direct amplitude shape");
  return {w.adjoint() * cmat(h_u), w};
}

Amplitude cascaded_amplitude(const cmat& H_bs, const AffineMatrix& w, const AffineMatrix& psi) {
  if (w.rows() != H_bs.cols() || psi.rows() != H_bs.rows())
    throw std::invalid_argument("cascaded amplitude shape");
  if (is_constant(psi)) {
    const cmat p = psi.constant();
    // w^H H^H psi, beta = w kron conj(psi)
    return {w.adjoint() * cmat(H_bs.adjoint() * p), AffineMatrix::kron(w, cmat(p.conjugate()))};
  }
  if (!is_constant(w)) throw std::invalid_argument("cascaded amplitude is bilinear");
  const cmat wc = w.constant();
  return {cmat(wc.adjoint() * H_bs.adjoint()) * psi, AffineMatrix::kron(wc, psi.conjugate())};
}

Amplitude combined_amplitude(const cvec& h_u, const cmat& H_bs, const AffineMatrix& w,
                             const AffineMatrix& psi, int sign) {
  const cd s(sign >= 0 ? 1.0 : -1.0, 0.0);
  const Amplitude d = direct_amplitude(h_u, w);
  const Amplitude c = cascaded_amplitude(H_bs, w, psi);
  return {d.alpha + s * c.alpha, AffineMatrix::blocks({{d.beta}, {s * c.beta}})};
}

cvec vectorize_conj(const cmat& delta_H) {
  const Eigen::Index M = delta_H.rows(), K = delta_H.cols();
  cvec x(M * K);
  for (Eigen::Index k = 0; k < K; ++k)
    for (Eigen::Index m = 0; m < M; ++m) x(m + M * k) = std::conj(delta_H(m, k));
  return x;
}

QuadraticForm sca_minorant(const Amplitude& a, const Amplitude& expansion) {
  if (!is_constant(expansion.alpha) || !is_constant(expansion.beta))
    throw std::invalid_argument("expansion amplitude must be constant");
  if (expansion.beta.rows() != a.beta.rows()) throw std::invalid_argument("minorant shape");
  const cd an = expansion.alpha.constant()(0, 0);
  const cmat bn = expansion.beta.constant();
  QuadraticForm q;
  q.Q = bn * a.beta.adjoint() + a.beta * cmat(bn.adjoint());
  q.Q -= AffineMatrix(cmat(bn * bn.adjoint()));
  q.g = an * a.beta + bn * a.alpha;
  q.g -= AffineMatrix(cmat(an * bn));
  q.c = std::conj(an) * a.alpha + an * a.alpha.adjoint();
  q.c -= AffineMatrix(cmat::Constant(1, 1, std::norm(an)));
  return q;
}

LmiBlock robust_minorant_block(const Amplitude& a, const Amplitude& expansion,
                               const AffineMatrix& target, const std::vector<BallBlock>& balls,
                               double scale, std::string label) {
  if (!(scale > 0.0)) throw std::invalid_argument("minorant scale must be positive");
  QuadraticForm q = sca_minorant(a, expansion);
  const cd f(1.0 / scale, 0.0);
  q.Q = f * q.Q;
  q.g = f * q.g;
  q.c = f * (q.c - target);
  return embed(ball_s_procedure_lmi(q, balls), std::move(label));
}

LmiBlock interference_block(const AffineMatrix& eps, const AffineMatrix& ghat,
                            const AffineMatrix& w, double xi, double psi_norm_sq,
                            int multiplier, double amp, std::string label) {
  if (!(amp > 0.0)) throw std::invalid_argument("amplitude scale must be positive");
  const AffineMatrix g = cd(1.0 / amp, 0.0) * ghat;
  const AffineMatrix B = AffineMatrix::blocks(
      {{cd(1.0 / (amp * amp), 0.0) * eps, g.adjoint()}, {g, AffineMatrix(cmat::Ones(1, 1))}});
  const AffineMatrix U = AffineMatrix::blocks({{AffineMatrix(cmat::Zero(w.rows(), 1)), w}});
  cmat vhv = cmat::Zero(2, 2);
  vhv(0, 0) = psi_norm_sq;
  return embed(sign_definiteness_lmi(B, U, vhv, xi / amp, multiplier), std::move(label));
}

Scaling choose_scaling(const std::vector<UserLink>& links, double p_max) {
  if (!(p_max > 0.0)) throw std::invalid_argument("transmit power must be positive");
  double s = 0.0;
  for (const auto& l : links) s = std::max(s, l.channels.h_u.norm());
  return {p_max, s > 0.0 ? s : 1.0};
}

}  // namespace masr
