#include "masr/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace masr {

namespace {

cmat gaussian_direction(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  cmat out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = n(rng);
      const double im = n(rng);
      out(i, j) = cd(re, im);
    }
  const double nrm = out.norm();
  if (nrm > 0.0) out /= nrm;
  return out;
}

double ball_radius(double xi, Eigen::Index real_dim, bool boundary, Rng& rng) {
  if (boundary) return xi;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return xi * std::pow(u(rng), 1.0 / static_cast<double>(real_dim));
}

cd unit_phase(cd z) { return std::abs(z) > 0.0 ? z / std::abs(z) : cd(1.0, 0.0); }

}  // namespace

UncertaintyModel UncertaintyModel::derive(double g_bs, double g_u, const ChannelSet& channels) {
  if (g_bs < 0.0 || g_u < 0.0) throw std::invalid_argument("uncertainty ratios must be nonnegative");
  UncertaintyModel m;
  m.g_bs = g_bs;
  m.g_u = g_u;
  m.xi_bs = g_bs * channels.H_bs.norm();
  m.xi_u = g_u * channels.h_u.norm();
  return m;
}

UncertaintyModel UncertaintyModel::rederive(const ChannelSet& channels) const {
  return derive(g_bs, g_u, channels);
}

Perturbation sample_perturbation(const UncertaintyModel& model, Eigen::Index elements,
                                 Eigen::Index antennas, Rng& rng, const SamplingOptions& opts) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Perturbation p;
  const bool edge_bs = u(rng) < opts.boundary_fraction;
  const bool edge_u = u(rng) < opts.boundary_fraction;
  p.H_bs = gaussian_direction(elements, antennas, rng) *
           ball_radius(model.xi_bs, 2 * elements * antennas, edge_bs, rng);
  p.h_u = gaussian_direction(antennas, 1, rng).col(0) *
          ball_radius(model.xi_u, 2 * antennas, edge_u, rng);
  return p;
}

double worst_case_direct_amplitude(const cvec& h_u, const cvec& w, double xi_u, Sense sense) {
  const double nominal = std::abs(h_u.dot(w));
  const double spread = xi_u * w.norm();
  return sense == Sense::max ? nominal + spread : std::max(nominal - spread, 0.0);
}

double worst_case_cascaded_amplitude(const cmat& H_bs, const cvec& psi, const cvec& w,
                                     double xi_bs, Sense sense) {
  return worst_case_cascaded_amplitude(H_bs, psi, w, xi_bs, sense, psi.norm());
}

double worst_case_cascaded_amplitude(const cmat& H_bs, const cvec& psi, const cvec& w,
                                     double xi_bs, Sense sense, double psi_norm) {
  const double nominal = std::abs(psi.dot(H_bs * w));
  const double spread = xi_bs * psi_norm * w.norm();
  return sense == Sense::max ? nominal + spread : std::max(nominal - spread, 0.0);
}

double worst_case_combined_amplitude(const cvec& h_u, const cmat& H_bs, const cvec& psi,
                                     const cvec& w, double xi_u, double xi_bs, int sign) {
  const cd nominal = h_u.dot(w) + static_cast<double>(sign) * psi.dot(H_bs * w);
  const double wn = w.norm();
  return std::max(std::abs(nominal) - xi_u * wn - xi_bs * psi.norm() * wn, 0.0);
}

cvec extremal_direct_perturbation(const cvec& h_u, const cvec& w, double xi_u, Sense sense) {
  const double wn = w.norm();
  if (wn == 0.0) return cvec::Zero(h_u.size());
  const cd a = h_u.dot(w);
  double scale = xi_u;
  cd dir = unit_phase(a);
  if (sense == Sense::min) {
    scale = std::min(xi_u, std::abs(a) / wn);
    dir = -dir;
  }
  // (h + d)^H w = a + conj(c) scale ||w|| for d = c scale w / ||w||
  return std::conj(dir) * scale * w / wn;
}

cmat extremal_cascaded_perturbation(const cmat& H_bs, const cvec& psi, const cvec& w,
                                    double xi_bs, Sense sense) {
  const double scale_den = psi.norm() * w.norm();
  if (scale_den == 0.0) return cmat::Zero(H_bs.rows(), H_bs.cols());
  const cd b = psi.dot(H_bs * w);
  double scale = xi_bs;
  cd dir = unit_phase(b);
  if (sense == Sense::min) {
    scale = std::min(xi_bs, std::abs(b) / scale_den);
    dir = -dir;
  }
  return dir * scale * (psi * w.adjoint()) / scale_den;
}

}  // namespace masr
