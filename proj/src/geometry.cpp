#include "masr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace masr {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> draw_angles(std::size_t n, Rng& rng) {
  // Sampled on [-pi/2, pi/2] and shifted by pi/2 into the model's [0, pi].
  std::uniform_real_distribution<double> u(-kPi / 2.0, kPi / 2.0);
  std::vector<double> out(n);
  for (auto& a : out) a = u(rng) + kPi / 2.0;
  return out;
}

Link draw_link(int paths, double variance, const char* src, const char* dst, Rng& rng) {
  Link link;
  const auto n = static_cast<std::size_t>(paths);
  link.angles.transmit_azimuth = draw_angles(n, rng);
  link.angles.transmit_elevation = draw_angles(n, rng);
  link.angles.receive_azimuth = draw_angles(n, rng);
  link.angles.receive_elevation = draw_angles(n, rng);
  std::normal_distribution<double> g(0.0, std::sqrt(variance / 2.0));
  link.response.gains.resize(paths);
  for (int l = 0; l < paths; ++l) {
    const double re = g(rng);
    const double im = g(rng);
    link.response.gains(l) = cd(re, im);
  }
  link.response.source = src;
  link.response.destination = dst;
  return link;
}

void check_link(const Link& link) {
  if (!link.angles.consistent() ||
      static_cast<std::size_t>(link.response.gains.size()) != link.angles.paths())
    throw std::invalid_argument("path counts disagree with the path-response matrix");
}

cvec receive_vector(const Position3& p, const Link& link, double wavelength) {
  return field_response_vector(p, link.angles.receive_elevation, link.angles.receive_azimuth,
                               wavelength);
}

}  // namespace

double Position3::norm() const { return std::sqrt(x * x + y * y + z * z); }

bool Position3::finite() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
}

MovementRegion MovementRegion::square(double side) {
  return {-side / 2.0, side / 2.0, -side / 2.0, side / 2.0, 0.0, 0.0};
}

bool MovementRegion::valid() const {
  return x_min <= x_max && y_min <= y_max && z_min <= z_max;
}

bool MovementRegion::contains(const Position3& p, double tol) const {
  return p.x >= x_min - tol && p.x <= x_max + tol && p.y >= y_min - tol && p.y <= y_max + tol &&
         p.z >= z_min - tol && p.z <= z_max + tol;
}

Position3 MovementRegion::clamp(const Position3& p) const {
  return {std::clamp(p.x, x_min, x_max), std::clamp(p.y, y_min, y_max),
          std::clamp(p.z, z_min, z_max)};
}

double MovementRegion::lower(int axis) const {
  return axis == 0 ? x_min : axis == 1 ? y_min : z_min;
}

double MovementRegion::upper(int axis) const {
  return axis == 0 ? x_max : axis == 1 ? y_max : z_max;
}

bool PathAngles::consistent() const {
  const auto n = transmit_azimuth.size();
  return transmit_elevation.size() == n && receive_azimuth.size() == n &&
         receive_elevation.size() == n;
}

double propagation_difference(const Position3& p, double elevation, double azimuth) {
  const double ce = std::cos(elevation);
  return p.x * ce * std::cos(azimuth) + p.y * ce * std::sin(azimuth) + p.z * std::sin(elevation);
}

cvec field_response_vector(const Position3& p, std::span<const double> elevation,
                           std::span<const double> azimuth, double wavelength) {
  if (elevation.size() != azimuth.size())
    throw std::invalid_argument("elevation and azimuth lists differ in length");
  if (!(wavelength > 0.0)) throw std::invalid_argument("wavelength must be positive");
  const double k = 2.0 * kPi / wavelength;
  cvec out(static_cast<Eigen::Index>(elevation.size()));
  for (std::size_t l = 0; l < elevation.size(); ++l)
    out(static_cast<Eigen::Index>(l)) =
        std::polar(1.0, k * propagation_difference(p, elevation[l], azimuth[l]));
  return out;
}

cmat field_response_matrix(std::span<const Position3> positions, std::span<const double> elevation,
                           std::span<const double> azimuth, double wavelength) {
  cmat out(static_cast<Eigen::Index>(elevation.size()),
           static_cast<Eigen::Index>(positions.size()));
  for (std::size_t i = 0; i < positions.size(); ++i)
    out.col(static_cast<Eigen::Index>(i)) =
        field_response_vector(positions[i], elevation, azimuth, wavelength);
  return out;
}

double pathloss_variance(double distance, double vhat, double nu, int paths) {
  if (!(distance > 0.0)) throw std::invalid_argument("distance must be positive");
  if (paths < 1) throw std::invalid_argument("path count must be positive");
  return vhat * std::pow(distance, -nu) / paths;
}

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double x) { return 10.0 * std::log10(x); }

std::vector<Position3> ris_element_layout(int elements, double wavelength) {
  int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(elements))));
  while (elements % cols != 0) ++cols;
  const int rows = elements / cols;
  const double pitch = wavelength / 2.0;
  std::vector<Position3> out;
  out.reserve(static_cast<std::size_t>(elements));
  for (int m = 0; m < elements; ++m) {
    const int r = m / cols;
    const int c = m % cols;
    out.push_back({0.0, (c - (cols - 1) / 2.0) * pitch, (r - (rows - 1) / 2.0) * pitch});
  }
  return out;
}

std::vector<Position3> grid_positions(int antennas, const MovementRegion& region, double d_min) {
  if (antennas < 1) throw std::invalid_argument("need at least one antenna");
  const int n = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(antennas))));
  const double dx = region.side(0) / n;
  const double dy = region.side(1) / n;
  if (antennas > 1 && std::min(dx, dy) < d_min)
    throw std::invalid_argument("region too small for the minimum antenna spacing");
  std::vector<Position3> out;
  for (int k = 0; k < antennas; ++k) {
    const int i = k % n;
    const int j = k / n;
    out.push_back({region.x_min + (i + 0.5) * dx, region.y_min + (j + 0.5) * dy,
                   0.5 * (region.z_min + region.z_max)});
  }
  return out;
}

ChannelGeometry draw_channel_geometry(const PropagationConfig& cfg, Rng& rng) {
  const auto& lay = cfg.layout;
  if (lay.pu_centers.empty()) throw std::invalid_argument("at least one primary user required");
  auto var = [&](const Position3& a, const Position3& b) {
    return pathloss_variance((a - b).norm(), cfg.path_gain_linear, cfg.pathloss_exponent,
                             cfg.paths);
  };
  ChannelGeometry g;
  g.wavelength = cfg.wavelength;
  g.ris_elements = ris_element_layout(cfg.ris_elements, cfg.wavelength);
  g.pt_ris = draw_link(cfg.paths, var(lay.pt_center, lay.ris_center), "PT", "RIS", rng);
  for (const auto& pu : lay.pu_centers) {
    g.pt_pu.push_back(draw_link(cfg.paths, var(lay.pt_center, pu), "PT", "PU", rng));
    g.ris_pu.push_back(draw_link(cfg.paths, var(lay.ris_center, pu), "RIS", "PU", rng));
  }
  return g;
}

ChannelSet build_channels(std::span<const Position3> ma_positions, const ChannelGeometry& geom,
                          std::size_t user) {
  if (user >= geom.users()) throw std::invalid_argument("primary user index out of range");
  return ChannelSynthesizer(geom).synthesize(ma_positions, user);
}

ChannelSynthesizer::ChannelSynthesizer(const ChannelGeometry& geom)
    : wavelength_(geom.wavelength), pt_ris_angles_(geom.pt_ris.angles) {
  check_link(geom.pt_ris);
  if (geom.pt_pu.size() != geom.ris_pu.size())
    throw std::invalid_argument("direct and reflected link lists differ in length");
  const cmat F_r = field_response_matrix(geom.ris_elements, geom.pt_ris.angles.receive_elevation,
                                         geom.pt_ris.angles.receive_azimuth, wavelength_);
  ris_rows_ = F_r.adjoint() * geom.pt_ris.response.gains.asDiagonal();
  for (std::size_t u = 0; u < geom.pt_pu.size(); ++u) {
    const Link& direct = geom.pt_pu[u];
    const Link& reflected = geom.ris_pu[u];
    check_link(direct);
    check_link(reflected);
    UserCache c;
    c.direct_row = receive_vector(geom.pu_antenna, direct, wavelength_).conjugate().cwiseProduct(
        direct.response.gains);
    c.direct_angles = direct.angles;
    const cmat G_s =
        field_response_matrix(geom.ris_elements, reflected.angles.transmit_elevation,
                              reflected.angles.transmit_azimuth, wavelength_);
    const cvec f_s = receive_vector(geom.pu_antenna, reflected, wavelength_);
    // h_s^H = f_s^H Sigma_s G_s
    c.h_s = (f_s.adjoint() * reflected.response.gains.asDiagonal() * G_s).adjoint();
    users_.push_back(std::move(c));
  }
}

cmat ChannelSynthesizer::ris_from_pt(std::span<const Position3> ma_positions) const {
  const cmat G_r = field_response_matrix(ma_positions, pt_ris_angles_.transmit_elevation,
                                         pt_ris_angles_.transmit_azimuth, wavelength_);
  return ris_rows_ * G_r;
}

ChannelSet ChannelSynthesizer::synthesize(std::span<const Position3> ma_positions,
                                          std::size_t user) const {
  ChannelSet out;
  out.H_r = ris_from_pt(ma_positions);
  const UserCache& c = users_.at(user);
  const cmat G_u = field_response_matrix(ma_positions, c.direct_angles.transmit_elevation,
                                         c.direct_angles.transmit_azimuth, wavelength_);
  out.h_u = (c.direct_row.transpose() * G_u).adjoint();
  out.h_s = c.h_s;
  out.H_bs = c.h_s.conjugate().asDiagonal() * out.H_r;
  return out;
}

std::vector<ChannelSet> ChannelSynthesizer::synthesize_all(
    std::span<const Position3> ma_positions) const {
  std::vector<ChannelSet> out;
  out.reserve(users_.size());
  const cmat H_r = ris_from_pt(ma_positions);
  for (std::size_t u = 0; u < users_.size(); ++u) {
    const UserCache& c = users_[u];
    ChannelSet s;
    s.H_r = H_r;
    const cmat G_u = field_response_matrix(ma_positions, c.direct_angles.transmit_elevation,
                                           c.direct_angles.transmit_azimuth, wavelength_);
    s.h_u = (c.direct_row.transpose() * G_u).adjoint();
    s.h_s = c.h_s;
    s.H_bs = c.h_s.conjugate().asDiagonal() * H_r;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace masr
