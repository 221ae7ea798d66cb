// Far-field field-response channel model for the MA transmitter, the RIS and
// the primary users.
#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace masr {

using cd = std::complex<double>;
using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;
using Rng = std::mt19937_64;

struct Position3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Position3 operator+(const Position3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Position3 operator-(const Position3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  double norm() const;
  bool finite() const;
};

struct MovementRegion {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  double z_min = 0.0, z_max = 0.0;

  // Square of side `side` in the z = 0 plane, centred on the local origin.
  static MovementRegion square(double side);

  bool valid() const;
  bool contains(const Position3& p, double tol = 0.0) const;
  Position3 clamp(const Position3& p) const;
  double lower(int axis) const;
  double upper(int axis) const;
  double side(int axis) const { return upper(axis) - lower(axis); }
};

// Per-path angles of one link, radians in [0, pi].
struct PathAngles {
  std::vector<double> transmit_azimuth;
  std::vector<double> transmit_elevation;
  std::vector<double> receive_azimuth;
  std::vector<double> receive_elevation;

  std::size_t paths() const { return transmit_azimuth.size(); }
  bool consistent() const;
};

// Diagonal of a path-response matrix.
struct PathResponse {
  cvec gains;
  std::string source;
  std::string destination;
};

struct Link {
  PathAngles angles;
  PathResponse response;
};

// H_r stores the M x K matrix written H_r^H in the system model, h_u and h_s
// are the column vectors whose Hermitian transposes are the row channels.
struct ChannelSet {
  cmat H_r;
  cvec h_u;
  cvec h_s;
  cmat H_bs;

  Eigen::Index antennas() const { return H_r.cols(); }
  Eigen::Index elements() const { return H_r.rows(); }
};

struct NodeLayout {
  Position3 pt_center{3.0, 0.0, 0.0};
  Position3 ris_center{0.0, 30.0, 40.0};
  std::vector<Position3> pu_centers{{0.0, 60.0, 0.0}};
};

struct PropagationConfig {
  double wavelength = 0.1;
  int paths = 9;
  double path_gain_linear = 0.1;  // v-hat
  double pathloss_exponent = 1.3;
  int ris_elements = 8;
  NodeLayout layout;
};

// One random realisation of every link. Receiver-side coordinates are local
// offsets from each node's reference point.
struct ChannelGeometry {
  double wavelength = 0.1;
  std::vector<Position3> ris_elements;
  Position3 pu_antenna;
  Link pt_ris;
  std::vector<Link> pt_pu;
  std::vector<Link> ris_pu;

  std::size_t users() const { return pt_pu.size(); }
};

double propagation_difference(const Position3& p, double elevation, double azimuth);

cvec field_response_vector(const Position3& p, std::span<const double> elevation,
                           std::span<const double> azimuth, double wavelength);

// Columns are field_response_vector of each position (L x N).
cmat field_response_matrix(std::span<const Position3> positions, std::span<const double> elevation,
                           std::span<const double> azimuth, double wavelength);

double pathloss_variance(double distance, double vhat, double nu, int paths);

double dbm_to_watt(double dbm);
double db_to_linear(double db);
double linear_to_db(double x);

// Uniform planar layout with half-wavelength pitch in the local y-z plane.
std::vector<Position3> ris_element_layout(int elements, double wavelength);

// Deterministic initial MA placement: centres of an n x n grid over the region.
std::vector<Position3> grid_positions(int antennas, const MovementRegion& region, double d_min);

ChannelGeometry draw_channel_geometry(const PropagationConfig& cfg, Rng& rng);

ChannelSet build_channels(std::span<const Position3> ma_positions, const ChannelGeometry& geom,
                          std::size_t user = 0);

// Caches every position-independent factor so that channels can be rebuilt
// cheaply for many candidate MA placements.
class ChannelSynthesizer {
 public:
  explicit ChannelSynthesizer(const ChannelGeometry& geom);

  std::size_t users() const { return users_.size(); }
  ChannelSet synthesize(std::span<const Position3> ma_positions, std::size_t user) const;
  std::vector<ChannelSet> synthesize_all(std::span<const Position3> ma_positions) const;

 private:
  struct UserCache {
    cvec direct_row;  // f_u^H Sigma_u (1 x L, stored as L-vector)
    PathAngles direct_angles;
    cvec h_s;
  };

  cmat ris_from_pt(std::span<const Position3> ma_positions) const;

  double wavelength_;
  PathAngles pt_ris_angles_;
  cmat ris_rows_;  // F_r^H Sigma_r (M x L)
  std::vector<UserCache> users_;
};

}  // namespace masr
