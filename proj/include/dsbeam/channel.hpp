// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <string>
#include <vector>

#include "dsbeam/rng.hpp"
#include "dsbeam/types.hpp"

namespace dsbeam {

/// Unit-norm uniform-linear-array steering vector
/// (1/sqrt(N)) * [1, e^{j 2 pi d sin(theta)}, ..., e^{j 2 pi d (N-1) sin(theta)}]
/// with d the element spacing in wavelengths.
template <typename Scalar = double>
Eigen::Vector<std::complex<Scalar>, Eigen::Dynamic> array_response(Eigen::Index n_antennas,
                                                                   Scalar angle_rad,
                                                                   Scalar spacing_wavelengths) {
  using C = std::complex<Scalar>;
  Eigen::Vector<C, Eigen::Dynamic> a(n_antennas);
  const Scalar step = Scalar(2) * std::numbers::pi_v<Scalar> * spacing_wavelengths * std::sin(angle_rad);
  const Scalar norm = Scalar(1) / std::sqrt(Scalar(n_antennas));
  for (Eigen::Index n = 0; n < n_antennas; ++n)
    a(n) = std::polar(norm, step * static_cast<Scalar>(n));
  return a;
}

/// Cluster/ray geometry of one user's channel. Ray angles are the cluster
/// mean (uniform on the configured interval) plus a Laplacian offset whose
/// standard deviation is angular_spread_rad.
struct ClusterChannelParams {
  int n_clusters = 6;
  int n_rays = 15;
  double angular_spread_rad = 10.0 * std::numbers::pi / 180.0;
  double path_loss_linear = 1.0;  // rho_k
  double mean_angle_min_rad = 0.0;
  double mean_angle_max_rad = 2.0 * std::numbers::pi;

  void validate() const {
    if (n_clusters < 1 || n_rays < 1) throw ConfigError("n_clusters and n_rays must be >= 1");
    if (angular_spread_rad < 0.0) throw ConfigError("angular_spread_rad must be nonnegative");
    if (path_loss_linear < 0.0) throw ConfigError("path_loss_linear must be nonnegative");
    if (mean_angle_max_rad < mean_angle_min_rad) throw ConfigError("empty mean angle interval");
  }
};

struct Ray {
  Complex gain;    // alpha ~ CN(0,1)
  double aod_rad;  // departure angle at the BS
  double aoa_rad;  // arrival angle at the user
};

/// One draw of all K user channels plus the rays that generated them, kept so
/// a realization can be reconstructed and replayed bit-exactly.
struct ChannelRealization {
  std::vector<CMatrix> per_user;        // K matrices, each n_rx x n_tx
  std::vector<std::vector<Ray>> rays;   // cluster-major, n_clusters*n_rays per user
  std::vector<double> path_loss;        // rho_k actually applied
  std::uint64_t seed = 0;               // stream label, recorded in the export format
};

/// Draws H_k = sqrt(n_tx*n_rx*rho_k / (n_clusters*n_rays)) * sum alpha a_r(aoa) a_t(aod)^H
/// for every user. Equal streams give bit-identical realizations.
ChannelRealization generate_channel(const SystemConfig& cfg,
                                    const std::vector<ClusterChannelParams>& per_user_params,
                                    RandomStream& rng);

/// Same cluster geometry for every user.
ChannelRealization generate_channel(const SystemConfig& cfg, const ClusterChannelParams& params,
                                    RandomStream& rng);

/// Rebuilds user k's matrix from the stored rays.
CMatrix reconstruct_channel(const ChannelRealization& realization, int user,
                            double spacing_wavelengths = 0.5);

/// Path-loss draw for one user: either the unit model (rho = 1, loss absorbed
/// into the SNR definition) or log-distance with the distance uniform on
/// (0, cell_radius].
struct PathLossModel {
  enum class Kind { Unit, LogDistance };
  Kind kind = Kind::Unit;
  double exponent = 2.0;
  double reference_loss_db = 61.39;  // free space at 1 m, 28 GHz
  double cell_radius_m = 40.0;

  double sample(RandomStream& rng) const {
    if (kind == Kind::Unit) return 1.0;
    const double d = std::max(cell_radius_m * (1.0 - rng.uniform()), 1e-3);
    const double loss_db = reference_loss_db + 10.0 * exponent * std::log10(d);
    return db_to_linear(-loss_db);
  }
};

// Binary channel container: magic, seed, dimensions, then row-major complex
// entries as interleaved little-endian 64-bit floats.
void save_channel(const ChannelRealization& realization, std::ostream& out);
void save_channel(const ChannelRealization& realization, const std::string& path);
ChannelRealization load_channel(std::istream& in);
ChannelRealization load_channel(const std::string& path);

}  // namespace dsbeam
