// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

namespace dsbeam {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

struct ConfigError : std::invalid_argument { using std::invalid_argument::invalid_argument; };
struct DegenerateChannelError : std::runtime_error { using std::runtime_error::runtime_error; };
struct NoUsableStreamError : std::runtime_error { using std::runtime_error::runtime_error; };
struct InfeasibleAssignmentError : std::invalid_argument { using std::invalid_argument::invalid_argument; };
struct InvalidCostError : std::invalid_argument { using std::invalid_argument::invalid_argument; };
struct OracleTooLargeError : std::invalid_argument { using std::invalid_argument::invalid_argument; };
struct InfeasibleReallocationError : std::runtime_error { using std::runtime_error::runtime_error; };
struct InterferenceUncancellableError : std::runtime_error { using std::runtime_error::runtime_error; };
struct DegenerateProjectionError : std::runtime_error { using std::runtime_error::runtime_error; };
struct InvalidNoiseError : std::invalid_argument { using std::invalid_argument::invalid_argument; };
struct IoError : std::runtime_error { using std::runtime_error::runtime_error; };
struct CsvParseError : std::runtime_error { using std::runtime_error::runtime_error; };

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_milliwatt(double dbm) { return std::pow(10.0, dbm / 10.0); }

/// Dimensional and physical parameters shared by all stages. Power bookkeeping
/// is linear milliwatt throughout; exactly one of noise_power_dbm /
/// target_snr_db must be set, and in the latter case the noise floor is
/// P / SNR with everything converted to linear scale.
struct SystemConfig {
  int n_tx = 64;        // base-station antennas
  int n_rf = 16;        // transmit RF chains
  int n_rx = 4;         // antennas per user
  int n_users = 6;
  int n_streams = 2;    // data streams per user
  double total_power_dbm = 30.0;
  std::optional<double> noise_power_dbm{};
  std::optional<double> target_snr_db{10.0};
  double carrier_hz = 28e9;
  double antenna_spacing_wavelengths = 0.5;

  double total_power() const { return dbm_to_milliwatt(total_power_dbm); }

  double noise_power() const {
    if (noise_power_dbm) return dbm_to_milliwatt(*noise_power_dbm);
    return total_power() / db_to_linear(*target_snr_db);
  }

  void validate() const {
    if (n_tx < 1 || n_rf < 1 || n_rx < 1 || n_users < 1 || n_streams < 1)
      throw ConfigError("all dimensional fields must be >= 1");
    if (n_users * n_streams > n_rf)
      throw ConfigError("n_users * n_streams = " + std::to_string(n_users * n_streams) +
                        " exceeds n_rf = " + std::to_string(n_rf));
    if (n_rf > n_tx)
      throw ConfigError("n_rf = " + std::to_string(n_rf) + " exceeds n_tx = " + std::to_string(n_tx));
    if (n_streams > n_rx)
      throw ConfigError("n_streams = " + std::to_string(n_streams) + " exceeds n_rx = " + std::to_string(n_rx));
    if (noise_power_dbm.has_value() == target_snr_db.has_value())
      throw ConfigError("exactly one of noise_power_dbm / target_snr_db must be set");
    if (carrier_hz <= 0.0) throw ConfigError("carrier_hz must be positive");
    if (antenna_spacing_wavelengths <= 0.0) throw ConfigError("antenna_spacing_wavelengths must be positive");
  }
};

}  // namespace dsbeam
