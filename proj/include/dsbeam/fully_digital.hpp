// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "dsbeam/channel.hpp"
#include "dsbeam/types.hpp"

namespace dsbeam {

/// Stage-1 output: per-user SVD beamformers/combiners plus the joint
/// waterfilling allocation. Beamformer column i carries power
/// stream_powers[k][i]; combiners have orthonormal columns.
struct FullyDigitalSolution {
  std::vector<CMatrix> beamformers;     // n_tx x n_streams each
  std::vector<CMatrix> combiners;       // n_rx x n_streams each
  std::vector<RVector> stream_powers;   // length n_streams each
  std::vector<double> user_powers;      // P_k = sum of stream powers
  std::vector<RVector> singular_values; // leading n_streams singular values
};

/// Waterfilling over channel gains g_i (squared singular values):
/// p_i = max(0, mu - noise/g_i) with mu set so sum(p) == total_power.
/// Solved by the exact sorted-gain active-set form, not iteratively.
template <typename Derived>
Eigen::VectorXd waterfill(const Eigen::MatrixBase<Derived>& gains, double total_power,
                          double noise_power) {
  const Eigen::Index n = gains.size();
  if (n == 0) throw NoUsableStreamError("waterfill: empty gain vector");
  if (!(total_power > 0.0)) throw ConfigError("waterfill: total_power must be positive");
  if (!(noise_power > 0.0)) throw ConfigError("waterfill: noise_power must be positive");
  for (Eigen::Index i = 0; i < n; ++i) {
    const double g = static_cast<double>(gains(i));
    if (!std::isfinite(g) || g < 0.0) throw ConfigError("waterfill: gains must be finite and nonnegative");
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return static_cast<double>(gains(a)) > static_cast<double>(gains(b));
  });
  if (!(static_cast<double>(gains(order[0])) > 0.0))
    throw NoUsableStreamError("waterfill: all gains are zero");

  // Inverse gains ascend along the sorted order; grow the active set while the
  // implied water level stays above the next stream's floor.
  double prefix = 0.0;
  double level = 0.0;
  int active = 0;
  for (Eigen::Index m = 0; m < n; ++m) {
    const double g = static_cast<double>(gains(order[m]));
    if (!(g > 0.0)) break;
    const double floor = noise_power / g;
    prefix += floor;
    const double mu = (total_power + prefix) / static_cast<double>(m + 1);
    if (mu > floor) {
      level = mu;
      active = static_cast<int>(m + 1);
    }
  }

  Eigen::VectorXd powers = Eigen::VectorXd::Zero(n);
  for (int m = 0; m < active; ++m)
    powers(order[m]) = level - noise_power / static_cast<double>(gains(order[m]));

  // Absorb the last-ulp budget residue into the strongest stream.
  double assigned = 0.0;
  for (int m = 0; m < active; ++m) assigned += powers(order[m]);
  powers(order[0]) += total_power - assigned;
  return powers;
}

/// Per-user SVD beamformers/combiners (channel H_k = U D V^H, beamformer
/// V(:,1:Ns) P^{1/2}, combiner U(:,1:Ns)) with one waterfill across all
/// K*Ns streams. Singular vectors are phase-fixed so the largest-magnitude
/// entry of each right vector is real positive, making the output independent
/// of the SVD backend.
FullyDigitalSolution svd_stage(const ChannelRealization& channels, const SystemConfig& cfg);

}  // namespace dsbeam
