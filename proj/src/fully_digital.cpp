// SPDX-License-Identifier: Apache-2.0
#include "dsbeam/fully_digital.hpp"

#include <Eigen/SVD>

namespace dsbeam {

namespace {
constexpr double kRankTol = 1e-12;  // relative singular-value cutoff
}

FullyDigitalSolution svd_stage(const ChannelRealization& channels, const SystemConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(channels.per_user.size()) != cfg.n_users)
    throw ConfigError("channel realization does not match n_users");

  const int k_users = cfg.n_users;
  const int n_s = cfg.n_streams;

  FullyDigitalSolution sol;
  sol.beamformers.resize(k_users);
  sol.combiners.resize(k_users);
  sol.stream_powers.resize(k_users);
  sol.user_powers.resize(k_users);
  sol.singular_values.resize(k_users);

  std::vector<CMatrix> right(k_users);
  RVector gains(k_users * n_s);

  for (int k = 0; k < k_users; ++k) {
    const CMatrix& h = channels.per_user[k];
    if (h.rows() != cfg.n_rx || h.cols() != cfg.n_tx)
      throw ConfigError("channel matrix for user " + std::to_string(k) + " has wrong dimensions");

    Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& sv = svd.singularValues();
    if (!(sv(0) > 0.0) || sv(n_s - 1) <= kRankTol * sv(0))
      throw DegenerateChannelError("channel of user " + std::to_string(k) +
                                   " has rank below n_streams");

    CMatrix u = svd.matrixU().leftCols(n_s);
    CMatrix v = svd.matrixV().leftCols(n_s);
    // Rotate each singular pair so the largest-magnitude entry of the right
    // vector is real positive; H = sum sigma_i u_i v_i^H is preserved.
    for (int i = 0; i < n_s; ++i) {
      Eigen::Index imax;
      v.col(i).cwiseAbs().maxCoeff(&imax);
      const Complex pivot = v(imax, i);
      if (std::abs(pivot) > 0.0) {
        const Complex rot = std::conj(pivot) / std::abs(pivot);
        v.col(i) *= rot;
        u.col(i) *= rot;
      }
    }

    sol.combiners[k] = std::move(u);
    right[k] = std::move(v);
    sol.singular_values[k] = sv.head(n_s);
    for (int i = 0; i < n_s; ++i) gains(k * n_s + i) = sv(i) * sv(i);
  }

  const RVector powers = waterfill(gains, cfg.total_power(), cfg.noise_power());

  for (int k = 0; k < k_users; ++k) {
    const RVector p = powers.segment(k * n_s, n_s);
    sol.stream_powers[k] = p;
    sol.user_powers[k] = p.sum();
    sol.beamformers[k] = right[k] * p.cwiseSqrt().asDiagonal();
  }
  return sol;
}

}  // namespace dsbeam
