// SPDX-License-Identifier: Apache-2.0
#include "dsbeam/metrics.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace dsbeam {

namespace {

void check_inputs(const std::vector<CMatrix>& combiners, const std::vector<CMatrix>& channels,
                  const std::vector<CMatrix>& beamformers, double noise_power) {
  if (!(noise_power > 0.0)) throw InvalidNoiseError("noise power must be positive");
  if (combiners.size() != channels.size() || beamformers.size() != channels.size())
    throw ConfigError("per-user lists disagree on K");
}

// log2 det(I + C^{-1} E E^H) through C = L L^H and a second Cholesky of
// I + (L^{-1}E)(L^{-1}E)^H.
double se_from_cov(const CMatrix& cov, const CMatrix& effective_desired) {
  Eigen::LLT<CMatrix> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("interference-plus-noise covariance is not positive definite");
  CMatrix whitened = effective_desired;
  llt.matrixL().solveInPlace(whitened);
  const CMatrix inner =
      CMatrix::Identity(cov.rows(), cov.cols()) + whitened * whitened.adjoint();
  Eigen::LLT<CMatrix> llt2(inner);
  if (llt2.info() != Eigen::Success)
    throw std::runtime_error("determinant evaluation failed");
  double log2det = 0.0;
  const CMatrix l2 = llt2.matrixL();
  for (Eigen::Index i = 0; i < l2.rows(); ++i) log2det += 2.0 * std::log2(l2(i, i).real());
  return std::max(0.0, log2det);
}

}  // namespace

CMatrix interference_plus_noise_cov(int user, const std::vector<CMatrix>& combiners,
                                    const std::vector<CMatrix>& channels,
                                    const std::vector<CMatrix>& beamformers, double noise_power) {
  check_inputs(combiners, channels, beamformers, noise_power);
  const CMatrix& w = combiners[user];
  const CMatrix& h = channels[user];
  const CMatrix wh = w.adjoint() * h;
  CMatrix cov = noise_power * (w.adjoint() * w);
  for (std::size_t i = 0; i < beamformers.size(); ++i) {
    if (static_cast<int>(i) == user) continue;
    const CMatrix e = wh * beamformers[i];
    cov.noalias() += e * e.adjoint();
  }
  return cov;
}

double spectral_efficiency(int user, const std::vector<CMatrix>& combiners,
                           const std::vector<CMatrix>& channels,
                           const std::vector<CMatrix>& beamformers, double noise_power) {
  const CMatrix cov =
      interference_plus_noise_cov(user, combiners, channels, beamformers, noise_power);
  const CMatrix desired = combiners[user].adjoint() * channels[user] * beamformers[user];
  return se_from_cov(cov, desired);
}

RateReport evaluate(const std::vector<CMatrix>& channels, const std::vector<CMatrix>& combiners,
                    const std::vector<CMatrix>& beamformers, double noise_power,
                    bool include_interference) {
  check_inputs(combiners, channels, beamformers, noise_power);
  const int k_users = static_cast<int>(channels.size());

  RateReport report;
  report.per_user_se.resize(k_users);
  report.iui_power.resize(k_users);
  for (int k = 0; k < k_users; ++k) {
    const CMatrix wh = combiners[k].adjoint() * channels[k];
    double iui = 0.0;
    for (int i = 0; i < k_users; ++i)
      if (i != k) iui += (wh * beamformers[i]).squaredNorm();
    report.iui_power(k) = iui;

    const CMatrix cov =
        include_interference
            ? interference_plus_noise_cov(k, combiners, channels, beamformers, noise_power)
            : CMatrix(noise_power * (combiners[k].adjoint() * combiners[k]));
    report.per_user_se(k) = se_from_cov(cov, wh * beamformers[k]);
  }
  report.sum_se = report.per_user_se.sum();
  report.mean_se = report.sum_se / k_users;
  return report;
}

}  // namespace dsbeam
