// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "dsbeam/types.hpp"

namespace dsbeam {

/// Spectral-efficiency report over all users, bits/s/Hz.
struct RateReport {
  RVector per_user_se;  // R_k
  double mean_se = 0.0; // (1/K) sum R_k
  double sum_se = 0.0;
  RVector iui_power;    // sum_{i != k} ||W_k^H H_k F_i||_F^2, diagnostic
};

/// C_k = W_k^H H_k (sum_{i != k} F_i F_i^H) H_k^H W_k + noise * W_k^H W_k.
/// beamformers holds the overall per-user transmit matrices (n_tx x n_streams).
CMatrix interference_plus_noise_cov(int user, const std::vector<CMatrix>& combiners,
                                    const std::vector<CMatrix>& channels,
                                    const std::vector<CMatrix>& beamformers, double noise_power);

/// R_k = log2 det(I + C_k^{-1} W^H H F_k F_k^H H^H W), evaluated through the
/// Cholesky factor of C_k for stability.
double spectral_efficiency(int user, const std::vector<CMatrix>& combiners,
                           const std::vector<CMatrix>& channels,
                           const std::vector<CMatrix>& beamformers, double noise_power);

/// Full report. include_interference=false drops the interference term from
/// every covariance (the convention for the fully-digital reference); the
/// iui_power diagnostic is always the actually generated interference.
RateReport evaluate(const std::vector<CMatrix>& channels, const std::vector<CMatrix>& combiners,
                    const std::vector<CMatrix>& beamformers, double noise_power,
                    bool include_interference = true);

}  // namespace dsbeam
