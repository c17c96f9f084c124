// SPDX-License-Identifier: Apache-2.0
#include "dsbeam/nsp.hpp"

#include <Eigen/Cholesky>

namespace dsbeam {

EquivalentChannelStack build_equivalent_stack(const std::vector<CMatrix>& channels,
                                              const std::vector<CMatrix>& combiners,
                                              const CMatrix& analog) {
  const int k_users = static_cast<int>(channels.size());
  if (static_cast<int>(combiners.size()) != k_users)
    throw ConfigError("need one combiner per user");

  EquivalentChannelStack stack;
  stack.per_user_equivalent.resize(k_users);
  for (int k = 0; k < k_users; ++k)
    stack.per_user_equivalent[k] = combiners[k].adjoint() * channels[k] * analog;

  const auto n_streams = stack.per_user_equivalent[0].rows();
  const auto n_rf = analog.cols();
  stack.stacked_excluding.resize(k_users);
  for (int k = 0; k < k_users; ++k) {
    CMatrix stacked((k_users - 1) * n_streams, n_rf);
    Eigen::Index row = 0;
    for (int i = 0; i < k_users; ++i) {
      if (i == k) continue;
      stacked.middleRows(row, n_streams) = stack.per_user_equivalent[i];
      row += n_streams;
    }
    stack.stacked_excluding[k] = std::move(stacked);
  }
  return stack;
}

HybridSolution project_digital(const HybridSolution& solution, const std::vector<CMatrix>& channels,
                               const std::vector<CMatrix>& combiners,
                               const std::vector<double>& user_powers) {
  const int k_users = static_cast<int>(channels.size());
  if (static_cast<int>(solution.digitals.size()) != k_users ||
      static_cast<int>(user_powers.size()) != k_users)
    throw ConfigError("project_digital: per-user inputs disagree on K");

  const EquivalentChannelStack stack =
      build_equivalent_stack(channels, combiners, solution.analog.matrix);

  HybridSolution out = solution;
  for (int k = 0; k < k_users; ++k) {
    if (!(user_powers[k] > 0.0)) {
      out.digitals[k].setZero();
      continue;
    }
    const CMatrix basis = null_space_basis(stack.stacked_excluding[k]);
    if (basis.cols() == 0)
      throw InterferenceUncancellableError("interference of user " + std::to_string(k) +
                                           " cannot be cancelled: empty null space");
    // Q = B (B^H B)^{-1} B^H; the Gram factor is identity for the orthonormal
    // basis produced above, but keep the general form of the projector.
    const CMatrix gram = basis.adjoint() * basis;
    const CMatrix projected = basis * gram.ldlt().solve(basis.adjoint() * out.digitals[k]);
    if (projected.norm() < 1e-12)
      throw DegenerateProjectionError("projected beamformer of user " + std::to_string(k) +
                                      " vanished");
    const double norm = (solution.analog.matrix * projected).norm();
    out.digitals[k] = projected * (std::sqrt(user_powers[k]) / norm);
  }
  return out;
}

}  // namespace dsbeam
