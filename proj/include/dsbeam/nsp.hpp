// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/SVD>

#include <vector>

#include "dsbeam/dynamic_hybrid.hpp"
#include "dsbeam/types.hpp"

namespace dsbeam {

/// Orthonormal basis of the numerical null space of mat (singular values at
/// or below rel_tol * sigma_max count as zero). A zero or empty matrix has the
/// full space as its kernel and returns the identity.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> null_space_basis(
    const Eigen::MatrixBase<Derived>& mat, double rel_tol = 1e-10) {
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index cols = mat.cols();
  if (cols < 1) throw ConfigError("null_space_basis: matrix must have at least one column");
  if (mat.rows() == 0) return Mat::Identity(cols, cols);

  Eigen::JacobiSVD<Mat> svd(mat, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(0) > 0.0)) return Mat::Identity(cols, cols);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

/// Equivalent channels H_eq,i = W_i^H H_i F_RF and, per user, the stack of all
/// the other users' blocks in user order.
struct EquivalentChannelStack {
  std::vector<CMatrix> per_user_equivalent;  // n_streams x n_rf each
  std::vector<CMatrix> stacked_excluding;    // (K-1)*n_streams x n_rf each
};

EquivalentChannelStack build_equivalent_stack(const std::vector<CMatrix>& channels,
                                              const std::vector<CMatrix>& combiners,
                                              const CMatrix& analog);

/// Stage 3: project every digital beamformer onto the null space of the other
/// users' equivalent channels, then rescale back to the per-user power budget.
/// The analog beamformer is untouched.
HybridSolution project_digital(const HybridSolution& solution, const std::vector<CMatrix>& channels,
                               const std::vector<CMatrix>& combiners,
                               const std::vector<double>& user_powers);

}  // namespace dsbeam
