// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "dsbeam/rng.hpp"
#include "dsbeam/types.hpp"

namespace dsbeam {

/// Analog beamformer of a dynamic-subarray transmitter: one unit-modulus
/// nonzero per row (each antenna feeds one RF chain), every column nonempty
/// (each chain drives at least one antenna). matrix, chain_of_antenna and
/// antennas_of_chain are kept mutually consistent.
struct AnalogBeamformer {
  CMatrix matrix;                                   // n_tx x n_rf
  Eigen::VectorXi chain_of_antenna;                 // length n_tx
  std::vector<std::vector<int>> antennas_of_chain;  // n_rf ascending lists

  static AnalogBeamformer from_chain_map(const Eigen::VectorXi& chains, const CVector& phases,
                                         int n_rf);
};

/// Per-iteration record of the stage-2 alternation. delta1 is the fitting gap
/// after the analog update, delta2 after the digital update.
struct IterationTrace {
  int iter = 0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  int n_rf0 = 0;            // chains left empty by the per-antenna selection
  int n_reassigned = 0;     // antennas whose chain differs from the selection
  int n_flag_restarts = 0;  // emptied-source repairs during reallocation
};

struct HybridSolution {
  AnalogBeamformer analog;
  std::vector<CMatrix> digitals;     // n_rf x n_streams each
  double approximation_error = 0.0;  // sum_k ||F_k~ - F_RF F_BBk||_F^2 at the final
                                     // iterate, before power normalization
  std::vector<IterationTrace> trace;
};

/// Antenna-reallocation subproblem: cost(i, j) is the objective increase of
/// moving movable antenna i onto empty chain j.
struct ReallocationPlan {
  std::vector<int> empty_chains;                  // ascending chain indices
  std::vector<int> movable_antennas;              // ascending antenna indices
  RMatrix cost;                                   // M x |empty_chains|, all >= 0
  std::vector<std::pair<int, int>> chosen_moves;  // (antenna, target chain)
};

struct SelectionResult {
  Eigen::VectorXi chain_of_antenna;
  AnalogBeamformer candidate;  // may violate the nonempty-column constraint
};

struct KmStats {
  int n_rf0 = 0;
  int n_reassigned = 0;
  int n_flag_restarts = 0;
};

/// sum_k ||targets_k(i,:) - phase * digitals_k(chain,:)||^2 for one antenna,
/// one chain and a given unit-modulus phase.
double selection_objective(int antenna, int chain, Complex phase,
                           const std::vector<CMatrix>& digitals,
                           const std::vector<CMatrix>& targets);

/// sum_k ||targets_k - analog * digitals_k||_F^2, the stage-2 objective.
double fitting_gap(const std::vector<CMatrix>& targets, const CMatrix& analog,
                   const std::vector<CMatrix>& digitals);

/// Independent per-antenna chain selection: antenna i takes
/// argmin_l sum_k ||F_BBk(l,:)||^2 - 2|A_i^l|  with
/// A_i^l = sum_k targets_k(i,:) digitals_k(l,:)^H, entry A/|A| (1 when A = 0).
/// The nonempty-column constraint is not enforced here.
SelectionResult select_chain_per_antenna(const std::vector<CMatrix>& targets,
                                         const std::vector<CMatrix>& digitals,
                                         const SystemConfig& cfg);

/// Reallocation cost matrix for a selection candidate that left chains empty:
/// movable antennas come from chains holding at least two, and each entry is
/// the objective increase of the move, with optimal phases on both sides.
ReallocationPlan build_reallocation_cost(const AnalogBeamformer& candidate,
                                         const std::vector<CMatrix>& targets,
                                         const std::vector<CMatrix>& digitals);

/// Full analog update: per-antenna selection, then a minimum-cost assignment
/// of movable antennas onto empty chains. When applying the assignment would
/// empty a source chain, the costliest of its departing antennas is pinned,
/// its row dropped, and the assignment re-solved.
AnalogBeamformer km_analog_update(const std::vector<CMatrix>& targets,
                                  const std::vector<CMatrix>& digitals, const SystemConfig& cfg,
                                  KmStats* stats = nullptr);

/// Least-squares digital update F_BBk = (F_RF^H F_RF)^{-1} F_RF^H F_k~.
/// F_RF^H F_RF is diagonal with the subarray sizes, so this is a row-scaled
/// adjoint product.
std::vector<CMatrix> digital_ls_update(const AnalogBeamformer& analog,
                                       const std::vector<CMatrix>& targets);

/// Random feasible analog beamformer: one distinct antenna per chain first,
/// the rest uniform, phases uniform on the unit circle.
AnalogBeamformer random_analog_init(const SystemConfig& cfg, RandomStream& rng);

/// Stage 2: alternate analog/digital updates from a random feasible start
/// until |delta1 - delta2| < tolerance or max_iters is hit, then scale each
/// digital beamformer to its user power budget. Users with a zero budget get
/// zero digital beamformers.
HybridSolution alternate_stage2(const std::vector<CMatrix>& targets,
                                const std::vector<double>& user_powers, const SystemConfig& cfg,
                                double tolerance, int max_iters, RandomStream& rng);

/// Baseline with the antenna partition frozen to contiguous equal blocks;
/// only phases and digital beamformers update. Requires n_tx % n_rf == 0.
HybridSolution fixed_subarray_stage2(const std::vector<CMatrix>& targets,
                                     const std::vector<double>& user_powers,
                                     const SystemConfig& cfg, double tolerance, int max_iters);

}  // namespace dsbeam
