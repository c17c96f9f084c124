// SPDX-License-Identifier: Apache-2.0
#include "dsbeam/dynamic_hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dsbeam/assignment.hpp"

namespace dsbeam {

namespace {

// A(i, l) = sum_k targets_k(i,:) digitals_k(l,:)^H
CMatrix coupling_matrix(const std::vector<CMatrix>& targets, const std::vector<CMatrix>& digitals) {
  CMatrix a = CMatrix::Zero(targets[0].rows(), digitals[0].rows());
  for (std::size_t k = 0; k < targets.size(); ++k) a.noalias() += targets[k] * digitals[k].adjoint();
  return a;
}

// b(l) = sum_k ||digitals_k(l,:)||^2
RVector digital_row_norms(const std::vector<CMatrix>& digitals) {
  RVector b = RVector::Zero(digitals[0].rows());
  for (const CMatrix& d : digitals) b += d.rowwise().squaredNorm();
  return b;
}

Complex unit_phase(Complex a) {
  const double mag = std::abs(a);
  return mag > 0.0 ? a / mag : Complex(1.0, 0.0);
}

void check_stage2_inputs(const std::vector<CMatrix>& targets, const std::vector<CMatrix>& digitals,
                         const SystemConfig& cfg) {
  if (static_cast<int>(targets.size()) != cfg.n_users ||
      static_cast<int>(digitals.size()) != cfg.n_users)
    throw ConfigError("stage 2 needs one target and one digital beamformer per user");
  for (int k = 0; k < cfg.n_users; ++k) {
    if (targets[k].rows() != cfg.n_tx || targets[k].cols() != cfg.n_streams)
      throw ConfigError("target beamformer dimensions do not match the config");
    if (digitals[k].rows() != cfg.n_rf || digitals[k].cols() != cfg.n_streams)
      throw ConfigError("digital beamformer dimensions do not match the config");
  }
}

}  // namespace

AnalogBeamformer AnalogBeamformer::from_chain_map(const Eigen::VectorXi& chains,
                                                  const CVector& phases, int n_rf) {
  AnalogBeamformer out;
  const int n_tx = static_cast<int>(chains.size());
  out.chain_of_antenna = chains;
  out.matrix = CMatrix::Zero(n_tx, n_rf);
  out.antennas_of_chain.assign(n_rf, {});
  for (int i = 0; i < n_tx; ++i) {
    out.matrix(i, chains(i)) = phases(i);
    out.antennas_of_chain[chains(i)].push_back(i);
  }
  return out;
}

double selection_objective(int antenna, int chain, Complex phase,
                           const std::vector<CMatrix>& digitals,
                           const std::vector<CMatrix>& targets) {
  double f = 0.0;
  for (std::size_t k = 0; k < targets.size(); ++k)
    f += (targets[k].row(antenna) - phase * digitals[k].row(chain)).squaredNorm();
  return f;
}

double fitting_gap(const std::vector<CMatrix>& targets, const CMatrix& analog,
                   const std::vector<CMatrix>& digitals) {
  double gap = 0.0;
  for (std::size_t k = 0; k < targets.size(); ++k)
    gap += (targets[k] - analog * digitals[k]).squaredNorm();
  return gap;
}

SelectionResult select_chain_per_antenna(const std::vector<CMatrix>& targets,
                                         const std::vector<CMatrix>& digitals,
                                         const SystemConfig& cfg) {
  check_stage2_inputs(targets, digitals, cfg);
  const CMatrix a = coupling_matrix(targets, digitals);
  const RVector b = digital_row_norms(digitals);

  SelectionResult sel;
  sel.chain_of_antenna.resize(cfg.n_tx);
  CVector phases(cfg.n_tx);
  for (int i = 0; i < cfg.n_tx; ++i) {
    int best_l = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (int l = 0; l < cfg.n_rf; ++l) {
      const double score = b(l) - 2.0 * std::abs(a(i, l));
      if (score < best_score) {  // ties keep the lowest chain index
        best_score = score;
        best_l = l;
      }
    }
    sel.chain_of_antenna(i) = best_l;
    phases(i) = unit_phase(a(i, best_l));
  }
  sel.candidate = AnalogBeamformer::from_chain_map(sel.chain_of_antenna, phases, cfg.n_rf);
  return sel;
}

ReallocationPlan build_reallocation_cost(const AnalogBeamformer& candidate,
                                         const std::vector<CMatrix>& targets,
                                         const std::vector<CMatrix>& digitals) {
  const CMatrix a = coupling_matrix(targets, digitals);
  const RVector b = digital_row_norms(digitals);

  ReallocationPlan plan;
  for (int l = 0; l < static_cast<int>(candidate.antennas_of_chain.size()); ++l) {
    const auto& members = candidate.antennas_of_chain[l];
    if (members.empty())
      plan.empty_chains.push_back(l);
    else if (members.size() > 1)
      plan.movable_antennas.insert(plan.movable_antennas.end(), members.begin(), members.end());
  }
  std::sort(plan.movable_antennas.begin(), plan.movable_antennas.end());

  const int n0 = static_cast<int>(plan.empty_chains.size());
  const int m = static_cast<int>(plan.movable_antennas.size());
  if (m < n0)
    throw InfeasibleReallocationError("cannot fill " + std::to_string(n0) + " empty chains with " +
                                      std::to_string(m) + " movable antennas");

  // Cost relative to the antenna's currently assigned chain; both sides use
  // the optimal phase, so entries come out nonnegative by construction.
  plan.cost.resize(m, n0);
  for (int r = 0; r < m; ++r) {
    const int antenna = plan.movable_antennas[r];
    const int home = candidate.chain_of_antenna(antenna);
    const double home_score = b(home) - 2.0 * std::abs(a(antenna, home));
    for (int c = 0; c < n0; ++c) {
      const int l = plan.empty_chains[c];
      plan.cost(r, c) = (b(l) - 2.0 * std::abs(a(antenna, l))) - home_score;
    }
  }
  return plan;
}

AnalogBeamformer km_analog_update(const std::vector<CMatrix>& targets,
                                  const std::vector<CMatrix>& digitals, const SystemConfig& cfg,
                                  KmStats* stats) {
  SelectionResult sel = select_chain_per_antenna(targets, digitals, cfg);
  if (stats) *stats = KmStats{};

  bool any_empty = false;
  for (const auto& members : sel.candidate.antennas_of_chain)
    if (members.empty()) any_empty = true;
  if (!any_empty) return std::move(sel.candidate);

  ReallocationPlan plan = build_reallocation_cost(sel.candidate, targets, digitals);
  const CMatrix a = coupling_matrix(targets, digitals);
  const int n0 = static_cast<int>(plan.empty_chains.size());
  if (stats) stats->n_rf0 = n0;

  int restarts = 0;
  while (true) {
    if (static_cast<int>(plan.movable_antennas.size()) < n0)
      throw InfeasibleReallocationError("reallocation became infeasible after pinning");
    const AssignmentResult km = solve_unbalanced(plan.cost);

    // Apply the moves one at a time on top of the selection candidate,
    // tracking per source chain the costliest departure so far.
    AnalogBeamformer result = sel.candidate;
    std::vector<int> chain_sizes(cfg.n_rf);
    for (int l = 0; l < cfg.n_rf; ++l)
      chain_sizes[l] = static_cast<int>(result.antennas_of_chain[l].size());
    std::vector<double> max_cost(cfg.n_rf, -1.0);
    std::vector<int> max_row(cfg.n_rf, -1);

    bool flagged = false;
    plan.chosen_moves.clear();
    for (int q = 0; q < n0 && !flagged; ++q) {
      const int row = km.row_of_column(q);
      const int antenna = plan.movable_antennas[row];
      const int target = plan.empty_chains[q];
      const int source = sel.candidate.chain_of_antenna(antenna);

      result.matrix(antenna, source) = Complex(0.0, 0.0);
      result.matrix(antenna, target) = unit_phase(a(antenna, target));
      result.chain_of_antenna(antenna) = target;
      plan.chosen_moves.emplace_back(antenna, target);

      if (plan.cost(row, q) > max_cost[source]) {
        max_cost[source] = plan.cost(row, q);
        max_row[source] = row;
      }
      if (--chain_sizes[source] == 0) {
        // Emptied its source: pin the costliest departure back onto that
        // chain, drop its row and re-solve.
        const int pinned_row = max_row[source];
        plan.movable_antennas.erase(plan.movable_antennas.begin() + pinned_row);
        RMatrix reduced(plan.cost.rows() - 1, plan.cost.cols());
        reduced.topRows(pinned_row) = plan.cost.topRows(pinned_row);
        reduced.bottomRows(plan.cost.rows() - 1 - pinned_row) =
            plan.cost.bottomRows(plan.cost.rows() - 1 - pinned_row);
        plan.cost = std::move(reduced);
        ++restarts;
        flagged = true;
      }
    }
    if (flagged) continue;

    // Rebuild the membership lists from the final chain map.
    for (auto& members : result.antennas_of_chain) members.clear();
    for (int i = 0; i < cfg.n_tx; ++i)
      result.antennas_of_chain[result.chain_of_antenna(i)].push_back(i);

    if (stats) {
      stats->n_flag_restarts = restarts;
      stats->n_reassigned = 0;
      for (int i = 0; i < cfg.n_tx; ++i)
        if (result.chain_of_antenna(i) != sel.candidate.chain_of_antenna(i)) ++stats->n_reassigned;
    }
    return result;
  }
}

std::vector<CMatrix> digital_ls_update(const AnalogBeamformer& analog,
                                       const std::vector<CMatrix>& targets) {
  const int n_rf = static_cast<int>(analog.matrix.cols());
  RVector inv_sizes(n_rf);
  for (int l = 0; l < n_rf; ++l) {
    const auto size = analog.antennas_of_chain[l].size();
    if (size == 0) throw ConfigError("digital_ls_update requires every chain to drive an antenna");
    inv_sizes(l) = 1.0 / static_cast<double>(size);
  }
  std::vector<CMatrix> digitals(targets.size());
  for (std::size_t k = 0; k < targets.size(); ++k)
    digitals[k] = inv_sizes.asDiagonal() * (analog.matrix.adjoint() * targets[k]);
  return digitals;
}

AnalogBeamformer random_analog_init(const SystemConfig& cfg, RandomStream& rng) {
  std::vector<int> perm(cfg.n_tx);
  for (int i = 0; i < cfg.n_tx; ++i) perm[i] = i;
  for (int i = cfg.n_tx - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(i + 1)]);

  Eigen::VectorXi chains(cfg.n_tx);
  for (int l = 0; l < cfg.n_rf; ++l) chains(perm[l]) = l;
  for (int j = cfg.n_rf; j < cfg.n_tx; ++j) chains(perm[j]) = rng.uniform_int(cfg.n_rf);

  CVector phases(cfg.n_tx);
  for (int i = 0; i < cfg.n_tx; ++i)
    phases(i) = std::polar(1.0, rng.uniform(0.0, 2.0 * std::numbers::pi));
  return AnalogBeamformer::from_chain_map(chains, phases, cfg.n_rf);
}

namespace {

HybridSolution run_alternation(const std::vector<CMatrix>& targets,
                               const std::vector<double>& user_powers, const SystemConfig& cfg,
                               double tolerance, int max_iters, AnalogBeamformer analog,
                               bool dynamic_partition) {
  if (static_cast<int>(user_powers.size()) != cfg.n_users)
    throw ConfigError("need one power budget per user");
  if (static_cast<int>(targets.size()) != cfg.n_users)
    throw ConfigError("need one target beamformer per user");
  for (const CMatrix& t : targets)
    if (t.rows() != cfg.n_tx || t.cols() != cfg.n_streams)
      throw ConfigError("target beamformer dimensions do not match the config");

  HybridSolution sol;
  std::vector<CMatrix> digitals = digital_ls_update(analog, targets);

  int iter = 1;
  double delta1 = 0.0, delta2 = 0.0;
  do {
    KmStats stats;
    if (dynamic_partition) {
      analog = km_analog_update(targets, digitals, cfg, &stats);
    } else {
      // Fixed partition: refresh only the phases.
      const CMatrix a = coupling_matrix(targets, digitals);
      for (int i = 0; i < cfg.n_tx; ++i) {
        const int l = analog.chain_of_antenna(i);
        analog.matrix(i, l) = unit_phase(a(i, l));
      }
    }
    delta1 = fitting_gap(targets, analog.matrix, digitals);
    digitals = digital_ls_update(analog, targets);
    delta2 = fitting_gap(targets, analog.matrix, digitals);
    sol.trace.push_back(
        {iter, delta1, delta2, stats.n_rf0, stats.n_reassigned, stats.n_flag_restarts});
    ++iter;
  } while (iter <= max_iters && std::abs(delta1 - delta2) >= tolerance);

  sol.approximation_error = delta2;
  for (int k = 0; k < cfg.n_users; ++k) {
    if (user_powers[k] > 0.0) {
      const double norm = (analog.matrix * digitals[k]).norm();
      digitals[k] *= std::sqrt(user_powers[k]) / norm;
    } else {
      digitals[k].setZero();
    }
  }
  sol.analog = std::move(analog);
  sol.digitals = std::move(digitals);
  return sol;
}

}  // namespace

HybridSolution alternate_stage2(const std::vector<CMatrix>& targets,
                                const std::vector<double>& user_powers, const SystemConfig& cfg,
                                double tolerance, int max_iters, RandomStream& rng) {
  cfg.validate();
  return run_alternation(targets, user_powers, cfg, tolerance, max_iters,
                         random_analog_init(cfg, rng), /*dynamic_partition=*/true);
}

HybridSolution fixed_subarray_stage2(const std::vector<CMatrix>& targets,
                                     const std::vector<double>& user_powers,
                                     const SystemConfig& cfg, double tolerance, int max_iters) {
  cfg.validate();
  if (cfg.n_tx % cfg.n_rf != 0)
    throw ConfigError("fixed subarrays need n_tx divisible by n_rf");
  const int block = cfg.n_tx / cfg.n_rf;
  Eigen::VectorXi chains(cfg.n_tx);
  for (int i = 0; i < cfg.n_tx; ++i) chains(i) = i / block;
  const AnalogBeamformer analog =
      AnalogBeamformer::from_chain_map(chains, CVector::Ones(cfg.n_tx), cfg.n_rf);
  return run_alternation(targets, user_powers, cfg, tolerance, max_iters, analog,
                         /*dynamic_partition=*/false);
}

}  // namespace dsbeam
