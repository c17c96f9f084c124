// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dsbeam/channel.hpp"
#include "dsbeam/dynamic_hybrid.hpp"
#include "dsbeam/types.hpp"

namespace dsbeam {

enum class Method { Dynamic, Fixed, FullyDigital };
enum class SweepKind { None, SnrDb, NumUsers, NumTx };
enum class SnrMode { TotalPower, MeasuredRx };

std::string method_name(Method m);

/// Fully resolved experiment description; the sweep output is a pure function
/// of this struct.
struct ExperimentSpec {
  SystemConfig base;
  ClusterChannelParams channel;
  PathLossModel path_loss;
  std::vector<Method> methods{Method::Dynamic, Method::Fixed, Method::FullyDigital};
  SweepKind sweep_kind = SweepKind::None;
  std::vector<double> sweep_values;
  int trials = 500;
  std::uint64_t master_seed = 1;
  std::string output_path = "results.csv";
  std::string trace_dir;  // empty disables per-iteration traces
  double tolerance = 1e-4;
  int max_iters = 200;
  SnrMode snr_mode = SnrMode::TotalPower;
  int threads = 0;      // 0 = hardware concurrency
  bool timing = false;  // adds a wall_time_ms column; off keeps output bit-reproducible

  std::string sweep_param() const;
  SystemConfig config_at(std::size_t sweep_index) const;
  void validate() const;
};

/// One (sweep point, trial, method) outcome. Failed trials carry an error
/// status and are excluded from aggregates.
struct TrialRecord {
  std::string sweep_param;
  double sweep_value = 0.0;
  int trial_index = 0;
  std::string method;
  std::string status = "ok";
  RVector per_user_se;
  double mean_se = 0.0;
  double sum_se = 0.0;
  double approx_error_final = 0.0;
  int iterations_used = 0;
  int n_rf0_first_iter = 0;
  double wall_time_ms = 0.0;
  std::vector<IterationTrace> trace;  // populated only when tracing is on
};

struct SweepSummary {
  int n_ok = 0;
  int n_excluded = 0;
  std::string csv_path;
};

/// Key=value configuration file plus overrides (CLI flags); unknown keys are
/// rejected, overrides win, and the result is validated.
ExperimentSpec parse_config(const std::string& path,
                            const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Applies one configuration key to the spec; throws ConfigError naming the
/// key on anything unknown or unparsable.
void apply_key_value(ExperimentSpec& spec, const std::string& key, const std::string& value);

/// Canonical echo of the resolved spec, used for the CSV header.
std::vector<std::pair<std::string, std::string>> spec_key_values(const ExperimentSpec& spec);

/// Runs one trial at one sweep point: derive the trial streams, draw the
/// channel, run stage 1 once, then every selected method. Module errors are
/// captured into error-tagged records instead of aborting.
std::vector<TrialRecord> run_trial(const ExperimentSpec& spec, std::size_t sweep_index,
                                   int trial_index);

/// Full Monte-Carlo sweep: all (point x trial x method) records plus one
/// aggregate row per (point, method), written as a commented CSV. Trials run
/// on a bounded worker pool; output order is deterministic.
SweepSummary run_sweep(const ExperimentSpec& spec);

/// Writes a standalone gnuplot script for a results CSV (SE-vs-sweep curve
/// per method) or a trace CSV (fitting gap vs iteration). The script contains
/// plotting commands and inlined data only.
void emit_plot_script(const std::string& csv_path, const std::string& script_path);

}  // namespace dsbeam
