// SPDX-License-Identifier: Apache-2.0
#include "dsbeam/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "dsbeam/fully_digital.hpp"
#include "dsbeam/metrics.hpp"
#include "dsbeam/nsp.hpp"

namespace dsbeam {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError("key '" + key + "': cannot parse '" + value + "' as a number");
  return out;
}

int parse_int(const std::string& key, const std::string& value) {
  int out = 0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError("key '" + key + "': cannot parse '" + value + "' as an integer");
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError("key '" + key + "': cannot parse '" + value + "' as an unsigned integer");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "on") return true;
  if (value == "0" || value == "false" || value == "off") return false;
  throw ConfigError("key '" + key + "': cannot parse '" + value + "' as a boolean");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  return parts;
}

std::vector<double> parse_sweep_values(const std::string& key, const std::string& text) {
  std::vector<double> values;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ConfigError("key '" + key + "': range must be start:step:stop");
    const double start = parse_double(key, trim(parts[0]));
    const double step = parse_double(key, trim(parts[1]));
    const double stop = parse_double(key, trim(parts[2]));
    if (step == 0.0) throw ConfigError("key '" + key + "': range step must be nonzero");
    const double eps = std::abs(step) * 1e-9;
    for (double v = start; step > 0 ? v <= stop + eps : v >= stop - eps; v += step)
      values.push_back(v);
  } else {
    for (const std::string& part : split(text, ','))
      values.push_back(parse_double(key, trim(part)));
  }
  if (values.empty()) throw ConfigError("key '" + key + "': empty sweep value list");
  return values;
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Dynamic: return "dynamic";
    case Method::Fixed: return "fixed";
    case Method::FullyDigital: return "fully_digital";
  }
  return "?";
}

std::string ExperimentSpec::sweep_param() const {
  switch (sweep_kind) {
    case SweepKind::None: return "none";
    case SweepKind::SnrDb: return "snr_db";
    case SweepKind::NumUsers: return "n_users";
    case SweepKind::NumTx: return "n_tx";
  }
  return "?";
}

SystemConfig ExperimentSpec::config_at(std::size_t sweep_index) const {
  SystemConfig cfg = base;
  if (sweep_kind == SweepKind::None) return cfg;
  const double v = sweep_values.at(sweep_index);
  switch (sweep_kind) {
    case SweepKind::SnrDb: cfg.target_snr_db = v; break;
    case SweepKind::NumUsers: cfg.n_users = static_cast<int>(v); break;
    case SweepKind::NumTx: cfg.n_tx = static_cast<int>(v); break;
    case SweepKind::None: break;
  }
  return cfg;
}

void ExperimentSpec::validate() const {
  channel.validate();
  if (trials < 1) throw ConfigError("key 'trials': must be >= 1");
  if (methods.empty()) throw ConfigError("key 'methods': must select at least one method");
  if (tolerance <= 0.0) throw ConfigError("key 'epsilon': must be positive");
  if (max_iters < 1) throw ConfigError("key 'max_iters': must be >= 1");
  if (threads < 0) throw ConfigError("key 'threads': must be nonnegative");
  if (output_path.empty()) throw ConfigError("key 'out': must not be empty");
  if (sweep_kind != SweepKind::None && sweep_values.empty())
    throw ConfigError("key 'sweep': no sweep values");
  if (sweep_kind == SweepKind::SnrDb && base.noise_power_dbm)
    throw ConfigError("key 'sweep': an SNR sweep conflicts with noise_power_dbm");
  if (snr_mode == SnrMode::MeasuredRx && !base.target_snr_db)
    throw ConfigError("key 'snr_mode': measured_rx requires target_snr_db");
  if (sweep_kind == SweepKind::NumUsers || sweep_kind == SweepKind::NumTx)
    for (double v : sweep_values)
      if (v < 1.0 || v != std::floor(v))
        throw ConfigError("key 'sweep': values must be positive integers");

  const std::size_t points = sweep_kind == SweepKind::None ? 1 : sweep_values.size();
  const bool has_fixed = std::find(methods.begin(), methods.end(), Method::Fixed) != methods.end();
  for (std::size_t i = 0; i < points; ++i) {
    const SystemConfig cfg = config_at(i);
    cfg.validate();
    if (has_fixed && cfg.n_tx % cfg.n_rf != 0)
      throw ConfigError("key 'methods': fixed subarrays need n_tx divisible by n_rf (n_tx = " +
                        std::to_string(cfg.n_tx) + ", n_rf = " + std::to_string(cfg.n_rf) + ")");
  }
}

void apply_key_value(ExperimentSpec& spec, const std::string& key, const std::string& value) {
  if (key == "n_tx") spec.base.n_tx = parse_int(key, value);
  else if (key == "n_rf") spec.base.n_rf = parse_int(key, value);
  else if (key == "n_rx") spec.base.n_rx = parse_int(key, value);
  else if (key == "n_users") spec.base.n_users = parse_int(key, value);
  else if (key == "n_streams") spec.base.n_streams = parse_int(key, value);
  else if (key == "total_power_dbm") spec.base.total_power_dbm = parse_double(key, value);
  else if (key == "noise_power_dbm") spec.base.noise_power_dbm = parse_double(key, value);
  else if (key == "target_snr_db") spec.base.target_snr_db = parse_double(key, value);
  else if (key == "carrier_hz") spec.base.carrier_hz = parse_double(key, value);
  else if (key == "antenna_spacing_wavelengths")
    spec.base.antenna_spacing_wavelengths = parse_double(key, value);
  else if (key == "n_clusters") spec.channel.n_clusters = parse_int(key, value);
  else if (key == "n_rays") spec.channel.n_rays = parse_int(key, value);
  else if (key == "angular_spread_deg")
    spec.channel.angular_spread_rad = parse_double(key, value) * std::numbers::pi / 180.0;
  else if (key == "mean_angle_min_rad") spec.channel.mean_angle_min_rad = parse_double(key, value);
  else if (key == "mean_angle_max_rad") spec.channel.mean_angle_max_rad = parse_double(key, value);
  else if (key == "path_loss") {
    if (value == "unit") spec.path_loss.kind = PathLossModel::Kind::Unit;
    else if (value == "log_distance") spec.path_loss.kind = PathLossModel::Kind::LogDistance;
    else throw ConfigError("key 'path_loss': expected unit or log_distance");
  } else if (key == "path_loss_exponent") spec.path_loss.exponent = parse_double(key, value);
  else if (key == "reference_loss_db") spec.path_loss.reference_loss_db = parse_double(key, value);
  else if (key == "cell_radius_m") spec.path_loss.cell_radius_m = parse_double(key, value);
  else if (key == "epsilon") spec.tolerance = parse_double(key, value);
  else if (key == "max_iters") spec.max_iters = parse_int(key, value);
  else if (key == "trials") spec.trials = parse_int(key, value);
  else if (key == "seed") spec.master_seed = parse_u64(key, value);
  else if (key == "out") spec.output_path = value;
  else if (key == "trace_dir") spec.trace_dir = value;
  else if (key == "threads") spec.threads = parse_int(key, value);
  else if (key == "timing") spec.timing = parse_bool(key, value);
  else if (key == "snr_mode") {
    if (value == "total_power") spec.snr_mode = SnrMode::TotalPower;
    else if (value == "measured_rx") spec.snr_mode = SnrMode::MeasuredRx;
    else throw ConfigError("key 'snr_mode': expected total_power or measured_rx");
  } else if (key == "methods") {
    spec.methods.clear();
    for (const std::string& part : split(value, ',')) {
      const std::string name = trim(part);
      Method m;
      if (name == "dynamic") m = Method::Dynamic;
      else if (name == "fixed") m = Method::Fixed;
      else if (name == "fully_digital") m = Method::FullyDigital;
      else throw ConfigError("key 'methods': unknown method '" + name + "'");
      if (std::find(spec.methods.begin(), spec.methods.end(), m) == spec.methods.end())
        spec.methods.push_back(m);
    }
  } else if (key == "sweep") {
    if (value == "none") {
      spec.sweep_kind = SweepKind::None;
      spec.sweep_values.clear();
      return;
    }
    const auto eq = value.find('=');
    if (eq == std::string::npos)
      throw ConfigError("key 'sweep': expected none, snr=..., users=... or ntx=...");
    const std::string name = trim(value.substr(0, eq));
    const std::string rest = trim(value.substr(eq + 1));
    if (name == "snr" || name == "snr_db") spec.sweep_kind = SweepKind::SnrDb;
    else if (name == "users" || name == "n_users") spec.sweep_kind = SweepKind::NumUsers;
    else if (name == "ntx" || name == "n_tx") spec.sweep_kind = SweepKind::NumTx;
    else throw ConfigError("key 'sweep': unknown sweep parameter '" + name + "'");
    spec.sweep_values = parse_sweep_values(key, rest);
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

ExperimentSpec parse_config(const std::string& path,
                            const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::vector<std::pair<std::string, std::string>> entries;
  if (!path.empty()) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file '" + path + "'");
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string stripped = trim(line);
      if (stripped.empty()) continue;
      const auto eq = stripped.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
      entries.emplace_back(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    }
  }
  entries.insert(entries.end(), overrides.begin(), overrides.end());

  bool sets_noise = false, sets_snr = false;
  for (const auto& [k, v] : entries) {
    if (k == "noise_power_dbm") sets_noise = true;
    if (k == "target_snr_db") sets_snr = true;
  }
  if (sets_noise && sets_snr)
    throw ConfigError("keys 'noise_power_dbm' and 'target_snr_db' are mutually exclusive");

  ExperimentSpec spec;
  if (sets_noise) spec.base.target_snr_db.reset();
  for (const auto& [k, v] : entries) apply_key_value(spec, k, v);
  spec.validate();
  return spec;
}

std::vector<std::pair<std::string, std::string>> spec_key_values(const ExperimentSpec& spec) {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("n_tx", std::to_string(spec.base.n_tx));
  kv.emplace_back("n_rf", std::to_string(spec.base.n_rf));
  kv.emplace_back("n_rx", std::to_string(spec.base.n_rx));
  kv.emplace_back("n_users", std::to_string(spec.base.n_users));
  kv.emplace_back("n_streams", std::to_string(spec.base.n_streams));
  kv.emplace_back("total_power_dbm", fmt17(spec.base.total_power_dbm));
  if (spec.base.noise_power_dbm)
    kv.emplace_back("noise_power_dbm", fmt17(*spec.base.noise_power_dbm));
  if (spec.base.target_snr_db) kv.emplace_back("target_snr_db", fmt17(*spec.base.target_snr_db));
  kv.emplace_back("carrier_hz", fmt17(spec.base.carrier_hz));
  kv.emplace_back("antenna_spacing_wavelengths", fmt17(spec.base.antenna_spacing_wavelengths));
  kv.emplace_back("n_clusters", std::to_string(spec.channel.n_clusters));
  kv.emplace_back("n_rays", std::to_string(spec.channel.n_rays));
  kv.emplace_back("angular_spread_deg",
                  fmt17(spec.channel.angular_spread_rad * 180.0 / std::numbers::pi));
  kv.emplace_back("mean_angle_min_rad", fmt17(spec.channel.mean_angle_min_rad));
  kv.emplace_back("mean_angle_max_rad", fmt17(spec.channel.mean_angle_max_rad));
  kv.emplace_back("path_loss",
                  spec.path_loss.kind == PathLossModel::Kind::Unit ? "unit" : "log_distance");
  if (spec.path_loss.kind == PathLossModel::Kind::LogDistance) {
    kv.emplace_back("path_loss_exponent", fmt17(spec.path_loss.exponent));
    kv.emplace_back("reference_loss_db", fmt17(spec.path_loss.reference_loss_db));
    kv.emplace_back("cell_radius_m", fmt17(spec.path_loss.cell_radius_m));
  }
  kv.emplace_back("epsilon", fmt17(spec.tolerance));
  kv.emplace_back("max_iters", std::to_string(spec.max_iters));
  kv.emplace_back("trials", std::to_string(spec.trials));
  kv.emplace_back("seed", std::to_string(spec.master_seed));
  std::string methods;
  for (Method m : spec.methods) {
    if (!methods.empty()) methods += ',';
    methods += method_name(m);
  }
  kv.emplace_back("methods", methods);
  if (spec.sweep_kind == SweepKind::None) {
    kv.emplace_back("sweep", "none");
  } else {
    std::string s = spec.sweep_param() + "=";
    for (std::size_t i = 0; i < spec.sweep_values.size(); ++i) {
      if (i) s += ',';
      s += fmt17(spec.sweep_values[i]);
    }
    kv.emplace_back("sweep", s);
  }
  kv.emplace_back("snr_mode",
                  spec.snr_mode == SnrMode::TotalPower ? "total_power" : "measured_rx");
  kv.emplace_back("threads", std::to_string(spec.threads));
  kv.emplace_back("timing", spec.timing ? "1" : "0");
  kv.emplace_back("out", spec.output_path);
  if (!spec.trace_dir.empty()) kv.emplace_back("trace_dir", spec.trace_dir);
  return kv;
}

std::vector<TrialRecord> run_trial(const ExperimentSpec& spec, std::size_t sweep_index,
                                   int trial_index) {
  const SystemConfig cfg = spec.config_at(sweep_index);
  const std::string param = spec.sweep_param();
  const double value =
      spec.sweep_kind == SweepKind::None ? 0.0 : spec.sweep_values.at(sweep_index);

  RandomStream chan_rng(derive_seed(spec.master_seed, sweep_index, trial_index, 0));
  RandomStream dyn_rng(derive_seed(spec.master_seed, sweep_index, trial_index, 1));

  ChannelRealization channel;
  FullyDigitalSolution fd;
  std::string stage_error;
  try {
    std::vector<ClusterChannelParams> params(cfg.n_users, spec.channel);
    for (auto& p : params) p.path_loss_linear = spec.path_loss.sample(chan_rng);
    channel = generate_channel(cfg, params, chan_rng);
    fd = svd_stage(channel, cfg);
  } catch (const std::exception& e) {
    stage_error = e.what();
  }

  const double design_noise = cfg.noise_power();

  std::vector<TrialRecord> records;
  for (Method m : spec.methods) {
    TrialRecord rec;
    rec.sweep_param = param;
    rec.sweep_value = value;
    rec.trial_index = trial_index;
    rec.method = method_name(m);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (!stage_error.empty()) throw std::runtime_error(stage_error);
      std::vector<CMatrix> overall(cfg.n_users);
      bool include_iui = true;
      if (m == Method::FullyDigital) {
        overall = fd.beamformers;
        include_iui = false;  // the no-interference reference convention
      } else {
        HybridSolution hs =
            m == Method::Dynamic
                ? alternate_stage2(fd.beamformers, fd.user_powers, cfg, spec.tolerance,
                                   spec.max_iters, dyn_rng)
                : fixed_subarray_stage2(fd.beamformers, fd.user_powers, cfg, spec.tolerance,
                                        spec.max_iters);
        rec.approx_error_final = hs.approximation_error;
        rec.iterations_used = static_cast<int>(hs.trace.size());
        rec.n_rf0_first_iter = hs.trace.empty() ? 0 : hs.trace.front().n_rf0;
        if (!spec.trace_dir.empty()) rec.trace = hs.trace;
        hs = project_digital(hs, channel.per_user, fd.combiners, fd.user_powers);
        for (int k = 0; k < cfg.n_users; ++k) overall[k] = hs.analog.matrix * hs.digitals[k];
      }
      double eval_noise = design_noise;
      if (spec.snr_mode == SnrMode::MeasuredRx) {
        CMatrix all(cfg.n_tx, cfg.n_users * cfg.n_streams);
        for (int k = 0; k < cfg.n_users; ++k)
          all.middleCols(k * cfg.n_streams, cfg.n_streams) = overall[k];
        double prx = 0.0;
        for (int k = 0; k < cfg.n_users; ++k)
          prx += (channel.per_user[k] * all).squaredNorm() / cfg.n_rx;
        prx /= cfg.n_users;
        eval_noise = prx / db_to_linear(cfg.target_snr_db.value());
      }
      const RateReport report =
          evaluate(channel.per_user, fd.combiners, overall, eval_noise, include_iui);
      rec.per_user_se = report.per_user_se;
      rec.mean_se = report.mean_se;
      rec.sum_se = report.sum_se;
    } catch (const std::exception& e) {
      rec.status = std::string("error: ") + e.what();
    }
    rec.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    records.push_back(std::move(rec));
  }
  return records;
}

namespace {

std::string sanitize_csv_field(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

void write_detail_row(std::ostream& out, const TrialRecord& r, bool timing) {
  out << "detail," << r.sweep_param << ',' << fmt17(r.sweep_value) << ',' << r.method << ','
      << r.trial_index << ',' << sanitize_csv_field(r.status) << ',';
  if (r.status == "ok") {
    out << fmt17(r.mean_se) << ',' << fmt17(r.sum_se) << ',';
    for (Eigen::Index i = 0; i < r.per_user_se.size(); ++i) {
      if (i) out << ';';
      out << fmt17(r.per_user_se(i));
    }
    out << ',' << fmt17(r.approx_error_final) << ',' << r.iterations_used << ','
        << r.n_rf0_first_iter;
  } else {
    out << ",,,,,";
  }
  out << ",,";  // aggregate-only columns
  if (timing) out << ',' << fmt17(r.wall_time_ms);
  out << '\n';
}

}  // namespace

SweepSummary run_sweep(const ExperimentSpec& spec) {
  spec.validate();

  const std::size_t points = spec.sweep_kind == SweepKind::None ? 1 : spec.sweep_values.size();
  const std::size_t total = points * static_cast<std::size_t>(spec.trials);
  std::vector<std::vector<TrialRecord>> grid(total);

  int n_threads = spec.threads;
  if (n_threads <= 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<int>(std::min<std::size_t>(n_threads, total));

  std::atomic<std::size_t> next{0};
  std::exception_ptr worker_error;
  std::mutex error_mutex;
  auto work = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= total) return;
      try {
        grid[idx] = run_trial(spec, idx / spec.trials, static_cast<int>(idx % spec.trials));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!worker_error) worker_error = std::current_exception();
        return;
      }
    }
  };
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (worker_error) std::rethrow_exception(worker_error);

  std::ofstream out(spec.output_path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + spec.output_path + "' for writing");
  out << "# dsbeam-results v1\n";
  for (const auto& [k, v] : spec_key_values(spec)) out << "# " << k << " = " << v << '\n';
  out << "row_type,sweep_param,sweep_value,method,trial,status,mean_se,sum_se,per_user_se,"
         "approx_error_final,iterations_used,n_rf0_first_iter,n_trials_ok,n_trials_excluded";
  if (spec.timing) out << ",wall_time_ms";
  out << '\n';

  SweepSummary summary;
  summary.csv_path = spec.output_path;
  for (const auto& records : grid)
    for (const TrialRecord& r : records) {
      write_detail_row(out, r, spec.timing);
      if (r.status == "ok") ++summary.n_ok;
      else ++summary.n_excluded;
    }

  // Aggregate rows: means over the successful trials of each (point, method).
  for (std::size_t p = 0; p < points; ++p)
    for (Method m : spec.methods) {
      const std::string name = method_name(m);
      double mean_se = 0, sum_se = 0, approx = 0, iters = 0, nrf0 = 0;
      int n_ok = 0, n_err = 0;
      double sweep_value = 0;
      std::string sweep_param;
      for (int t = 0; t < spec.trials; ++t) {
        for (const TrialRecord& r : grid[p * spec.trials + t]) {
          if (r.method != name) continue;
          sweep_value = r.sweep_value;
          sweep_param = r.sweep_param;
          if (r.status == "ok") {
            mean_se += r.mean_se;
            sum_se += r.sum_se;
            approx += r.approx_error_final;
            iters += r.iterations_used;
            nrf0 += r.n_rf0_first_iter;
            ++n_ok;
          } else {
            ++n_err;
          }
        }
      }
      out << "aggregate," << sweep_param << ',' << fmt17(sweep_value) << ',' << name << ",,";
      if (n_ok > 0) {
        out << "ok," << fmt17(mean_se / n_ok) << ',' << fmt17(sum_se / n_ok) << ",,"
            << fmt17(approx / n_ok) << ',' << fmt17(iters / n_ok) << ',' << fmt17(nrf0 / n_ok);
      } else {
        out << "no_data,,,,,,";
      }
      out << ',' << n_ok << ',' << n_err;
      if (spec.timing) out << ',';
      out << '\n';
    }
  out.flush();
  if (!out) throw IoError("failed while writing '" + spec.output_path + "'");

  if (!spec.trace_dir.empty()) {
    std::filesystem::create_directories(spec.trace_dir);
    for (const auto& records : grid)
      for (const TrialRecord& r : records) {
        if (r.trace.empty()) continue;
        const std::string name = spec.trace_dir + "/trace_" + r.sweep_param + "_" +
                                 fmt17(r.sweep_value) + "_trial" + std::to_string(r.trial_index) +
                                 "_" + r.method + ".csv";
        std::ofstream tf(name, std::ios::binary);
        if (!tf) throw IoError("cannot open '" + name + "' for writing");
        tf << "iter,delta1,delta2,n_rf0\n";
        for (const IterationTrace& it : r.trace)
          tf << it.iter << ',' << fmt17(it.delta1) << ',' << fmt17(it.delta2) << ',' << it.n_rf0
             << '\n';
      }
  }
  return summary;
}

namespace {

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;  // field lists
  std::vector<int> line_numbers;
};

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for reading");
  CsvTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split(line, ',');
    if (table.columns.empty()) {
      table.columns = fields;
      continue;
    }
    if (fields.size() != table.columns.size())
      throw CsvParseError("line " + std::to_string(line_no) + ": expected " +
                          std::to_string(table.columns.size()) + " fields, got " +
                          std::to_string(fields.size()));
    table.rows.push_back(fields);
    table.line_numbers.push_back(line_no);
  }
  if (table.columns.empty()) throw CsvParseError("line 0: no column header found");
  return table;
}

int column_index(const CsvTable& t, const std::string& name) {
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    if (t.columns[i] == name) return static_cast<int>(i);
  throw CsvParseError("line 1: missing column '" + name + "'");
}

double field_as_double(const CsvTable& t, std::size_t row, int col) {
  const std::string& s = t.rows[row][col];
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end)
    throw CsvParseError("line " + std::to_string(t.line_numbers[row]) + ": bad number '" + s +
                        "'");
  return v;
}

}  // namespace

void emit_plot_script(const std::string& csv_path, const std::string& script_path) {
  const CsvTable table = read_csv(csv_path);

  std::ofstream out(script_path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + script_path + "' for writing");
  out << "#!/usr/bin/env gnuplot\n";
  out << "# generated by dsbeam from " << csv_path << "\n";
  out << "set datafile separator ','\n";
  out << "set terminal pngcairo size 900,600\n";
  out << "set output '" << script_path << ".png'\n";
  out << "set grid\n";

  const bool is_trace = !table.columns.empty() && table.columns[0] == "iter";
  if (is_trace) {
    const int c_iter = column_index(table, "iter");
    const int c_delta2 = column_index(table, "delta2");
    out << "set xlabel 'iteration'\n";
    out << "set ylabel 'fitting gap'\n";
    out << "set logscale y\n";
    out << "$trace << EOD\n";
    for (std::size_t r = 0; r < table.rows.size(); ++r)
      out << fmt17(field_as_double(table, r, c_iter)) << ','
          << fmt17(field_as_double(table, r, c_delta2)) << '\n';
    out << "EOD\n";
    out << "plot $trace using 1:2 with linespoints lw 2 title 'fitting gap'\n";
    return;
  }

  const int c_type = column_index(table, "row_type");
  const int c_param = column_index(table, "sweep_param");
  const int c_value = column_index(table, "sweep_value");
  const int c_method = column_index(table, "method");
  const int c_status = column_index(table, "status");
  const int c_mean = column_index(table, "mean_se");
  const int c_sum = column_index(table, "sum_se");

  std::vector<std::string> methods;
  std::vector<std::vector<std::pair<double, double>>> curves;
  std::string sweep_param = "sweep";
  bool use_sum = false;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r][c_type] != "aggregate" || table.rows[r][c_status] != "ok") continue;
    sweep_param = table.rows[r][c_param];
    use_sum = sweep_param == "n_users";
    const std::string& method = table.rows[r][c_method];
    std::size_t mi = 0;
    for (; mi < methods.size(); ++mi)
      if (methods[mi] == method) break;
    if (mi == methods.size()) {
      methods.push_back(method);
      curves.emplace_back();
    }
    curves[mi].emplace_back(field_as_double(table, r, c_value),
                            field_as_double(table, r, use_sum ? c_sum : c_mean));
  }

  if (methods.empty()) {
    out << "set label 'no data' at graph 0.5, graph 0.5 center\n";
    out << "plot [0:1][0:1] -1 notitle\n";
    return;
  }

  out << "set xlabel '" << sweep_param << "'\n";
  out << "set ylabel '" << (use_sum ? "sum" : "mean") << " spectral efficiency (bits/s/Hz)'\n";
  out << "set key top left\n";
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    out << "$d" << mi << " << EOD\n";
    for (const auto& [x, y] : curves[mi]) out << fmt17(x) << ',' << fmt17(y) << '\n';
    out << "EOD\n";
  }
  out << "plot ";
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    if (mi) out << ", ";
    out << "$d" << mi << " using 1:2 with linespoints lw 2 title '" << methods[mi] << "'";
  }
  out << '\n';
}

}  // namespace dsbeam
