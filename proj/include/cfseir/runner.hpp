#pragma once

// Run orchestration behind the CLI: simulate (u = 0), optimize (forward-backward
// sweep) and alpha sweeps, each writing frames, run.json and, when optimizing,
// fbs_log.csv into its output directory.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cfseir/config.hpp"
#include "cfseir/control.hpp"
#include "cfseir/forward_solver.hpp"
#include "cfseir/io.hpp"
#include "cfseir/seir.hpp"
#include "cfseir/volterra.hpp"

namespace cfseir {

using Logger = std::function<void(const std::string&)>;

/// First level at which I in cell (ix, iy) reaches `threshold`.
inline std::optional<std::size_t> arrival_step(const Trajectory& traj, std::size_t ix, std::size_t iy,
                                               double threshold = 1.0) {
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    if (traj.states[n][kI](ix, iy) >= threshold) return n;
  }
  return std::nullopt;
}

struct RunOutcome {
  std::filesystem::path dir;
  double alpha = 1.0;
  bool controlled = false;
  std::size_t steps = 0;
  double theta = 1.0;
  double min_value = 0.0;
  std::optional<std::size_t> arrival;  // corner cell (0, 0), I >= 1
  double integral_I_T = 0.0;
  double integral_R_T = 0.0;
  ObjectiveBreakdown objective;
  // Optimization only.
  bool converged = true;
  int iterations = 0;
  double final_err = 0.0;
  double stationarity = 0.0;
};

namespace detail {

inline SolverOptions solver_options(const RunConfig& cfg) {
  SolverOptions o;
  o.corrector_passes = cfg.corrector_passes;
  return o;
}

inline AdjointOptions adjoint_options(const RunConfig& cfg) {
  AdjointOptions o;
  o.corrector_passes = cfg.corrector_passes;
  return o;
}

inline RunOutcome summarize(const RunConfig& cfg, const Trajectory& traj, const std::filesystem::path& dir) {
  RunOutcome r;
  r.dir = dir;
  r.alpha = cfg.alpha;
  r.steps = traj.steps();
  r.theta = positivity_threshold_theta(population_norm_linf_l2(traj), cfg.fractional());
  r.min_value = min_compartment_value(traj);
  r.arrival = arrival_step(traj, 0, 0);
  r.integral_I_T = cell_integral(traj.states.back()[kI]);
  r.integral_R_T = cell_integral(traj.states.back()[kR]);
  return r;
}

inline nlohmann::json run_document(const RunConfig& cfg, const RunOutcome& r, const Trajectory& traj,
                                   const std::vector<FrameInfo>& frames, const char* mode) {
  nlohmann::json derived = {
      {"Nt", r.steps},
      {"dt", cfg.dt},
      {"T", traj.final_time()},
      {"stability_bound", diffusion_stability_bound(cfg.grid, cfg.model.lambda_max())},
      {"corrector_contraction", corrector_contraction(cfg.grid, cfg.model.lambda_max(), cfg.fractional())},
      {"population_norm_linf_l2", population_norm_linf_l2(traj)},
      {"theta", r.theta},
      {"theta_positive", r.theta > 0.0},
      {"min_compartment_value", r.min_value},
      {"total_population_initial", total_population(traj, 0)},
      {"total_population_final", total_population(traj, r.steps)},
      {"integral_I_T", r.integral_I_T},
      {"integral_R_T", r.integral_R_T},
      {"corner_arrival_step", r.arrival ? nlohmann::json(*r.arrival) : nlohmann::json(nullptr)},
      {"corner_arrival_time", r.arrival ? nlohmann::json(traj.time(*r.arrival)) : nlohmann::json(nullptr)}};
  nlohmann::json doc = {{"mode", mode},
                        {"config", config_json(cfg)},
                        {"derived", derived},
                        {"objective", objective_json(r.objective)},
                        {"frames", frames_json(frames)},
                        {"versions", versions_json()}};
  if (r.controlled) {
    doc["fbs"] = {{"converged", r.converged},
                  {"iterations", r.iterations},
                  {"final_err", r.final_err},
                  {"stationarity", r.stationarity}};
  }
  return doc;
}

inline void log_theta(const Logger& log, const RunOutcome& r) {
  if (!log) return;
  log("alpha = " + format_number(r.alpha) + ": theta = " + format_number(r.theta) +
      (r.theta > 0.0 ? "" : " (warning: positivity threshold not met; diagnostic only)"));
}

}  // namespace detail

/// Forward solve with u = 0.
inline RunOutcome run_simulate(const RunConfig& cfg, const std::filesystem::path& dir, const Logger& log = {}) {
  cfg.validate();
  ensure_directory(dir);
  const Trajectory traj = forward_solve(cfg.initial_state(), {}, cfg.model, cfg.fractional(), cfg.dt, cfg.steps(),
                                        detail::solver_options(cfg));
  RunOutcome r = detail::summarize(cfg, traj, dir);
  r.objective = objective_J(traj, cfg.model);
  const std::vector<FrameInfo> frames = write_frames(dir, traj, cfg.save_every);
  write_json(dir / "run.json", detail::run_document(cfg, r, traj, frames, "simulate"));
  detail::log_theta(log, r);
  return r;
}

/// Forward-backward sweep from u = 0.
inline RunOutcome run_optimize(const RunConfig& cfg, const std::filesystem::path& dir, const Logger& log = {}) {
  cfg.validate();
  ensure_directory(dir);
  auto progress = [&](const FbsIteration& it) {
    if (log) {
      log("alpha = " + format_number(cfg.alpha) + " iter " + std::to_string(it.iter) +
          ": Err = " + format_number(it.err) + ", J = " + format_number(it.objective.total));
    }
  };
  const FbsResult res = fbs_solve(cfg.initial_state(), cfg.model, cfg.fractional(), cfg.dt, cfg.steps(), cfg.fbs,
                                  detail::solver_options(cfg), detail::adjoint_options(cfg), progress);
  RunOutcome r = detail::summarize(cfg, res.trajectory, dir);
  r.controlled = true;
  r.objective = res.final_objective;
  r.converged = res.converged;
  r.iterations = static_cast<int>(res.log.size());
  r.final_err = res.log.empty() ? 0.0 : res.log.back().err;
  r.stationarity = res.stationarity;
  const std::vector<FrameInfo> frames = write_frames(dir, res.trajectory, cfg.save_every);
  write_text(dir / "fbs_log.csv", fbs_log_csv(res.log));
  write_json(dir / "run.json", detail::run_document(cfg, r, res.trajectory, frames, "optimize"));
  detail::log_theta(log, r);
  if (log && !r.converged) {
    log("alpha = " + format_number(cfg.alpha) + ": not converged after " + std::to_string(r.iterations) +
        " sweeps (Err = " + format_number(r.final_err) + ")");
  }
  return r;
}

inline std::string sweep_directory_name(double alpha) { return "alpha_" + format_number(alpha); }

inline std::string sweep_summary_csv(const std::vector<RunOutcome>& runs, double dt) {
  std::string out = "alpha,arrival_step,arrival_time,J_total,integral_I_T,integral_R_T,theta,converged,iterations\n";
  for (const RunOutcome& r : runs) {
    out += format_number(r.alpha) + ',';
    out += r.arrival ? std::to_string(*r.arrival) + ',' + format_number(dt * static_cast<double>(*r.arrival)) : ",";
    out += ',' + format_number(r.objective.total) + ',' + format_number(r.integral_I_T) + ',' +
           format_number(r.integral_R_T) + ',' + format_number(r.theta) + ',';
    // Convergence columns stay empty for uncontrolled runs.
    if (r.controlled) out += std::string(r.converged ? "true" : "false") + ',' + std::to_string(r.iterations);
    else out += ',';
    out += '\n';
  }
  return out;
}

/// Runs every alpha into dir/alpha_<value>, up to `threads` at once, then
/// writes dir/sweep_summary.csv. Results are in the order of `alphas`.
inline std::vector<RunOutcome> run_sweep(const RunConfig& cfg, const std::vector<double>& alphas,
                                         const std::filesystem::path& dir, bool control, unsigned threads = 1,
                                         const Logger& log = {}) {
  if (alphas.empty()) throw ConfigError("alphas", "need at least one value");
  std::vector<RunConfig> configs;
  for (double a : alphas) {
    RunConfig c = cfg;
    c.alpha = a;
    c.validate();
    configs.push_back(std::move(c));
  }
  ensure_directory(dir);

  std::vector<RunOutcome> out(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::mutex log_mutex;
  const Logger safe_log = log ? Logger([&](const std::string& s) {
    std::lock_guard<std::mutex> lock(log_mutex);
    log(s);
  })
                              : Logger{};
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < configs.size(); k = next++) {
      try {
        const std::filesystem::path sub = dir / sweep_directory_name(configs[k].alpha);
        out[k] = control ? run_optimize(configs[k], sub, safe_log) : run_simulate(configs[k], sub, safe_log);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(configs.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  write_text(dir / "sweep_summary.csv", sweep_summary_csv(out, cfg.dt));
  return out;
}

}  // namespace cfseir
