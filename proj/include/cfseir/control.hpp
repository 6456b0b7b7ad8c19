#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "cfseir/adjoint_solver.hpp"
#include "cfseir/caputo_fabrizio.hpp"
#include "cfseir/forward_solver.hpp"
#include "cfseir/grid.hpp"
#include "cfseir/seir.hpp"

namespace cfseir {

enum class ErrAggregate { kMax, kMin };

/// Forward-backward sweep settings.
struct FbsConfig {
  double tol = 1e-3;
  int max_iter = 100;
  /// Weight of the projected candidate in the relaxed update (initial value when adaptive).
  double relax_w = 0.5;
  ErrAggregate aggregate = ErrAggregate::kMax;
  /// Halve the weight whenever Err grows from one sweep to the next.
  bool adaptive_relax = true;
  double min_relax_w = 0.01;

  void validate() const {
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
    if (!(relax_w > 0.0 && relax_w <= 1.0)) throw std::invalid_argument("relax_w must lie in (0, 1]");
    if (!(min_relax_w > 0.0 && min_relax_w <= relax_w)) {
      throw std::invalid_argument("min_relax_w must lie in (0, relax_w]");
    }
  }

  friend bool operator==(const FbsConfig&, const FbsConfig&) = default;
};

/// Terms of the objective: I^2 at T, I^2 over time, sigma u^2 over time.
struct ObjectiveBreakdown {
  double terminal = 0.0;
  double running = 0.0;
  double cost = 0.0;
  double total = 0.0;
};

/// Evaluates the objective on a trajectory; time integrals use the trapezoid rule.
inline ObjectiveBreakdown objective_J(const Trajectory& traj, const ModelParams& p) {
  const std::size_t steps = traj.steps();
  ObjectiveBreakdown j;
  j.terminal = l2_norm_sq(traj.states.at(steps)[kI]);
  for (std::size_t n = 0; n <= steps; ++n) {
    const double w = trapezoid_weight(n, steps, traj.dt);
    j.running += w * l2_norm_sq(traj.states[n][kI]);
    j.cost += w * l2_norm_sq(traj.controls.at(n));
  }
  j.cost *= p.sigma;
  j.total = j.terminal + j.running + j.cost;
  return j;
}

namespace detail {

inline void require_aligned(const Trajectory& traj, const std::vector<AdjointState>& adj) {
  if (adj.size() != traj.states.size() || traj.controls.size() != traj.states.size()) {
    throw std::invalid_argument("state, costate and control levels are misaligned");
  }
}

}  // namespace detail

/// Unrelaxed projection clamp(S (rho1 - rho4) / sigma, 0, 1) = clamp(-F* rho / sigma, 0, 1).
inline std::vector<ControlField> control_candidate(const Trajectory& traj, const std::vector<AdjointState>& adj,
                                                   const ModelParams& p) {
  detail::require_aligned(traj, adj);
  std::vector<ControlField> out;
  out.reserve(adj.size());
  for (std::size_t n = 0; n < adj.size(); ++n) {
    Field u = control_coupling_adjoint(traj.states[n], adj[n]);
    for (double& v : u.values()) v = std::clamp(-v / p.sigma, 0.0, 1.0);
    out.push_back(std::move(u));
  }
  return out;
}

/// Relaxed projected update (1 - w) u_old + w u_cand, where u_old is the
/// control stored in the trajectory.
inline std::vector<ControlField> update_control(const Trajectory& traj, const std::vector<AdjointState>& adj,
                                                const ModelParams& p, const FbsConfig& cfg) {
  std::vector<ControlField> cand = control_candidate(traj, adj, p);
  for (std::size_t n = 0; n < cand.size(); ++n) {
    Field& u = cand[n];
    u *= cfg.relax_w;
    u.axpy(1.0 - cfg.relax_w, traj.controls[n]);
  }
  return cand;
}

/// Directional derivative 2 int_0^T (F* rho + sigma u, nu) dt, trapezoid in time.
inline double gradient_of_J(const Trajectory& traj, const std::vector<AdjointState>& adj,
                            const std::vector<ControlField>& direction, const ModelParams& p) {
  detail::require_aligned(traj, adj);
  if (direction.size() != traj.states.size()) throw std::invalid_argument("direction levels are misaligned");
  const std::size_t steps = traj.steps();
  double sum = 0.0;
  for (std::size_t n = 0; n <= steps; ++n) {
    Field g = control_coupling_adjoint(traj.states[n], adj[n]);
    g.axpy(p.sigma, traj.controls[n]);
    sum += trapezoid_weight(n, steps, traj.dt) * inner(g, direction[n]);
  }
  return 2.0 * sum;
}

/// ||a - b|| / max(||a||, 1e-12) over all levels (space-time L2).
template <class GetNew, class GetOld>
double relative_change(std::size_t levels, GetNew&& get_new, GetOld&& get_old) {
  double diff = 0.0;
  double norm = 0.0;
  for (std::size_t n = 0; n < levels; ++n) {
    const Field& a = get_new(n);
    const Field& b = get_old(n);
    for (std::size_t k = 0; k < a.size(); ++k) {
      diff += (a[k] - b[k]) * (a[k] - b[k]);
      norm += a[k] * a[k];
    }
  }
  return std::sqrt(diff) / std::max(std::sqrt(norm), 1e-12);
}

struct FbsIteration {
  int iter = 0;
  double err = 0.0;
  double relax_w = 0.0;  // weight used for this sweep's update
  ObjectiveBreakdown objective;  // of the forward solve performed in this iteration
};

struct FbsResult {
  Trajectory trajectory;  // driven by the final control
  std::vector<AdjointState> adjoint;
  std::vector<FbsIteration> log;
  ObjectiveBreakdown final_objective;
  bool converged = false;
  /// ||u - clamp(S (rho1 - rho4) / sigma)|| / ||u|| at the accepted iterate.
  double stationarity = 0.0;
  /// Relaxation weight in force at the last sweep.
  double relax_w = 0.0;
};

/// Forward-backward sweep from u = 0. Stops when Err <= tol or after max_iter
/// sweeps; non-convergence is reported through `converged`, not thrown.
inline FbsResult fbs_solve(const SeirState& init, const ModelParams& p, const FractionalParams& fp, double dt,
                           std::size_t steps, const FbsConfig& cfg, const SolverOptions& solver_opts = {},
                           const AdjointOptions& adjoint_opts = {},
                           const std::function<void(const FbsIteration&)>& on_iteration = {}) {
  cfg.validate();
  FbsResult result;
  FbsConfig sweep_cfg = cfg;
  std::vector<ControlField> u = zero_controls(init.grid(), steps);
  Trajectory prev_traj;
  std::vector<AdjointState> prev_adj;

  for (int k = 1; k <= cfg.max_iter; ++k) {
    Trajectory traj = forward_solve(init, u, p, fp, dt, steps, solver_opts);
    std::vector<AdjointState> adj = adjoint_solve(traj, p, fp, adjoint_opts);
    std::vector<ControlField> candidate = control_candidate(traj, adj, p);
    std::vector<ControlField> u_new = update_control(traj, adj, p, sweep_cfg);

    const std::size_t levels = steps + 1;
    std::vector<double> errs;
    errs.push_back(relative_change(levels, [&](std::size_t n) -> const Field& { return u_new[n]; },
                                   [&](std::size_t n) -> const Field& { return u[n]; }));
    // The first sweep has no earlier state or costate to compare against.
    if (!prev_traj.states.empty()) {
      for (std::size_t c = 0; c < kCompartments; ++c) {
        errs.push_back(relative_change(levels, [&](std::size_t n) -> const Field& { return traj.states[n][c]; },
                                       [&](std::size_t n) -> const Field& { return prev_traj.states[n][c]; }));
        errs.push_back(relative_change(levels, [&](std::size_t n) -> const Field& { return adj[n][c]; },
                                       [&](std::size_t n) -> const Field& { return prev_adj[n][c]; }));
      }
    }
    const double err = cfg.aggregate == ErrAggregate::kMax ? *std::max_element(errs.begin(), errs.end())
                                                            : *std::min_element(errs.begin(), errs.end());

    FbsIteration it{k, err, sweep_cfg.relax_w, objective_J(traj, p)};
    result.log.push_back(it);
    if (on_iteration) on_iteration(it);

    result.stationarity = relative_change(levels, [&](std::size_t n) -> const Field& { return u_new[n]; },
                                          [&](std::size_t n) -> const Field& { return candidate[n]; });
    result.adjoint = std::move(adj);
    prev_traj = std::move(traj);
    prev_adj = result.adjoint;
    u = std::move(u_new);
    result.relax_w = sweep_cfg.relax_w;
    if (err <= cfg.tol) {
      result.converged = true;
      break;
    }
    // Sweep 2 is measured against the uncontrolled sweep, so growth is only
    // meaningful from sweep 3 on.
    if (cfg.adaptive_relax && k >= 3 && err > result.log[result.log.size() - 2].err) {
      sweep_cfg.relax_w = std::max(cfg.min_relax_w, 0.5 * sweep_cfg.relax_w);
    }
  }

  result.trajectory = forward_solve(init, std::move(u), p, fp, dt, steps, solver_opts);
  result.final_objective = objective_J(result.trajectory, p);
  return result;
}

}  // namespace cfseir
