#pragma once

// Costate solver for the dual of the controlled SEIR system.
//
// With tau = T - t the backward CFC derivative becomes the forward one, so the
// dual system is marched forward in tau with the same Volterra machinery as the
// state:
//
//   G_adj(rho, tau) = lambda * Lap(rho) + N(w(T - tau), u(T - tau))^T rho + W*W w(T - tau)
//
// Two discretisations are provided:
//
//  * kReversedVolterra marches G_adj from rho(T) = W*W w(T) exactly like
//    forward_solve. It is the direct discretisation of the continuous dual
//    system.
//  * kDiscreteConsistent (default) is the transpose of the discrete forward
//    map, written as the same reversed Volterra recursion (weights, implicit
//    instantaneous term, left-rectangle accumulator) with the objective's
//    trapezoid weights folded into the source. Dividing by the trapezoid weight
//    turns it back into a density, so the gradient formula
//    2 sum_n w_n (F* rho_n + sigma u_n, nu_n) is the exact derivative of the
//    discrete objective up to the corrector truncation.
//
// In both schemes the level-T value is W*W w(T).

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "cfseir/caputo_fabrizio.hpp"
#include "cfseir/errors.hpp"
#include "cfseir/forward_solver.hpp"
#include "cfseir/grid.hpp"
#include "cfseir/seir.hpp"
#include "cfseir/volterra.hpp"

namespace cfseir {

enum class AdjointScheme { kDiscreteConsistent, kReversedVolterra };

struct AdjointOptions {
  AdjointScheme scheme = AdjointScheme::kDiscreteConsistent;
  int corrector_passes = 2;
  double safety = 0.9;
  /// Off: drop the N^T coupling (pure diffusion of the costate).
  bool reaction = true;
  /// Off: no running source W*W w (the terminal value is kept).
  bool running_source = true;
};

/// Trapezoid weight of level n out of 0..steps.
inline double trapezoid_weight(std::size_t n, std::size_t steps, double dt) {
  return (n == 0 || n == steps) ? 0.5 * dt : dt;
}

namespace detail {

// lambda * Lap(rho) + N^T rho, with the coefficients of state level n.
inline AdjointState costate_operator(const AdjointState& rho, const Trajectory& traj, std::size_t n,
                                     const ModelParams& p, bool reaction) {
  AdjointState out =
      reaction ? apply_jacobian_transpose(traj.states[n], traj.controls[n], p, rho) : AdjointState(rho.grid());
  for (std::size_t c = 0; c < kCompartments; ++c) out[c].axpy(p.lambda[c], laplacian_neumann(rho[c]));
  return out;
}

inline std::vector<AdjointState> adjoint_reversed_volterra(const Trajectory& traj, const ModelParams& p,
                                                           const FractionalParams& fp, const AdjointOptions& opts) {
  const std::size_t steps = traj.steps();
  const AdjointState terminal = observe_WtW(traj.states[steps]);
  auto rhs = [&](const AdjointState& rho_hat, std::size_t m) {
    const std::size_t n = steps - m;
    AdjointState g = costate_operator(rho_hat, traj, n, p, opts.reaction);
    if (opts.running_source) g[kI] += traj.states[n][kI];
    return g;
  };
  std::vector<AdjointState> reversed =
      volterra_march(terminal, steps, traj.dt, fp, VolterraOptions{opts.corrector_passes}, rhs);
  return {reversed.rbegin(), reversed.rend()};
}

inline std::vector<AdjointState> adjoint_discrete(const Trajectory& traj, const ModelParams& p,
                                                  const FractionalParams& fp, const AdjointOptions& opts) {
  const std::size_t steps = traj.steps();
  const double dt = traj.dt;
  const double instant = fp.instant_weight();
  const double memory = fp.memory_weight();
  const GridSpec& grid = traj.grid();

  // Weighted source of state level n: w_n W*W w_n, plus W*W w_T at n = T.
  auto source = [&](std::size_t n) {
    AdjointState s(grid);
    if (opts.running_source) s[kI].axpy(trapezoid_weight(n, steps, dt), traj.states[n][kI]);
    if (n == steps) s[kI] += traj.states[n][kI];
    return s;
  };
  // G~ at reversed level m (state level n = steps - m).
  auto rhs = [&](const AdjointState& pi, std::size_t m) {
    const std::size_t n = steps - m;
    AdjointState g = costate_operator(pi, traj, n, p, opts.reaction);
    g.axpy(1.0, source(n));
    return g;
  };

  std::vector<AdjointState> pi(steps + 1);

  // m = 0: only the instantaneous term acts, pi_T = c G~(pi_T).
  {
    AdjointState next(grid);
    if (!fp.is_classical()) {
      next = source(steps);
      next *= instant;
      for (int pass = 0; pass < opts.corrector_passes; ++pass) {
        AdjointState corrected = rhs(next, 0);
        corrected *= instant;
        next = std::move(corrected);
      }
    }
    pi[0] = std::move(next);
  }

  AdjointState accumulator(grid);
  for (std::size_t m = 1; m <= steps; ++m) {
    const AdjointState g_prev = rhs(pi[m - 1], m - 1);
    accumulator.axpy(dt, g_prev);

    AdjointState base = accumulator;
    base *= memory;
    AdjointState next = base;
    // The initial state is fixed, so level 0 (m = steps) carries no instantaneous term.
    if (!fp.is_classical() && m < steps) {
      next.axpy(instant, g_prev);
      for (int pass = 0; pass < opts.corrector_passes; ++pass) {
        AdjointState corrected = base;
        corrected.axpy(instant, rhs(next, m));
        next = std::move(corrected);
      }
    }
    if (!next.all_finite()) throw SolverError("non-finite value in adjoint march", steps - m);
    pi[m] = std::move(next);
  }

  std::vector<AdjointState> rho(steps + 1);
  for (std::size_t n = 0; n < steps; ++n) {
    rho[n] = std::move(pi[steps - n]);
    rho[n] *= 1.0 / trapezoid_weight(n, steps, dt);
  }
  rho[steps] = observe_WtW(traj.states[steps]);
  return rho;
}

}  // namespace detail

/// Solves the dual system backward in time. Returned vector is indexed by the
/// original time level 0..steps.
inline std::vector<AdjointState> adjoint_solve(const Trajectory& traj, const ModelParams& p,
                                               const FractionalParams& fp, const AdjointOptions& opts = {}) {
  if (traj.states.empty()) throw std::invalid_argument("adjoint_solve: empty trajectory");
  if (traj.controls.size() != traj.states.size()) {
    throw std::invalid_argument("adjoint_solve: trajectory controls do not match its levels");
  }
  const GridSpec& grid = traj.grid();
  for (const SeirState& w : traj.states) {
    if (!(w.grid() == grid)) throw std::invalid_argument("adjoint_solve: trajectory grid mismatch");
  }
  for (const ControlField& u : traj.controls) traj.states[0][kS].check_same(u);
  check_march_stability(grid, p.lambda_max(), fp, traj.dt, opts.safety);

  return opts.scheme == AdjointScheme::kDiscreteConsistent ? detail::adjoint_discrete(traj, p, fp, opts)
                                                           : detail::adjoint_reversed_volterra(traj, p, fp, opts);
}

}  // namespace cfseir
