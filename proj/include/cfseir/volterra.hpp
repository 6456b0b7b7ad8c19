#pragma once

// Time stepping for CF-fractional evolution problems written in integral form:
//
//   w(t_n) = w_0 + (1-a)/M * G(w(t_n), t_n) + a/M * Q_n,   Q_n = Q_{n-1} + dt * G(w_{n-1}, t_{n-1})
//
// The instantaneous term is resolved by a predictor (evaluated at the previous
// level) followed by a fixed number of Picard corrector passes. At alpha = 1
// the instantaneous weight vanishes and the march is forward Euler.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "cfseir/caputo_fabrizio.hpp"
#include "cfseir/errors.hpp"
#include "cfseir/grid.hpp"

namespace cfseir {

struct VolterraOptions {
  int corrector_passes = 2;
};

/// Explicit diffusion bound dx^2 dy^2 / (2 lambda (dx^2 + dy^2)), in days.
inline double diffusion_stability_bound(const GridSpec& grid, double lambda_max) {
  const double dx2 = grid.dx * grid.dx;
  const double dy2 = grid.dy * grid.dy;
  return dx2 * dy2 / (2.0 * lambda_max * (dx2 + dy2));
}

/// (1-a)/M times the spectral radius of the diffusion operator. The Picard
/// corrector passes only contract (and the march only stays bounded) below 1.
inline double corrector_contraction(const GridSpec& grid, double lambda_max, const FractionalParams& fp) {
  const double lap_radius = 4.0 / (grid.dx * grid.dx) + 4.0 / (grid.dy * grid.dy);
  return fp.instant_weight() * lambda_max * lap_radius;
}

inline void check_march_stability(const GridSpec& grid, double lambda_max, const FractionalParams& fp, double dt,
                                  double safety = 0.9) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw SolverError("time step must be positive and finite");
  const double bound = safety * diffusion_stability_bound(grid, lambda_max);
  if (dt > bound) {
    throw SolverError("dt = " + std::to_string(dt) + " exceeds the explicit diffusion bound " + std::to_string(bound));
  }
  const double q = corrector_contraction(grid, lambda_max, fp);
  if (q >= 1.0) {
    throw SolverError("corrector contraction (1-alpha)/M * lambda * |Lap| = " + std::to_string(q) +
                      " must be below 1; refine alpha or coarsen the grid");
  }
}

/// Marches `steps` levels from `initial`. `rhs(w, level)` returns G evaluated
/// with the coefficients of time level `level`. State needs axpy, operator*=
/// and all_finite. Returns levels 0..steps.
template <class State, class Rhs>
std::vector<State> volterra_march(const State& initial, std::size_t steps, double dt, const FractionalParams& fp,
                                  const VolterraOptions& opts, Rhs&& rhs) {
  const double instant = fp.instant_weight();
  const double memory = fp.memory_weight();

  std::vector<State> levels;
  levels.reserve(steps + 1);
  levels.push_back(initial);

  State accumulator = initial;
  accumulator *= 0.0;

  for (std::size_t n = 1; n <= steps; ++n) {
    const State g_prev = rhs(levels[n - 1], n - 1);
    accumulator.axpy(dt, g_prev);  // left rectangle: Q_n = Q_{n-1} + dt G_{n-1}

    State base = initial;
    base.axpy(memory, accumulator);

    State next = base;
    if (!fp.is_classical()) {
      next.axpy(instant, g_prev);
      for (int pass = 0; pass < opts.corrector_passes; ++pass) {
        State corrected = base;
        corrected.axpy(instant, rhs(next, n));
        next = std::move(corrected);
      }
    }
    if (!next.all_finite()) throw SolverError("non-finite value in time march", n);
    levels.push_back(std::move(next));
  }
  return levels;
}

}  // namespace cfseir
