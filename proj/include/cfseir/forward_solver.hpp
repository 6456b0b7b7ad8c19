#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "cfseir/caputo_fabrizio.hpp"
#include "cfseir/errors.hpp"
#include "cfseir/grid.hpp"
#include "cfseir/seir.hpp"
#include "cfseir/volterra.hpp"

namespace cfseir {

struct SolverOptions {
  int corrector_passes = 2;
  /// Fraction of the explicit diffusion bound dt may use.
  double safety = 0.9;
  /// Off: pure diffusion (used for verification against modal solutions).
  bool reaction = true;
};

/// Every time level of a state march together with the control it was driven by.
struct Trajectory {
  double dt = 0.0;
  std::vector<SeirState> states;
  std::vector<ControlField> controls;

  std::size_t steps() const noexcept { return states.empty() ? 0 : states.size() - 1; }
  double time(std::size_t n) const noexcept { return dt * static_cast<double>(n); }
  double final_time() const noexcept { return time(steps()); }
  const GridSpec& grid() const { return states.at(0).grid(); }
};

/// Zero control on every level 0..steps.
inline std::vector<ControlField> zero_controls(const GridSpec& grid, std::size_t steps) {
  return std::vector<ControlField>(steps + 1, ControlField(grid, 0.0));
}

/// G(w, u) = lambda * Lap(w) + Phi(w, u), compartment by compartment.
inline SeirState state_rhs(const SeirState& w, const ControlField& u, const ModelParams& p, bool reaction = true) {
  SeirState g = reaction ? reaction_phi(w, u, p) : SeirState(w.grid());
  for (std::size_t c = 0; c < kCompartments; ++c) g[c].axpy(p.lambda[c], laplacian_neumann(w[c]));
  return g;
}

/// Integrates the controlled SEIR system over `steps` levels of size dt.
/// `controls` holds one field per level (empty means u = 0 throughout).
inline Trajectory forward_solve(const SeirState& init, std::vector<ControlField> controls, const ModelParams& p,
                                const FractionalParams& fp, double dt, std::size_t steps,
                                const SolverOptions& opts = {}) {
  const GridSpec& grid = init.grid();
  grid.validate();
  if (opts.reaction) p.require_birth_le_mortality();
  check_march_stability(grid, p.lambda_max(), fp, dt, opts.safety);

  if (controls.empty()) controls = zero_controls(grid, steps);
  if (controls.size() != steps + 1) throw std::invalid_argument("forward_solve: need one control field per level");
  for (const ControlField& u : controls) init[kS].check_same(u);

  Trajectory traj;
  traj.dt = dt;
  traj.states = volterra_march(init, steps, dt, fp, VolterraOptions{opts.corrector_passes},
                               [&](const SeirState& w, std::size_t level) {
                                 return state_rhs(w, controls[level], p, opts.reaction);
                               });
  traj.controls = std::move(controls);
  return traj;
}

/// Total population (people) at level n.
inline double total_population(const Trajectory& traj, std::size_t n) {
  return cell_integral(traj.states.at(n).total());
}

/// max over levels of ||S + E + I + R||_{L2(Omega)}.
inline double population_norm_linf_l2(const Trajectory& traj) {
  double m = 0.0;
  for (const SeirState& w : traj.states) m = std::max(m, std::sqrt(l2_norm_sq(w.total())));
  return m;
}

/// Smallest value of any compartment over all cells and levels.
inline double min_compartment_value(const Trajectory& traj) {
  double m = traj.states.at(0)[0].min();
  for (const SeirState& w : traj.states) {
    for (const Field& f : w.comp) m = std::min(m, f.min());
  }
  return m;
}

}  // namespace cfseir
