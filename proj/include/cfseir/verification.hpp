#pragma once

// Acceptance checks. Each returns one CheckResult with the worst measured value
// over its cases; `verify` and the acceptance test binary both print them.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cfseir/adjoint_solver.hpp"
#include "cfseir/caputo_fabrizio.hpp"
#include "cfseir/config.hpp"
#include "cfseir/control.hpp"
#include "cfseir/forward_solver.hpp"
#include "cfseir/io.hpp"
#include "cfseir/runner.hpp"
#include "cfseir/seir.hpp"
#include "cfseir/spectral.hpp"

namespace cfseir {

struct CheckResult {
  int id = 0;
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

inline std::string format_check(const CheckResult& r) {
  std::ostringstream os;
  os << (r.pass ? "PASS" : "FAIL") << "  [" << r.id << "] " << r.name << ": measured " << format_number(r.measured)
     << ", tolerance " << format_number(r.tolerance);
  if (!r.detail.empty()) os << " (" << r.detail << ")";
  return os.str();
}

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

struct TestFunction {
  const char* name;
  double (*f)(double);
};

inline const std::array<TestFunction, 4>& test_functions() {
  static const std::array<TestFunction, 4> fs{{{"t", [](double t) { return t; }},
                                               {"t^2", [](double t) { return t * t; }},
                                               {"sin t", [](double t) { return std::sin(t); }},
                                               {"exp(-t)", [](double t) { return std::exp(-t); }}}};
  return fs;
}

inline constexpr std::array<double, 3> kOperatorAlphas{0.5, 0.8, 0.9};
inline constexpr std::array<double, 3> kSweepAlphas{0.8, 0.9, 1.0};

// max_n |CF_I(CFC_D f)(t_n) - (f(t_n) - f(0))| on [0, 1].
inline double composition_residual(double (*f)(double), const FractionalParams& fp, double dt) {
  const std::size_t steps = static_cast<std::size_t>(std::llround(1.0 / dt));
  const TimeSeries s = TimeSeries::sample(f, dt, steps);
  const std::vector<double> d = cfc_derivative_forward_all(s, fp);
  const std::vector<double> back = cf_integral_all(TimeSeries(dt, d), fp);
  double m = 0.0;
  for (std::size_t n = 0; n <= steps; ++n) m = std::max(m, std::abs(back[n] - (s.values[n] - s.values[0])));
  return m;
}

/// Reference seeding on an arbitrary grid: S = 100, and 70 / 20 / 10 for S / E / I in the seed cell.
inline SeirState seeded_state(const GridSpec& g, std::size_t ix, std::size_t iy) {
  SeirState w(g);
  w[kS] = Field(g, 100.0);
  w[kS](ix, iy) = 70.0;
  w[kE](ix, iy) = 20.0;
  w[kI](ix, iy) = 10.0;
  return w;
}

// Forward Euler for the SEIR system written directly on flat arrays, sharing no
// code with the library solver.
inline std::vector<std::vector<double>> euler_reference(const SeirState& init, const ModelParams& p, double dt,
                                                        std::size_t steps) {
  const GridSpec& g = init.grid();
  const std::size_t nx = g.nx;
  const std::size_t ny = g.ny;
  const std::size_t cells = nx * ny;
  std::vector<double> w(4 * cells);
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t k = 0; k < cells; ++k) w[c * cells + k] = init[c][k];
  }
  std::vector<double> next(w.size());
  const double lam[4] = {p.lambda[0], p.lambda[1], p.lambda[2], p.lambda[3]};
  for (std::size_t n = 0; n < steps; ++n) {
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t i = 0; i < nx; ++i) {
        const std::size_t k = j * nx + i;
        const std::size_t west = j * nx + (i > 0 ? i - 1 : i);
        const std::size_t east = j * nx + (i + 1 < nx ? i + 1 : i);
        const std::size_t south = (j > 0 ? j - 1 : j) * nx + i;
        const std::size_t north = (j + 1 < ny ? j + 1 : j) * nx + i;
        const double s = w[k];
        const double e = w[cells + k];
        const double in = w[2 * cells + k];
        const double r = w[3 * cells + k];
        const double total = s + e + in + r;
        const double react[4] = {p.beta * total - p.mu * s * in - p.xi * s,
                                 p.mu * s * in - (p.xi + p.kappa) * e,
                                 p.kappa * e - (p.xi + p.eta) * in,
                                 p.eta * in - p.xi * r};
        for (std::size_t c = 0; c < 4; ++c) {
          const double* v = w.data() + c * cells;
          const double lap = (v[west] - 2.0 * v[k] + v[east]) / (g.dx * g.dx) +
                             (v[south] - 2.0 * v[k] + v[north]) / (g.dy * g.dy);
          next[c * cells + k] = v[k] + dt * (lam[c] * lap + react[c]);
        }
      }
    }
    w.swap(next);
  }
  std::vector<std::vector<double>> out(4);
  for (std::size_t c = 0; c < 4; ++c) out[c].assign(w.begin() + c * cells, w.begin() + (c + 1) * cells);
  return out;
}

inline bool same_file_bytes(const std::filesystem::path& a, const std::filesystem::path& b) {
  std::ifstream fa(a, std::ios::binary);
  std::ifstream fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  const std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  const std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  return sa == sb;
}

}  // namespace detail

/// Random valid configuration for round-trip testing.
inline RunConfig random_config(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto rate = [&] { return 0.001 + 0.99 * unit(rng); };
  RunConfig c;
  c.model.xi = rate();
  c.model.beta = std::max(1e-4, c.model.xi * unit(rng));
  c.model.kappa = rate();
  c.model.mu = rate();
  c.model.eta = rate();
  for (double& l : c.model.lambda) l = 0.01 + unit(rng);
  c.model.sigma = 0.1 + 10.0 * unit(rng);
  c.alpha = unit(rng) < 0.2 ? 1.0 : 0.05 + 0.95 * unit(rng);
  c.grid.nx = 3 + static_cast<std::size_t>(rng() % 30);
  c.grid.ny = 3 + static_cast<std::size_t>(rng() % 30);
  c.grid.dx = 0.1 + 2.0 * unit(rng);
  c.grid.dy = 0.1 + 2.0 * unit(rng);
  c.dt = std::ldexp(1.0, -static_cast<int>(rng() % 8));  // exact powers of two keep T / dt integral
  c.T = c.dt * static_cast<double>(1 + rng() % 2000);
  c.corrector_passes = static_cast<int>(rng() % 5);
  c.fbs.tol = std::pow(10.0, -1.0 - 5.0 * unit(rng));
  c.fbs.max_iter = 1 + static_cast<int>(rng() % 300);
  c.fbs.relax_w = 0.05 + 0.95 * unit(rng);
  c.fbs.min_relax_w = c.fbs.relax_w * (0.01 + 0.99 * unit(rng));
  c.fbs.adaptive_relax = rng() % 2 == 0;
  c.fbs.aggregate = rng() % 2 == 0 ? ErrAggregate::kMax : ErrAggregate::kMin;
  c.out_dir = "runs/case_" + std::to_string(rng() % 100000);
  c.save_every = 1 + rng() % 100;
  for (InitialCondition& ic : c.initial) {
    ic.uniform = rng() % 3 == 0 ? 0.0 : 200.0 * unit(rng);
    ic.cells.clear();
    const std::size_t overrides = rng() % 4;
    for (std::size_t k = 0; k < overrides; ++k) {
      ic.cells.push_back({rng() % c.grid.nx, rng() % c.grid.ny, 100.0 * unit(rng)});
    }
  }
  return c;
}

/// [1] CF_I(CFC_D f) = f - f(0) to first order in dt.
inline CheckResult check_operator_composition() {
  CheckResult r{1, "operator composition, first order", 0.0, 1e-3, true, {}};
  double worst_ratio = 1e300;
  for (const auto& tf : detail::test_functions()) {
    for (double a : detail::kOperatorAlphas) {
      const FractionalParams fp(a);
      const double coarse = detail::composition_residual(tf.f, fp, 1e-2);
      const double fine = detail::composition_residual(tf.f, fp, 1e-3);
      r.measured = std::max(r.measured, fine);
      worst_ratio = std::min(worst_ratio, coarse / fine);
      if (!(fine <= 1e-3) || !(fine <= 0.5 * coarse)) r.pass = false;
    }
  }
  r.detail = "max residual at dt=1e-3; smallest coarse/fine ratio " + detail::fmt(worst_ratio) + " (need >= 2)";
  return r;
}

/// [2] f CFC_D f - 1/2 CFC_D (f^2) >= -1e-8 max|f|^2 at every sample.
inline CheckResult check_energy_inequality() {
  CheckResult r{2, "derivative energy inequality", 1e300, -1e-8, true, {}};
  for (const auto& tf : detail::test_functions()) {
    for (double a : detail::kOperatorAlphas) {
      const FractionalParams fp(a);
      for (double dt : {1e-2, 1e-3}) {
        const std::size_t steps = static_cast<std::size_t>(std::llround(1.0 / dt));
        const TimeSeries s = TimeSeries::sample(tf.f, dt, steps);
        TimeSeries sq = s;
        double fmax2 = 0.0;
        for (double& v : sq.values) {
          v *= v;
          fmax2 = std::max(fmax2, v);
        }
        const std::vector<double> d = cfc_derivative_forward_all(s, fp);
        const std::vector<double> d2 = cfc_derivative_forward_all(sq, fp);
        for (std::size_t n = 1; n <= steps; ++n) {
          const double gap = (d[n] * s.values[n] - 0.5 * d2[n]) / fmax2;
          r.measured = std::min(r.measured, gap);
        }
      }
    }
  }
  r.pass = r.measured >= r.tolerance;
  r.detail = "min of (f D f - D(f^2)/2) / max f^2 over all samples";
  return r;
}

/// [3] Pure diffusion vs the modal solution of mode (1,0) plus mean.
inline CheckResult check_spectral_oracle() {
  CheckResult r{3, "spectral oracle, pure diffusion", 0.0, 0.02, true, {}};
  const GridSpec g{64, 3, 0.5, 0.5};
  ModelParams p;
  p.lambda = {0.1, 0.1, 0.1, 0.1};
  const std::vector<ModeTerm> modes{{0, 0, 1.0}, {1, 0, 0.1}};
  const double t_end = 10.0;
  SolverOptions so;
  so.reaction = false;
  std::ostringstream detail;
  for (double a : detail::kSweepAlphas) {
    const FractionalParams fp(a);
    const Field ref = reference_linear_solution(modes, g, 0.1, fp, t_end, SpectrumMode::kDiscreteStencil);
    SeirState init(g);
    init[kS] = reference_linear_solution(modes, g, 0.1, fp, 0.0, SpectrumMode::kDiscreteStencil);
    double errs[2];
    int k = 0;
    for (double dt : {1e-3, 5e-4}) {
      const std::size_t steps = static_cast<std::size_t>(std::llround(t_end / dt));
      const Trajectory tr = forward_solve(init, {}, p, fp, dt, steps, so);
      const Field& got = tr.states.back()[kS];
      double num = 0.0;
      double den = 0.0;
      for (std::size_t c = 0; c < ref.size(); ++c) {
        num = std::max(num, std::abs(got[c] - ref[c]));
        den = std::max(den, std::abs(ref[c]));
      }
      errs[k++] = num / den;
    }
    const double ratio = errs[0] / errs[1];
    r.measured = std::max(r.measured, errs[0]);
    if (!(errs[0] <= r.tolerance) || !(ratio >= 1.6 && ratio <= 2.4)) r.pass = false;
    detail << "alpha " << a << ": err " << detail::fmt(errs[0]) << " ratio " << detail::fmt(ratio) << "; ";
  }
  r.detail = detail.str() + "ratio must lie in [1.6, 2.4]";
  return r;
}

/// [4] At alpha = 1 the solver is forward Euler.
inline CheckResult check_classical_degeneracy() {
  CheckResult r{4, "alpha = 1 equals forward Euler", 0.0, 1e-12, true, {}};
  const RunConfig cfg;
  const std::size_t steps = 100;
  const Trajectory tr = forward_solve(cfg.initial_state(), {}, cfg.model, FractionalParams(1.0), cfg.dt, steps);
  const auto ref = detail::euler_reference(cfg.initial_state(), cfg.model, cfg.dt, steps);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t c = 0; c < kCompartments; ++c) {
    for (std::size_t k = 0; k < ref[c].size(); ++k) {
      num = std::max(num, std::abs(tr.states.back()[c][k] - ref[c][k]));
      den = std::max(den, std::abs(ref[c][k]));
    }
  }
  r.measured = num / den;
  r.pass = r.measured <= r.tolerance;
  r.detail = "max relative difference after 100 steps";
  return r;
}

/// [5] beta = xi, u = 0 conserves total population.
inline CheckResult check_conservation() {
  CheckResult r{5, "population conservation (beta = xi)", 0.0, 1e-10, true, {}};
  RunConfig cfg;
  cfg.model.beta = cfg.model.xi;
  for (double a : detail::kSweepAlphas) {
    const Trajectory tr =
        forward_solve(cfg.initial_state(), {}, cfg.model, FractionalParams(a), cfg.dt, cfg.steps());
    const double p0 = total_population(tr, 0);
    for (std::size_t n = 0; n <= tr.steps(); ++n) {
      r.measured = std::max(r.measured, std::abs(total_population(tr, n) - p0) / p0);
    }
  }
  r.pass = r.measured <= r.tolerance;
  r.detail = "max relative drift over 60 days, alpha 0.8/0.9/1";
  return r;
}

/// [6] Nonnegativity on the reference run; theta reported.
inline CheckResult check_positivity() {
  CheckResult r{6, "positivity", 1e300, 0.0, true, {}};
  const RunConfig cfg;
  const SeirState init = cfg.initial_state();
  double init_max = 0.0;
  for (const Field& f : init.comp) init_max = std::max(init_max, f.max());
  r.tolerance = -1e-9 * init_max;
  std::ostringstream thetas;
  for (double a : detail::kSweepAlphas) {
    const FractionalParams fp(a);
    const Trajectory tr = forward_solve(init, {}, cfg.model, fp, cfg.dt, cfg.steps());
    r.measured = std::min(r.measured, min_compartment_value(tr));
    thetas << "; theta(" << a << ") = " << detail::fmt(positivity_threshold_theta(population_norm_linf_l2(tr), fp));
  }
  r.pass = r.measured >= r.tolerance;
  r.detail = "min over cells/steps/compartments" + thetas.str();
  return r;
}

/// [7] Adjoint gradient vs central finite differences of the objective.
inline CheckResult check_gradient_duality() {
  CheckResult r{7, "adjoint gradient vs finite differences", 0.0, 1e-2, true, {}};
  const GridSpec g{8, 8, 1.0, 1.0};
  const ModelParams p;
  const double dt = 0.05;
  const std::size_t steps = 100;  // T = 5
  const double h = 1e-4;
  const SeirState init = detail::seeded_state(g, 4, 4);
  std::mt19937_64 rng(20240607);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<std::vector<ControlField>> directions;
  for (int d = 0; d < 5; ++d) {
    std::vector<ControlField> nu;
    for (std::size_t n = 0; n <= steps; ++n) {
      Field f(g);
      for (double& v : f.values()) v = dist(rng);
      nu.push_back(std::move(f));
    }
    directions.push_back(std::move(nu));
  }
  auto objective = [&](const FractionalParams& fp, const std::vector<ControlField>& u) {
    return objective_J(forward_solve(init, u, p, fp, dt, steps), p).total;
  };
  for (double a : {1.0, 0.9}) {
    const FractionalParams fp(a);
    const std::vector<ControlField> base(steps + 1, ControlField(g, 0.25));
    const Trajectory tr = forward_solve(init, base, p, fp, dt, steps);
    const std::vector<AdjointState> adj = adjoint_solve(tr, p, fp);
    for (const auto& nu : directions) {
      std::vector<ControlField> plus = base;
      std::vector<ControlField> minus = base;
      for (std::size_t n = 0; n <= steps; ++n) {
        plus[n].axpy(h, nu[n]);
        minus[n].axpy(-h, nu[n]);
      }
      const double fd = (objective(fp, plus) - objective(fp, minus)) / (2.0 * h);
      const double ad = gradient_of_J(tr, adj, nu, p);
      r.measured = std::max(r.measured, std::abs(ad - fd) / std::abs(fd));
    }
  }
  r.pass = r.measured <= r.tolerance;
  r.detail = "max relative error over 5 directions, alpha 1 and 0.9";
  return r;
}

/// [8] The optimized control beats no control.
inline CheckResult check_optimization_efficacy() {
  CheckResult r{8, "optimization efficacy", 0.0, 1e-3, true, {}};
  const RunConfig base;
  std::ostringstream detail;
  for (double a : detail::kSweepAlphas) {
    const FractionalParams fp(a);
    const SeirState init = base.initial_state();
    const Trajectory free_run = forward_solve(init, {}, base.model, fp, base.dt, base.steps());
    const double j0 = objective_J(free_run, base.model).total;
    const FbsResult res = fbs_solve(init, base.model, fp, base.dt, base.steps(), base.fbs);
    const double err = res.log.back().err;
    const double j1 = res.final_objective.total;
    const double r_free = cell_integral(free_run.states.back()[kR]);
    const double r_ctrl = cell_integral(res.trajectory.states.back()[kR]);
    const double i_free = cell_integral(free_run.states.back()[kI]);
    const double i_ctrl = cell_integral(res.trajectory.states.back()[kI]);
    r.measured = std::max(r.measured, err);
    const bool ok = res.converged && res.log.size() <= 100 && err <= 1e-3 && j1 < j0 && r_ctrl > r_free &&
                    i_ctrl < i_free;
    if (!ok) r.pass = false;
    detail << "alpha " << a << ": " << res.log.size() << " sweeps, J " << detail::fmt(j1) << " vs "
           << detail::fmt(j0) << ", R(T) " << detail::fmt(r_ctrl) << " vs " << detail::fmt(r_free) << ", I(T) "
           << detail::fmt(i_ctrl) << " vs " << detail::fmt(i_free) << "; ";
  }
  r.detail = detail.str() + "measured = final Err";
  return r;
}

/// Corner arrival steps of the uncontrolled reference run for each alpha in {0.8, 0.9, 1}.
inline std::array<std::optional<std::size_t>, 3> corner_arrival_steps() {
  const RunConfig cfg;
  std::array<std::optional<std::size_t>, 3> out;
  for (std::size_t k = 0; k < 3; ++k) {
    const Trajectory tr = forward_solve(cfg.initial_state(), {}, cfg.model, FractionalParams(detail::kSweepAlphas[k]),
                                        cfg.dt, cfg.steps());
    out[k] = arrival_step(tr, 0, 0);
  }
  return out;
}

/// [9] Lower order delays arrival at the corner.
inline CheckResult check_fractional_slowdown() {
  CheckResult r{9, "fractional slowdown of corner arrival", 0.0, 0.0, true, {}};
  const auto steps = corner_arrival_steps();
  std::ostringstream detail;
  for (std::size_t k = 0; k < 3; ++k) {
    detail << "alpha " << detail::kSweepAlphas[k] << ": "
           << (steps[k] ? std::to_string(*steps[k]) : std::string("never")) << "; ";
  }
  const bool all = steps[0] && steps[1] && steps[2];
  if (all) {
    r.measured = static_cast<double>(*steps[0]) - static_cast<double>(*steps[2]);
    r.pass = *steps[0] >= *steps[1] && *steps[1] >= *steps[2] && *steps[0] > *steps[2];
  } else {
    r.pass = false;
  }
  r.detail = detail.str() + "measured = step(0.8) - step(1.0), must be > 0 and monotone";
  return r;
}

/// [10] Bitwise-reproducible frames and config text round trip.
inline CheckResult check_determinism_roundtrip(const std::filesystem::path& scratch) {
  CheckResult r{10, "determinism and config round trip", 0.0, 0.0, true, {}};
  RunConfig cfg;
  cfg.alpha = 0.9;
  const auto a = scratch / "run_a";
  const auto b = scratch / "run_b";
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
  run_simulate(cfg, a);
  run_simulate(cfg, b);
  std::size_t files = 0;
  std::size_t mismatched = 0;
  for (const auto& entry : std::filesystem::directory_iterator(a / "frames")) {
    ++files;
    if (!detail::same_file_bytes(entry.path(), b / "frames" / entry.path().filename())) ++mismatched;
  }
  std::size_t b_files = 0;
  for ([[maybe_unused]] const auto& entry : std::filesystem::directory_iterator(b / "frames")) ++b_files;
  if (b_files != files) ++mismatched;

  std::mt19937_64 rng(7);
  std::size_t bad_roundtrips = 0;
  for (int k = 0; k < 50; ++k) {
    const RunConfig c = random_config(rng);
    if (!(parse_config(serialize_config(c)).config == c)) ++bad_roundtrips;
  }
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
  r.measured = static_cast<double>(mismatched + bad_roundtrips);
  r.pass = files > 0 && r.measured == 0.0;
  r.detail = std::to_string(files) + " frame files compared, " + std::to_string(mismatched) + " differ; " +
             std::to_string(bad_roundtrips) + " of 50 config round trips differ";
  return r;
}

/// Runs every check in order, reporting each as it finishes.
inline std::vector<CheckResult> run_acceptance(const std::filesystem::path& scratch,
                                               const std::function<void(const CheckResult&)>& report = {}) {
  std::vector<std::function<CheckResult()>> checks{
      check_operator_composition, check_energy_inequality, check_spectral_oracle, check_classical_degeneracy,
      check_conservation,         check_positivity,        check_gradient_duality, check_optimization_efficacy,
      check_fractional_slowdown,  [&] { return check_determinism_roundtrip(scratch); }};
  std::vector<CheckResult> out;
  for (const auto& check : checks) {
    CheckResult r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r.id = static_cast<int>(out.size()) + 1;
      r.name = "check aborted";
      r.pass = false;
      r.detail = e.what();
    }
    if (report) report(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace cfseir
