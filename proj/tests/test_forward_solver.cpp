#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include "cfseir/forward_solver.hpp"
#include "cfseir/spectral.hpp"
#include "cfseir/volterra.hpp"
#include "test_support.hpp"

using namespace cfseir;

namespace {

const GridSpec kRef{16, 16, 1.0, 1.0};

SeirState reference_initial(const GridSpec& g = kRef, std::size_t ix = 8, std::size_t iy = 8) {
  SeirState w(g);
  w[kS] = Field(g, 100.0);
  w[kS](ix, iy) = 70.0;
  w[kE](ix, iy) = 20.0;
  w[kI](ix, iy) = 10.0;
  return w;
}

// Single-cell state for the no-diffusion march.
struct Point {
  std::array<double, 4> v{};
  Point& axpy(double s, const Point& o) {
    for (std::size_t k = 0; k < 4; ++k) v[k] += s * o.v[k];
    return *this;
  }
  Point& operator*=(double s) {
    for (double& x : v) x *= s;
    return *this;
  }
  bool all_finite() const {
    for (double x : v) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  }
};

}  // namespace

TEST(ForwardSolve, ZeroStateStaysZero) {
  const Trajectory tr = forward_solve(SeirState(kRef), {}, ModelParams{}, FractionalParams(0.9), 0.05, 50);
  for (const SeirState& w : tr.states) {
    for (const Field& f : w.comp) EXPECT_EQ(cfseir::testing::max_abs(f), 0.0);
  }
}

TEST(ForwardSolve, TrajectoryLayout) {
  const SeirState init = reference_initial();
  const Trajectory tr = forward_solve(init, {}, ModelParams{}, FractionalParams(0.8), 0.05, 40);
  ASSERT_EQ(tr.states.size(), 41u);
  ASSERT_EQ(tr.controls.size(), 41u);
  EXPECT_EQ(tr.states[0], init);
  EXPECT_DOUBLE_EQ(tr.final_time(), 2.0);
  EXPECT_EQ(tr.steps(), 40u);
}

TEST(ForwardSolve, UniformDataStaysUniformAndMatchesPointMarch) {
  const ModelParams p;
  SeirState init(kRef);
  const double vals[4] = {90.0, 5.0, 3.0, 2.0};
  for (std::size_t c = 0; c < 4; ++c) init[c] = Field(kRef, vals[c]);
  const double u = 0.2;
  for (double a : {1.0, 0.85}) {
    const FractionalParams fp(a);
    const std::vector<ControlField> controls(201, ControlField(kRef, u));
    const Trajectory tr = forward_solve(init, controls, p, fp, 0.05, 200);

    Point start;
    for (std::size_t c = 0; c < 4; ++c) start.v[c] = vals[c];
    const auto points = volterra_march(start, 200, 0.05, fp, VolterraOptions{}, [&](const Point& w, std::size_t) {
      Point g;
      g.v = reaction_at(w.v[0], w.v[1], w.v[2], w.v[3], u, p);
      return g;
    });
    for (std::size_t n = 0; n <= 200; n += 20) {
      for (std::size_t c = 0; c < 4; ++c) {
        EXPECT_EQ(tr.states[n][c].min(), tr.states[n][c].max());
        EXPECT_NEAR(tr.states[n][c][0], points[n].v[c], 1e-12 * std::max(1.0, std::abs(points[n].v[c])));
      }
    }
  }
}

TEST(ForwardSolve, ClassicalOrderIsForwardEuler) {
  const ModelParams p;
  const SeirState init = reference_initial();
  const Trajectory tr = forward_solve(init, {}, p, FractionalParams(1.0), 0.05, 100);
  SeirState w = init;
  const Field u(kRef);
  for (std::size_t n = 1; n <= 100; ++n) {
    const SeirState g = state_rhs(w, u, p);
    w.axpy(0.05, g);
    for (std::size_t c = 0; c < 4; ++c) {
      EXPECT_LE(cfseir::testing::max_abs_diff(w[c], tr.states[n][c]), 1e-12 * std::max(1.0, w[c].max()));
    }
  }
}

TEST(ForwardSolve, TotalPopulationOfReferenceData) {
  const Trajectory tr = forward_solve(reference_initial(), {}, ModelParams{}, FractionalParams(1.0), 0.05, 1);
  EXPECT_EQ(total_population(tr, 0), 25600.0);
  const Trajectory zero = forward_solve(SeirState(kRef), {}, ModelParams{}, FractionalParams(1.0), 0.05, 1);
  EXPECT_EQ(total_population(zero, 1), 0.0);
}

TEST(ForwardSolve, ConservesPopulationWhenBirthEqualsDeath) {
  ModelParams p;
  p.beta = p.xi;
  for (double a : {0.8, 0.9, 1.0}) {
    const Trajectory tr = forward_solve(reference_initial(), {}, p, FractionalParams(a), 0.05, 1200);
    for (std::size_t n = 0; n <= 1200; n += 10) EXPECT_NEAR(total_population(tr, n) / 25600.0, 1.0, 1e-10);
  }
}

TEST(ForwardSolve, StaysNonnegativeOnReferenceRun) {
  for (double a : {0.8, 0.9, 1.0}) {
    const Trajectory tr = forward_solve(reference_initial(), {}, ModelParams{}, FractionalParams(a), 0.05, 1200);
    EXPECT_GE(min_compartment_value(tr), -1e-9 * 100.0) << "alpha " << a;
  }
}

TEST(ForwardSolve, PopulationNormDoesNotGrowAtClassicalOrder) {
  const Trajectory tr = forward_solve(reference_initial(), {}, ModelParams{}, FractionalParams(1.0), 0.05, 1200);
  double previous = std::sqrt(l2_norm_sq(tr.states[0].total()));
  for (const SeirState& w : tr.states) {
    const double norm = std::sqrt(l2_norm_sq(w.total()));
    EXPECT_LE(norm, previous + 1e-8 * previous);
    previous = norm;
  }
  EXPECT_DOUBLE_EQ(population_norm_linf_l2(tr), std::sqrt(l2_norm_sq(tr.states[0].total())));
}

TEST(ForwardSolve, SingleModeDecayMatchesModalSolution) {
  const GridSpec g{64, 3, 0.5, 0.5};
  ModelParams p;
  const FractionalParams fp(0.9);
  SolverOptions opts;
  opts.reaction = false;
  SeirState init(g);
  init[kS] = Field::sample(g, [&](double x, double) { return 1.0 + 0.1 * std::cos(std::numbers::pi * x / g.lx()); });
  const Trajectory tr = forward_solve(init, {}, p, fp, 1e-3, 10000, opts);
  const Field ref = reference_linear_solution({{0, 0, 1.0}, {1, 0, 0.1}}, g, 0.1, fp, 10.0);
  EXPECT_LE(cfseir::testing::max_abs_diff(tr.states.back()[kS], ref) / cfseir::testing::max_abs(ref), 0.02);
}

TEST(ForwardSolve, RefusesUnstableTimeStep) {
  EXPECT_THROW(forward_solve(reference_initial(), {}, ModelParams{}, FractionalParams(1.0), 2.3, 3), SolverError);
  EXPECT_NO_THROW(forward_solve(reference_initial(), {}, ModelParams{}, FractionalParams(1.0), 2.2, 3));
  EXPECT_THROW(forward_solve(reference_initial(), {}, ModelParams{}, FractionalParams(1.0), 0.0, 3), SolverError);
}

TEST(ForwardSolve, RefusesNonContractiveCorrector) {
  const GridSpec fine{16, 16, 0.25, 0.25};
  EXPECT_THROW(forward_solve(reference_initial(fine), {}, ModelParams{}, FractionalParams(0.8), 0.01, 3), SolverError);
}

TEST(ForwardSolve, RefusesBirthAboveMortality) {
  ModelParams p;
  p.beta = 0.05;
  EXPECT_THROW(forward_solve(reference_initial(), {}, p, FractionalParams(1.0), 0.05, 3), std::invalid_argument);
}

TEST(ForwardSolve, RejectsMisalignedControls) {
  const std::vector<ControlField> short_controls(3, ControlField(kRef));
  EXPECT_THROW(forward_solve(reference_initial(), short_controls, ModelParams{}, FractionalParams(1.0), 0.05, 3),
               std::invalid_argument);
  const std::vector<ControlField> wrong_grid(4, ControlField(GridSpec{8, 8, 1.0, 1.0}));
  EXPECT_THROW(forward_solve(reference_initial(), wrong_grid, ModelParams{}, FractionalParams(1.0), 0.05, 3),
               std::invalid_argument);
}

TEST(ForwardSolve, NonFiniteValuesReportTheStep) {
  SeirState init = reference_initial();
  init[kS] = Field(kRef, 1e200);
  init[kI] = Field(kRef, 1e200);
  try {
    forward_solve(init, {}, ModelParams{}, FractionalParams(1.0), 0.05, 10);
    FAIL() << "expected a solver error";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.step(), 1u);
  }
}
