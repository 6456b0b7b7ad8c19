#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cfseir/caputo_fabrizio.hpp"
#include "cfseir/seir.hpp"
#include "test_support.hpp"

using namespace cfseir;
using cfseir::testing::random_field;
using cfseir::testing::random_quad;

namespace {
const GridSpec kGrid{5, 4, 1.0, 1.0};
}

TEST(ModelParams, DefaultsAreReferenceValues) {
  const ModelParams p;
  EXPECT_EQ(p.beta, 0.02);
  EXPECT_EQ(p.kappa, 0.09);
  EXPECT_EQ(p.mu, 0.05);
  EXPECT_EQ(p.xi, 0.03);
  EXPECT_EQ(p.eta, 0.04);
  for (double l : p.lambda) EXPECT_EQ(l, 0.1);
  EXPECT_EQ(p.sigma, 1.0);
  EXPECT_NO_THROW(p.validate());
  EXPECT_NO_THROW(p.require_birth_le_mortality());
}

TEST(ModelParams, ValidationNamesTheParameter) {
  auto expect_named = [](ModelParams p, const std::string& name) {
    try {
      p.validate();
      FAIL() << "no error for " << name;
    } catch (const std::invalid_argument& e) {
      EXPECT_EQ(std::string(e.what()).rfind(name, 0), 0u) << e.what();
    }
  };
  ModelParams p;
  p.kappa = 1.0;
  expect_named(p, "kappa");
  p = ModelParams{};
  p.mu = 0.0;
  expect_named(p, "mu");
  p = ModelParams{};
  p.lambda[2] = -1.0;
  expect_named(p, "lambda3");
  p = ModelParams{};
  p.sigma = 0.0;
  expect_named(p, "sigma");
  p = ModelParams{};
  p.beta = 0.05;
  EXPECT_THROW(p.require_birth_le_mortality(), std::invalid_argument);
}

TEST(Reaction, ZeroStateGivesZero) {
  const SeirState w(kGrid);
  const SeirState phi = reaction_phi(w, Field(kGrid, 0.3), ModelParams{});
  for (const Field& f : phi.comp) EXPECT_EQ(cfseir::testing::max_abs(f), 0.0);
}

TEST(Reaction, InfectiousRateAtSeedCell) {
  const auto phi = reaction_at(70.0, 20.0, 10.0, 0.0, 0.0, ModelParams{});
  EXPECT_NEAR(phi[kI], 1.1, 1e-14);
}

TEST(Reaction, SumIdentity) {
  std::mt19937_64 rng(21);
  const ModelParams p;
  for (int t = 0; t < 10; ++t) {
    const SeirState w = random_quad<SeirState>(kGrid, rng, 0.0, 100.0);
    const Field u = random_field(kGrid, rng, 0.0, 1.0);
    const SeirState phi = reaction_phi(w, u, p);
    const Field total = phi.total();
    const Field n = w.total();
    for (std::size_t k = 0; k < total.size(); ++k) EXPECT_NEAR(total[k], (p.beta - p.xi) * n[k], 1e-10);
  }
}

TEST(Reaction, ConservativeWhenBirthEqualsDeath) {
  std::mt19937_64 rng(22);
  ModelParams p;
  p.beta = p.xi;
  const SeirState w = random_quad<SeirState>(kGrid, rng, 0.0, 100.0);
  EXPECT_NEAR(cell_integral(reaction_phi(w, Field(kGrid), p).total()), 0.0, 1e-10);
}

TEST(Reaction, ShapeMismatchThrows) {
  EXPECT_THROW(reaction_phi(SeirState(kGrid), Field(GridSpec{3, 3, 1.0, 1.0}), ModelParams{}), std::invalid_argument);
}

TEST(Jacobian, ZeroStateRows) {
  const ModelParams p;
  const Mat4 m = jacobian_at(0.0, 0.0, 0.0, p);
  EXPECT_DOUBLE_EQ(m[0][0], p.beta - p.xi);
  EXPECT_EQ(m[0][1], p.beta);
  EXPECT_EQ(m[0][2], p.beta);
  EXPECT_EQ(m[0][3], p.beta);
  EXPECT_EQ(m[1][1], -(p.xi + p.kappa));
}

TEST(Jacobian, ColumnSumsAreNetGrowth) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> d(0.0, 100.0);
  const ModelParams p;
  for (int t = 0; t < 10; ++t) {
    const Mat4 m = jacobian_at(d(rng), d(rng), d(rng) / 100.0, p);
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(m[0][c] + m[1][c] + m[2][c] + m[3][c], p.beta - p.xi, 1e-12);
  }
}

TEST(Jacobian, MatchesFiniteDifferences) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> d(1.0, 100.0);
  const ModelParams p;
  const double h = 1e-5;
  for (int t = 0; t < 10; ++t) {
    double w[4] = {d(rng), d(rng), d(rng), d(rng)};
    const double u = d(rng) / 100.0;
    const Mat4 m = jacobian_at(w[0], w[2], u, p);
    for (std::size_t c = 0; c < 4; ++c) {
      double wp[4] = {w[0], w[1], w[2], w[3]};
      double wm[4] = {w[0], w[1], w[2], w[3]};
      wp[c] += h;
      wm[c] -= h;
      const auto fp = reaction_at(wp[0], wp[1], wp[2], wp[3], u, p);
      const auto fm = reaction_at(wm[0], wm[1], wm[2], wm[3], u, p);
      for (std::size_t r = 0; r < 4; ++r) {
        const double fd = (fp[r] - fm[r]) / (2.0 * h);
        EXPECT_LE(std::abs(fd - m[r][c]), 1e-6 * std::max(1.0, std::abs(m[r][c]))) << r << "," << c;
      }
    }
  }
}

TEST(Jacobian, LinearizationErrorIsQuadratic) {
  std::mt19937_64 rng(25);
  const ModelParams p;
  const SeirState w = random_quad<SeirState>(kGrid, rng, 1.0, 100.0);
  const SeirState v = random_quad<SeirState>(kGrid, rng);
  const Field u = random_field(kGrid, rng, 0.0, 1.0);
  auto remainder = [&](double h) {
    SeirState shifted = w;
    shifted.axpy(h, v);
    SeirState r = reaction_phi(shifted, u, p);
    r.axpy(-1.0, reaction_phi(w, u, p));
    r.axpy(-h, apply_jacobian(w, u, p, v));
    double m = 0.0;
    for (const Field& f : r.comp) m = std::max(m, cfseir::testing::max_abs(f));
    return m;
  };
  EXPECT_NEAR(remainder(1e-2) / remainder(1e-3), 100.0, 1.0);
}

TEST(Jacobian, TransposeIsTheAdjoint) {
  std::mt19937_64 rng(26);
  const ModelParams p;
  const SeirState w = random_quad<SeirState>(kGrid, rng, 0.0, 100.0);
  const Field u = random_field(kGrid, rng, 0.0, 1.0);
  const SeirState y = random_quad<SeirState>(kGrid, rng);
  const AdjointState rho = random_quad<AdjointState>(kGrid, rng);
  const SeirState ny = apply_jacobian(w, u, p, y);
  const AdjointState ntr = apply_jacobian_transpose(w, u, p, rho);
  double lhs = 0.0;
  double rhs = 0.0;
  for (std::size_t c = 0; c < 4; ++c) {
    lhs += inner(ny[c], rho[c]);
    rhs += inner(y[c], ntr[c]);
  }
  EXPECT_NEAR(lhs, rhs, 1e-9 * std::abs(lhs));
  const auto per_cell = jacobian_N(w, u, p);
  ASSERT_EQ(per_cell.size(), kGrid.cells());
  EXPECT_EQ(per_cell[3][1][2], p.mu * w[kS][3]);
}

TEST(ControlCoupling, Examples) {
  SeirState w(kGrid);
  AdjointState rho(kGrid);
  EXPECT_EQ(cfseir::testing::max_abs(control_coupling_adjoint(w, rho)), 0.0);
  const SeirState f0 = control_coupling_F(w);
  for (const Field& f : f0.comp) EXPECT_EQ(cfseir::testing::max_abs(f), 0.0);

  w[kS] = Field(kGrid, 70.0);
  rho[0] = Field(kGrid, 1.0);
  rho[3] = Field(kGrid, 3.0);
  const Field fstar = control_coupling_adjoint(w, rho);
  for (double v : fstar.values()) EXPECT_EQ(v, 140.0);
}

TEST(ControlCoupling, ControlEntersLinearly) {
  std::mt19937_64 rng(27);
  const ModelParams p;
  const SeirState w = random_quad<SeirState>(kGrid, rng, 0.0, 100.0);
  const Field u = random_field(kGrid, rng, 0.0, 1.0);
  const Field nu = random_field(kGrid, rng);
  const double eps = 0.3;
  Field shifted = u;
  shifted.axpy(eps, nu);
  SeirState diff = reaction_phi(w, shifted, p);
  diff.axpy(-1.0, reaction_phi(w, u, p));
  const SeirState f = control_coupling_F(w);
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t k = 0; k < kGrid.cells(); ++k) EXPECT_NEAR(diff[c][k], eps * nu[k] * f[c][k], 1e-11);
  }
}

TEST(Observation, SelectsInfectious) {
  std::mt19937_64 rng(28);
  const SeirState w = random_quad<SeirState>(kGrid, rng);
  EXPECT_EQ(observe_W(w), w[kI]);
  const AdjointState once = observe_WtW(w);
  EXPECT_EQ(once[kI], w[kI]);
  for (std::size_t c : {kS, kE, kR}) EXPECT_EQ(cfseir::testing::max_abs(once[c]), 0.0);
  const SeirState as_state(once[0], once[1], once[2], once[3]);
  EXPECT_EQ(observe_WtW(as_state), once);
  EXPECT_EQ(cfseir::testing::max_abs(observe_W(SeirState(kGrid))), 0.0);
}

TEST(PositivityThreshold, Examples) {
  EXPECT_EQ(positivity_threshold_theta(1e6, FractionalParams(1.0)), 1.0);
  EXPECT_NEAR(positivity_threshold_theta(4.0, FractionalParams(0.9)), 0.2, 1e-14);
  EXPECT_NEAR(positivity_threshold_theta(2.0, FractionalParams(0.5)), -1.0, 1e-14);
  EXPECT_THROW(positivity_threshold_theta(-1.0, FractionalParams(0.5)), std::invalid_argument);
}
