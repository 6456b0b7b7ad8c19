#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cfseir/grid.hpp"
#include "test_support.hpp"

using namespace cfseir;
using cfseir::testing::random_field;

TEST(GridSpec, GeometryAndIndexing) {
  const GridSpec g{16, 8, 0.5, 2.0};
  EXPECT_EQ(g.cells(), 128u);
  EXPECT_EQ(g.lx(), 8.0);
  EXPECT_EQ(g.ly(), 16.0);
  EXPECT_EQ(g.cell_area(), 1.0);
  EXPECT_EQ(g.index(3, 2), 2u * 16u + 3u);
}

TEST(GridSpec, ValidationRejectsTinyOrDegenerateGrids) {
  EXPECT_THROW((GridSpec{2, 5, 1.0, 1.0}.validate()), std::invalid_argument);
  EXPECT_THROW((GridSpec{5, 5, 0.0, 1.0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((GridSpec{3, 3, 1.0, 1.0}.validate()));
}

TEST(Field, ShapeMismatchIsRejected) {
  const Field a(GridSpec{4, 4, 1.0, 1.0});
  Field b(GridSpec{4, 5, 1.0, 1.0});
  EXPECT_THROW(b += a, std::invalid_argument);
  EXPECT_THROW(Field(GridSpec{4, 4, 1.0, 1.0}, std::vector<double>(15)), std::invalid_argument);
}

TEST(Field, SamplesAtCellCentres) {
  const GridSpec g{4, 3, 0.5, 2.0};
  const Field f = Field::sample(g, [](double x, double y) { return 10.0 * x + y; });
  EXPECT_DOUBLE_EQ(f(0, 0), 10.0 * 0.25 + 1.0);
  EXPECT_DOUBLE_EQ(f(3, 2), 10.0 * 1.75 + 5.0);
}

TEST(Laplacian, ConstantFieldIsHarmonic) {
  const GridSpec g{7, 5, 0.3, 1.7};
  const Field lap = laplacian_neumann(Field(g, 42.0));
  for (double v : lap.values()) EXPECT_EQ(v, 0.0);
}

TEST(Laplacian, InteriorSpikeStencil) {
  const GridSpec g{7, 7, 1.0, 1.0};
  Field f(g);
  f(3, 3) = 1.0;
  const Field lap = laplacian_neumann(f);
  for (std::size_t iy = 0; iy < 7; ++iy) {
    for (std::size_t ix = 0; ix < 7; ++ix) {
      const std::size_t dist = (ix > 3 ? ix - 3 : 3 - ix) + (iy > 3 ? iy - 3 : 3 - iy);
      const double expected = dist == 0 ? -4.0 : dist == 1 ? 1.0 : 0.0;
      EXPECT_EQ(lap(ix, iy), expected) << ix << "," << iy;
    }
  }
}

TEST(Laplacian, CosineModeEigenvalue) {
  // Constant in y, 64 cells along x.
  const GridSpec g{64, 3, 1.0, 1.0};
  const double k = std::numbers::pi / g.lx();
  const Field f = Field::sample(g, [&](double x, double) { return std::cos(k * x); });
  const Field lap = laplacian_neumann(f);
  const double discrete = -2.0 / (g.dx * g.dx) * (1.0 - std::cos(k * g.dx));
  double worst = 0.0;
  for (std::size_t c = 0; c < f.size(); ++c) {
    EXPECT_NEAR(lap[c], discrete * f[c], 1e-14);
    worst = std::max(worst, std::abs(lap[c] + k * k * f[c]));
  }
  // Relative gap to the continuous eigenvalue is at most (k dx)^2 / 12.
  EXPECT_LE(worst / (k * k), std::pow(k * g.dx, 2) / 12.0 * 1.0001);
}

TEST(Laplacian, ContinuousEigenvalueGapIsSecondOrder) {
  double previous = 0.0;
  for (std::size_t nx : {16u, 32u, 64u}) {
    const GridSpec g{nx, 3, 16.0 / nx, 1.0};
    const double k = std::numbers::pi / g.lx();
    const Field f = Field::sample(g, [&](double x, double) { return std::cos(k * x); });
    Field res = laplacian_neumann(f);
    res.axpy(k * k, f);
    const double r = cfseir::testing::max_abs(res);
    if (previous > 0.0) {
      EXPECT_NEAR(previous / r, 4.0, 0.05);
    }
    previous = r;
  }
}

TEST(Laplacian, GridTooSmallThrows) {
  EXPECT_THROW(laplacian_neumann(Field(GridSpec{2, 4, 1.0, 1.0})), std::invalid_argument);
}

TEST(LaplacianProperties, IntegratesToZero) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const GridSpec g{3 + rng() % 12, 3 + rng() % 12, 0.2 + (rng() % 10) * 0.1, 0.2 + (rng() % 10) * 0.1};
    const Field f = random_field(g, rng, -50.0, 50.0);
    EXPECT_NEAR(cell_integral(laplacian_neumann(f)), 0.0, 1e-9);
  }
}

TEST(LaplacianProperties, SymmetricAndLinear) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const GridSpec g{3 + rng() % 10, 3 + rng() % 10, 0.5, 1.5};
    const Field f = random_field(g, rng);
    const Field h = random_field(g, rng);
    EXPECT_NEAR(inner(h, laplacian_neumann(f)), inner(f, laplacian_neumann(h)), 1e-10);
    Field comb = 3.0 * f;
    comb.axpy(-2.0, h);
    Field expected = 3.0 * laplacian_neumann(f);
    expected.axpy(-2.0, laplacian_neumann(h));
    EXPECT_LE(cfseir::testing::max_abs_diff(laplacian_neumann(comb), expected), 1e-12);
  }
}

TEST(Reductions, CellIntegralExamples) {
  const GridSpec g{16, 16, 1.0, 1.0};
  EXPECT_EQ(cell_integral(Field(g, 3.0)), 768.0);
  EXPECT_EQ(cell_integral(Field(g)), 0.0);
  Field s0(g, 100.0);
  s0(8, 8) = 70.0;
  EXPECT_EQ(cell_integral(s0), 25570.0);
  EXPECT_EQ(cell_integral(Field(GridSpec{4, 4, 0.5, 2.0}, 1.0)), 16.0);
}

TEST(Reductions, SquaredNormExamples) {
  const GridSpec g{16, 16, 1.0, 1.0};
  EXPECT_EQ(l2_norm_sq(Field(g)), 0.0);
  EXPECT_EQ(l2_norm_sq(Field(g, 1.0)), 256.0);
  Field one(g);
  one(5, 9) = 7.0;
  EXPECT_EQ(l2_norm_sq(one), 49.0);
}
