#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfseir/caputo_fabrizio.hpp"
#include "cfseir/grid.hpp"

namespace cfseir {

enum Compartment : std::size_t { kS = 0, kE = 1, kI = 2, kR = 3 };
inline constexpr std::size_t kCompartments = 4;
inline constexpr std::array<const char*, kCompartments> kCompartmentNames{"S", "E", "I", "R"};

/// Epidemiological rates (per day), diffusion coefficients (km^2/day) and the
/// control cost weight. Defaults are the reference experiment values; sigma has
/// no published value and defaults to 1.
struct ModelParams {
  double beta = 0.02;   // birth rate
  double kappa = 0.09;  // E -> I transmission rate
  double mu = 0.05;     // effective contact rate, km^2 / (people day)
  double xi = 0.03;     // natural mortality
  double eta = 0.04;    // recovery rate
  std::array<double, kCompartments> lambda{0.1, 0.1, 0.1, 0.1};
  double sigma = 1.0;

  double lambda_max() const noexcept {
    double m = lambda[0];
    for (double l : lambda) m = l > m ? l : m;
    return m;
  }

  /// Rates in (0, 1), positive diffusion and sigma. Throws std::invalid_argument
  /// whose message starts with the offending parameter name.
  void validate() const {
    auto rate = [](const char* name, double v) {
      if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument(std::string(name) + " must lie in (0, 1)");
    };
    rate("beta", beta);
    rate("kappa", kappa);
    rate("mu", mu);
    rate("xi", xi);
    rate("eta", eta);
    for (std::size_t k = 0; k < kCompartments; ++k) {
      if (!(lambda[k] > 0.0) || !std::isfinite(lambda[k])) {
        throw std::invalid_argument("lambda" + std::to_string(k + 1) + " must be positive");
      }
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be positive");
  }

  /// The forward solver's stability guarantees assume births never outpace deaths.
  void require_birth_le_mortality() const {
    if (beta > xi) throw std::invalid_argument("beta must not exceed xi (beta <= xi required)");
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Four fields on one grid. Tagged so states and costates do not mix.
template <class Tag>
struct FieldQuad {
  std::array<Field, kCompartments> comp;

  FieldQuad() = default;
  explicit FieldQuad(const GridSpec& grid, double fill = 0.0)
      : comp{Field(grid, fill), Field(grid, fill), Field(grid, fill), Field(grid, fill)} {}
  FieldQuad(Field a, Field b, Field c, Field d) : comp{std::move(a), std::move(b), std::move(c), std::move(d)} {
    for (const Field& f : comp) comp[0].check_same(f);
  }

  Field& operator[](std::size_t k) noexcept { return comp[k]; }
  const Field& operator[](std::size_t k) const noexcept { return comp[k]; }
  const GridSpec& grid() const noexcept { return comp[0].grid(); }

  FieldQuad& axpy(double s, const FieldQuad& o) {
    for (std::size_t k = 0; k < kCompartments; ++k) comp[k].axpy(s, o.comp[k]);
    return *this;
  }
  FieldQuad& operator*=(double s) noexcept {
    for (Field& f : comp) f *= s;
    return *this;
  }
  bool all_finite() const noexcept {
    for (const Field& f : comp) {
      if (!f.all_finite()) return false;
    }
    return true;
  }
  /// Cellwise sum of the four components.
  Field total() const { return comp[0] + comp[1] + comp[2] + comp[3]; }

  friend bool operator==(const FieldQuad&, const FieldQuad&) = default;
};

struct StateTag {};
struct CostateTag {};

/// (S, E, I, R) densities in people / km^2.
using SeirState = FieldQuad<StateTag>;
/// Costate (rho1..rho4) conjugate to the compartments.
using AdjointState = FieldQuad<CostateTag>;
/// Vaccination rate, dimensionless, kept in [0, 1].
using ControlField = Field;

/// Reaction vector Phi at one cell.
inline std::array<double, 4> reaction_at(double s, double e, double i, double r, double u, const ModelParams& p) {
  const double n = s + e + i + r;
  const double infection = p.mu * s * i;
  return {p.beta * n - infection - (p.xi + u) * s, infection - (p.xi + p.kappa) * e, p.kappa * e - (p.xi + p.eta) * i,
          u * s + p.eta * i - p.xi * r};
}

/// Reaction terms of the controlled SEIR system for every cell.
inline SeirState reaction_phi(const SeirState& w, const ControlField& u, const ModelParams& p) {
  w[kS].check_same(u);
  SeirState out(w.grid());
  for (std::size_t k = 0; k < u.size(); ++k) {
    const auto phi = reaction_at(w[kS][k], w[kE][k], w[kI][k], w[kR][k], u[k], p);
    for (std::size_t c = 0; c < kCompartments; ++c) out[c][k] = phi[c];
  }
  return out;
}

using Mat4 = std::array<std::array<double, 4>, 4>;

/// d(Phi)/d(omega) at one cell.
inline Mat4 jacobian_at(double s, double i, double u, const ModelParams& p) {
  const double b = p.beta;
  return Mat4{{{b - p.mu * i - p.xi - u, b, b - p.mu * s, b},
               {p.mu * i, -(p.xi + p.kappa), p.mu * s, 0.0},
               {0.0, p.kappa, -(p.xi + p.eta), 0.0},
               {u, 0.0, p.eta, -p.xi}}};
}

/// Per-cell Jacobian of reaction_phi with respect to the state.
inline std::vector<Mat4> jacobian_N(const SeirState& w, const ControlField& u, const ModelParams& p) {
  w[kS].check_same(u);
  std::vector<Mat4> out(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) out[k] = jacobian_at(w[kS][k], w[kI][k], u[k], p);
  return out;
}

/// Cellwise N(omega, u)^T rho.
inline AdjointState apply_jacobian_transpose(const SeirState& w, const ControlField& u, const ModelParams& p,
                                             const AdjointState& rho) {
  w[kS].check_same(u);
  w[kS].check_same(rho[0]);
  AdjointState out(w.grid());
  for (std::size_t k = 0; k < u.size(); ++k) {
    const Mat4 m = jacobian_at(w[kS][k], w[kI][k], u[k], p);
    for (std::size_t col = 0; col < 4; ++col) {
      double acc = 0.0;
      for (std::size_t row = 0; row < 4; ++row) acc += m[row][col] * rho[row][k];
      out[col][k] = acc;
    }
  }
  return out;
}

/// Cellwise N(omega, u) y.
inline SeirState apply_jacobian(const SeirState& w, const ControlField& u, const ModelParams& p, const SeirState& y) {
  w[kS].check_same(u);
  SeirState out(w.grid());
  for (std::size_t k = 0; k < u.size(); ++k) {
    const Mat4 m = jacobian_at(w[kS][k], w[kI][k], u[k], p);
    for (std::size_t row = 0; row < 4; ++row) {
      double acc = 0.0;
      for (std::size_t col = 0; col < 4; ++col) acc += m[row][col] * y[col][k];
      out[row][k] = acc;
    }
  }
  return out;
}

/// Control coupling F(omega) = (-S, 0, 0, S): d(Phi)/du.
inline SeirState control_coupling_F(const SeirState& w) {
  SeirState out(w.grid());
  out[kS] = -1.0 * w[kS];
  out[kR] = w[kS];
  return out;
}

/// F* rho = S (rho4 - rho1), cellwise.
inline Field control_coupling_adjoint(const SeirState& w, const AdjointState& rho) {
  w[kS].check_same(rho[0]);
  Field out(w.grid());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = w[kS][k] * (rho[3][k] - rho[0][k]);
  return out;
}

/// Observation W omega: the infectious compartment.
inline const Field& observe_W(const SeirState& w) noexcept { return w[kI]; }

/// W*W omega = (0, 0, I, 0), expressed in costate space.
inline AdjointState observe_WtW(const SeirState& w) {
  AdjointState out(w.grid());
  out[kI] = w[kI];
  return out;
}

/// Positivity threshold 1 - 2 (1 - alpha) / M * ||N||. Positive values give the
/// sufficient condition for nonnegative solutions; this is a diagnostic only.
inline double positivity_threshold_theta(double trajectory_norm, const FractionalParams& fp) {
  if (!(trajectory_norm >= 0.0)) throw std::invalid_argument("trajectory norm must be nonnegative");
  if (fp.is_classical()) return 1.0;
  return 1.0 - 2.0 * (1.0 - fp.alpha()) / fp.m_alpha() * trajectory_norm;
}

}  // namespace cfseir
