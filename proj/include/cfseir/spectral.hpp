#pragma once

// Closed-form modal solutions of the linear CF-fractional diffusion problem
//
//   CFC_D w_k + rho_k w_k = Phi_k(t),   w_k(0) = w0_k
//
// on the Neumann rectangle. Each cosine mode evolves independently as
//
//   w_k(t) = zeta e^{-varpi t} w0_k + (1-a) zeta / M Phi_k(t) + Lambda int_0^t e^{-varpi (t-s)} Phi_k(s) ds
//
// with zeta = M / (M + (1-a) rho), varpi = a rho / (M + (1-a) rho) and
// Lambda = zeta (a - (1-a) varpi) / M = a zeta^2 / M. Note the solution jumps to
// zeta * w0_k at t = 0+ unless the forcing compensates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cfseir/caputo_fabrizio.hpp"
#include "cfseir/grid.hpp"

namespace cfseir {

struct ModalConstants {
  double rho = 0.0;     // eigenvalue of -lambda Lap, 1/day
  double zeta = 1.0;    // jump factor
  double varpi = 0.0;   // decay rate, 1/day
  double Lambda = 1.0;  // convolution weight
};

inline ModalConstants modal_constants(double rho, const FractionalParams& fp) {
  if (!(rho >= 0.0)) throw std::invalid_argument("modal eigenvalue must be nonnegative");
  const double m = fp.m_alpha();
  const double a = fp.alpha();
  const double denom = m + (1.0 - a) * rho;
  ModalConstants c;
  c.rho = rho;
  c.zeta = m / denom;
  c.varpi = a * rho / denom;
  c.Lambda = c.zeta * (a - (1.0 - a) * c.varpi) / m;
  return c;
}

/// Continuous Neumann spectrum, or the exact eigenvalue of the 5-point stencil
/// on the cell-centred grid (2/dx^2)(1 - cos(k pi dx / Lx)) + (same in y).
enum class SpectrumMode { kContinuous, kDiscreteStencil };

struct Eigenpair {
  ModalConstants constants;
  Field mode;
};

inline double neumann_eigenvalue(std::size_t k, std::size_t l, const GridSpec& grid, double lambda,
                                 SpectrumMode spectrum = SpectrumMode::kContinuous) {
  const double kx = static_cast<double>(k) * std::numbers::pi / grid.lx();
  const double ly = static_cast<double>(l) * std::numbers::pi / grid.ly();
  if (spectrum == SpectrumMode::kContinuous) return lambda * (kx * kx + ly * ly);
  const double sx = 2.0 / (grid.dx * grid.dx) * (1.0 - std::cos(kx * grid.dx));
  const double sy = 2.0 / (grid.dy * grid.dy) * (1.0 - std::cos(ly * grid.dy));
  return lambda * (sx + sy);
}

/// Sampled cosine mode cos(k pi x / Lx) cos(l pi y / Ly) at cell centres and its modal constants.
inline Eigenpair neumann_eigenpair(std::size_t k, std::size_t l, const GridSpec& grid, double lambda,
                                   const FractionalParams& fp, SpectrumMode spectrum = SpectrumMode::kContinuous) {
  const double kx = static_cast<double>(k) * std::numbers::pi / grid.lx();
  const double ly = static_cast<double>(l) * std::numbers::pi / grid.ly();
  Field mode = Field::sample(grid, [&](double x, double y) { return std::cos(kx * x) * std::cos(ly * y); });
  return {modal_constants(neumann_eigenvalue(k, l, grid, lambda, spectrum), fp), std::move(mode)};
}

namespace detail {

// int_0^1 e^{-z (1 - s)} ds and int_0^1 s e^{-z (1 - s)} ds, stable for small z.
inline void exp_moments(double z, double& m0, double& m1) {
  if (std::abs(z) < 1e-4) {
    m0 = 1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0;
    m1 = 0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0;
    return;
  }
  const double em1 = -std::expm1(-z);  // 1 - e^{-z}
  m0 = em1 / z;
  m1 = (z - em1) / (z * z);
}

}  // namespace detail

/// int_0^t e^{-rate (t - s)} f(s) ds for f linear between the samples of `f`,
/// integrated exactly on every (partial) interval.
inline double exponential_convolution(const TimeSeries& f, double rate, double t) {
  const auto& v = f.values;
  if (v.empty()) return 0.0;
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::out_of_range("convolution time must be nonnegative");
  if (v.size() == 1) {
    // Constant forcing.
    if (rate == 0.0) return v[0] * t;
    return v[0] * -std::expm1(-rate * t) / rate;
  }
  if (t > f.final_time() * (1.0 + 1e-12) + 1e-15) throw std::out_of_range("convolution time outside the forcing series");
  double total = 0.0;
  double left = 0.0;
  for (std::size_t j = 1; j < v.size() && left < t; ++j) {
    const double right = std::min(f.dt * static_cast<double>(j), t);
    const double h = right - left;
    if (h <= 0.0) break;
    // f on [left, right], linear through the interval's samples.
    const double slope = (v[j] - v[j - 1]) / f.dt;
    const double f_left = v[j - 1] + slope * (left - f.dt * static_cast<double>(j - 1));
    const double f_right = v[j - 1] + slope * (right - f.dt * static_cast<double>(j - 1));
    double m0 = 0.0;
    double m1 = 0.0;
    detail::exp_moments(rate * h, m0, m1);
    total += std::exp(-rate * (t - right)) * h * (f_left * m0 + (f_right - f_left) * m1);
    left = right;
  }
  return total;
}

/// Linear interpolation of a forcing series at time t.
inline double interpolate(const TimeSeries& f, double t) {
  const auto& v = f.values;
  if (v.empty()) return 0.0;
  if (v.size() == 1) return v[0];
  const double pos = t / f.dt;
  std::size_t j = static_cast<std::size_t>(pos);
  if (j >= v.size() - 1) return v.back();
  const double theta = pos - static_cast<double>(j);
  return v[j] + theta * (v[j + 1] - v[j]);
}

/// Modal amplitude at time t (t = 0 gives omega0 itself; the jump acts at 0+).
/// An empty forcing series means Phi = 0; a single sample means constant forcing.
inline double modal_solution(const ModalConstants& c, double omega0, const TimeSeries& forcing,
                             const FractionalParams& fp, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::out_of_range("modal_solution: t must be nonnegative");
  if (forcing.values.size() > 1 && t > forcing.final_time() * (1.0 + 1e-12) + 1e-15) {
    throw std::out_of_range("modal_solution: t beyond the forcing series");
  }
  if (t == 0.0) return omega0;
  double w = c.zeta * std::exp(-c.varpi * t) * omega0;
  if (!forcing.values.empty()) {
    w += (1.0 - fp.alpha()) * c.zeta / fp.m_alpha() * interpolate(forcing, t);
    w += c.Lambda * exponential_convolution(forcing, c.varpi, t);
  }
  return w;
}

struct ModeTerm {
  std::size_t k = 0;
  std::size_t l = 0;
  double amplitude = 0.0;  // initial coefficient of the cosine mode
};

/// Superposition of unforced modal solutions with diffusivity lambda.
inline Field reference_linear_solution(const std::vector<ModeTerm>& modes, const GridSpec& grid, double lambda,
                                       const FractionalParams& fp, double t,
                                       SpectrumMode spectrum = SpectrumMode::kContinuous) {
  Field out(grid);
  const TimeSeries no_forcing;
  for (const ModeTerm& m : modes) {
    const Eigenpair ep = neumann_eigenpair(m.k, m.l, grid, lambda, fp, spectrum);
    out.axpy(modal_solution(ep.constants, m.amplitude, no_forcing, fp, t), ep.mode);
  }
  return out;
}

}  // namespace cfseir
