#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <random>

#include "cfseir/grid.hpp"
#include "cfseir/seir.hpp"

namespace cfseir::testing {

inline Field random_field(const GridSpec& g, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Field f(g);
  for (double& v : f.values()) v = d(rng);
  return f;
}

template <class Quad>
Quad random_quad(const GridSpec& g, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  return Quad(random_field(g, rng, lo, hi), random_field(g, rng, lo, hi), random_field(g, rng, lo, hi),
              random_field(g, rng, lo, hi));
}

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, std::size_t n = 20000) {
  if (n % 2) ++n;
  const double h = (b - a) / static_cast<double>(n);
  double s = f(a) + f(b);
  for (std::size_t k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(k));
  return s * h / 3.0;
}

inline double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

inline double max_abs(const Field& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace cfseir::testing
