#pragma once

// Discrete Caputo-Fabrizio operators on uniformly sampled time series.
//
// The derivative kernels treat the series as piecewise linear between samples
// (so f' is piecewise constant) and integrate the exponential weight exactly on
// each subinterval. The running integral inside the fractional integral uses
// the left-rectangle rule, matching the Volterra time stepper.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfseir {

/// Order alpha in (0, 1], normalization M(alpha) and the kernel rate gamma.
class FractionalParams {
 public:
  explicit FractionalParams(double alpha = 1.0, double m_alpha = 1.0) : alpha_(alpha), m_alpha_(m_alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
      throw std::invalid_argument("alpha must lie in (0, 1], got " + std::to_string(alpha));
    }
    if (!(m_alpha > 0.0) || !std::isfinite(m_alpha)) {
      throw std::invalid_argument("M(alpha) must be positive");
    }
    if (alpha == 1.0 && m_alpha != 1.0) {
      throw std::invalid_argument("M(1) must equal 1");
    }
  }

  double alpha() const noexcept { return alpha_; }
  double m_alpha() const noexcept { return m_alpha_; }
  bool is_classical() const noexcept { return alpha_ == 1.0; }

  /// alpha / (1 - alpha). Undefined at alpha = 1; callers branch on is_classical().
  double gamma() const {
    if (is_classical()) throw std::domain_error("gamma is undefined at alpha = 1");
    return alpha_ / (1.0 - alpha_);
  }

  /// Weight (1 - alpha) / M on the instantaneous term of the fractional integral.
  double instant_weight() const noexcept { return (1.0 - alpha_) / m_alpha_; }
  /// Weight alpha / M on the running-integral term.
  double memory_weight() const noexcept { return alpha_ / m_alpha_; }

  friend bool operator==(const FractionalParams&, const FractionalParams&) = default;

 private:
  double alpha_;
  double m_alpha_;
};

/// Samples f(t_0), ..., f(t_N) at t_n = n * dt.
struct TimeSeries {
  double dt = 1.0;
  std::vector<double> values;

  TimeSeries() = default;
  TimeSeries(double step, std::vector<double> samples) : dt(step), values(std::move(samples)) {
    if (!(dt > 0.0)) throw std::invalid_argument("TimeSeries: dt must be positive");
  }

  /// Samples fn(n * dt) for n = 0..steps.
  template <class Fn>
  static TimeSeries sample(Fn&& fn, double step, std::size_t steps) {
    std::vector<double> v(steps + 1);
    for (std::size_t n = 0; n <= steps; ++n) v[n] = fn(static_cast<double>(n) * step);
    return TimeSeries(step, std::move(v));
  }

  std::size_t last_index() const noexcept { return values.empty() ? 0 : values.size() - 1; }
  double final_time() const noexcept { return dt * static_cast<double>(last_index()); }
};

namespace detail {

inline void require_derivative_series(const TimeSeries& series) {
  if (!(series.dt > 0.0)) throw std::invalid_argument("series dt must be positive");
  if (series.values.size() < 2) throw std::invalid_argument("derivative needs at least 2 samples");
}

// M/alpha * (1 - e^{-gamma dt}): the exact per-interval weight of a unit slope.
inline double slope_weight(const FractionalParams& fp, double dt) {
  return fp.m_alpha() / fp.alpha() * -std::expm1(-fp.gamma() * dt);
}

}  // namespace detail

/// Forward CFC derivative with base point 0, evaluated at t_n (1 <= n <= N).
inline double cfc_derivative_forward(const TimeSeries& series, const FractionalParams& fp, std::size_t n) {
  detail::require_derivative_series(series);
  const auto& f = series.values;
  if (n < 1 || n >= f.size()) throw std::out_of_range("forward derivative index out of range");
  if (fp.is_classical()) return (f[n] - f[n - 1]) / series.dt;

  const double decay = std::exp(-fp.gamma() * series.dt);
  double kernel_sum = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    kernel_sum = decay * kernel_sum + (f[j] - f[j - 1]) / series.dt;
  }
  return detail::slope_weight(fp, series.dt) * kernel_sum;
}

/// Backward CFC derivative with base point T = t_N, evaluated at t_n (0 <= n <= N-1).
inline double cfc_derivative_backward(const TimeSeries& series, const FractionalParams& fp, std::size_t n) {
  detail::require_derivative_series(series);
  const auto& f = series.values;
  if (n + 1 >= f.size()) throw std::out_of_range("backward derivative index out of range");
  if (fp.is_classical()) return -(f[n + 1] - f[n]) / series.dt;  // -f'(t_n), one-sided toward T

  const double decay = std::exp(-fp.gamma() * series.dt);
  double kernel_sum = 0.0;
  for (std::size_t j = f.size() - 1; j > n; --j) {
    // Same recursion as the forward operator applied to g(t) = f(T - t).
    kernel_sum = decay * kernel_sum - (f[j] - f[j - 1]) / series.dt;
  }
  return detail::slope_weight(fp, series.dt) * kernel_sum;
}

/// Forward derivative at every level; level 0 is 0 (empty integral).
inline std::vector<double> cfc_derivative_forward_all(const TimeSeries& series, const FractionalParams& fp) {
  detail::require_derivative_series(series);
  const auto& f = series.values;
  std::vector<double> out(f.size(), 0.0);
  if (fp.is_classical()) {
    for (std::size_t n = 1; n < f.size(); ++n) out[n] = (f[n] - f[n - 1]) / series.dt;
    return out;
  }
  const double decay = std::exp(-fp.gamma() * series.dt);
  const double weight = detail::slope_weight(fp, series.dt);
  double kernel_sum = 0.0;
  for (std::size_t n = 1; n < f.size(); ++n) {
    kernel_sum = decay * kernel_sum + (f[n] - f[n - 1]) / series.dt;
    out[n] = weight * kernel_sum;
  }
  return out;
}

/// O(1) left-rectangle accumulator step: acc + dt * g_prev.
inline double running_sum_advance(double acc, double g_prev, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("running_sum_advance: dt must be positive");
  return acc + dt * g_prev;
}

/// CF fractional integral with base point 0 at t_n (0 <= n <= N).
inline double cf_integral(const TimeSeries& series, const FractionalParams& fp, std::size_t n) {
  const auto& f = series.values;
  if (n >= f.size()) throw std::out_of_range("fractional integral index out of range");
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc = running_sum_advance(acc, f[j], series.dt);
  return fp.instant_weight() * f[n] + fp.memory_weight() * acc;
}

/// CF fractional integral at every level.
inline std::vector<double> cf_integral_all(const TimeSeries& series, const FractionalParams& fp) {
  const auto& f = series.values;
  std::vector<double> out(f.size());
  double acc = 0.0;
  for (std::size_t n = 0; n < f.size(); ++n) {
    out[n] = fp.instant_weight() * f[n] + fp.memory_weight() * acc;
    acc = running_sum_advance(acc, f[n], series.dt);
  }
  return out;
}

}  // namespace cfseir
