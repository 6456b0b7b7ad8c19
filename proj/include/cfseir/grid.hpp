#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfseir {

/// Rectangle [0, nx*dx] x [0, ny*dy] tiled by nx*ny cells, sampled at cell centres.
struct GridSpec {
  std::size_t nx = 16;
  std::size_t ny = 16;
  double dx = 1.0;  // km
  double dy = 1.0;  // km

  std::size_t cells() const noexcept { return nx * ny; }
  double lx() const noexcept { return static_cast<double>(nx) * dx; }
  double ly() const noexcept { return static_cast<double>(ny) * dy; }
  double cell_area() const noexcept { return dx * dy; }
  std::size_t index(std::size_t ix, std::size_t iy) const noexcept { return iy * nx + ix; }

  void validate() const {
    if (nx < 3 || ny < 3) throw std::invalid_argument("grid needs at least 3 cells per axis");
    if (!(dx > 0.0) || !(dy > 0.0) || !std::isfinite(dx) || !std::isfinite(dy)) {
      throw std::invalid_argument("grid spacing must be positive and finite");
    }
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// One scalar per cell; row-major with x fastest (index = iy * nx + ix).
class Field {
 public:
  Field() = default;
  explicit Field(const GridSpec& grid, double fill = 0.0) : grid_(grid), data_(grid.cells(), fill) {}
  Field(const GridSpec& grid, std::vector<double> data) : grid_(grid), data_(std::move(data)) {
    if (data_.size() != grid_.cells()) throw std::invalid_argument("field data does not match grid size");
  }

  /// Samples fn(x, y) at cell centres.
  template <class Fn>
  static Field sample(const GridSpec& grid, Fn&& fn) {
    Field f(grid);
    for (std::size_t iy = 0; iy < grid.ny; ++iy) {
      const double y = (static_cast<double>(iy) + 0.5) * grid.dy;
      for (std::size_t ix = 0; ix < grid.nx; ++ix) {
        f(ix, iy) = fn((static_cast<double>(ix) + 0.5) * grid.dx, y);
      }
    }
    return f;
  }

  const GridSpec& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator[](std::size_t k) noexcept { return data_[k]; }
  double operator[](std::size_t k) const noexcept { return data_[k]; }
  double& operator()(std::size_t ix, std::size_t iy) noexcept { return data_[grid_.index(ix, iy)]; }
  double operator()(std::size_t ix, std::size_t iy) const noexcept { return data_[grid_.index(ix, iy)]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }
  double min() const { return *std::min_element(data_.begin(), data_.end()); }
  double max() const { return *std::max_element(data_.begin(), data_.end()); }

  Field& operator+=(const Field& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Field& operator-=(const Field& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Field& operator*=(double s) noexcept {
    for (double& v : data_) v *= s;
    return *this;
  }
  /// this += s * o
  Field& axpy(double s, const Field& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += s * o.data_[k];
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }
  friend Field operator*(Field a, double s) { return a *= s; }

  /// Cellwise product.
  friend Field hadamard(Field a, const Field& b) {
    a.check_same(b);
    for (std::size_t k = 0; k < a.data_.size(); ++k) a.data_[k] *= b.data_[k];
    return a;
  }

  friend bool operator==(const Field&, const Field&) = default;

  void check_same(const Field& o) const {
    if (!(grid_ == o.grid_)) throw std::invalid_argument("field shape mismatch");
  }

 private:
  GridSpec grid_{};
  std::vector<double> data_;
};

/// 5-point Laplacian with homogeneous Neumann boundaries. The ghost cell beyond
/// each boundary face mirrors the boundary cell, so the face flux is zero.
inline Field laplacian_neumann(const Field& f) {
  const GridSpec& g = f.grid();
  if (g.nx < 3 || g.ny < 3) throw std::invalid_argument("laplacian_neumann: grid too small");
  const double cx = 1.0 / (g.dx * g.dx);
  const double cy = 1.0 / (g.dy * g.dy);
  Field out(g);
  for (std::size_t iy = 0; iy < g.ny; ++iy) {
    const std::size_t ym = iy == 0 ? 0 : iy - 1;
    const std::size_t yp = iy + 1 == g.ny ? iy : iy + 1;
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      const std::size_t xm = ix == 0 ? 0 : ix - 1;
      const std::size_t xp = ix + 1 == g.nx ? ix : ix + 1;
      const double c = f(ix, iy);
      out(ix, iy) = (f(xm, iy) + f(xp, iy) - 2.0 * c) * cx + (f(ix, ym) + f(ix, yp) - 2.0 * c) * cy;
    }
  }
  return out;
}

/// Midpoint-rule integral over the domain.
inline double cell_integral(const Field& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v;
  return sum * f.grid().cell_area();
}

/// Squared L2 norm over the domain.
inline double l2_norm_sq(const Field& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v * v;
  return sum * f.grid().cell_area();
}

/// Weighted inner product over the domain.
inline double inner(const Field& a, const Field& b) {
  a.check_same(b);
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += a[k] * b[k];
  return sum * a.grid().cell_area();
}

}  // namespace cfseir
