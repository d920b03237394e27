#pragma once

// Uniform spatial grids and discrete wave functions.
//
// The computational domain is the box [-L, L)^d sampled at n points per
// axis, x_k = -L + k h with h = 2L/n. Functions are represented by their
// values at the sample points and the L2 norm is the h^d weighted sum.
// Dimensions 1 and 2 are supported; points are carried in a fixed size
// array to keep inner loops allocation free.

#include <array>
#include <functional>
#include <vector>

#include "wpi/common.hpp"

namespace wpi {

using Point = std::array<double, 2>;

struct Grid {
  int dim = 1;     // spatial dimension, 1 or 2
  int n = 0;       // points per axis
  double box = 0;  // half extent L

  Grid() = default;
  Grid(int dim_, int n_, double box_) : dim(dim_), n(n_), box(box_) {
    if (dim < 1 || dim > 2) throw InvalidParameter("grid dimension must be 1 or 2");
    if (n < 2) throw InvalidParameter("grid needs at least 2 points per axis");
    if (!(box > 0) || !std::isfinite(box)) throw InvalidParameter("grid box must be positive");
  }

  double h() const { return 2.0 * box / n; }
  double coord(int k) const { return -box + h() * k; }

  std::size_t size() const {
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(n);
    return s;
  }

  // Volume element h^dim.
  double cell() const {
    double c = 1.0;
    for (int a = 0; a < dim; ++a) c *= h();
    return c;
  }

  Point point(std::size_t flat) const {
    Point p{0.0, 0.0};
    if (dim == 1) {
      p[0] = coord(static_cast<int>(flat));
    } else {
      p[0] = coord(static_cast<int>(flat / n));
      p[1] = coord(static_cast<int>(flat % n));
    }
    return p;
  }

  std::size_t flat(int i, int j = 0) const {
    return dim == 1 ? static_cast<std::size_t>(i)
                    : static_cast<std::size_t>(i) * n + j;
  }

  bool operator==(const Grid& o) const { return dim == o.dim && n == o.n && box == o.box; }
};

struct WaveFunction {
  Grid grid;
  double t = 0.0;
  std::vector<cplx> amp;

  WaveFunction() = default;
  WaveFunction(const Grid& g, double time) : grid(g), t(time), amp(g.size(), cplx{0.0, 0.0}) {}

  static WaveFunction sample(const Grid& g, double time,
                             const std::function<cplx(const Point&)>& f) {
    WaveFunction w(g, time);
    for (std::size_t k = 0; k < w.amp.size(); ++k) w.amp[k] = f(g.point(k));
    return w;
  }

  double norm() const {
    double s = 0.0;
    for (const cplx& a : amp) s += std::norm(a);
    return std::sqrt(grid.cell() * s);
  }

  // Fraction of the squared norm carried by points within 10 percent of
  // the box edge on any axis. Used by the propagator boundary guard.
  double boundary_fraction() const {
    double edge = 0.9 * grid.box;
    double total = 0.0, band = 0.0;
    for (std::size_t k = 0; k < amp.size(); ++k) {
      double m = std::norm(amp[k]);
      total += m;
      Point p = grid.point(k);
      bool near = false;
      for (int a = 0; a < grid.dim; ++a)
        if (std::abs(p[a]) >= edge) near = true;
      if (near) band += m;
    }
    return total > 0.0 ? band / total : 0.0;
  }
};

inline cplx inner(const WaveFunction& a, const WaveFunction& b) {
  if (!(a.grid == b.grid)) throw InvalidParameter("inner product needs matching grids");
  cplx s{0.0, 0.0};
  for (std::size_t k = 0; k < a.amp.size(); ++k) s += std::conj(a.amp[k]) * b.amp[k];
  return a.grid.cell() * s;
}

inline double l2_distance(const WaveFunction& a, const WaveFunction& b) {
  if (!(a.grid == b.grid)) throw InvalidParameter("distance needs matching grids");
  double s = 0.0;
  for (std::size_t k = 0; k < a.amp.size(); ++k) s += std::norm(a.amp[k] - b.amp[k]);
  return std::sqrt(a.grid.cell() * s);
}

// Wave function with l internal components per grid point, stored
// interleaved: amp[p * l + j] is component j at point p.
struct SpinorWaveFunction {
  Grid grid;
  double t = 0.0;
  int l = 1;
  std::vector<cplx> amp;

  SpinorWaveFunction() = default;
  SpinorWaveFunction(const Grid& g, double time, int components)
      : grid(g), t(time), l(components), amp(g.size() * components, cplx{0.0, 0.0}) {
    if (components < 1) throw InvalidParameter("spinor needs at least 1 component");
  }

  cplx& at(std::size_t p, int j) { return amp[p * l + j]; }
  const cplx& at(std::size_t p, int j) const { return amp[p * l + j]; }

  double norm() const {
    double s = 0.0;
    for (const cplx& a : amp) s += std::norm(a);
    return std::sqrt(grid.cell() * s);
  }

  double boundary_fraction() const {
    double edge = 0.9 * grid.box;
    double total = 0.0, band = 0.0;
    for (std::size_t p = 0; p < grid.size(); ++p) {
      double m = 0.0;
      for (int j = 0; j < l; ++j) m += std::norm(at(p, j));
      total += m;
      Point q = grid.point(p);
      bool near = false;
      for (int a = 0; a < grid.dim; ++a)
        if (std::abs(q[a]) >= edge) near = true;
      if (near) band += m;
    }
    return total > 0.0 ? band / total : 0.0;
  }

  // Component j as a scalar wave function.
  WaveFunction component(int j) const {
    if (j < 0 || j >= l) throw IndexOutOfRange("spinor component out of range");
    WaveFunction w(grid, t);
    for (std::size_t p = 0; p < grid.size(); ++p) w.amp[p] = at(p, j);
    return w;
  }
};

inline double l2_distance(const SpinorWaveFunction& a, const SpinorWaveFunction& b) {
  if (!(a.grid == b.grid) || a.l != b.l)
    throw InvalidParameter("distance needs matching grids and component counts");
  double s = 0.0;
  for (std::size_t k = 0; k < a.amp.size(); ++k) s += std::norm(a.amp[k] - b.amp[k]);
  return std::sqrt(a.grid.cell() * s);
}

}  // namespace wpi
