#pragma once

// Physical model ingredients: scalar and vector potentials with optional
// analytic derivatives, gauge functions and transformations, nonnegative
// weight functions for the restriction factor, and the clamp profile used
// to keep matrix weights bounded.
//
// Units are hbar = 1 and unit charge; the particle mass is the only
// physical constant. Derived fields follow E_j = -dA_j/dt - dV/dx_j and
// B_12 = d_1 A_2 - d_2 A_1 (two dimensions only).

#include <array>
#include <functional>
#include <utility>

#include "wpi/common.hpp"
#include "wpi/grid.hpp"

namespace wpi {

struct PhysicalConstants {
  double mass = 1.0;

  void validate() const {
    if (!(mass > 0) || !std::isfinite(mass)) throw InvalidParameter("mass must be positive and finite");
  }
};

namespace detail {

// Fourth order central difference with step scaled to the evaluation point.
template <class F>
double fd4(F&& f, double x0) {
  double h = 1e-4 * (1.0 + std::abs(x0));
  return (-f(x0 + 2 * h) + 8 * f(x0 + h) - 8 * f(x0 - h) + f(x0 - 2 * h)) / (12 * h);
}

template <class F>
double fd4_coord(F&& f, const Point& x, int axis) {
  return fd4([&](double s) { Point p = x; p[axis] = s; return f(p); }, x[axis]);
}

}  // namespace detail

using ScalarField = std::function<double(double, const Point&)>;
using VectorField = std::function<Point(double, const Point&)>;

// Jacobian of the vector potential: entry [j][k] holds dA_k/dx_j.
using MatrixField = std::function<std::array<Point, 2>(double, const Point&)>;

struct Potential {
  int dim = 1;
  bool time_independent = false;
  // Set by factories whose vector potential vanishes identically; lets the
  // action evaluation skip the A line integral in hot loops.
  bool zero_A = false;
  ScalarField V;
  VectorField A;

  // Optional analytic derivative callbacks. When a callback is absent the
  // corresponding derivative falls back to finite differences of V or A.
  ScalarField dV_dt;
  VectorField grad_V;
  VectorField dA_dt;
  MatrixField jac_A;

  void validate() const {
    if (dim < 1 || dim > 2) throw InvalidParameter("potential dimension must be 1 or 2");
    if (!V || !A) throw InvalidParameter("potential needs V and A callbacks");
  }
};

inline Point potential_grad_V(const Potential& p, double t, const Point& x) {
  if (p.grad_V) return p.grad_V(t, x);
  Point g{0.0, 0.0};
  for (int a = 0; a < p.dim; ++a)
    g[a] = detail::fd4_coord([&](const Point& q) { return p.V(t, q); }, x, a);
  return g;
}

inline Point potential_dA_dt(const Potential& p, double t, const Point& x) {
  if (p.dA_dt) return p.dA_dt(t, x);
  Point g{0.0, 0.0};
  for (int a = 0; a < p.dim; ++a)
    g[a] = detail::fd4([&](double s) { return p.A(s, x)[a]; }, t);
  return g;
}

inline std::array<Point, 2> potential_jac_A(const Potential& p, double t, const Point& x) {
  if (p.jac_A) return p.jac_A(t, x);
  std::array<Point, 2> jac{Point{0.0, 0.0}, Point{0.0, 0.0}};
  for (int j = 0; j < p.dim; ++j)
    for (int k = 0; k < p.dim; ++k)
      jac[j][k] = detail::fd4_coord([&](const Point& q) { return p.A(t, q)[k]; }, x, j);
  return jac;
}

struct FieldValues {
  Point E{0.0, 0.0};
  double B12 = 0.0;  // meaningful in dimension 2 only
};

inline FieldValues eval_fields(const Potential& p, double t, const Point& x) {
  FieldValues f;
  Point gv = potential_grad_V(p, t, x);
  Point at = potential_dA_dt(p, t, x);
  for (int a = 0; a < p.dim; ++a) {
    f.E[a] = -at[a] - gv[a];
    require_finite(f.E[a], "electric field");
  }
  if (p.dim == 2) {
    auto jac = potential_jac_A(p, t, x);
    f.B12 = jac[0][1] - jac[1][0];
    require_finite(f.B12, "magnetic field");
  }
  return f;
}

// ---------------------------------------------------------------------------
// Built in potential families.

inline Potential free_potential(int dim = 1) {
  Potential p;
  p.dim = dim;
  p.time_independent = true;
  p.zero_A = true;
  p.V = [](double, const Point&) { return 0.0; };
  p.A = [](double, const Point&) { return Point{0.0, 0.0}; };
  p.dV_dt = p.V;
  p.grad_V = p.A;
  p.dA_dt = p.A;
  p.jac_A = [](double, const Point&) { return std::array<Point, 2>{Point{0, 0}, Point{0, 0}}; };
  p.validate();
  return p;
}

// V = k |x|^2 / 2, A = 0.
inline Potential harmonic_potential(int dim, double k) {
  require_finite(k, "harmonic coefficient");
  Potential p = free_potential(dim);
  p.V = [dim, k](double, const Point& x) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += sq(x[a]);
    return 0.5 * k * r2;
  };
  p.grad_V = [dim, k](double, const Point& x) {
    Point g{0.0, 0.0};
    for (int a = 0; a < dim; ++a) g[a] = k * x[a];
    return g;
  };
  return p;
}

// V = c |x|^4, A = 0. Grows faster than the linear derivative bound allows,
// useful as the canonical warning case for the assumption checks.
inline Potential quartic_potential(int dim, double c) {
  require_finite(c, "quartic coefficient");
  Potential p = free_potential(dim);
  p.V = [dim, c](double, const Point& x) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += sq(x[a]);
    return c * r2 * r2;
  };
  p.grad_V = [dim, c](double, const Point& x) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += sq(x[a]);
    Point g{0.0, 0.0};
    for (int a = 0; a < dim; ++a) g[a] = 4.0 * c * r2 * x[a];
    return g;
  };
  return p;
}

// Constant electric field E0: V = -E0 . x, A = 0.
inline Potential uniform_field_potential(int dim, const Point& e0) {
  Potential p = free_potential(dim);
  p.V = [dim, e0](double, const Point& x) {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) s += e0[a] * x[a];
    return -s;
  };
  p.grad_V = [dim, e0](double, const Point&) {
    Point g{0.0, 0.0};
    for (int a = 0; a < dim; ++a) g[a] = -e0[a];
    return g;
  };
  return p;
}

// Uniform magnetic field B0 in the symmetric gauge, dimension 2:
// A = (-B0 x2 / 2, B0 x1 / 2), V = 0.
inline Potential magnetic_potential(double b0) {
  require_finite(b0, "magnetic field strength");
  Potential p = free_potential(2);
  p.zero_A = false;
  p.A = [b0](double, const Point& x) { return Point{-0.5 * b0 * x[1], 0.5 * b0 * x[0]}; };
  p.jac_A = [b0](double, const Point&) {
    return std::array<Point, 2>{Point{0.0, 0.5 * b0}, Point{-0.5 * b0, 0.0}};
  };
  return p;
}

// ---------------------------------------------------------------------------
// Gauge functions psi(t, x) and the induced transformation
//   V -> V - dpsi/dt,  A_j -> A_j + dpsi/dx_j,
// which leaves E and B unchanged.

struct GaugeFunction {
  int dim = 1;
  // True when transforming a time independent potential yields another time
  // independent potential (psi constant, linear in x, or linear in t).
  // Enables kernel caching for the transformed model.
  bool preserves_time_independence = false;
  ScalarField psi;
  ScalarField dpsi_dt;   // optional
  VectorField grad_psi;  // optional

  void validate() const {
    if (dim < 1 || dim > 2) throw InvalidParameter("gauge dimension must be 1 or 2");
    if (!psi) throw InvalidParameter("gauge function needs a psi callback");
  }
};

inline double gauge_dpsi_dt(const GaugeFunction& g, double t, const Point& x) {
  if (g.dpsi_dt) return g.dpsi_dt(t, x);
  return detail::fd4([&](double s) { return g.psi(s, x); }, t);
}

inline Point gauge_grad_psi(const GaugeFunction& g, double t, const Point& x) {
  if (g.grad_psi) return g.grad_psi(t, x);
  Point out{0.0, 0.0};
  for (int a = 0; a < g.dim; ++a)
    out[a] = detail::fd4_coord([&](const Point& q) { return g.psi(t, q); }, x, a);
  return out;
}

inline Potential gauge_transform(const Potential& p, const GaugeFunction& g) {
  p.validate();
  g.validate();
  if (p.dim != g.dim) throw InvalidParameter("gauge and potential dimensions differ");
  Potential out;
  out.dim = p.dim;
  out.time_independent = p.time_independent && g.preserves_time_independence;
  out.zero_A = false;  // A picks up grad psi
  out.V = [p, g](double t, const Point& x) { return p.V(t, x) - gauge_dpsi_dt(g, t, x); };
  out.A = [p, g](double t, const Point& x) {
    Point a = p.A(t, x);
    Point gp = gauge_grad_psi(g, t, x);
    for (int j = 0; j < p.dim; ++j) a[j] += gp[j];
    return a;
  };
  // No analytic derivative callbacks: derived fields of the transformed
  // potential go through the finite difference fallback.
  return out;
}

inline GaugeFunction constant_gauge(int dim, double c) {
  GaugeFunction g;
  g.dim = dim;
  g.preserves_time_independence = true;
  g.psi = [c](double, const Point&) { return c; };
  g.dpsi_dt = [](double, const Point&) { return 0.0; };
  g.grad_psi = [](double, const Point&) { return Point{0.0, 0.0}; };
  return g;
}

inline GaugeFunction linear_gauge(int dim, const Point& k) {
  GaugeFunction g;
  g.dim = dim;
  g.preserves_time_independence = true;
  g.psi = [dim, k](double, const Point& x) {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) s += k[a] * x[a];
    return s;
  };
  g.dpsi_dt = [](double, const Point&) { return 0.0; };
  g.grad_psi = [dim, k](double, const Point&) {
    Point out{0.0, 0.0};
    for (int a = 0; a < dim; ++a) out[a] = k[a];
    return out;
  };
  return g;
}

inline GaugeFunction time_gauge(int dim, double c) {
  GaugeFunction g;
  g.dim = dim;
  g.preserves_time_independence = true;
  g.psi = [c](double t, const Point&) { return c * t; };
  g.dpsi_dt = [c](double, const Point&) { return c; };
  g.grad_psi = [](double, const Point&) { return Point{0.0, 0.0}; };
  return g;
}

// Localized smooth bump s * exp(-|x|^2), time independent.
inline GaugeFunction bump_gauge(int dim, double s) {
  GaugeFunction g;
  g.dim = dim;
  g.preserves_time_independence = true;
  g.psi = [dim, s](double, const Point& x) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += sq(x[a]);
    return s * std::exp(-r2);
  };
  g.dpsi_dt = [](double, const Point&) { return 0.0; };
  g.grad_psi = [dim, s](double, const Point& x) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += sq(x[a]);
    double e = s * std::exp(-r2);
    Point out{0.0, 0.0};
    for (int a = 0; a < dim; ++a) out[a] = -2.0 * x[a] * e;
    return out;
  };
  return g;
}

// ---------------------------------------------------------------------------
// Weight functions. W is the nonnegative (up to a declared constant) rate
// that damps paths away from the monitored region: the evolution carries a
// factor exp(-integral of W along the path).

struct Weight {
  int dim = 1;
  bool time_independent = false;
  // Set by zero_weight; lets hot loops skip the damping integral.
  bool is_zero = false;
  // Declared constant C >= 0 with W >= -C everywhere. The assumption
  // validator checks the declaration against samples.
  double lower_bound_const = 0.0;
  ScalarField W;
  VectorField grad_W;  // optional

  void validate() const {
    if (dim < 1 || dim > 2) throw InvalidParameter("weight dimension must be 1 or 2");
    if (!W) throw InvalidParameter("weight needs a W callback");
    if (!(lower_bound_const >= 0) || !std::isfinite(lower_bound_const))
      throw InvalidParameter("weight lower bound constant must be nonnegative");
  }
};

inline Point weight_grad(const Weight& w, double t, const Point& x) {
  if (w.grad_W) return w.grad_W(t, x);
  Point g{0.0, 0.0};
  for (int a = 0; a < w.dim; ++a)
    g[a] = detail::fd4_coord([&](const Point& q) { return w.W(t, q); }, x, a);
  return g;
}

inline Weight zero_weight(int dim = 1) {
  Weight w;
  w.dim = dim;
  w.time_independent = true;
  w.is_zero = true;
  w.W = [](double, const Point&) { return 0.0; };
  w.grad_W = [](double, const Point&) { return Point{0.0, 0.0}; };
  w.validate();
  return w;
}

inline Weight constant_weight(int dim, double c) {
  require_finite(c, "constant weight value");
  Weight w = zero_weight(dim);
  w.is_zero = false;
  w.lower_bound_const = c < 0 ? -c : 0.0;
  w.W = [c](double, const Point&) { return c; };
  w.validate();
  return w;
}

// Position monitoring rate W(t, x) = 2 |x - a(t)|^2 / (T da^2) for a record
// track a(t), duration T and resolution da.
inline Weight quadratic_weight(int dim, double T, double da,
                               const std::function<Point(double)>& center,
                               bool center_is_static = false) {
  if (!(T > 0) || !std::isfinite(T)) throw InvalidParameter("weight duration T must be positive");
  if (!(da > 0) || !std::isfinite(da)) throw InvalidParameter("weight resolution da must be positive");
  if (!center) throw InvalidParameter("weight needs a center track");
  Weight w;
  w.dim = dim;
  w.time_independent = center_is_static;
  double scale = 2.0 / (T * da * da);
  w.W = [dim, scale, center](double t, const Point& x) {
    Point a = center(t);
    double r2 = 0.0;
    for (int k = 0; k < dim; ++k) r2 += sq(x[k] - a[k]);
    return scale * r2;
  };
  w.grad_W = [dim, scale, center](double t, const Point& x) {
    Point a = center(t);
    Point g{0.0, 0.0};
    for (int k = 0; k < dim; ++k) g[k] = 2.0 * scale * (x[k] - a[k]);
    return g;
  };
  w.validate();
  return w;
}

inline Weight quadratic_weight(int dim, double T, double da, const Point& center) {
  return quadratic_weight(dim, T, da, [center](double) { return center; }, true);
}

// ---------------------------------------------------------------------------
// Clamp profile: identity on [0, 1], constant `level` from 2 on, joined by
// a quintic ramp that matches value, slope and curvature at both ends. The
// ramp is monotone only when the level leaves enough headroom; this is
// checked numerically at construction.

class ClampProfile {
 public:
  explicit ClampProfile(double level) : level_(level) {
    if (!(level >= 1.0) || !std::isfinite(level))
      throw InvalidParameter("clamp level must be at least 1");
    a_ = 10.0 * level - 16.0;
    b_ = 23.0 - 15.0 * level;
    c_ = 6.0 * level - 9.0;
    // Reject levels whose ramp would dip: slope 1+3a u^2+4b u^3+5c u^4
    // must stay nonnegative on [0, 1].
    for (int k = 0; k <= 2000; ++k) {
      double u = k / 2000.0;
      double slope = 1.0 + 3.0 * a_ * u * u + 4.0 * b_ * u * u * u + 5.0 * c_ * u * u * u * u;
      if (slope < -1e-12)
        throw InvalidParameter("clamp level too small for a monotone ramp");
    }
  }

  double level() const { return level_; }

  double operator()(double s) const {
    if (s <= 1.0) return s < 0.0 ? 0.0 : s;
    if (s >= 2.0) return level_;
    double u = s - 1.0;
    return 1.0 + u + u * u * u * (a_ + b_ * u + c_ * u * u);
  }

 private:
  double level_;
  double a_, b_, c_;
};

// Bounded monitoring rate: the quadratic weight pushed through a clamp.
inline Weight clamped_quadratic_weight(int dim, double T, double da, const Point& center,
                                       const ClampProfile& profile) {
  Weight base = quadratic_weight(dim, T, da, center);
  Weight w;
  w.dim = dim;
  w.time_independent = true;
  auto baseW = base.W;
  w.W = [baseW, profile](double t, const Point& x) { return profile(baseW(t, x)); };
  w.validate();
  return w;
}

}  // namespace wpi
