#pragma once

// Weighted short time propagation and its composition over subdivisions.
//
// One step from time s to t = s + rho applies the oscillatory kernel
//
//   (C f)(x) = (m / (2 pi i rho))^{d/2} integral e^{i S(x, y) - D(x, y)} f(y) dy,
//
// discretized on the grid with the volume element h^d, where S is the
// straight line action and D the damping integral of the weight. The
// square root of 1/i is taken as exp(-i pi / 4) per dimension. A zero
// length step is the identity by definition.
//
// With l internal levels each kernel entry additionally carries the l x l
// channel matrix transported along the segment, so rows and columns are
// indexed by (grid point, level).
//
// Two guards protect the discretization:
//   * sampling: the kernel phase must be resolved by the mesh, which
//     requires mass * (2 L) * h / rho <= pi on every axis; otherwise the
//     discrete sum aliases and the result is garbage that still looks
//     smooth. Violations throw UndersampledKernel unless explicitly
//     disabled for diagnostics.
//   * boundary: the state must carry negligible mass near the box edge,
//     since the integral is truncated there. Violations throw BoundaryLeak.

#include <map>
#include <vector>

#include "wpi/action.hpp"
#include "wpi/common.hpp"
#include "wpi/grid.hpp"
#include "wpi/model.hpp"
#include "wpi/quadrature.hpp"
#include "wpi/spin.hpp"

namespace wpi {

enum class CutoffKind {
  domain_truncation,  // rely on the finite box only (default)
  compact_profile,    // multiply by a smooth compactly supported profile between steps
};

struct PropagatorConfig {
  int theta_nodes = 8;      // quadrature nodes for line integrals
  int spin_substeps = 16;   // RK4 substeps per segment for channel transport
  CutoffKind cutoff = CutoffKind::domain_truncation;
  double cutoff_scale = 0.0;  // profile argument scale: factor is chi(scale |x|)
  double boundary_tol = 1e-8;
  bool enforce_sampling_guard = true;
  // Advisory upper bound on a single step length from the small step
  // theory; reported by diagnostics, never enforced.
  double advisory_step_bound = 1.0;
  std::size_t cache_limit_bytes = std::size_t(3) << 30;

  void validate() const {
    if (theta_nodes < 1) throw InvalidParameter("theta_nodes must be positive");
    if (spin_substeps < 1) throw InvalidParameter("spin_substeps must be positive");
    if (cutoff == CutoffKind::compact_profile && !(cutoff_scale > 0))
      throw InvalidParameter("compact_profile cutoff needs a positive cutoff_scale");
    if (!(boundary_tol > 0)) throw InvalidParameter("boundary_tol must be positive");
  }
};

// Smooth profile: 1 on [0, 1/2], 0 from 1 on, quintic ramp between.
inline double cutoff_profile_value(double r) {
  if (r <= 0.5) return 1.0;
  if (r >= 1.0) return 0.0;
  double u = (r - 0.5) * 2.0;
  return 1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
}

struct Subdivision {
  std::vector<double> times;  // weakly increasing; repeated entries are allowed

  static Subdivision uniform(double s, double t, int nu) {
    if (nu < 1) throw InvalidParameter("subdivision needs at least one step");
    if (!(t >= s)) throw InvalidParameter("subdivision needs s <= t");
    Subdivision sub;
    sub.times.resize(nu + 1);
    for (int j = 0; j <= nu; ++j)
      sub.times[j] = s + (t - s) * (static_cast<double>(j) / nu);
    return sub;
  }

  int steps() const { return static_cast<int>(times.size()) - 1; }

  void validate() const {
    if (times.size() < 2) throw InvalidParameter("subdivision needs at least two times");
    for (std::size_t j = 0; j < times.size(); ++j) {
      require_finite(times[j], "subdivision time");
      if (j > 0 && times[j] < times[j - 1])
        throw InvalidParameter("subdivision times must be nondecreasing");
    }
  }
};

inline double sampling_guard_value(double mass, const Grid& grid, double rho) {
  return mass * (2.0 * grid.box) * grid.h() / rho;
}

namespace detail {

inline void check_step_guards(const PhysicalConstants& constants, const Grid& grid, double rho,
                              double boundary_fraction, const PropagatorConfig& cfg) {
  if (cfg.enforce_sampling_guard) {
    double g = sampling_guard_value(constants.mass, grid, rho);
    if (g > pi * (1.0 + 1e-9)) {
      double n_min = constants.mass * sq(2.0 * grid.box) / (pi * rho);
      throw UndersampledKernel(
          "kernel phase is not resolved: mass*2L*h/rho = " + std::to_string(g) +
          " exceeds pi; need at least " + std::to_string(n_min) +
          " points per axis (or a longer step) for box half width " + std::to_string(grid.box));
    }
  }
  if (boundary_fraction > cfg.boundary_tol)
    throw BoundaryLeak("state carries " + std::to_string(boundary_fraction) +
                       " of its mass within 10 percent of the box edge (tolerance " +
                       std::to_string(cfg.boundary_tol) + ")");
}

inline cplx step_prefactor(double mass, double rho, int dim, double cell) {
  double amp = std::sqrt(mass / (2.0 * pi * rho));
  cplx root = std::polar(amp, -pi / 4.0);
  cplx pref = dim == 1 ? root : root * root;
  return pref * cell;
}

// Kernel entry generator for the scalar part, shared by the cached and the
// matrix free paths so both produce identical values.
struct ScalarEntry {
  const PhysicalConstants& constants;
  const Potential& pot;
  const Weight& weight;
  const Grid& grid;
  const QuadratureRule& rule;
  double s, t;
  cplx pref_vol;

  cplx operator()(std::size_t xi, std::size_t yi) const {
    StraightLine line{grid.dim, s, t, grid.point(yi), grid.point(xi)};
    ActionValue v;
    v.S = classical_action(constants, pot, line, rule);
    v.damping = weight.is_zero ? 0.0 : weight_integral(weight, line, rule);
    return pref_vol * kernel_phase(v);
  }
};

// out[r] = sum_c entry(r, c) * in[c], accumulated in index order with
// explicit real arithmetic (keeps the reduction deterministic and avoids
// the library complex multiply call in the hot loop).
template <class EntryFn>
void apply_rows(std::size_t rows, std::size_t cols, EntryFn&& entry, const std::vector<cplx>& in,
                std::vector<cplx>& out) {
  out.assign(rows, cplx{0.0, 0.0});
  for (std::size_t r = 0; r < rows; ++r) {
    double sr = 0.0, si = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      cplx m = entry(r, c);
      double fr = in[c].real(), fi = in[c].imag();
      sr += m.real() * fr - m.imag() * fi;
      si += m.real() * fi + m.imag() * fr;
    }
    out[r] = {sr, si};
  }
}

struct DenseKernel {
  std::size_t rows = 0, cols = 0;
  std::vector<cplx> m;

  void apply(const std::vector<cplx>& in, std::vector<cplx>& out) const {
    const cplx* data = m.data();
    std::size_t c_count = cols;
    apply_rows(rows, cols,
               [data, c_count](std::size_t r, std::size_t c) { return data[r * c_count + c]; },
               in, out);
  }
};

inline DenseKernel build_scalar_kernel(const ScalarEntry& entry, std::size_t n) {
  DenseKernel k;
  k.rows = k.cols = n;
  k.m.resize(n * n);
  for (std::size_t xi = 0; xi < n; ++xi)
    for (std::size_t yi = 0; yi < n; ++yi) k.m[xi * n + yi] = entry(xi, yi);
  return k;
}

// 2x2 complex matrices in row major arrays for the specialized channel
// integration of diagonal record systems (the common two level case).
using M2 = std::array<cplx, 4>;

inline M2 m2mul(const M2& a, const M2& b) {
  return M2{a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

struct RecordChannel2 {
  // generator G(q) = -i Hs - diag(w_0(q), w_1(q)) with constant Hs
  M2 base;  // -i Hs
  Point rec0, rec1;
  double scale;
  const ClampProfile* profile;
  int dim;

  M2 generator(const Point& q) const {
    M2 g = base;
    double r0 = 0.0, r1 = 0.0;
    for (int a = 0; a < dim; ++a) {
      r0 += sq(q[a] - rec0[a]);
      r1 += sq(q[a] - rec1[a]);
    }
    g[0] -= (*profile)(scale * r0);
    g[3] -= (*profile)(scale * r1);
    return g;
  }

  M2 transport(const StraightLine& line, int substeps) const {
    M2 u{cplx{1, 0}, cplx{0, 0}, cplx{0, 0}, cplx{1, 0}};
    double rho = line.rho();
    double h = rho / substeps;
    for (int k = 0; k < substeps; ++k) {
      double f0 = static_cast<double>(k) / substeps;
      double fm = (k + 0.5) / substeps;
      double f1 = static_cast<double>(k + 1) / substeps;
      auto at = [&](double f) {
        Point q{line.y[0] + f * (line.x[0] - line.y[0]),
                line.y[1] + f * (line.x[1] - line.y[1])};
        return q;
      };
      M2 g1 = generator(at(f0));
      M2 g2 = generator(at(fm));
      M2 g3 = generator(at(f1));
      auto stage = [&](const M2& g, const M2& v) {
        M2 p = m2mul(g, v);
        for (auto& e : p) e *= h;
        return p;
      };
      M2 k1 = stage(g1, u);
      M2 uk = u;
      for (int i = 0; i < 4; ++i) uk[i] = u[i] + 0.5 * k1[i];
      M2 k2 = stage(g2, uk);
      for (int i = 0; i < 4; ++i) uk[i] = u[i] + 0.5 * k2[i];
      M2 k3 = stage(g2, uk);
      for (int i = 0; i < 4; ++i) uk[i] = u[i] + k3[i];
      M2 k4 = stage(g3, uk);
      for (int i = 0; i < 4; ++i)
        u[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
    }
    return u;
  }
};

// Dense kernel with level blocks: entry ((x, j), (y, k)) = K(x, y) F_{jk}.
inline DenseKernel build_spin_kernel(const ScalarEntry& entry, const SpinSystem& sys,
                                     const Grid& grid, double s, double t, int substeps) {
  std::size_t n = grid.size();
  int l = sys.l;
  std::size_t rows = n * l;
  DenseKernel k;
  k.rows = k.cols = rows;
  k.m.resize(rows * rows);

  bool constant = sys.constant;
  SpinMatrix f_const;
  if (constant) {
    StraightLine probe{grid.dim, s, t, grid.point(0), grid.point(0)};
    f_const = integrate_channel(sys, probe, substeps);
  }
  bool fast2 = !constant && sys.diagonal_records && l == 2 && sys.profile.has_value();
  RecordChannel2 rc2;
  if (fast2) {
    SpinMatrix b = -(iu * sys.Hs_const);
    rc2.base = M2{b(0, 0), b(0, 1), b(1, 0), b(1, 1)};
    rc2.rec0 = sys.records[0];
    rc2.rec1 = sys.records[1];
    rc2.scale = sys.record_scale;
    rc2.profile = &*sys.profile;
    rc2.dim = grid.dim;
  }

  for (std::size_t xi = 0; xi < n; ++xi) {
    for (std::size_t yi = 0; yi < n; ++yi) {
      cplx ks = entry(xi, yi);
      StraightLine line{grid.dim, s, t, grid.point(yi), grid.point(xi)};
      if (constant) {
        for (int j = 0; j < l; ++j)
          for (int c = 0; c < l; ++c)
            k.m[(xi * l + j) * rows + yi * l + c] = ks * f_const(j, c);
      } else if (fast2) {
        M2 f = rc2.transport(line, substeps);
        k.m[(xi * 2 + 0) * rows + yi * 2 + 0] = ks * f[0];
        k.m[(xi * 2 + 0) * rows + yi * 2 + 1] = ks * f[1];
        k.m[(xi * 2 + 1) * rows + yi * 2 + 0] = ks * f[2];
        k.m[(xi * 2 + 1) * rows + yi * 2 + 1] = ks * f[3];
      } else {
        SpinMatrix f = integrate_channel(sys, line, substeps);
        for (int j = 0; j < l; ++j)
          for (int c = 0; c < l; ++c)
            k.m[(xi * l + j) * rows + yi * l + c] = ks * f(j, c);
      }
    }
  }
  return k;
}

inline void check_finite(const std::vector<cplx>& amp) {
  for (const cplx& a : amp)
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
      throw NonFinite("propagated state contains a non finite amplitude");
}

// Single entry cache: uniform subdivisions of time independent models hit
// this on every step after the first.
struct KernelCache {
  bool valid = false;
  double rho = 0.0;
  DenseKernel kernel;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Scalar propagation.

inline WaveFunction one_step(const PhysicalConstants& constants, const Potential& pot,
                             const Weight& weight, const WaveFunction& f, double s, double t,
                             const PropagatorConfig& cfg = {}) {
  constants.validate();
  pot.validate();
  weight.validate();
  cfg.validate();
  if (pot.dim != f.grid.dim || weight.dim != f.grid.dim)
    throw InvalidParameter("model and state dimensions differ");
  if (std::abs(f.t - s) > 1e-10 * (1.0 + std::abs(s)))
    throw InvalidParameter("state time does not match the step start time");
  if (t < s) throw InvalidParameter("one_step requires s <= t");
  if (t == s) return f;  // identity branch

  double rho = t - s;
  detail::check_step_guards(constants, f.grid, rho, f.boundary_fraction(), cfg);

  const QuadratureRule& rule = gauss_legendre(cfg.theta_nodes);
  detail::ScalarEntry entry{constants, pot,  weight,
                            f.grid,    rule, s,
                            t,         detail::step_prefactor(constants.mass, rho, f.grid.dim,
                                                              f.grid.cell())};
  std::size_t n = f.grid.size();
  WaveFunction out(f.grid, t);
  if (n * n * sizeof(cplx) <= cfg.cache_limit_bytes) {
    detail::DenseKernel k = detail::build_scalar_kernel(entry, n);
    k.apply(f.amp, out.amp);
  } else {
    detail::apply_rows(n, n, entry, f.amp, out.amp);
  }
  detail::check_finite(out.amp);
  return out;
}

// Composition of one step kernels over a subdivision. Zero length gaps act
// as the identity. With a compact_profile cutoff the profile multiplies the
// state between consecutive steps (not after the last). Per step norm
// ratios are appended to *ratios when given, one entry per positive gap.
inline WaveFunction time_sliced(const PhysicalConstants& constants, const Potential& pot,
                                const Weight& weight, const WaveFunction& f,
                                const Subdivision& sub, const PropagatorConfig& cfg = {},
                                std::vector<double>* ratios = nullptr) {
  constants.validate();
  pot.validate();
  weight.validate();
  cfg.validate();
  sub.validate();
  if (std::abs(f.t - sub.times.front()) > 1e-10 * (1.0 + std::abs(sub.times.front())))
    throw InvalidParameter("state time does not match the subdivision start");

  const QuadratureRule& rule = gauss_legendre(cfg.theta_nodes);
  bool cacheable = pot.time_independent && weight.time_independent;
  detail::KernelCache cache;

  WaveFunction cur = f;
  int nsteps = sub.steps();
  std::size_t n = f.grid.size();
  for (int g = 0; g < nsteps; ++g) {
    double s = sub.times[g];
    double t = sub.times[g + 1];
    if (t > s) {
      double rho = t - s;
      double norm_in = 0.0;
      if (ratios) norm_in = cur.norm();
      detail::check_step_guards(constants, f.grid, rho, cur.boundary_fraction(), cfg);
      detail::ScalarEntry entry{constants, pot,  weight,
                                f.grid,    rule, s,
                                t,         detail::step_prefactor(constants.mass, rho,
                                                                  f.grid.dim, f.grid.cell())};
      std::vector<cplx> next;
      if (n * n * sizeof(cplx) <= cfg.cache_limit_bytes) {
        if (!(cacheable && cache.valid && cache.rho == rho)) {
          // For time dependent models every step needs its own kernel, so
          // the cache is overwritten rather than grown.
          cache.kernel = detail::build_scalar_kernel(entry, n);
          cache.rho = rho;
          cache.valid = cacheable;
        }
        cache.kernel.apply(cur.amp, next);
      } else {
        detail::apply_rows(n, n, entry, cur.amp, next);
      }
      cur.amp = std::move(next);
      cur.t = t;
      detail::check_finite(cur.amp);
      if (ratios) ratios->push_back(norm_in > 0 ? cur.norm() / norm_in : 0.0);
    }
    if (g + 1 < nsteps && cfg.cutoff == CutoffKind::compact_profile) {
      for (std::size_t p = 0; p < n; ++p) {
        Point q = f.grid.point(p);
        double r2 = 0.0;
        for (int a = 0; a < f.grid.dim; ++a) r2 += sq(q[a]);
        cur.amp[p] *= cutoff_profile_value(cfg.cutoff_scale * std::sqrt(r2));
      }
    }
  }
  cur.t = sub.times.back();
  return cur;
}

// ---------------------------------------------------------------------------
// Propagation with internal levels.

inline SpinorWaveFunction spin_one_step(const PhysicalConstants& constants, const Potential& pot,
                                        const Weight& weight, const SpinSystem& sys,
                                        const SpinorWaveFunction& f, double s, double t,
                                        const PropagatorConfig& cfg = {}) {
  constants.validate();
  pot.validate();
  weight.validate();
  sys.validate();
  cfg.validate();
  if (pot.dim != f.grid.dim || weight.dim != f.grid.dim || sys.dim != f.grid.dim)
    throw InvalidParameter("model and state dimensions differ");
  if (sys.l != f.l) throw InvalidParameter("spin system and state level counts differ");
  if (std::abs(f.t - s) > 1e-10 * (1.0 + std::abs(s)))
    throw InvalidParameter("state time does not match the step start time");
  if (t < s) throw InvalidParameter("spin_one_step requires s <= t");
  if (t == s) return f;

  double rho = t - s;
  detail::check_step_guards(constants, f.grid, rho, f.boundary_fraction(), cfg);

  const QuadratureRule& rule = gauss_legendre(cfg.theta_nodes);
  detail::ScalarEntry entry{constants, pot,  weight,
                            f.grid,    rule, s,
                            t,         detail::step_prefactor(constants.mass, rho, f.grid.dim,
                                                              f.grid.cell())};
  std::size_t rows = f.grid.size() * f.l;
  if (rows * rows * sizeof(cplx) > cfg.cache_limit_bytes)
    throw ResourceLimit("level resolved kernel exceeds the cache limit; reduce the grid");
  detail::DenseKernel k =
      detail::build_spin_kernel(entry, sys, f.grid, s, t, cfg.spin_substeps);
  SpinorWaveFunction out(f.grid, t, f.l);
  k.apply(f.amp, out.amp);
  detail::check_finite(out.amp);
  return out;
}

inline SpinorWaveFunction spin_time_sliced(const PhysicalConstants& constants,
                                           const Potential& pot, const Weight& weight,
                                           const SpinSystem& sys, const SpinorWaveFunction& f,
                                           const Subdivision& sub,
                                           const PropagatorConfig& cfg = {},
                                           std::vector<double>* ratios = nullptr) {
  constants.validate();
  pot.validate();
  weight.validate();
  sys.validate();
  cfg.validate();
  sub.validate();
  if (sys.l != f.l) throw InvalidParameter("spin system and state level counts differ");
  if (std::abs(f.t - sub.times.front()) > 1e-10 * (1.0 + std::abs(sub.times.front())))
    throw InvalidParameter("state time does not match the subdivision start");

  const QuadratureRule& rule = gauss_legendre(cfg.theta_nodes);
  bool cacheable = pot.time_independent && weight.time_independent;
  detail::KernelCache cache;

  SpinorWaveFunction cur = f;
  int nsteps = sub.steps();
  std::size_t n = f.grid.size();
  std::size_t rows = n * f.l;
  if (rows * rows * sizeof(cplx) > cfg.cache_limit_bytes)
    throw ResourceLimit("level resolved kernel exceeds the cache limit; reduce the grid");
  for (int g = 0; g < nsteps; ++g) {
    double s = sub.times[g];
    double t = sub.times[g + 1];
    if (t > s) {
      double rho = t - s;
      double norm_in = 0.0;
      if (ratios) norm_in = cur.norm();
      detail::check_step_guards(constants, f.grid, rho, cur.boundary_fraction(), cfg);
      detail::ScalarEntry entry{constants, pot,  weight,
                                f.grid,    rule, s,
                                t,         detail::step_prefactor(constants.mass, rho,
                                                                  f.grid.dim, f.grid.cell())};
      if (!(cacheable && cache.valid && cache.rho == rho)) {
        cache.kernel = detail::build_spin_kernel(entry, sys, f.grid, s, t, cfg.spin_substeps);
        cache.rho = rho;
        cache.valid = cacheable;
      }
      std::vector<cplx> next;
      cache.kernel.apply(cur.amp, next);
      cur.amp = std::move(next);
      cur.t = t;
      detail::check_finite(cur.amp);
      if (ratios) ratios->push_back(norm_in > 0 ? cur.norm() / norm_in : 0.0);
    }
    if (g + 1 < nsteps && cfg.cutoff == CutoffKind::compact_profile) {
      for (std::size_t p = 0; p < n; ++p) {
        Point q = f.grid.point(p);
        double r2 = 0.0;
        for (int a = 0; a < f.grid.dim; ++a) r2 += sq(q[a]);
        double chi = cutoff_profile_value(cfg.cutoff_scale * std::sqrt(r2));
        for (int j = 0; j < f.l; ++j) cur.at(p, j) *= chi;
      }
    }
  }
  cur.t = sub.times.back();
  return cur;
}

}  // namespace wpi
