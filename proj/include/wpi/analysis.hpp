#pragma once

// Measurement utilities built on top of the propagator: discrete Sobolev
// norms, mesh refinement studies, randomized norm growth estimates and the
// gauge covariance defect.

#include <cstdint>
#include <vector>

#include "wpi/common.hpp"
#include "wpi/grid.hpp"
#include "wpi/model.hpp"
#include "wpi/propagator.hpp"
#include "wpi/rng.hpp"
#include "wpi/spin.hpp"

namespace wpi {

namespace detail {

// Central difference along one axis with zero extension past the boundary.
inline WaveFunction derivative_axis(const WaveFunction& f, int axis, int order) {
  const Grid& g = f.grid;
  if (axis < 0 || axis >= g.dim) throw IndexOutOfRange("derivative axis out of range");
  if (order < 1 || order > 4) throw InvalidParameter("derivative order must be in [1, 4]");
  int reach = order <= 2 ? 1 : 2;
  if (g.n < 2 * reach + 1) throw GridTooCoarse("grid too coarse for the requested derivative");

  double h = g.h();
  std::size_t stride = (g.dim == 2 && axis == 0) ? static_cast<std::size_t>(g.n) : 1;
  WaveFunction out(g, f.t);
  auto fetch = [&](std::size_t p, int k, int off) -> cplx {
    int kk = k + off;
    if (kk < 0 || kk >= g.n) return cplx{0.0, 0.0};
    return f.amp[p + static_cast<std::size_t>(off) * stride];
  };
  for (std::size_t p = 0; p < g.size(); ++p) {
    int k = g.dim == 1 ? static_cast<int>(p)
                       : (axis == 0 ? static_cast<int>(p / g.n) : static_cast<int>(p % g.n));
    cplx v;
    switch (order) {
      case 1:
        v = (fetch(p, k, 1) - fetch(p, k, -1)) / (2.0 * h);
        break;
      case 2:
        v = (fetch(p, k, 1) - 2.0 * f.amp[p] + fetch(p, k, -1)) / (h * h);
        break;
      case 3:
        v = (fetch(p, k, 2) - 2.0 * fetch(p, k, 1) + 2.0 * fetch(p, k, -1) - fetch(p, k, -2)) /
            (2.0 * h * h * h);
        break;
      default:
        v = (fetch(p, k, 2) - 4.0 * fetch(p, k, 1) + 6.0 * f.amp[p] - 4.0 * fetch(p, k, -1) +
             fetch(p, k, -2)) /
            (h * h * h * h);
        break;
    }
    out.amp[p] = v;
  }
  return out;
}

}  // namespace detail

// Weighted Sobolev norm of regularity index a:
//   ||f|| + sum over multi indices 1 <= |alpha| <= 2a of ||D^alpha f||
//        + || <x>^{2a} f ||
// with centered difference derivatives. Index 0 is exactly the L2 norm.
inline double sobolev_norm(const WaveFunction& f, int a) {
  if (a < 0) throw InvalidParameter("regularity index must be nonnegative");
  if (a == 0) return f.norm();
  if (a > 2) throw InvalidParameter("regularity index above 2 is not supported");

  double total = f.norm();
  int maxo = 2 * a;
  if (f.grid.dim == 1) {
    for (int o = 1; o <= maxo; ++o) total += detail::derivative_axis(f, 0, o).norm();
  } else {
    for (int o0 = 0; o0 <= maxo; ++o0) {
      for (int o1 = 0; o1 <= maxo - o0; ++o1) {
        if (o0 + o1 < 1) continue;
        WaveFunction d = f;
        if (o0 > 0) d = detail::derivative_axis(d, 0, o0);
        if (o1 > 0) d = detail::derivative_axis(d, 1, o1);
        total += d.norm();
      }
    }
  }
  WaveFunction wtd = f;
  for (std::size_t p = 0; p < f.grid.size(); ++p) {
    Point x = f.grid.point(p);
    double r2 = 0.0;
    for (int ax = 0; ax < f.grid.dim; ++ax) r2 += sq(x[ax]);
    double w = 1.0;
    for (int k = 0; k < a; ++k) w *= (1.0 + r2);
    wtd.amp[p] *= w;
  }
  total += wtd.norm();
  require_finite(total, "sobolev norm");
  return total;
}

// ---------------------------------------------------------------------------
// Mesh refinement against a reference solution.

struct ConvergenceRow {
  int nu = 0;
  double mesh = 0.0;
  double l2_error = 0.0;
  double order = 0.0;       // observed rate vs the previous row, 0 for the first
  double norm_ratio = 0.0;  // final norm over initial norm
};

inline std::vector<ConvergenceRow> convergence_study(
    const PhysicalConstants& constants, const Potential& pot, const Weight& weight,
    const WaveFunction& f0, double t_end, const std::vector<int>& nus,
    const WaveFunction& reference, const PropagatorConfig& cfg = {}) {
  if (nus.empty()) throw InvalidParameter("convergence study needs at least one step count");
  std::vector<ConvergenceRow> rows;
  double n0 = f0.norm();
  for (std::size_t k = 0; k < nus.size(); ++k) {
    Subdivision sub = Subdivision::uniform(f0.t, t_end, nus[k]);
    WaveFunction u = time_sliced(constants, pot, weight, f0, sub, cfg);
    ConvergenceRow row;
    row.nu = nus[k];
    row.mesh = (t_end - f0.t) / nus[k];
    row.l2_error = l2_distance(u, reference);
    row.norm_ratio = n0 > 0 ? u.norm() / n0 : 0.0;
    if (k > 0 && rows.back().l2_error > 0 && row.l2_error > 0)
      row.order = std::log(rows.back().l2_error / row.l2_error) /
                  std::log(rows.back().mesh / row.mesh);
    rows.push_back(row);
  }
  return rows;
}

inline std::vector<ConvergenceRow> convergence_study(
    const PhysicalConstants& constants, const Potential& pot, const Weight& weight,
    const SpinSystem& sys, const SpinorWaveFunction& f0, double t_end,
    const std::vector<int>& nus, const SpinorWaveFunction& reference,
    const PropagatorConfig& cfg = {}) {
  if (nus.empty()) throw InvalidParameter("convergence study needs at least one step count");
  std::vector<ConvergenceRow> rows;
  double n0 = f0.norm();
  for (std::size_t k = 0; k < nus.size(); ++k) {
    Subdivision sub = Subdivision::uniform(f0.t, t_end, nus[k]);
    SpinorWaveFunction u = spin_time_sliced(constants, pot, weight, sys, f0, sub, cfg);
    ConvergenceRow row;
    row.nu = nus[k];
    row.mesh = (t_end - f0.t) / nus[k];
    row.l2_error = l2_distance(u, reference);
    row.norm_ratio = n0 > 0 ? u.norm() / n0 : 0.0;
    if (k > 0 && rows.back().l2_error > 0 && row.l2_error > 0)
      row.order = std::log(rows.back().l2_error / row.l2_error) /
                  std::log(rows.back().mesh / row.mesh);
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Randomized norm growth estimate for a single step.

struct StabilityReport {
  double rho = 0.0;
  std::vector<double> ratios;  // per trial norm ratio after one step
  double fitted_k0 = 0.0;      // max over trials of log(ratio) / rho
};

namespace detail {

// Band limited trial state: a few low modes under a flat top envelope that
// vanishes near the box edge. The coefficients are drawn before any grid
// evaluation, so the same seed yields the same analytic state on any grid.
inline WaveFunction random_band_state(const Grid& g, int modes, std::uint64_t seed) {
  Rng rng(seed);
  int m = modes;
  std::vector<cplx> coef;
  int per_axis = 2 * m + 1;
  int count = g.dim == 1 ? per_axis : per_axis * per_axis;
  coef.reserve(count);
  for (int j = 0; j < count; ++j) coef.push_back(rng.cnormal());

  double L = g.box;
  WaveFunction f(g, 0.0);
  for (std::size_t p = 0; p < g.size(); ++p) {
    Point x = g.point(p);
    cplx v{0.0, 0.0};
    if (g.dim == 1) {
      for (int j = -m; j <= m; ++j) {
        double k = pi * j / L;
        v += coef[j + m] * cplx{std::cos(k * x[0]), std::sin(k * x[0])};
      }
    } else {
      int idx = 0;
      for (int j0 = -m; j0 <= m; ++j0)
        for (int j1 = -m; j1 <= m; ++j1) {
          double ph = pi * (j0 * x[0] + j1 * x[1]) / L;
          v += coef[idx++] * cplx{std::cos(ph), std::sin(ph)};
        }
    }
    double env = 0.0;
    double r8 = 0.0;
    for (int ax = 0; ax < g.dim; ++ax) {
      double u = x[ax] / (0.6 * L);
      double u2 = u * u;
      r8 += u2 * u2 * u2 * u2;
    }
    env = std::exp(-r8);
    f.amp[p] = v * env;
  }
  double n = f.norm();
  if (!(n > 0)) throw NonFinite("random band state has zero norm");
  for (auto& a : f.amp) a /= n;
  return f;
}

}  // namespace detail

inline StabilityReport stability_estimate(const PhysicalConstants& constants,
                                          const Potential& pot, const Weight& weight,
                                          const Grid& grid, double rho, int trials, int modes,
                                          std::uint64_t seed, const PropagatorConfig& cfg = {}) {
  if (trials < 1) throw InvalidParameter("stability estimate needs at least one trial");
  if (modes < 1) throw InvalidParameter("stability estimate needs at least one mode");
  if (!(rho > 0)) throw InvalidParameter("stability estimate needs a positive step");
  StabilityReport rep;
  rep.rho = rho;
  double max_log = 0.0;
  bool first = true;
  for (int trial = 0; trial < trials; ++trial) {
    WaveFunction f = detail::random_band_state(grid, modes, seed + static_cast<std::uint64_t>(trial));
    WaveFunction u = one_step(constants, pot, weight, f, 0.0, rho, cfg);
    double ratio = u.norm();  // input is normalized
    rep.ratios.push_back(ratio);
    double lg = std::log(std::max(ratio, 1e-300));
    if (first || lg > max_log) {
      max_log = lg;
      first = false;
    }
  }
  rep.fitted_k0 = max_log / rho;
  return rep;
}

// ---------------------------------------------------------------------------
// Gauge covariance defect. Transforming the potential by psi and the states
// by the phase exp(i psi) must commute with propagation:
//   U'[e^{i psi(s)} f] = e^{i psi(t)} U[f]
// where U' propagates under the transformed potential. Returns the relative
// L2 defect between the two sides.

inline double gauge_check(const PhysicalConstants& constants, const Potential& pot,
                          const Weight& weight, const GaugeFunction& gauge,
                          const WaveFunction& f, const Subdivision& sub,
                          const PropagatorConfig& cfg = {}) {
  gauge.validate();
  if (gauge.dim != f.grid.dim) throw InvalidParameter("gauge and state dimensions differ");
  sub.validate();
  double t0 = sub.times.front();
  double t1 = sub.times.back();

  WaveFunction plain = time_sliced(constants, pot, weight, f, sub, cfg);
  for (std::size_t p = 0; p < plain.amp.size(); ++p) {
    double ph = gauge.psi(t1, f.grid.point(p));
    plain.amp[p] *= cplx{std::cos(ph), std::sin(ph)};
  }

  WaveFunction fg = f;
  for (std::size_t p = 0; p < fg.amp.size(); ++p) {
    double ph = gauge.psi(t0, f.grid.point(p));
    fg.amp[p] *= cplx{std::cos(ph), std::sin(ph)};
  }
  Potential tp = gauge_transform(pot, gauge);
  WaveFunction gauged = time_sliced(constants, tp, weight, fg, sub, cfg);

  double ref = plain.norm();
  return l2_distance(gauged, plain) / (ref > 0 ? ref : 1.0);
}

}  // namespace wpi
