#pragma once

// Independent reference solutions used to check the propagator:
//
//   * closed form free evolution of complex Gaussian packets,
//   * an exponential quadratic ansatz evolved by an adaptive RK45 for
//     models with at most quadratic V and W and at most linear A (one
//     dimension),
//   * a Crank Nicolson finite difference solver for the damped evolution
//     equation, with iterative sparse linear solves,
//   * a residual check that measures how well a trajectory satisfies the
//     discrete evolution equation.
//
// None of these share discretization machinery with the kernel propagator
// beyond the grid type, which is the point.

#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include "wpi/common.hpp"
#include "wpi/grid.hpp"
#include "wpi/model.hpp"
#include "wpi/spin.hpp"

namespace wpi {

// ---------------------------------------------------------------------------
// Exponential quadratic states u(x) = exp(a2 x^2 + a1 x + a0), dimension 1.
// The physical parameters are alpha = -2 a2 (complex width, Re alpha > 0),
// the center mu and the momentum p0.

struct GaussianAnsatz {
  cplx a2{-0.5, 0.0};
  cplx a1{0.0, 0.0};
  cplx a0{0.0, 0.0};

  cplx alpha() const { return -2.0 * a2; }
  double mu() const {
    double re = alpha().real();
    if (!(re > 0)) throw AnsatzBreakdown("ansatz width has no positive real part");
    return a1.real() / re;
  }
  double p0() const { return a1.imag() - mu() * alpha().imag(); }

  // Physical construction; when normalized the L2 norm is 1.
  static GaussianAnsatz physical(cplx alpha, double mu, double p0, bool normalized = true) {
    if (!(alpha.real() > 0)) throw InvalidParameter("ansatz needs Re alpha > 0");
    GaussianAnsatz g;
    g.a2 = -0.5 * alpha;
    g.a1 = alpha * mu + cplx{0.0, p0};
    if (normalized) {
      double sigma = alpha.real();
      double re_a1 = g.a1.real();
      g.a0 = cplx{-0.5 * (re_a1 * re_a1 / sigma + 0.5 * std::log(pi / sigma)), 0.0};
    }
    return g;
  }

  cplx eval(double x) const { return std::exp((a2 * x + a1) * x + a0); }

  WaveFunction sample(const Grid& grid, double t) const {
    if (grid.dim != 1) throw InvalidParameter("ansatz sampling supports dimension 1");
    WaveFunction f(grid, t);
    for (std::size_t p = 0; p < f.amp.size(); ++p) f.amp[p] = eval(grid.point(p)[0]);
    return f;
  }

  void check_width() const {
    if (!(alpha().real() > 1e-12)) throw AnsatzBreakdown("ansatz width collapsed");
  }
};

// Closed form free evolution over time t (V = A = W = 0):
//   a2(t) = a2 / (1 - c t),  a1(t) = a1 / (1 - c t),
//   a0(t) = a0 + a1^2 / (4 a2) * (1 / (1 - c t) - 1) - log(1 - c t) / 2,
// with c = (2 i / m) a2; the degenerate a2 = 0 case is a plane wave.
inline GaussianAnsatz free_evolve(const GaussianAnsatz& g, const PhysicalConstants& constants,
                                  double t) {
  constants.validate();
  require_finite(t, "evolution time");
  GaussianAnsatz out = g;
  if (g.a2 == cplx{0.0, 0.0}) {
    out.a0 = g.a0 + cplx{0.0, 0.5 / constants.mass} * g.a1 * g.a1 * t;
    return out;
  }
  cplx c = cplx{0.0, 2.0 / constants.mass} * g.a2;
  cplx den = 1.0 - c * t;
  if (den.real() <= 0.0 && std::abs(den.imag()) < 1e-300)
    throw AnsatzBreakdown("free evolution hit the logarithm branch cut");
  out.a2 = g.a2 / den;
  out.a1 = g.a1 / den;
  out.a0 = g.a0 + g.a1 * g.a1 / (4.0 * g.a2) * (1.0 / den - 1.0) - 0.5 * std::log(den);
  out.check_width();
  return out;
}

// ---------------------------------------------------------------------------
// Polynomial model for the ansatz ODE: V = v0 + v1 x + v2 x^2, same for W,
// A = A0 + A1 x, all coefficients constant in time, dimension 1.

struct QuadraticModel {
  double v0 = 0, v1 = 0, v2 = 0;
  double w0 = 0, w1 = 0, w2 = 0;
  double A0 = 0, A1 = 0;
};

// Extract and verify polynomial coefficients from callback potentials. The
// fit is sampled at x in {-1, 0, 1} and verified at further probe points
// and times; models that are not of the admissible polynomial form are
// rejected.
inline QuadraticModel quadratic_model_from(const Potential& pot, const Weight& weight,
                                           double t_probe0, double t_probe1) {
  pot.validate();
  weight.validate();
  if (pot.dim != 1 || weight.dim != 1)
    throw InvalidParameter("the ansatz oracle supports dimension 1");
  QuadraticModel m;
  auto fit3 = [](double fm, double f0, double fp, double& c0, double& c1, double& c2) {
    c0 = f0;
    c1 = 0.5 * (fp - fm);
    c2 = 0.5 * (fp + fm) - f0;
  };
  auto vat = [&](double t, double x) { return pot.V(t, Point{x, 0.0}); };
  auto wat = [&](double t, double x) { return weight.W(t, Point{x, 0.0}); };
  auto aat = [&](double t, double x) { return pot.A(t, Point{x, 0.0})[0]; };
  fit3(vat(t_probe0, -1), vat(t_probe0, 0), vat(t_probe0, 1), m.v0, m.v1, m.v2);
  fit3(wat(t_probe0, -1), wat(t_probe0, 0), wat(t_probe0, 1), m.w0, m.w1, m.w2);
  m.A0 = aat(t_probe0, 0);
  m.A1 = 0.5 * (aat(t_probe0, 1) - aat(t_probe0, -1));

  const double probes[4] = {-2.0, -0.5, 0.5, 2.0};
  const double times[3] = {t_probe0, 0.5 * (t_probe0 + t_probe1), t_probe1};
  for (double t : times) {
    for (double x : probes) {
      double v = vat(t, x);
      double w = wat(t, x);
      double a = aat(t, x);
      if (std::abs(m.v0 + m.v1 * x + m.v2 * x * x - v) > 1e-8 * (1.0 + std::abs(v)))
        throw InvalidParameter("potential is not a constant quadratic in x");
      if (std::abs(m.w0 + m.w1 * x + m.w2 * x * x - w) > 1e-8 * (1.0 + std::abs(w)))
        throw InvalidParameter("weight is not a constant quadratic in x");
      if (std::abs(m.A0 + m.A1 * x - a) > 1e-8 * (1.0 + std::abs(a)))
        throw InvalidParameter("vector potential is not constant linear in x");
    }
  }
  return m;
}

namespace detail {

// Right hand side of the ansatz coefficient ODE, from substituting the
// exponential quadratic into the damped evolution equation with
// H = (1/2m)(-i d/dx - A)^2 + V - i W:
//   da2 = (2i/m) a2^2 + (2/m) a2 A1 - i A1^2/(2m)        - i v2 - w2
//   da1 = (2i/m) a2 a1 + (2/m) a2 A0 + (1/m) a1 A1
//         - i A0 A1 / m                                   - i v1 - w1
//   da0 = (i/2m)(a1^2 + 2 a2) + (A1 + 2 a1 A0)/(2m)
//         - i A0^2/(2m)                                   - i v0 - w0
inline std::array<cplx, 3> ansatz_rhs(const std::array<cplx, 3>& y, double mass,
                                      const QuadraticModel& m) {
  const cplx a2 = y[0], a1 = y[1];
  std::array<cplx, 3> d;
  d[0] = cplx{0.0, 2.0 / mass} * a2 * a2 + (2.0 / mass) * m.A1 * a2 -
         cplx{0.0, m.A1 * m.A1 / (2.0 * mass)} - cplx{0.0, m.v2} - m.w2;
  d[1] = cplx{0.0, 2.0 / mass} * a2 * a1 + (2.0 / mass) * m.A0 * a2 + (m.A1 / mass) * a1 -
         cplx{0.0, m.A0 * m.A1 / mass} - cplx{0.0, m.v1} - m.w1;
  d[2] = cplx{0.0, 0.5 / mass} * (a1 * a1 + 2.0 * a2) + (m.A1 + 2.0 * m.A0 * a1) / (2.0 * mass) -
         cplx{0.0, m.A0 * m.A0 / (2.0 * mass)} - cplx{0.0, m.v0} - m.w0;
  return d;
}

}  // namespace detail

// Evolve the ansatz coefficients from t0 to t1 with an adaptive Dormand
// Prince RK45. Throws AnsatzBreakdown if the width loses positivity.
inline GaussianAnsatz gaussian_solve(const PhysicalConstants& constants, const QuadraticModel& m,
                                     const GaussianAnsatz& g0, double t0, double t1,
                                     double rtol = 1e-10) {
  constants.validate();
  if (!(t1 >= t0)) throw InvalidParameter("gaussian_solve needs t0 <= t1");
  if (!(rtol > 0)) throw InvalidParameter("gaussian_solve needs a positive tolerance");
  g0.check_width();
  if (t1 == t0) return g0;

  const double atol = 1e-12;
  std::array<cplx, 3> y{g0.a2, g0.a1, g0.a0};
  double t = t0;
  double h = (t1 - t0) / 64.0;
  const double hmin = (t1 - t0) * 1e-14;

  auto rhs = [&](const std::array<cplx, 3>& v) { return detail::ansatz_rhs(v, constants.mass, m); };
  auto axpy = [](const std::array<cplx, 3>& base, double c, const std::array<cplx, 3>& k) {
    std::array<cplx, 3> r;
    for (int i = 0; i < 3; ++i) r[i] = base[i] + c * k[i];
    return r;
  };

  int guard = 0;
  while (t < t1) {
    if (++guard > 1000000) throw AnsatzBreakdown("ansatz integration failed to advance");
    if (t + h > t1) h = t1 - t;
    auto k1 = rhs(y);
    auto y2 = axpy(y, h * (1.0 / 5.0), k1);
    auto k2 = rhs(y2);
    std::array<cplx, 3> y3, y4, y5, y6, y7;
    for (int i = 0; i < 3; ++i) y3[i] = y[i] + h * (3.0 / 40.0 * k1[i] + 9.0 / 40.0 * k2[i]);
    auto k3 = rhs(y3);
    for (int i = 0; i < 3; ++i)
      y4[i] = y[i] + h * (44.0 / 45.0 * k1[i] - 56.0 / 15.0 * k2[i] + 32.0 / 9.0 * k3[i]);
    auto k4 = rhs(y4);
    for (int i = 0; i < 3; ++i)
      y5[i] = y[i] + h * (19372.0 / 6561.0 * k1[i] - 25360.0 / 2187.0 * k2[i] +
                          64448.0 / 6561.0 * k3[i] - 212.0 / 729.0 * k4[i]);
    auto k5 = rhs(y5);
    for (int i = 0; i < 3; ++i)
      y6[i] = y[i] + h * (9017.0 / 3168.0 * k1[i] - 355.0 / 33.0 * k2[i] +
                          46732.0 / 5247.0 * k3[i] + 49.0 / 176.0 * k4[i] -
                          5103.0 / 18656.0 * k5[i]);
    auto k6 = rhs(y6);
    for (int i = 0; i < 3; ++i)
      y7[i] = y[i] + h * (35.0 / 384.0 * k1[i] + 500.0 / 1113.0 * k3[i] + 125.0 / 192.0 * k4[i] -
                          2187.0 / 6784.0 * k5[i] + 11.0 / 84.0 * k6[i]);
    auto k7 = rhs(y7);

    double err = 0.0;
    for (int i = 0; i < 3; ++i) {
      cplx e = h * ((35.0 / 384.0 - 5179.0 / 57600.0) * k1[i] +
                    (500.0 / 1113.0 - 7571.0 / 16695.0) * k3[i] +
                    (125.0 / 192.0 - 393.0 / 640.0) * k4[i] +
                    (-2187.0 / 6784.0 + 92097.0 / 339200.0) * k5[i] +
                    (11.0 / 84.0 - 187.0 / 2100.0) * k6[i] - 1.0 / 40.0 * k7[i]);
      double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y7[i]));
      err = std::max(err, std::abs(e) / sc);
    }
    if (err <= 1.0) {
      t += h;
      y = y7;
      if (!(-2.0 * y[0].real() > 1e-12))
        throw AnsatzBreakdown("ansatz width collapsed during integration");
      for (auto& c : y) require_finite(c, "ansatz coefficient");
    }
    double fac = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    h *= std::min(5.0, std::max(0.2, fac));
    if (h < hmin) throw AnsatzBreakdown("ansatz integration step underflow");
  }

  GaussianAnsatz out;
  out.a2 = y[0];
  out.a1 = y[1];
  out.a0 = y[2];
  out.check_width();
  return out;
}

// ---------------------------------------------------------------------------
// Discrete Hamiltonian H = (1/2m)(-i grad - A)^2 + V - i W (+ level blocks
// Hs - i Ws) with centered differences and zero Dirichlet boundaries.

namespace detail {

inline Eigen::SparseMatrix<cplx> assemble_hamiltonian(const PhysicalConstants& constants,
                                                      const Potential& pot, const Weight& weight,
                                                      const SpinSystem* sys, const Grid& grid,
                                                      double t) {
  int l = sys ? sys->l : 1;
  std::size_t n = grid.size();
  std::size_t dof = n * l;
  double h = grid.h();
  double mass = constants.mass;
  double kin = 1.0 / (2.0 * mass * h * h);

  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(dof * (2 * grid.dim + l + 1));

  for (std::size_t p = 0; p < n; ++p) {
    Point x = grid.point(p);
    double v = pot.V(t, x);
    double w = weight.is_zero ? 0.0 : weight.W(t, x);
    Point a = pot.zero_A ? Point{0.0, 0.0} : pot.A(t, x);
    double a2 = 0.0;
    for (int ax = 0; ax < grid.dim; ++ax) a2 += sq(a[ax]);
    cplx diag = cplx{v + a2 / (2.0 * mass) + 2.0 * grid.dim * kin, -w};

    int idx[2];
    if (grid.dim == 1) {
      idx[0] = static_cast<int>(p);
    } else {
      idx[0] = static_cast<int>(p / grid.n);
      idx[1] = static_cast<int>(p % grid.n);
    }
    for (int ax = 0; ax < grid.dim; ++ax) {
      std::size_t stride = (grid.dim == 2 && ax == 0) ? static_cast<std::size_t>(grid.n) : 1;
      for (int dir = -1; dir <= 1; dir += 2) {
        int kk = idx[ax] + dir;
        if (kk < 0 || kk >= grid.n) continue;
        std::size_t q = dir > 0 ? p + stride : p - stride;
        cplx off{-kin, 0.0};
        if (!pot.zero_A) {
          Point aq = pot.A(t, grid.point(q));
          // symmetric discretization of (i/2m)(A d + d A)
          double mean = 0.5 * (a[ax] + aq[ax]);
          off += cplx{0.0, dir * mean / (2.0 * mass * h)};
        }
        for (int j = 0; j < l; ++j)
          trip.emplace_back(static_cast<int>(p * l + j), static_cast<int>(q * l + j), off);
      }
    }
    if (sys) {
      SpinMatrix hs = sys->Hs(t, x);
      SpinMatrix ws = sys->Ws(t, x);
      for (int j = 0; j < l; ++j)
        for (int k = 0; k < l; ++k) {
          cplx val = hs(j, k) - iu * ws(j, k);
          if (j == k) val += diag;
          if (val != cplx{0.0, 0.0})
            trip.emplace_back(static_cast<int>(p * l + j), static_cast<int>(p * l + k), val);
        }
    } else {
      trip.emplace_back(static_cast<int>(p), static_cast<int>(p), diag);
    }
  }
  Eigen::SparseMatrix<cplx> m(static_cast<Eigen::Index>(dof), static_cast<Eigen::Index>(dof));
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

}  // namespace detail

// H applied to a state, through the assembled matrix so that every consumer
// sees the identical discretization.
inline WaveFunction apply_hamiltonian(const PhysicalConstants& constants, const Potential& pot,
                                      const Weight& weight, const WaveFunction& f, double t) {
  auto m = detail::assemble_hamiltonian(constants, pot, weight, nullptr, f.grid, t);
  Eigen::Map<const Eigen::VectorXcd> u(f.amp.data(), static_cast<Eigen::Index>(f.amp.size()));
  Eigen::VectorXcd r = m * u;
  WaveFunction out(f.grid, f.t);
  for (std::size_t k = 0; k < out.amp.size(); ++k) out.amp[k] = r(static_cast<Eigen::Index>(k));
  return out;
}

inline SpinorWaveFunction apply_hamiltonian(const PhysicalConstants& constants,
                                            const Potential& pot, const Weight& weight,
                                            const SpinSystem& sys, const SpinorWaveFunction& f,
                                            double t) {
  auto m = detail::assemble_hamiltonian(constants, pot, weight, &sys, f.grid, t);
  Eigen::Map<const Eigen::VectorXcd> u(f.amp.data(), static_cast<Eigen::Index>(f.amp.size()));
  Eigen::VectorXcd r = m * u;
  SpinorWaveFunction out(f.grid, f.t, f.l);
  for (std::size_t k = 0; k < out.amp.size(); ++k) out.amp[k] = r(static_cast<Eigen::Index>(k));
  return out;
}

// ---------------------------------------------------------------------------
// Crank Nicolson time stepping: (I + i d/2 H) u' = (I - i d/2 H) u with H
// evaluated at the step midpoint, solved iteratively (BiCGSTAB with an
// incomplete LU preconditioner).

struct CrankNicolsonOptions {
  int steps = 0;
  double solve_tol = 1e-10;
  int max_iterations = 2000;
  // When positive, the trajectory variant stores every k-th state.
  int store_every = 1;
};

namespace detail {

inline void cn_run(const PhysicalConstants& constants, const Potential& pot, const Weight& weight,
                   const SpinSystem* sys, const Grid& grid, std::vector<cplx>& amp, double t0,
                   double t_end, const CrankNicolsonOptions& opts,
                   const std::function<void(double, const std::vector<cplx>&)>& observer) {
  constants.validate();
  pot.validate();
  weight.validate();
  if (opts.steps < 1) throw InvalidParameter("Crank Nicolson needs at least one step");
  if (!(t_end > t0)) throw InvalidParameter("Crank Nicolson needs t_end > t0");
  double delta = (t_end - t0) / opts.steps;
  bool static_model = pot.time_independent && weight.time_independent && (!sys || sys->constant);

  std::size_t dof = amp.size();
  Eigen::SparseMatrix<cplx> id(static_cast<Eigen::Index>(dof), static_cast<Eigen::Index>(dof));
  id.setIdentity();

  Eigen::BiCGSTAB<Eigen::SparseMatrix<cplx>, Eigen::IncompleteLUT<cplx>> solver;
  solver.setTolerance(opts.solve_tol);
  solver.setMaxIterations(opts.max_iterations);

  Eigen::SparseMatrix<cplx> mplus, mminus;
  bool assembled = false;
  Eigen::VectorXcd u = Eigen::Map<const Eigen::VectorXcd>(amp.data(), static_cast<Eigen::Index>(dof));

  for (int k = 0; k < opts.steps; ++k) {
    double tmid = t0 + (k + 0.5) * delta;
    if (!assembled || !static_model) {
      auto hmat = assemble_hamiltonian(constants, pot, weight, sys, grid, tmid);
      cplx half{0.0, 0.5 * delta};
      mplus = id + half * hmat;
      mminus = id - half * hmat;
      solver.compute(mplus);
      if (solver.info() != Eigen::Success)
        throw LinearSolveFailure("Crank Nicolson preconditioner setup failed");
      assembled = true;
    }
    Eigen::VectorXcd rhs = mminus * u;
    u = solver.solveWithGuess(rhs, u);
    if (solver.info() != Eigen::Success)
      throw LinearSolveFailure("Crank Nicolson solve did not converge (residual " +
                               std::to_string(solver.error()) + ")");
    if (observer) {
      std::vector<cplx> snap(dof);
      for (std::size_t j = 0; j < dof; ++j) snap[j] = u(static_cast<Eigen::Index>(j));
      observer(t0 + (k + 1) * delta, snap);
    }
  }
  for (std::size_t j = 0; j < dof; ++j) {
    amp[j] = u(static_cast<Eigen::Index>(j));
    if (!std::isfinite(amp[j].real()) || !std::isfinite(amp[j].imag()))
      throw NonFinite("Crank Nicolson produced a non finite amplitude");
  }
}

}  // namespace detail

inline WaveFunction cn_evolve(const PhysicalConstants& constants, const Potential& pot,
                              const Weight& weight, const WaveFunction& f, double t_end,
                              const CrankNicolsonOptions& opts) {
  WaveFunction out = f;
  detail::cn_run(constants, pot, weight, nullptr, f.grid, out.amp, f.t, t_end, opts, nullptr);
  out.t = t_end;
  return out;
}

inline SpinorWaveFunction cn_evolve(const PhysicalConstants& constants, const Potential& pot,
                                    const Weight& weight, const SpinSystem& sys,
                                    const SpinorWaveFunction& f, double t_end,
                                    const CrankNicolsonOptions& opts) {
  if (sys.l != f.l) throw InvalidParameter("spin system and state level counts differ");
  SpinorWaveFunction out = f;
  detail::cn_run(constants, pot, weight, &sys, f.grid, out.amp, f.t, t_end, opts, nullptr);
  out.t = t_end;
  return out;
}

// Trajectory variant: returns the initial state plus every store_every-th
// Crank Nicolson state (always including the final one).
inline std::vector<WaveFunction> cn_trajectory(const PhysicalConstants& constants,
                                               const Potential& pot, const Weight& weight,
                                               const WaveFunction& f, double t_end,
                                               const CrankNicolsonOptions& opts) {
  if (opts.store_every < 1) throw InvalidParameter("store_every must be positive");
  std::vector<WaveFunction> traj;
  traj.push_back(f);
  WaveFunction work = f;
  int count = 0;
  auto obs = [&](double t, const std::vector<cplx>& amp) {
    ++count;
    if (count % opts.store_every == 0 || count == opts.steps) {
      WaveFunction snap(f.grid, t);
      snap.amp = amp;
      traj.push_back(snap);
    }
  };
  detail::cn_run(constants, pot, weight, nullptr, f.grid, work.amp, f.t, t_end, opts, obs);
  return traj;
}

// Largest relative defect of the centered-difference form of the evolution
// equation i du/dt = H u over the interior samples of a uniformly spaced
// trajectory:
//   max_n ‖ i (u_{n+1} - u_{n-1}) / (2 delta) - H(t_n) u_n ‖ / ‖u_n‖.
// This is an independent consistency probe: it does not reuse any stepping
// scheme, only the discrete Hamiltonian.
inline double residual_check(const PhysicalConstants& constants, const Potential& pot,
                             const Weight& weight, const std::vector<WaveFunction>& traj) {
  if (traj.size() < 3) throw InvalidParameter("residual check needs at least three states");
  double delta = traj[1].t - traj[0].t;
  if (!(delta > 0)) throw InvalidParameter("trajectory times must increase");
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    if (!(traj[k].grid == traj[k + 1].grid)) throw InvalidParameter("trajectory grids differ");
    double gap = traj[k + 1].t - traj[k].t;
    if (std::abs(gap - delta) > 1e-9 * delta)
      throw InvalidParameter("residual check needs uniform time steps");
  }
  double worst = 0.0;
  for (std::size_t n = 1; n + 1 < traj.size(); ++n) {
    const WaveFunction& u = traj[n];
    WaveFunction hu = apply_hamiltonian(constants, pot, weight, u, u.t);
    double num = 0.0;
    for (std::size_t p = 0; p < u.amp.size(); ++p) {
      cplx r = iu * (traj[n + 1].amp[p] - traj[n - 1].amp[p]) / (2.0 * delta) - hu.amp[p];
      num += std::norm(r);
    }
    num = std::sqrt(u.grid.cell() * num);
    require_finite(num, "residual");
    double den = u.norm();
    if (den > 0) worst = std::max(worst, num / den);
  }
  return worst;
}

}  // namespace wpi
