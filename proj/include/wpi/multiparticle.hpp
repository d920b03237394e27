#pragma once

// Two particle states on a shared one dimensional grid, their joint kernel
// evolution, pair exchange and symmetry sector checks, and the tensor
// structure of the per particle level channels.
//
// The joint step kernel over (x1, x2) factorizes into the two single
// particle kernels times a pure phase from the pair interaction:
//
//   K[(x1,x2),(y1,y2)] = K1(x1,y1) K2(x2,y2)
//                        * exp(-i rho GL[ v(r(th)) + v(-r(th)) ])
//
// with r(th) the difference of the two straight line paths, which depends
// only on x1 - x2 and y1 - y2. The implementation exploits exactly that:
// per particle kernels are n x n tables, the coupling is a (2n-1) x (2n-1)
// table over difference indices, and the joint matrix (n^2 x n^2) is never
// materialized. Per step application is the full O(n^4) sum, accumulated in
// fixed index order so results are reproducible.

#include <optional>
#include <vector>

#include "wpi/common.hpp"
#include "wpi/grid.hpp"
#include "wpi/model.hpp"
#include "wpi/propagator.hpp"
#include "wpi/spin.hpp"

namespace wpi {

// ---------------------------------------------------------------------------
// Model: two particles, each with its own potential, weight and optional
// level structure, plus one pair interaction v(t, r) entering the action as
// v(r) + v(-r) (the ordered pair sum).

struct PairPotential {
  bool is_zero = true;
  bool time_independent = true;
  std::function<double(double, double)> v;  // (t, x1 - x2) -> real

  void validate() const {
    if (!is_zero && !v) throw InvalidParameter("pair potential needs a callback");
  }
};

inline PairPotential zero_pair() { return {}; }

inline PairPotential quadratic_pair(double kappa) {
  require_finite(kappa, "pair coupling");
  PairPotential p;
  p.is_zero = false;
  p.time_independent = true;
  p.v = [kappa](double, double r) { return kappa * r * r; };
  return p;
}

struct ParticleSpecies {
  Potential pot;
  Weight weight;
  std::optional<SpinSystem> spin;

  int levels() const { return spin ? spin->l : 1; }

  void validate() const {
    pot.validate();
    weight.validate();
    if (pot.dim != 1 || weight.dim != 1)
      throw InvalidParameter("joint evolution builds on one dimensional particles");
    if (spin) {
      spin->validate();
      if (spin->dim != 1) throw InvalidParameter("particle spin system must be one dimensional");
    }
  }
};

struct MultiParticleModel {
  PhysicalConstants constants;
  int particles = 2;
  ParticleSpecies first, second;
  PairPotential pair;
  // Declared, not inferred: symmetry checks require it.
  bool identical = false;

  bool time_independent() const {
    bool ti = first.pot.time_independent && first.weight.time_independent &&
              second.pot.time_independent && second.weight.time_independent &&
              pair.time_independent;
    if (first.spin) ti = ti && first.spin->constant;
    if (second.spin) ti = ti && second.spin->constant;
    return ti;
  }

  int levels() const { return first.levels(); }

  void validate() const {
    constants.validate();
    if (particles != 2) throw InvalidParameter("joint evolution supports exactly two particles");
    first.validate();
    second.validate();
    pair.validate();
    if (first.levels() != second.levels())
      throw InvalidParameter("both particles must carry the same level count");
    if (first.levels() > 2) throw ResourceLimit("joint evolution supports at most 2 levels");
  }
};

inline MultiParticleModel identical_pair_model(const PhysicalConstants& constants,
                                               const Potential& pot, const Weight& weight,
                                               const PairPotential& pair) {
  MultiParticleModel m;
  m.constants = constants;
  m.first = ParticleSpecies{pot, weight, std::nullopt};
  m.second = m.first;
  m.pair = pair;
  m.identical = true;
  m.validate();
  return m;
}

inline MultiParticleModel identical_pair_model(const PhysicalConstants& constants,
                                               const Potential& pot, const Weight& weight,
                                               const PairPotential& pair, const SpinSystem& sys) {
  MultiParticleModel m;
  m.constants = constants;
  m.first = ParticleSpecies{pot, weight, sys};
  m.second = m.first;
  m.pair = pair;
  m.identical = true;
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// State: amplitudes over the joint grid (axis 0 = particle one, axis 1 =
// particle two) with an interleaved level pair index J = j1 * l + j2.

struct MultiParticleState {
  Grid grid;  // dim == 2; each axis is one particle's coordinate
  int l = 1;  // levels per particle
  double t = 0.0;
  std::vector<cplx> amp;

  MultiParticleState() = default;
  MultiParticleState(const Grid& g, int levels, double time)
      : grid(g), l(levels), t(time), amp(g.size() * levels * levels, cplx{0.0, 0.0}) {
    if (g.dim != 2) throw InvalidParameter("joint states live on a two axis grid");
    if (levels < 1) throw InvalidParameter("joint state needs at least 1 level");
  }

  int spin_dim() const { return l * l; }

  cplx& at(std::size_t p, int j1, int j2) { return amp[p * spin_dim() + j1 * l + j2]; }
  const cplx& at(std::size_t p, int j1, int j2) const {
    return amp[p * spin_dim() + j1 * l + j2];
  }

  double norm() const {
    double s = 0.0;
    for (const cplx& a : amp) s += std::norm(a);
    return std::sqrt(grid.cell() * s);
  }

  // Mass fraction within 10 percent of either particle's box edge.
  double boundary_fraction() const {
    double total = 0.0, edge = 0.0;
    double lim = 0.9 * grid.box;
    int sd = spin_dim();
    for (int i1 = 0; i1 < grid.n; ++i1) {
      double x1 = grid.coord(i1);
      for (int i2 = 0; i2 < grid.n; ++i2) {
        double x2 = grid.coord(i2);
        std::size_t p = static_cast<std::size_t>(i1) * grid.n + i2;
        double cellmass = 0.0;
        for (int j = 0; j < sd; ++j) cellmass += std::norm(amp[p * sd + j]);
        total += cellmass;
        if (std::abs(x1) >= lim || std::abs(x2) >= lim) edge += cellmass;
      }
    }
    return total > 0 ? edge / total : 0.0;
  }
};

inline double l2_distance(const MultiParticleState& a, const MultiParticleState& b) {
  if (!(a.grid == b.grid) || a.l != b.l) throw InvalidParameter("joint states are not comparable");
  double s = 0.0;
  for (std::size_t k = 0; k < a.amp.size(); ++k) s += std::norm(a.amp[k] - b.amp[k]);
  return std::sqrt(a.grid.cell() * s);
}

// Product of two single particle states on matching axis grids.
inline MultiParticleState product_state(const WaveFunction& f1, const WaveFunction& f2) {
  if (f1.grid.dim != 1 || f2.grid.dim != 1)
    throw InvalidParameter("product factors must be one dimensional");
  if (!(f1.grid == f2.grid)) throw InvalidParameter("product factors need the same axis grid");
  if (f1.t != f2.t) throw InvalidParameter("product factors need the same time");
  int n = f1.grid.n;
  MultiParticleState out(Grid{2, n, f1.grid.box}, 1, f1.t);
  for (int i1 = 0; i1 < n; ++i1)
    for (int i2 = 0; i2 < n; ++i2)
      out.amp[static_cast<std::size_t>(i1) * n + i2] = f1.amp[i1] * f2.amp[i2];
  return out;
}

inline MultiParticleState product_state(const SpinorWaveFunction& f1,
                                        const SpinorWaveFunction& f2) {
  if (f1.grid.dim != 1 || f2.grid.dim != 1)
    throw InvalidParameter("product factors must be one dimensional");
  if (!(f1.grid == f2.grid)) throw InvalidParameter("product factors need the same axis grid");
  if (f1.t != f2.t) throw InvalidParameter("product factors need the same time");
  if (f1.l != f2.l) throw InvalidParameter("product factors need the same level count");
  int n = f1.grid.n, l = f1.l;
  MultiParticleState out(Grid{2, n, f1.grid.box}, l, f1.t);
  for (int i1 = 0; i1 < n; ++i1)
    for (int i2 = 0; i2 < n; ++i2) {
      std::size_t p = static_cast<std::size_t>(i1) * n + i2;
      for (int j1 = 0; j1 < l; ++j1)
        for (int j2 = 0; j2 < l; ++j2) out.at(p, j1, j2) = f1.at(i1, j1) * f2.at(i2, j2);
    }
  return out;
}

// Level free joint states are plain wave functions on the joint grid.
inline WaveFunction scalar_view(const MultiParticleState& f) {
  if (f.l != 1) throw InvalidParameter("scalar view needs a level free state");
  WaveFunction out(f.grid, f.t);
  out.amp = f.amp;
  return out;
}

inline MultiParticleState joint_state(const WaveFunction& f) {
  if (f.grid.dim != 2) throw InvalidParameter("joint states live on a two axis grid");
  MultiParticleState out(f.grid, 1, f.t);
  out.amp = f.amp;
  return out;
}

// ---------------------------------------------------------------------------
// Exchange operator: swaps the two particle slots in both the grid index
// and the level pair index. A pure permutation, hence an exact involution.

inline MultiParticleState exchange(const MultiParticleState& f, int i, int j) {
  if (i < 0 || i > 1 || j < 0 || j > 1)
    throw IndexOutOfRange("exchange supports particle slots 0 and 1");
  if (i == j) return f;
  int n = f.grid.n, l = f.l;
  MultiParticleState out(f.grid, l, f.t);
  for (int i1 = 0; i1 < n; ++i1)
    for (int i2 = 0; i2 < n; ++i2) {
      std::size_t src = static_cast<std::size_t>(i1) * n + i2;
      std::size_t dst = static_cast<std::size_t>(i2) * n + i1;
      for (int j1 = 0; j1 < l; ++j1)
        for (int j2 = 0; j2 < l; ++j2) out.at(dst, j2, j1) = f.at(src, j1, j2);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Level channel tensor structure. For independent level systems transported
// along per particle lines, the joint channel is the Kronecker product of
// the per particle channels; channel_direct integrates the joint generator
// instead and exists to test exactly that identity.

inline SpinMatrix kron(const SpinMatrix& a, const SpinMatrix& b) {
  SpinMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

namespace detail {

inline void check_channel_args(const std::vector<SpinSystem>& systems,
                               const std::vector<StraightLine>& lines) {
  if (systems.empty() || systems.size() != lines.size())
    throw InvalidParameter("need one line per level system");
  for (const auto& sys : systems) sys.validate();
  for (const auto& line : lines) {
    line.validate();
    if (line.s != lines[0].s || line.t != lines[0].t)
      throw InvalidParameter("per particle lines must share the time interval");
  }
}

}  // namespace detail

inline SpinMatrix channel_tensor(const std::vector<SpinSystem>& systems,
                                 const std::vector<StraightLine>& lines, int substeps) {
  detail::check_channel_args(systems, lines);
  SpinMatrix out = integrate_channel(systems[0], lines[0], substeps);
  for (std::size_t j = 1; j < systems.size(); ++j)
    out = kron(out, integrate_channel(systems[j], lines[j], substeps)).eval();
  return out;
}

inline SpinMatrix channel_direct(const std::vector<SpinSystem>& systems,
                                 const std::vector<StraightLine>& lines, int substeps) {
  detail::check_channel_args(systems, lines);
  if (substeps < 1) throw InvalidParameter("channel transport needs at least one substep");
  std::size_t count = systems.size();
  int total = 1;
  for (const auto& sys : systems) total *= sys.l;

  double s = lines[0].s, t = lines[0].t;
  if (t == s) return SpinMatrix::Identity(total, total);

  auto gen = [&](double th) {
    SpinMatrix g = SpinMatrix::Zero(total, total);
    int before = 1;
    for (std::size_t j = 0; j < count; ++j) {
      Point q = line_point(lines[j], th);
      SpinMatrix gj = -(iu * systems[j].Hs(th, q) + systems[j].Ws(th, q));
      int lj = systems[j].l;
      int after = total / (before * lj);
      // embed before x lj x after identity structure around gj
      SpinMatrix embedded = SpinMatrix::Identity(before, before);
      embedded = kron(embedded, gj);
      embedded = kron(embedded, SpinMatrix::Identity(after, after));
      g += embedded;
      before *= lj;
    }
    return g;
  };
  SpinMatrix u = detail::rk4_transport(gen, s, t, substeps, total);
  for (Eigen::Index k = 0; k < u.size(); ++k) require_finite(u.data()[k], "joint channel entry");
  return u;
}

// ---------------------------------------------------------------------------
// Joint kernel tables and their application.

namespace detail {

struct JointTables {
  int n = 0;
  int l = 1;
  std::vector<cplx> k1, k2;  // n*n single particle kernels, cell included
  bool has_coupling = false;
  std::vector<cplx> coupling;  // (2n-1)^2 phases over difference indices
  bool has_spin = false;
  std::vector<cplx> f1, f2;  // n*n blocks of l*l channel entries
};

// Coupling phase table: entry [dix][djy] holds
//   exp(-i rho GL[ v(tt, r(th)) + v(tt, -r(th)) ])
// with r(th) = rx - th (rx - ry), rx = h dix, ry = h djy. Negating both
// difference indices conjugates nothing but mirrors r -> -r, and the
// integrand is computed as the same commutative sum, so the table is exactly
// symmetric under (dix, djy) -> (-dix, -djy); the joint kernel therefore
// commutes with particle exchange to the bit when the species are identical.
inline std::vector<cplx> build_coupling(const PairPotential& pair, int n, double h, double s,
                                        double t, const QuadratureRule& rule) {
  int m = 2 * n - 1;
  std::vector<cplx> table(static_cast<std::size_t>(m) * m);
  double rho = t - s;
  for (int a = 0; a < m; ++a) {
    double rx = h * (a - (n - 1));
    for (int b = 0; b < m; ++b) {
      double ry = h * (b - (n - 1));
      double acc = 0.0;
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        double th = rule.nodes[q];
        double tt = t - th * rho;
        double r = rx - th * (rx - ry);
        acc += rule.weights[q] * (pair.v(tt, r) + pair.v(tt, -r));
      }
      require_finite(acc, "pair interaction integral");
      double phase = -rho * acc;
      table[static_cast<std::size_t>(a) * m + b] = cplx{std::cos(phase), std::sin(phase)};
    }
  }
  return table;
}

inline std::vector<cplx> build_particle_kernel(const PhysicalConstants& constants,
                                               const ParticleSpecies& sp, const Grid& axis,
                                               double s, double t, const QuadratureRule& rule) {
  ScalarEntry entry{constants, sp.pot,
                    sp.weight,  axis,
                    rule,       s,
                    t,          step_prefactor(constants.mass, t - s, 1, axis.cell())};
  std::size_t n = axis.size();
  std::vector<cplx> k(n * n);
  for (std::size_t xi = 0; xi < n; ++xi)
    for (std::size_t yi = 0; yi < n; ++yi) k[xi * n + yi] = entry(xi, yi);
  return k;
}

inline std::vector<cplx> build_channel_table(const SpinSystem& sys, const Grid& axis, double s,
                                             double t, int substeps) {
  int n = axis.n, l = sys.l;
  std::vector<cplx> table(static_cast<std::size_t>(n) * n * l * l);
  if (sys.constant) {
    // one transport serves every pair
    StraightLine probe{1, s, t, axis.point(0), axis.point(0)};
    SpinMatrix f = integrate_channel(sys, probe, substeps);
    for (int xi = 0; xi < n; ++xi)
      for (int yi = 0; yi < n; ++yi) {
        std::size_t base = (static_cast<std::size_t>(xi) * n + yi) * l * l;
        for (int r = 0; r < l; ++r)
          for (int c = 0; c < l; ++c) table[base + static_cast<std::size_t>(r) * l + c] = f(r, c);
      }
    return table;
  }
  for (int xi = 0; xi < n; ++xi)
    for (int yi = 0; yi < n; ++yi) {
      StraightLine line{1, s, t, axis.point(yi), axis.point(xi)};
      SpinMatrix f = integrate_channel(sys, line, substeps);
      std::size_t base = (static_cast<std::size_t>(xi) * n + yi) * l * l;
      for (int r = 0; r < l; ++r)
        for (int c = 0; c < l; ++c) table[base + static_cast<std::size_t>(r) * l + c] = f(r, c);
    }
  return table;
}

inline JointTables build_joint_tables(const MultiParticleModel& model, const Grid& joint, double s,
                                      double t, const PropagatorConfig& cfg) {
  JointTables tab;
  tab.n = joint.n;
  tab.l = model.levels();
  Grid axis{1, joint.n, joint.box};
  const QuadratureRule& rule = gauss_legendre(cfg.theta_nodes);
  tab.k1 = build_particle_kernel(model.constants, model.first, axis, s, t, rule);
  tab.k2 = build_particle_kernel(model.constants, model.second, axis, s, t, rule);
  tab.has_coupling = !model.pair.is_zero;
  if (tab.has_coupling) tab.coupling = build_coupling(model.pair, joint.n, axis.h(), s, t, rule);
  tab.has_spin = tab.l > 1;
  if (tab.has_spin) {
    tab.f1 = build_channel_table(*model.first.spin, axis, s, t, cfg.spin_substeps);
    tab.f2 = build_channel_table(*model.second.spin, axis, s, t, cfg.spin_substeps);
  }
  return tab;
}

// out[(i1,i2)] = sum_{j1,j2} K1[i1,j1] K2[i2,j2] C[i1-i2][j1-j2] in[(j1,j2)],
// with the level pair index carried through the per particle channel blocks
// when present. Fixed loop order, explicit real accumulation.
inline void apply_joint(const JointTables& tab, const std::vector<cplx>& in,
                        std::vector<cplx>& out) {
  int n = tab.n, l = tab.l;
  int m = 2 * n - 1;
  std::size_t sd = static_cast<std::size_t>(l) * l;
  out.assign(in.size(), cplx{0.0, 0.0});

  if (l == 1) {
    for (int i1 = 0; i1 < n; ++i1) {
      const cplx* k1row = tab.k1.data() + static_cast<std::size_t>(i1) * n;
      for (int i2 = 0; i2 < n; ++i2) {
        const cplx* k2row = tab.k2.data() + static_cast<std::size_t>(i2) * n;
        const cplx* crow = tab.has_coupling
                               ? tab.coupling.data() + static_cast<std::size_t>(i1 - i2 + n - 1) * m
                               : nullptr;
        double sr = 0.0, si = 0.0;
        for (int j1 = 0; j1 < n; ++j1) {
          cplx a = k1row[j1];
          const cplx* frow = in.data() + static_cast<std::size_t>(j1) * n;
          for (int j2 = 0; j2 < n; ++j2) {
            cplx w = a * k2row[j2];
            if (crow) w *= crow[j1 - j2 + n - 1];
            double fr = frow[j2].real(), fi = frow[j2].imag();
            sr += w.real() * fr - w.imag() * fi;
            si += w.real() * fi + w.imag() * fr;
          }
        }
        out[static_cast<std::size_t>(i1) * n + i2] = {sr, si};
      }
    }
    return;
  }

  for (int i1 = 0; i1 < n; ++i1)
    for (int i2 = 0; i2 < n; ++i2) {
      cplx* dst = out.data() + (static_cast<std::size_t>(i1) * n + i2) * sd;
      const cplx* crow = tab.has_coupling
                             ? tab.coupling.data() + static_cast<std::size_t>(i1 - i2 + n - 1) * m
                             : nullptr;
      for (int j1 = 0; j1 < n; ++j1)
        for (int j2 = 0; j2 < n; ++j2) {
          cplx w = tab.k1[static_cast<std::size_t>(i1) * n + j1] *
                   tab.k2[static_cast<std::size_t>(i2) * n + j2];
          if (crow) w *= crow[j1 - j2 + n - 1];
          const cplx* f1b = tab.f1.data() + (static_cast<std::size_t>(i1) * n + j1) * sd;
          const cplx* f2b = tab.f2.data() + (static_cast<std::size_t>(i2) * n + j2) * sd;
          const cplx* src = in.data() + (static_cast<std::size_t>(j1) * n + j2) * sd;
          for (int s1 = 0; s1 < l; ++s1)
            for (int s2 = 0; s2 < l; ++s2) {
              cplx acc{0.0, 0.0};
              for (int r1 = 0; r1 < l; ++r1)
                for (int r2 = 0; r2 < l; ++r2)
                  acc += f1b[static_cast<std::size_t>(s1) * l + r1] *
                         f2b[static_cast<std::size_t>(s2) * l + r2] *
                         src[static_cast<std::size_t>(r1) * l + r2];
              dst[static_cast<std::size_t>(s1) * l + s2] += w * acc;
            }
        }
    }
}

inline void check_joint_scale(const MultiParticleModel& model, const Grid& joint,
                              const PropagatorConfig& cfg) {
  if (joint.n > 128)
    throw ResourceLimit("joint kernel application is O(n^4); limited to 128 points per axis");
  int l = model.levels();
  std::size_t n = joint.n;
  std::size_t bytes = 2 * n * n * sizeof(cplx) + sq(2.0 * n - 1) * sizeof(cplx);
  if (l > 1) bytes += 2 * n * n * static_cast<std::size_t>(l) * l * sizeof(cplx);
  if (bytes > cfg.cache_limit_bytes)
    throw ResourceLimit("joint kernel tables exceed the cache limit");
}

struct JointCache {
  bool valid = false;
  double rho = 0.0;
  JointTables tables;
};

inline void multi_step_in_place(const MultiParticleModel& model, MultiParticleState& cur, double s,
                                double t, const PropagatorConfig& cfg, JointCache* cache) {
  double rho = t - s;
  Grid axis{1, cur.grid.n, cur.grid.box};
  check_step_guards(model.constants, axis, rho, cur.boundary_fraction(), cfg);
  const JointTables* tab = nullptr;
  JointTables local;
  if (cache) {
    if (!cache->valid || cache->rho != rho) {
      cache->tables = build_joint_tables(model, cur.grid, s, t, cfg);
      cache->rho = rho;
      cache->valid = true;
    }
    tab = &cache->tables;
  } else {
    local = build_joint_tables(model, cur.grid, s, t, cfg);
    tab = &local;
  }
  std::vector<cplx> next;
  apply_joint(*tab, cur.amp, next);
  cur.amp.swap(next);
  cur.t = t;
  check_finite(cur.amp);
}

}  // namespace detail

// One kernel step of the joint evolution from s to t. Identity at t == s.
inline MultiParticleState multi_one_step(const MultiParticleModel& model,
                                         const MultiParticleState& f, double s, double t,
                                         const PropagatorConfig& cfg) {
  model.validate();
  cfg.validate();
  if (f.l != model.levels()) throw InvalidParameter("state level count does not match the model");
  if (std::abs(f.t - s) > 1e-10 * (1.0 + std::abs(s)))
    throw InvalidParameter("state time does not match the step start");
  if (t < s) throw InvalidParameter("step must run forward in time");
  if (t == s) return f;
  detail::check_joint_scale(model, f.grid, cfg);
  MultiParticleState cur = f;
  detail::multi_step_in_place(model, cur, s, t, cfg, nullptr);
  return cur;
}

// Composition over a subdivision, zero length gaps contributing identity.
inline MultiParticleState multi_time_sliced(const MultiParticleModel& model,
                                            const MultiParticleState& f, const Subdivision& sub,
                                            const PropagatorConfig& cfg) {
  model.validate();
  cfg.validate();
  sub.validate();
  if (f.l != model.levels()) throw InvalidParameter("state level count does not match the model");
  if (std::abs(f.t - sub.times.front()) > 1e-10 * (1.0 + std::abs(sub.times.front())))
    throw InvalidParameter("state time does not match the subdivision start");
  detail::check_joint_scale(model, f.grid, cfg);

  MultiParticleState cur = f;
  detail::JointCache cache;
  bool cacheable = model.time_independent();
  int gaps = sub.steps();
  for (int j = 0; j < gaps; ++j) {
    double s = sub.times[j];
    double t = sub.times[j + 1];
    if (t > s) detail::multi_step_in_place(model, cur, s, t, cfg, cacheable ? &cache : nullptr);
    if (cfg.cutoff == CutoffKind::compact_profile && j + 1 < gaps) {
      int n = cur.grid.n;
      int sd = cur.spin_dim();
      for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2) {
          double r = std::sqrt(sq(cur.grid.coord(i1)) + sq(cur.grid.coord(i2)));
          double chi = cutoff_profile_value(cfg.cutoff_scale * r);
          std::size_t p = static_cast<std::size_t>(i1) * n + i2;
          for (int k = 0; k < sd; ++k) cur.amp[p * sd + k] *= chi;
        }
    }
  }
  cur.t = sub.times.back();
  return cur;
}

// ---------------------------------------------------------------------------
// Symmetry sectors. Projects the input onto its symmetric and antisymmetric
// parts, evolves each, and reports how far the outputs are from their
// sectors. Both defects vanish (to rounding) for identical species because
// the joint kernel commutes with exchange.

struct SymmetryDefects {
  double symmetric = 0.0;
  double antisymmetric = 0.0;
};

inline SymmetryDefects symmetry_check(const MultiParticleModel& model,
                                      const MultiParticleState& f, const Subdivision& sub,
                                      const PropagatorConfig& cfg) {
  model.validate();
  if (!model.identical)
    throw NotIdenticalParticles("symmetry sectors are only preserved for identical particles");
  MultiParticleState swapped = exchange(f, 0, 1);
  MultiParticleState sym = f, anti = f;
  for (std::size_t k = 0; k < f.amp.size(); ++k) {
    sym.amp[k] = 0.5 * (f.amp[k] + swapped.amp[k]);
    anti.amp[k] = 0.5 * (f.amp[k] - swapped.amp[k]);
  }
  double fn = f.norm();
  SymmetryDefects out;
  auto defect = [&](MultiParticleState& state, double sign) {
    if (state.norm() <= 1e-12 * fn)
      throw InvalidParameter("input has no component in the requested symmetry sector");
    MultiParticleState evolved = multi_time_sliced(model, state, sub, cfg);
    MultiParticleState back = exchange(evolved, 0, 1);
    for (std::size_t k = 0; k < back.amp.size(); ++k) back.amp[k] -= sign * evolved.amp[k];
    double en = evolved.norm();
    if (!(en > 0)) throw NonFinite("evolved sector state vanished");
    MultiParticleState zero(evolved.grid, evolved.l, evolved.t);
    return l2_distance(back, zero) / en;
  };
  out.symmetric = defect(sym, 1.0);
  out.antisymmetric = defect(anti, -1.0);
  return out;
}

// ---------------------------------------------------------------------------
// Level free joint model as a single two axis potential and weight, usable
// by the finite difference reference solver for cross checks.

inline Potential joint_potential(const MultiParticleModel& model) {
  model.validate();
  Potential p;
  p.dim = 2;
  p.time_independent = model.first.pot.time_independent && model.second.pot.time_independent &&
                       model.pair.time_independent;
  p.zero_A = model.first.pot.zero_A && model.second.pot.zero_A;
  Potential p1 = model.first.pot, p2 = model.second.pot;
  PairPotential pair = model.pair;
  p.V = [p1, p2, pair](double t, const Point& x) {
    double v = p1.V(t, Point{x[0], 0.0}) + p2.V(t, Point{x[1], 0.0});
    if (!pair.is_zero) {
      double r = x[0] - x[1];
      v += pair.v(t, r) + pair.v(t, -r);
    }
    return v;
  };
  p.A = [p1, p2](double t, const Point& x) {
    double a1 = p1.zero_A ? 0.0 : p1.A(t, Point{x[0], 0.0})[0];
    double a2 = p2.zero_A ? 0.0 : p2.A(t, Point{x[1], 0.0})[0];
    return Point{a1, a2};
  };
  return p;
}

inline Weight joint_weight(const MultiParticleModel& model) {
  model.validate();
  Weight w;
  w.dim = 2;
  w.time_independent =
      model.first.weight.time_independent && model.second.weight.time_independent;
  w.is_zero = model.first.weight.is_zero && model.second.weight.is_zero;
  w.lower_bound_const =
      model.first.weight.lower_bound_const + model.second.weight.lower_bound_const;
  Weight w1 = model.first.weight, w2 = model.second.weight;
  w.W = [w1, w2](double t, const Point& x) {
    double a = w1.is_zero ? 0.0 : w1.W(t, Point{x[0], 0.0});
    double b = w2.is_zero ? 0.0 : w2.W(t, Point{x[1], 0.0});
    return a + b;
  };
  return w;
}

}  // namespace wpi
