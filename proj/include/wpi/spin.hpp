#pragma once

// Internal level (spin) channels transported along straight line segments.
//
// With l internal levels, a segment from (s, y) to (t, x) carries the l x l
// matrix U(t) solving
//
//   dU/dth = -( i Hs(th, q(th)) + Ws(th, q(th)) ) U,   U(s) = identity,
//
// where q(th) walks the segment, Hs is hermitian (level Hamiltonian) and Ws
// is hermitian positive semidefinite up to a declared offset (level
// resolved monitoring rate). For Ws >= 0 the channel is a contraction in
// operator norm; for Ws = 0 it is unitary.
//
// Integration is classical RK4 along the segment. Constant generators take
// the closed form U = exp(-(i Hs + Ws) rho) through Eigen's scaling and
// squaring matrix exponential.

#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "wpi/action.hpp"
#include "wpi/common.hpp"
#include "wpi/model.hpp"

namespace wpi {

using SpinMatrix = Eigen::MatrixXcd;

inline SpinMatrix pauli_x() {
  SpinMatrix m(2, 2);
  m << cplx(0, 0), cplx(1, 0), cplx(1, 0), cplx(0, 0);
  return m;
}

inline SpinMatrix pauli_y() {
  SpinMatrix m(2, 2);
  m << cplx(0, 0), cplx(0, -1), cplx(0, 1), cplx(0, 0);
  return m;
}

inline SpinMatrix pauli_z() {
  SpinMatrix m(2, 2);
  m << cplx(1, 0), cplx(0, 0), cplx(0, 0), cplx(-1, 0);
  return m;
}

inline double hermiticity_defect(const SpinMatrix& m) {
  return (m - m.adjoint()).norm();
}

// Largest singular value.
inline double operator_norm(const SpinMatrix& m) {
  return m.jacobiSvd().singularValues()(0);
}

namespace detail {

// Classical RK4 for the matrix ODE dU/dth = gen(th) U, U(s) = identity.
template <class Gen>
SpinMatrix rk4_transport(Gen&& gen, double s, double t, int substeps, int l) {
  SpinMatrix u = SpinMatrix::Identity(l, l);
  double h = (t - s) / substeps;
  for (int k = 0; k < substeps; ++k) {
    double th = s + k * h;
    SpinMatrix g1 = gen(th);
    SpinMatrix g2 = gen(th + 0.5 * h);
    SpinMatrix g3 = gen(th + h);
    SpinMatrix k1 = h * (g1 * u);
    SpinMatrix k2 = h * (g2 * (u + 0.5 * k1));
    SpinMatrix k3 = h * (g2 * (u + 0.5 * k2));
    SpinMatrix k4 = h * (g3 * (u + k3));
    u += (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
  }
  return u;
}

}  // namespace detail

using SpinField = std::function<SpinMatrix(double, const Point&)>;

struct SpinSystem {
  int dim = 1;
  int l = 1;
  bool constant = false;  // generators do not depend on (t, x)
  double offset = 0.0;    // declared c >= 0 with Ws >= -c I
  SpinField Hs;
  SpinField Ws;

  // Structured fast form used by kernel builders: Hs constant and
  // Ws(t, x) = diag_j profile(scale * |x - record_j|^2). Present when
  // built by clamped_record_system.
  bool diagonal_records = false;
  SpinMatrix Hs_const;
  std::vector<Point> records;
  double record_scale = 0.0;
  std::optional<ClampProfile> profile;

  void validate() const {
    if (dim < 1 || dim > 2) throw InvalidParameter("spin system dimension must be 1 or 2");
    if (l < 1) throw InvalidParameter("spin system needs at least 1 level");
    if (!Hs || !Ws) throw InvalidParameter("spin system needs Hs and Ws callbacks");
    if (!(offset >= 0) || !std::isfinite(offset))
      throw InvalidParameter("spin system offset must be nonnegative");
  }

  // Hermiticity defect of both generators at a sample point, for checks.
  double sample_defect(double t, const Point& x) const {
    return hermiticity_defect(Hs(t, x)) + hermiticity_defect(Ws(t, x));
  }
};

// Trivial system: no level dynamics, no level resolved damping.
inline SpinSystem trivial_spin_system(int dim, int l) {
  SpinSystem s;
  s.dim = dim;
  s.l = l;
  s.constant = true;
  SpinMatrix z = SpinMatrix::Zero(l, l);
  s.Hs = [z](double, const Point&) { return z; };
  s.Ws = [z](double, const Point&) { return z; };
  s.Hs_const = z;
  s.validate();
  return s;
}

inline SpinSystem constant_spin_system(int dim, const SpinMatrix& hs, const SpinMatrix& ws,
                                       double offset = 0.0) {
  if (hs.rows() != hs.cols() || ws.rows() != ws.cols() || hs.rows() != ws.rows())
    throw InvalidParameter("spin generators must be square and equally sized");
  if (hermiticity_defect(hs) > 1e-12 * (1.0 + hs.norm()) ||
      hermiticity_defect(ws) > 1e-12 * (1.0 + ws.norm()))
    throw InvalidParameter("spin generators must be hermitian");
  SpinSystem s;
  s.dim = dim;
  s.l = static_cast<int>(hs.rows());
  s.constant = true;
  s.offset = offset;
  s.Hs = [hs](double, const Point&) { return hs; };
  s.Ws = [ws](double, const Point&) { return ws; };
  s.Hs_const = hs;
  s.validate();
  return s;
}

// Level resolved monitoring toward per level record positions a_j, with the
// quadratic rate pushed through a clamp so it stays bounded:
//   Ws(t, x) = diag_j profile( 2 |x - a_j|^2 / (T da^2) ).
inline SpinSystem clamped_record_system(int dim, const SpinMatrix& hs,
                                        const std::vector<Point>& records, double T, double da,
                                        const ClampProfile& profile) {
  if (!(T > 0) || !(da > 0)) throw InvalidParameter("record system needs positive T and da");
  if (hs.rows() != hs.cols() || static_cast<int>(records.size()) != hs.rows())
    throw InvalidParameter("one record position per level is required");
  if (hermiticity_defect(hs) > 1e-12 * (1.0 + hs.norm()))
    throw InvalidParameter("spin Hamiltonian must be hermitian");
  SpinSystem s;
  s.dim = dim;
  s.l = static_cast<int>(hs.rows());
  s.offset = 0.0;
  s.Hs = [hs](double, const Point&) { return hs; };
  double scale = 2.0 / (T * da * da);
  int l = s.l;
  s.Ws = [dim, l, scale, records, profile](double, const Point& x) {
    SpinMatrix w = SpinMatrix::Zero(l, l);
    for (int j = 0; j < l; ++j) {
      double r2 = 0.0;
      for (int a = 0; a < dim; ++a) r2 += sq(x[a] - records[j][a]);
      w(j, j) = profile(scale * r2);
    }
    return w;
  };
  s.diagonal_records = true;
  s.Hs_const = hs;
  s.records = records;
  s.record_scale = scale;
  s.profile = profile;
  s.validate();
  return s;
}

// Channel matrix for one segment. substeps is the RK4 step count; constant
// generators short circuit to the matrix exponential unless allow_fast is
// cleared (useful when the RK4 path itself is under test).
inline SpinMatrix integrate_channel(const SpinSystem& sys, const StraightLine& line,
                                    int substeps, bool allow_fast = true) {
  sys.validate();
  line.validate();
  if (sys.dim != line.dim) throw InvalidParameter("spin system and line dimensions differ");
  int l = sys.l;
  double rho = line.rho();
  if (rho <= 0.0) {
    // Zero length segment: the channel is the identity by definition.
    for (int a = 0; a < line.dim; ++a)
      if (line.x[a] != line.y[a])
        throw DegenerateInterval("zero length segment with distinct endpoints");
    return SpinMatrix::Identity(l, l);
  }
  if (substeps < 1) throw InvalidParameter("channel integration needs at least 1 substep");

  if (sys.constant && allow_fast) {
    SpinMatrix g = -(iu * sys.Hs(line.t, line.x) + sys.Ws(line.t, line.x));
    if (g.norm() == 0.0) return SpinMatrix::Identity(l, l);
    return (rho * g).exp();
  }

  auto gen = [&](double th) -> SpinMatrix {
    Point q = line_point(line, th);
    return -(iu * sys.Hs(th, q) + sys.Ws(th, q));
  };
  SpinMatrix u = detail::rk4_transport(gen, line.s, line.t, substeps, l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j) require_finite(u(i, j), "channel matrix entry");
  return u;
}

// Defect of the flow property U(t, s) = U(t, sigma) U(sigma, s) along one
// segment, measured in Frobenius norm.
inline double channel_compose_defect(const SpinSystem& sys, const StraightLine& line, double sigma,
                                     int substeps, bool allow_fast = true) {
  if (sigma < line.s || sigma > line.t)
    throw InvalidParameter("split time must lie inside the segment");
  Point mid = line_point(line, sigma);
  StraightLine early{line.dim, line.s, sigma, line.y, mid};
  StraightLine late{line.dim, sigma, line.t, mid, line.x};
  SpinMatrix whole = integrate_channel(sys, line, substeps, allow_fast);
  SpinMatrix split = integrate_channel(sys, late, substeps, allow_fast) *
                     integrate_channel(sys, early, substeps, allow_fast);
  return (whole - split).norm();
}

}  // namespace wpi
