#pragma once

// Classical action and damping integral along straight line segments.
//
// A segment joins (s, y) to (t, x) with rho = t - s > 0. The action of the
// straight path, with the potential integrals parameterized from the later
// endpoint, is
//
//   S = m |x - y|^2 / (2 rho)
//     + (x - y) . I[A]   with I[A] = int_0^1 A(t - th rho, x - th (x - y)) dth
//     - rho * int_0^1 V(t - th rho, x - th (x - y)) dth.
//
// The damping exponent is rho * int_0^1 W(...) dth with the same sampling,
// and the weighted kernel entry carries exp(i S - damping exponent).

#include "wpi/common.hpp"
#include "wpi/grid.hpp"
#include "wpi/model.hpp"
#include "wpi/quadrature.hpp"

namespace wpi {

struct StraightLine {
  int dim = 1;
  double s = 0.0;  // earlier time
  double t = 0.0;  // later time
  Point y{0.0, 0.0};  // position at s
  Point x{0.0, 0.0};  // position at t

  double rho() const { return t - s; }

  void validate() const {
    if (dim < 1 || dim > 2) throw InvalidParameter("line dimension must be 1 or 2");
    require_finite(s, "line start time");
    require_finite(t, "line end time");
    if (t < s) throw InvalidParameter("line requires s <= t");
    for (int a = 0; a < dim; ++a) {
      require_finite(x[a], "line endpoint");
      require_finite(y[a], "line endpoint");
    }
  }
};

// Position on the segment at physical time theta in [s, t].
inline Point line_point(const StraightLine& line, double theta) {
  if (theta < line.s - 1e-12 || theta > line.t + 1e-12)
    throw InvalidParameter("line_point parameter outside [s, t]");
  double rho = line.rho();
  if (rho <= 0.0) {
    for (int a = 0; a < line.dim; ++a)
      if (line.x[a] != line.y[a])
        throw DegenerateInterval("zero length interval with distinct endpoints");
    return line.x;
  }
  double f = (theta - line.s) / rho;
  Point q{0.0, 0.0};
  for (int a = 0; a < line.dim; ++a) q[a] = line.y[a] + f * (line.x[a] - line.y[a]);
  return q;
}

struct ActionValue {
  double S = 0.0;        // real classical action
  double damping = 0.0;  // weight integral, >= -rho C

  cplx weighted() const { return cplx{S, damping}; }
};

inline double classical_action(const PhysicalConstants& constants, const Potential& pot,
                               const StraightLine& line, const QuadratureRule& rule) {
  line.validate();
  double rho = line.rho();
  if (rho <= 0.0) throw DegenerateInterval("action needs a positive time step");
  if (pot.dim != line.dim) throw InvalidParameter("potential and line dimensions differ");

  double dx0 = line.x[0] - line.y[0];
  double dx1 = line.dim == 2 ? line.x[1] - line.y[1] : 0.0;
  double s = constants.mass * (sq(dx0) + sq(dx1)) / (2.0 * rho);

  double iv = 0.0;
  double ia0 = 0.0, ia1 = 0.0;
  for (int j = 0; j < rule.size(); ++j) {
    double th = rule.nodes[j];
    double w = rule.weights[j];
    Point q{line.x[0] - th * dx0, line.x[1] - th * dx1};
    double tt = line.t - th * rho;
    iv += w * pot.V(tt, q);
    if (!pot.zero_A) {
      Point a = pot.A(tt, q);
      ia0 += w * a[0];
      ia1 += w * a[1];
    }
  }
  s += dx0 * ia0 + dx1 * ia1 - rho * iv;
  require_finite(s, "classical action");
  return s;
}

inline double weight_integral(const Weight& weight, const StraightLine& line,
                              const QuadratureRule& rule) {
  line.validate();
  double rho = line.rho();
  if (rho <= 0.0) throw DegenerateInterval("weight integral needs a positive time step");
  if (weight.dim != line.dim) throw InvalidParameter("weight and line dimensions differ");
  if (weight.is_zero) return 0.0;

  double dx0 = line.x[0] - line.y[0];
  double dx1 = line.dim == 2 ? line.x[1] - line.y[1] : 0.0;
  double iw = 0.0;
  for (int j = 0; j < rule.size(); ++j) {
    double th = rule.nodes[j];
    Point q{line.x[0] - th * dx0, line.x[1] - th * dx1};
    iw += rule.weights[j] * weight.W(line.t - th * rho, q);
  }
  double out = rho * iw;
  require_finite(out, "weight integral");
  return out;
}

inline ActionValue weighted_action(const PhysicalConstants& constants, const Potential& pot,
                                   const Weight& weight, const StraightLine& line,
                                   const QuadratureRule& rule) {
  ActionValue v;
  v.S = classical_action(constants, pot, line, rule);
  v.damping = weight_integral(weight, line, rule);
  return v;
}

// Path restriction factor exp(-damping). Lies in [0, 1] for W >= 0 and is
// bounded by exp(rho C) for W >= -C.
inline double damping_factor(const Weight& weight, const StraightLine& line,
                             const QuadratureRule& rule) {
  return std::exp(-weight_integral(weight, line, rule));
}

// Kernel phase exp(i S - damping), evaluated without forming a complex exp.
inline cplx kernel_phase(const ActionValue& v) {
  double damp = std::exp(-v.damping);
  return cplx{damp * std::cos(v.S), damp * std::sin(v.S)};
}

}  // namespace wpi
