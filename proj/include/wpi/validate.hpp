#pragma once

// Sampling based checks of the model regularity conditions the evolution
// theory rests on:
//
//   * derivatives of the electric field stay bounded,
//   * derivatives of the magnetic component decay like <x>^-(1+delta),
//   * derivatives of A stay bounded, derivatives of V grow at most like <x>,
//   * W stays above its declared lower bound -C_W,
//   * |grad W|^p is controlled by 1 + C_W + W (candidate exponent p),
//   * |grad W| grows at most like <x>,
//   * the mixed derivative identity dB/dt = -dE_2/dx_1 + dE_1/dx_2 holds.
//
// Everything here is evidence, not proof: maxima over a lattice plus random
// samples inside a finite box. Growth clauses compare the outer half of the
// box against the inner half and warn when the sampled quantity keeps
// growing toward the edge. Only two clauses can hard-fail: the W lower
// bound (a declared constant that the samples contradict) and the field
// derivative consistency (a wrong derivative callback).

#include <string>
#include <vector>

#include "wpi/common.hpp"
#include "wpi/model.hpp"
#include "wpi/rng.hpp"

namespace wpi {

enum class Verdict { pass, warn, fail };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::warn: return "warn";
    default: return "fail";
  }
}

struct AssumptionClause {
  std::string name;
  Verdict verdict = Verdict::pass;
  double measured = 0.0;  // the clause's headline number (a max or a defect)
  std::string note;
};

struct AssumptionReport {
  std::vector<AssumptionClause> clauses;

  bool has_failure() const {
    for (const auto& c : clauses)
      if (c.verdict == Verdict::fail) return true;
    return false;
  }
  bool all_passed() const {
    for (const auto& c : clauses)
      if (c.verdict != Verdict::pass) return false;
    return true;
  }
  const AssumptionClause& find(const std::string& name) const {
    for (const auto& c : clauses)
      if (c.name == name) return c;
    throw InvalidParameter("no such clause: " + name);
  }
};

struct ValidationOptions {
  double box = 8.0;      // sampling half width per axis
  double horizon = 1.0;  // times sampled in [0, horizon]
  int samples = 2000;    // random samples on top of the fixed lattice
  double exponent = 2.0;  // candidate power for the weight gradient clause
  double decay = 1.0;     // candidate decay rate for the magnetic clause
  unsigned long long seed = 20210901ULL;

  void validate() const {
    if (!(box > 0)) throw InvalidParameter("sampling box must be positive");
    if (!(horizon > 0)) throw InvalidParameter("sampling horizon must be positive");
    if (samples < 1) throw InvalidParameter("need at least one sample");
    if (!(exponent > 1)) throw InvalidParameter("candidate exponent must exceed 1");
    if (!(decay > 0)) throw InvalidParameter("candidate decay rate must be positive");
  }
};

namespace detail {

// Centered differences on a scalar callback along one axis. Steps chosen
// to balance truncation against rounding for first and second order.
template <class F>
double axis_d1(F&& f, double x0) {
  double h = 1e-5 * (1.0 + std::abs(x0));
  return (f(x0 + h) - f(x0 - h)) / (2.0 * h);
}

template <class F>
double axis_d2(F&& f, double x0) {
  double h = 1e-4 * (1.0 + std::abs(x0));
  return (f(x0 + h) - 2.0 * f(x0) + f(x0 - h)) / (h * h);
}

struct SamplePoint {
  double t;
  Point x;
  bool inner;  // all |x_a| <= box/2
};

inline std::vector<SamplePoint> sample_points(int dim, const ValidationOptions& opts) {
  std::vector<SamplePoint> pts;
  const int lat = 9;
  const int times = 5;
  auto push = [&](double t, const Point& x) {
    bool inner = true;
    for (int a = 0; a < dim; ++a)
      if (std::abs(x[a]) > 0.5 * opts.box) inner = false;
    pts.push_back({t, x, inner});
  };
  for (int it = 0; it < times; ++it) {
    double t = opts.horizon * it / (times - 1);
    if (dim == 1) {
      for (int i = 0; i < lat; ++i)
        push(t, Point{-opts.box + 2.0 * opts.box * i / (lat - 1), 0.0});
    } else {
      for (int i = 0; i < lat; ++i)
        for (int j = 0; j < lat; ++j)
          push(t, Point{-opts.box + 2.0 * opts.box * i / (lat - 1),
                        -opts.box + 2.0 * opts.box * j / (lat - 1)});
    }
  }
  Rng rng(opts.seed);
  for (int k = 0; k < opts.samples; ++k) {
    double t = rng.uniform(0.0, opts.horizon);
    Point x{0.0, 0.0};
    for (int a = 0; a < dim; ++a) x[a] = rng.uniform(-opts.box, opts.box);
    push(t, x);
  }
  return pts;
}

// Track the sampled maximum of a quantity separately over the inner and
// the outer half of the box.
struct RegionMax {
  double inner = 0.0;
  double outer = 0.0;

  void feed(double v, bool is_inner) {
    require_finite(v, "sampled quantity");
    v = std::abs(v);
    if (is_inner)
      inner = std::max(inner, v);
    else
      outer = std::max(outer, v);
  }
  double overall() const { return std::max(inner, outer); }
};

// Growth heuristic: warn when the outer-half maximum exceeds twice the
// inner-half maximum and is not negligible outright.
inline AssumptionClause growth_clause(const std::string& name, const RegionMax& m,
                                      double negligible = 1e-3) {
  AssumptionClause c;
  c.name = name;
  c.measured = m.overall();
  if (m.outer <= negligible) {
    c.verdict = Verdict::pass;
    c.note = "negligible at all samples";
  } else if (m.outer > 2.0 * std::max(m.inner, negligible)) {
    c.verdict = Verdict::warn;
    c.note = "keeps growing toward the box edge (outer max " + std::to_string(m.outer) +
             " vs inner max " + std::to_string(m.inner) + "); bound not plausible on this box";
  } else {
    c.verdict = Verdict::pass;
    c.note = "sampled maxima level off (outer " + std::to_string(m.outer) + ", inner " +
             std::to_string(m.inner) + ")";
  }
  return c;
}

}  // namespace detail

inline AssumptionReport validate_assumptions(const Potential& pot, const Weight& weight,
                                             const ValidationOptions& opts = {}) {
  pot.validate();
  weight.validate();
  opts.validate();
  const int dim = pot.dim;
  if (weight.dim != dim) throw InvalidParameter("potential and weight dimensions differ");
  auto pts = detail::sample_points(dim, opts);

  AssumptionReport report;

  // Electric field derivative boundedness.
  {
    detail::RegionMax m;
    for (const auto& p : pts) {
      for (int comp = 0; comp < dim; ++comp) {
        for (int ax = 0; ax < dim; ++ax) {
          auto e_line = [&](double s) {
            Point q = p.x;
            q[ax] = s;
            return eval_fields(pot, p.t, q).E[comp];
          };
          m.feed(detail::axis_d1(e_line, p.x[ax]), p.inner);
          m.feed(detail::axis_d2(e_line, p.x[ax]), p.inner);
        }
      }
    }
    report.clauses.push_back(detail::growth_clause("electric derivative bound", m));
  }

  // Magnetic derivative decay (two axis models only; no magnetic component
  // in one dimension).
  {
    if (dim == 1) {
      report.clauses.push_back(
          {"magnetic derivative decay", Verdict::pass, 0.0, "no magnetic component at d=1"});
    } else {
      detail::RegionMax m;
      for (const auto& p : pts) {
        double bracket = std::pow(jbracket(sq(p.x[0]) + sq(p.x[1])), 1.0 + opts.decay);
        for (int ax = 0; ax < 2; ++ax) {
          auto b_line = [&](double s) {
            Point q = p.x;
            q[ax] = s;
            return eval_fields(pot, p.t, q).B12;
          };
          m.feed(detail::axis_d1(b_line, p.x[ax]) * bracket, p.inner);
          m.feed(detail::axis_d2(b_line, p.x[ax]) * bracket, p.inner);
        }
      }
      report.clauses.push_back(detail::growth_clause("magnetic derivative decay", m));
    }
  }

  // Vector potential derivative boundedness.
  {
    detail::RegionMax m;
    if (!pot.zero_A) {
      for (const auto& p : pts) {
        for (int comp = 0; comp < dim; ++comp) {
          for (int ax = 0; ax < dim; ++ax) {
            auto a_line = [&](double s) {
              Point q = p.x;
              q[ax] = s;
              return pot.A(p.t, q)[comp];
            };
            m.feed(detail::axis_d1(a_line, p.x[ax]), p.inner);
            m.feed(detail::axis_d2(a_line, p.x[ax]), p.inner);
          }
        }
      }
    }
    report.clauses.push_back(detail::growth_clause("vector potential derivative bound", m));
  }

  // Scalar potential growth: derivatives over <x>.
  {
    detail::RegionMax m;
    for (const auto& p : pts) {
      double bracket = jbracket(dim == 1 ? sq(p.x[0]) : sq(p.x[0]) + sq(p.x[1]));
      for (int ax = 0; ax < dim; ++ax) {
        auto v_line = [&](double s) {
          Point q = p.x;
          q[ax] = s;
          return pot.V(p.t, q);
        };
        m.feed(detail::axis_d1(v_line, p.x[ax]) / bracket, p.inner);
        m.feed(detail::axis_d2(v_line, p.x[ax]) / bracket, p.inner);
      }
    }
    report.clauses.push_back(detail::growth_clause("scalar potential growth", m));
  }

  // Weight lower bound: min sampled W against the declared -C_W.
  {
    AssumptionClause c;
    c.name = "weight lower bound";
    if (weight.is_zero) {
      c.verdict = Verdict::pass;
      c.note = "zero weight";
      report.clauses.push_back(c);
    } else {
      double low = 0.0;
      double scale = 1.0;
      for (const auto& p : pts) {
        double w = weight.W(p.t, p.x);
        require_finite(w, "weight sample");
        low = std::min(low, w + weight.lower_bound_const);
        scale = std::max(scale, std::abs(w));
      }
      c.measured = low;
      if (low < -1e-10 * scale) {
        c.verdict = Verdict::fail;
        c.note = "sampled W drops " + std::to_string(-low) +
                 " below the declared lower bound -" + std::to_string(weight.lower_bound_const);
      } else {
        c.verdict = Verdict::pass;
        c.note = "all samples at or above the declared lower bound";
      }
      report.clauses.push_back(c);
    }
  }

  // Weight gradient power bound: |dW|^p / (1 + C_W + W) stays level.
  // Weight gradient growth: |dW| / <x> stays level.
  {
    detail::RegionMax power, growth;
    if (!weight.is_zero) {
      for (const auto& p : pts) {
        double w = weight.W(p.t, p.x);
        double den = std::max(1.0 + weight.lower_bound_const + w, 1e-12);
        double bracket = jbracket(dim == 1 ? sq(p.x[0]) : sq(p.x[0]) + sq(p.x[1]));
        for (int ax = 0; ax < dim; ++ax) {
          auto w_line = [&](double s) {
            Point q = p.x;
            q[ax] = s;
            return weight.W(p.t, q);
          };
          double d1 = detail::axis_d1(w_line, p.x[ax]);
          double d2 = detail::axis_d2(w_line, p.x[ax]);
          power.feed(std::pow(std::abs(d1), opts.exponent) / den, p.inner);
          power.feed(std::pow(std::abs(d2), opts.exponent) / den, p.inner);
          growth.feed(d1 / bracket, p.inner);
          growth.feed(d2 / bracket, p.inner);
        }
      }
    }
    report.clauses.push_back(detail::growth_clause("weight gradient power bound", power));
    report.clauses.push_back(detail::growth_clause("weight gradient growth", growth));
  }

  // Field derivative consistency: dB/dt = -dE_2/dx_1 + dE_1/dx_2. Probes
  // that the supplied derivative callbacks describe one and the same field.
  {
    AssumptionClause c;
    c.name = "field derivative consistency";
    if (dim == 1) {
      c.verdict = Verdict::pass;
      c.note = "no magnetic component at d=1";
    } else {
      double worst = 0.0;
      double scale = 1.0;
      for (const auto& p : pts) {
        auto b_t = [&](double s) { return eval_fields(pot, s, p.x).B12; };
        double dbdt = detail::axis_d1(b_t, p.t);
        auto e2_x1 = [&](double s) { return eval_fields(pot, p.t, Point{s, p.x[1]}).E[1]; };
        auto e1_x2 = [&](double s) { return eval_fields(pot, p.t, Point{p.x[0], s}).E[0]; };
        double d21 = detail::axis_d1(e2_x1, p.x[0]);
        double d12 = detail::axis_d1(e1_x2, p.x[1]);
        worst = std::max(worst, std::abs(dbdt + d21 - d12));
        scale = std::max({scale, std::abs(d21), std::abs(d12)});
      }
      c.measured = worst;
      if (worst > 1e-4 * scale) {
        c.verdict = Verdict::fail;
        c.note = "derivative callbacks disagree; residual " + std::to_string(worst);
      } else {
        c.verdict = Verdict::pass;
        c.note = "residual " + std::to_string(worst);
      }
    }
    report.clauses.push_back(c);
  }

  return report;
}

}  // namespace wpi
