#pragma once

// Scenario runners behind the command line front end. Each runner takes a
// parsed experiment config, builds the model it describes, produces CSV
// artifacts in an output directory and returns a structured result with one
// entry per in-config assertion. The runners throw on invalid configs and
// let numerical errors propagate; the caller maps both to exit codes.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "wpi/action.hpp"
#include "wpi/analysis.hpp"
#include "wpi/common.hpp"
#include "wpi/config.hpp"
#include "wpi/grid.hpp"
#include "wpi/io.hpp"
#include "wpi/model.hpp"
#include "wpi/multiparticle.hpp"
#include "wpi/oracle.hpp"
#include "wpi/propagator.hpp"
#include "wpi/quadrature.hpp"
#include "wpi/rng.hpp"
#include "wpi/spin.hpp"
#include "wpi/validate.hpp"

namespace wpi {

struct Assertion {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double bound = 0.0;  // the tolerance the measurement was held against
};

struct ScenarioResult {
  std::string scenario;
  bool passed = true;
  std::vector<Assertion> assertions;
  std::vector<std::string> artifacts;  // paths of every file written
  nlohmann::json details = nlohmann::json::object();

  void check(const std::string& name, bool ok, double measured, double bound) {
    assertions.push_back({name, ok, measured, bound});
    if (!ok) passed = false;
  }

  // Convenience for the common "measured must stay below bound" case.
  void check_below(const std::string& name, double measured, double bound) {
    check(name, measured < bound, measured, bound);
  }
};

// ---------------------------------------------------------------------------
// Builders from config keys to model objects.

namespace detail {

inline PhysicalConstants config_constants(const ExperimentConfig& c) {
  PhysicalConstants k;
  k.mass = c.number("mass", 1.0);
  k.validate();
  return k;
}

inline Grid config_grid(const ExperimentConfig& c) {
  int dim = static_cast<int>(c.integer("dim", 1));
  int n = static_cast<int>(c.integer_required("grid_points"));
  double box = c.number_required("box");
  return Grid(dim, n, box);
}

inline PropagatorConfig config_prop(const ExperimentConfig& c) {
  PropagatorConfig cfg;
  cfg.theta_nodes = static_cast<int>(c.integer("theta_nodes", cfg.theta_nodes));
  cfg.spin_substeps = static_cast<int>(c.integer("spin_substeps", cfg.spin_substeps));
  cfg.boundary_tol = c.number("boundary_tol", cfg.boundary_tol);
  cfg.enforce_sampling_guard = c.flag("enforce_sampling_guard", true);
  std::string cut = c.text("cutoff", "truncation");
  if (cut == "truncation") {
    cfg.cutoff = CutoffKind::domain_truncation;
  } else if (cut == "profile") {
    cfg.cutoff = CutoffKind::compact_profile;
    cfg.cutoff_scale = c.number("cutoff_scale", 0.25);
  } else {
    throw ConfigError("unknown cutoff mode: " + cut);
  }
  cfg.validate();
  return cfg;
}

inline Potential config_potential(const ExperimentConfig& c, int dim) {
  std::string name = c.text("potential", "free");
  if (name == "free") return free_potential(dim);
  if (name == "harmonic") return harmonic_potential(dim, c.number("potential_param", 1.0));
  if (name == "quartic") return quartic_potential(dim, c.number("potential_param", 0.1));
  if (name == "uniform_field") {
    Point e0{0.0, 0.0};
    e0[0] = c.number("potential_param", 1.0);
    return uniform_field_potential(dim, e0);
  }
  if (name == "magnetic") {
    if (dim != 2) throw ConfigError("magnetic potential needs dim = 2");
    return magnetic_potential(c.number("potential_param", 1.0));
  }
  throw ConfigError("unknown potential family: " + name);
}

inline Weight config_weight(const ExperimentConfig& c, int dim) {
  std::string name = c.text("weight", "zero");
  if (name == "zero") return zero_weight(dim);
  if (name == "constant") return constant_weight(dim, c.number("weight_constant", 1.0));
  if (name == "quadratic") {
    double T = c.number("weight_T", 1.0);
    double da = c.number("weight_da", 1.0);
    double a0 = c.number("weight_center", 0.0);
    double speed = c.number("weight_center_speed", 0.0);
    if (speed == 0.0) {
      Point a{0.0, 0.0};
      a[0] = a0;
      return quadratic_weight(dim, T, da, a);
    }
    return quadratic_weight(
        dim, T, da,
        [a0, speed](double t) {
          Point a{0.0, 0.0};
          a[0] = a0 + speed * t;
          return a;
        },
        false);
  }
  throw ConfigError("unknown weight family: " + name);
}

// Gaussian packet; the position grid must be one dimensional.
inline WaveFunction config_packet(const ExperimentConfig& c, const Grid& grid) {
  if (grid.dim != 1) throw ConfigError("gaussian packet initial data needs dim = 1");
  cplx alpha{c.number("packet_alpha_re", 1.0), c.number("packet_alpha_im", 0.0)};
  GaussianAnsatz g =
      GaussianAnsatz::physical(alpha, c.number("packet_center", 0.0), c.number("packet_momentum", 0.0));
  return g.sample(grid, 0.0);
}

// Doubling step counts nu_min, 2 nu_min, ..., nu_max.
inline std::vector<int> config_nus(const ExperimentConfig& c) {
  if (c.has("nu") && !c.has("nu_min")) return {static_cast<int>(c.integer_required("nu"))};
  int lo = static_cast<int>(c.integer_required("nu_min"));
  int hi = static_cast<int>(c.integer_required("nu_max"));
  if (lo < 1 || hi < lo) throw ConfigError("need 1 <= nu_min <= nu_max");
  std::vector<int> nus;
  for (int nu = lo; nu <= hi; nu *= 2) nus.push_back(nu);
  if (nus.back() != hi) throw ConfigError("nu_max must be nu_min times a power of 2");
  return nus;
}

inline std::string artifact_path(const std::filesystem::path& outdir, const char* name) {
  return (outdir / name).string();
}

inline void write_convergence_csv(ScenarioResult& res, const std::filesystem::path& outdir,
                                  const char* name, const std::vector<ConvergenceRow>& rows,
                                  double duration) {
  CsvWriter csv(artifact_path(outdir, name),
                {"nu", "mesh", "l2_error", "order", "norm_ratio", "fitted_K0"});
  for (const auto& r : rows) {
    double k0 = (r.norm_ratio > 0 && duration > 0) ? std::log(r.norm_ratio) / duration : 0.0;
    csv.row({std::to_string(r.nu), format_g17(r.mesh), format_g17(r.l2_error),
             format_g17(r.order), format_g17(r.norm_ratio), format_g17(k0)});
  }
  csv.close();
  res.artifacts.push_back(csv.path());
}

// Worst successive ratio error[k+1]/error[k]; strictly decreasing means < 1.
inline double worst_error_ratio(const std::vector<ConvergenceRow>& rows) {
  double worst = 0.0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    double prev = rows[k - 1].l2_error;
    double ratio = prev > 0 ? rows[k].l2_error / prev : (rows[k].l2_error > 0 ? 1e300 : 0.0);
    worst = std::max(worst, ratio);
  }
  return worst;
}

// Random two level system with hermitian Hs and positive semidefinite Ws,
// both varying smoothly along the segment so the transport integrator has
// real work to do.
inline SpinSystem random_spin_system(Rng& rng, int dim) {
  auto hermitian = [&rng]() {
    SpinMatrix h(2, 2);
    cplx off{rng.normal(), rng.normal()};
    h << cplx{rng.normal(), 0.0}, off, std::conj(off), cplx{rng.normal(), 0.0};
    return h;
  };
  auto psd = [&rng]() {
    SpinMatrix b(2, 2);
    b << cplx{rng.normal(), rng.normal()}, cplx{rng.normal(), rng.normal()},
        cplx{rng.normal(), rng.normal()}, cplx{rng.normal(), rng.normal()};
    return SpinMatrix((b * b.adjoint()).eval());
  };
  SpinMatrix h0 = hermitian(), h1 = hermitian();
  SpinMatrix p0 = psd(), p1 = psd();
  double freq = rng.uniform(0.5, 2.0);
  SpinSystem sys;
  sys.dim = dim;
  sys.l = 2;
  sys.constant = false;
  sys.Hs = [h0, h1, freq](double t, const Point& x) {
    return SpinMatrix(h0 + std::sin(freq * (t + x[0])) * h1);
  };
  // The coefficient 1 + sin stays nonnegative, so the sum stays PSD.
  sys.Ws = [p0, p1, freq](double t, const Point& x) {
    return SpinMatrix(p0 + (1.0 + std::sin(freq * (t - x[0]))) * p1);
  };
  sys.validate();
  return sys;
}

inline StraightLine random_line(Rng& rng, int dim, double max_span) {
  StraightLine line;
  line.dim = dim;
  line.s = rng.uniform(0.0, 1.0);
  line.t = line.s + rng.uniform(0.05, max_span);
  for (int a = 0; a < dim; ++a) {
    line.y[a] = rng.uniform(-2.0, 2.0);
    line.x[a] = rng.uniform(-2.0, 2.0);
  }
  return line;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// convergence: evolve a packet over a ladder of subdivision counts and
// compare against a closed form, gaussian ODE or Crank-Nicolson reference.

inline ScenarioResult run_convergence(const ExperimentConfig& c,
                                      const std::filesystem::path& outdir) {
  ScenarioResult res;
  res.scenario = "convergence";

  PhysicalConstants constants = detail::config_constants(c);
  Grid grid = detail::config_grid(c);
  if (grid.dim != 1) throw ConfigError("convergence scenario runs on dim = 1");
  PropagatorConfig cfg = detail::config_prop(c);
  Potential pot = detail::config_potential(c, grid.dim);
  Weight weight = detail::config_weight(c, grid.dim);
  WaveFunction f0 = detail::config_packet(c, grid);
  double t_end = c.number("time", 1.0);
  if (!(t_end > 0)) throw ConfigError("time must be positive");
  std::vector<int> nus = detail::config_nus(c);
  double tol = c.number_required("tolerance");

  std::string ref_kind = c.text("reference", "cn");
  WaveFunction reference;
  if (ref_kind == "free") {
    if (c.text("potential", "free") != "free" || c.text("weight", "zero") != "zero")
      throw ConfigError("the free reference needs potential = free and weight = zero");
    GaussianAnsatz g0 = GaussianAnsatz::physical(
        cplx{c.number("packet_alpha_re", 1.0), c.number("packet_alpha_im", 0.0)},
        c.number("packet_center", 0.0), c.number("packet_momentum", 0.0));
    reference = free_evolve(g0, constants, t_end).sample(grid, t_end);
  } else if (ref_kind == "gaussian") {
    GaussianAnsatz g0 = GaussianAnsatz::physical(
        cplx{c.number("packet_alpha_re", 1.0), c.number("packet_alpha_im", 0.0)},
        c.number("packet_center", 0.0), c.number("packet_momentum", 0.0));
    QuadraticModel qm = quadratic_model_from(pot, weight, 0.0, t_end);
    reference = gaussian_solve(constants, qm, g0, 0.0, t_end).sample(grid, t_end);
  } else if (ref_kind == "cn") {
    CrankNicolsonOptions opts;
    opts.steps = static_cast<int>(c.integer("cn_steps", 4 * nus.back()));
    reference = cn_evolve(constants, pot, weight, f0, t_end, opts);
  } else {
    throw ConfigError("unknown reference oracle: " + ref_kind);
  }

  std::vector<ConvergenceRow> rows =
      convergence_study(constants, pot, weight, f0, t_end, nus, reference, cfg);
  detail::write_convergence_csv(res, outdir, "convergence.csv", rows, t_end);

  res.check_below("final error below tolerance", rows.back().l2_error, tol);
  if (c.flag("require_monotone", false)) {
    if (rows.size() > 1) {
      double worst = detail::worst_error_ratio(rows);
      res.check("errors strictly decreasing", worst < 1.0, worst, 1.0);
    }
  } else {
    // Without a decrease requirement every row must meet the tolerance.
    double worst = 0.0;
    for (const auto& r : rows) worst = std::max(worst, r.l2_error);
    res.check_below("largest error below tolerance", worst, tol);
  }

  // Optional cross check of the two independent references against each
  // other; needs a model both of them can handle.
  if (c.has("oracle_cross_tol")) {
    double cross_tol = c.number_required("oracle_cross_tol");
    GaussianAnsatz g0 = GaussianAnsatz::physical(
        cplx{c.number("packet_alpha_re", 1.0), c.number("packet_alpha_im", 0.0)},
        c.number("packet_center", 0.0), c.number("packet_momentum", 0.0));
    QuadraticModel qm = quadratic_model_from(pot, weight, 0.0, t_end);
    WaveFunction ode_ref = gaussian_solve(constants, qm, g0, 0.0, t_end).sample(grid, t_end);
    CrankNicolsonOptions opts;
    opts.steps = static_cast<int>(c.integer("cn_steps", 4 * nus.back()));
    WaveFunction cn_ref = cn_evolve(constants, pot, weight, f0, t_end, opts);
    res.check_below("independent oracles agree", l2_distance(ode_ref, cn_ref), cross_tol);
  }

  res.details["reference"] = ref_kind;
  res.details["grid_points"] = grid.n;
  return res;
}

// ---------------------------------------------------------------------------
// stability: random band limited states through a single step, fitting the
// per-step growth exponent on one or more grids and comparing the fits.

inline ScenarioResult run_stability(const ExperimentConfig& c,
                                    const std::filesystem::path& outdir) {
  ScenarioResult res;
  res.scenario = "stability";

  PhysicalConstants constants = detail::config_constants(c);
  PropagatorConfig cfg = detail::config_prop(c);
  int dim = static_cast<int>(c.integer("dim", 1));
  double box = c.number_required("box");
  double rho = c.number_required("rho");
  int trials = static_cast<int>(c.integer("trials", 16));
  int modes = static_cast<int>(c.integer("modes", 8));
  std::uint64_t seed = static_cast<std::uint64_t>(c.integer("seed", 20210901));
  Potential pot = detail::config_potential(c, dim);
  Weight weight = detail::config_weight(c, dim);

  std::vector<int> ns = {static_cast<int>(c.integer_required("grid_points"))};
  if (c.has("grid_points_2")) ns.push_back(static_cast<int>(c.integer_required("grid_points_2")));
  if (c.has("grid_points_3")) ns.push_back(static_cast<int>(c.integer_required("grid_points_3")));

  CsvWriter csv(detail::artifact_path(outdir, "stability.csv"),
                {"grid_points", "trial", "norm_ratio", "k0"});
  std::vector<double> fitted;
  double worst_ratio = 0.0;
  for (int n : ns) {
    Grid grid(dim, n, box);
    StabilityReport rep = stability_estimate(constants, pot, weight, grid, rho, trials, modes,
                                             seed, cfg);
    fitted.push_back(rep.fitted_k0);
    for (std::size_t k = 0; k < rep.ratios.size(); ++k) {
      double ratio = rep.ratios[k];
      worst_ratio = std::max(worst_ratio, ratio);
      csv.row({std::to_string(n), std::to_string(k), format_g17(ratio),
               format_g17(std::log(std::max(ratio, 1e-300)) / rho)});
    }
  }
  csv.close();
  res.artifacts.push_back(csv.path());

  // Fitted exponents must agree across grids. Magnitudes at or below the
  // noise floor count as agreeing; otherwise the signs must match and the
  // magnitudes may spread by at most the configured factor.
  double spread_max = c.number("k0_spread_max", 2.0);
  if (ns.size() > 1) {
    double lo = 1e300, hi = 0.0;
    bool pos = false, neg = false;
    for (double k0 : fitted) {
      hi = std::max(hi, std::abs(k0));
      lo = std::min(lo, std::abs(k0));
      if (k0 > 1e-3) pos = true;
      if (k0 < -1e-3) neg = true;
    }
    if (hi <= 1e-3) {
      res.check("growth exponent grid independent", true, hi, 1e-3);
    } else if (pos && neg) {
      res.check("growth exponent grid independent", false, hi, spread_max);
    } else {
      double spread = hi / std::max(lo, 1e-3);
      res.check("growth exponent grid independent", spread < spread_max, spread, spread_max);
    }
  }
  double ratio_max = c.number("norm_ratio_max", 0.0);
  if (ratio_max > 0.0)
    res.check("per-step norm ratio bounded", worst_ratio <= ratio_max, worst_ratio, ratio_max);

  // Optional property sweep: for a nonnegative monitoring rate the damping
  // factor along any straight segment must stay inside [0, 1].
  if (c.has("damping_samples")) {
    int samples = static_cast<int>(c.integer_required("damping_samples"));
    if (samples < 1) throw ConfigError("damping_samples must be positive");
    Rng rng(seed + 1);
    QuadratureRule rule = gauss_legendre(cfg.theta_nodes);
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
      StraightLine line;
      line.dim = dim;
      line.s = rng.uniform(0.0, 1.0);
      line.t = line.s + rng.uniform(1e-3, 1.0);
      for (int a = 0; a < dim; ++a) {
        line.y[a] = rng.uniform(-box / 2, box / 2);
        line.x[a] = rng.uniform(-box / 2, box / 2);
      }
      double d = damping_factor(weight, line, rule);
      worst = std::max({worst, -d, d - 1.0});
    }
    res.check("damping factors within the unit interval", worst <= 1e-14, worst, 1e-14);
    res.details["damping_samples"] = samples;
  }

  res.details["fitted_k0"] = fitted;
  return res;
}

// ---------------------------------------------------------------------------
// gauge: transform the potential and the wave function together and measure
// how far the evolution is from commuting with the phase change.

inline ScenarioResult run_gauge(const ExperimentConfig& c, const std::filesystem::path& outdir) {
  ScenarioResult res;
  res.scenario = "gauge";

  PhysicalConstants constants = detail::config_constants(c);
  Grid grid = detail::config_grid(c);
  if (grid.dim != 1) throw ConfigError("gauge scenario runs on dim = 1");
  PropagatorConfig cfg = detail::config_prop(c);
  Potential pot = detail::config_potential(c, grid.dim);
  Weight weight = detail::config_weight(c, grid.dim);
  WaveFunction f0 = detail::config_packet(c, grid);
  double t_end = c.number("time", 1.0);
  int nu = static_cast<int>(c.integer("nu", 64));
  double tol = c.number_required("tolerance");
  double p = c.number("gauge_param", 0.7);
  Subdivision sub = Subdivision::uniform(0.0, t_end, nu);

  std::vector<std::pair<std::string, GaugeFunction>> families;
  std::string which = c.text("gauge", "all");
  auto add = [&](const std::string& name) {
    if (name == "constant") {
      families.emplace_back(name, constant_gauge(grid.dim, p));
    } else if (name == "linear") {
      Point k{0.0, 0.0};
      k[0] = p;
      families.emplace_back(name, linear_gauge(grid.dim, k));
    } else if (name == "time") {
      families.emplace_back(name, time_gauge(grid.dim, p));
    } else if (name == "bump") {
      families.emplace_back(name, bump_gauge(grid.dim, std::max(p, 0.5)));
    } else {
      throw ConfigError("unknown gauge family: " + name);
    }
  };
  if (which == "all") {
    add("constant");
    add("linear");
    add("time");
    add("bump");
  } else {
    add(which);
  }

  CsvWriter csv(detail::artifact_path(outdir, "gauge.csv"), {"family", "defect"});
  for (const auto& [name, gauge] : families) {
    double defect = gauge_check(constants, pot, weight, gauge, f0, sub, cfg);
    csv.row({name, format_g17(defect)});
    res.check_below(name + " gauge defect below tolerance", defect, tol);
  }
  csv.close();
  res.artifacts.push_back(csv.path());
  return res;
}

// ---------------------------------------------------------------------------
// spin: two level packet under level resolved clamped monitoring, compared
// against the Crank-Nicolson reference over a ladder of subdivisions.

inline ScenarioResult run_spin(const ExperimentConfig& c, const std::filesystem::path& outdir) {
  ScenarioResult res;
  res.scenario = "spin";

  PhysicalConstants constants = detail::config_constants(c);
  PropagatorConfig cfg = detail::config_prop(c);
  bool do_ladder = c.has("nu") || c.has("nu_min");
  bool do_channels = c.has("channel_trials");
  if (!do_ladder && !do_channels)
    throw ConfigError("spin scenario needs nu keys, channel_trials, or both");

  if (do_ladder) {
    Grid grid = detail::config_grid(c);
    if (grid.dim != 1) throw ConfigError("spin scenario runs on dim = 1");
    Potential pot = detail::config_potential(c, grid.dim);
    Weight weight = detail::config_weight(c, grid.dim);
    double t_end = c.number("time", 1.0);
    std::vector<int> nus = detail::config_nus(c);
    double tol = c.number_required("tolerance");

    SpinMatrix hs;
    std::string hs_kind = c.text("spin_hs", "pauli_x");
    double hs_scale = c.number("spin_hs_scale", 1.0);
    if (hs_kind == "zero") {
      hs = SpinMatrix::Zero(2, 2);
    } else if (hs_kind == "pauli_x") {
      hs = hs_scale * pauli_x();
    } else if (hs_kind == "pauli_z") {
      hs = hs_scale * pauli_z();
    } else {
      throw ConfigError("unknown spin Hamiltonian: " + hs_kind);
    }
    double offset = c.number("record_offset", 0.7);
    double T = c.number("weight_T", 1.0);
    double da = c.number("weight_da", 1.0);
    double level = c.number("clamp_level", 4.0);
    std::vector<Point> records = {Point{offset, 0.0}, Point{-offset, 0.0}};
    SpinSystem sys = clamped_record_system(grid.dim, hs, records, T, da, ClampProfile(level));

    WaveFunction packet = detail::config_packet(c, grid);
    SpinorWaveFunction f0(grid, 0.0, sys.l);
    for (std::size_t p = 0; p < packet.amp.size(); ++p) f0.at(p, 0) = packet.amp[p];

    CrankNicolsonOptions opts;
    opts.steps = static_cast<int>(c.integer("cn_steps", 4 * nus.back()));
    SpinorWaveFunction reference = cn_evolve(constants, pot, weight, sys, f0, t_end, opts);

    std::vector<ConvergenceRow> rows =
        convergence_study(constants, pot, weight, sys, f0, t_end, nus, reference, cfg);
    detail::write_convergence_csv(res, outdir, "spin_convergence.csv", rows, t_end);

    res.check_below("final error below tolerance", rows.back().l2_error, tol);
    if (c.flag("require_monotone", true) && rows.size() > 1)
      res.check("errors strictly decreasing", detail::worst_error_ratio(rows) < 1.0,
                detail::worst_error_ratio(rows), 1.0);
  }

  // Random channel property sweep: contraction, composition across a split
  // and the measured order of the transport integrator.
  if (do_channels) {
    int trials = static_cast<int>(c.integer_required("channel_trials"));
    if (trials < 1) throw ConfigError("channel_trials must be positive");
    int substeps = cfg.spin_substeps;
    Rng rng(static_cast<std::uint64_t>(c.integer("seed", 20210901)));

    CsvWriter csv(detail::artifact_path(outdir, "channels.csv"),
                  {"trial", "max_singular_value", "compose_defect", "order"});
    double max_sv = 0.0, max_comp = 0.0;
    std::vector<double> orders;
    for (int k = 0; k < trials; ++k) {
      SpinSystem sys = detail::random_spin_system(rng, 1);
      StraightLine line = detail::random_line(rng, 1, 0.75);
      double rho = line.rho();

      SpinMatrix channel = integrate_channel(sys, line, substeps);
      double sv = operator_norm(channel);
      max_sv = std::max(max_sv, sv);

      double sigma = line.s + rho * rng.uniform(0.25, 0.75);
      double comp = channel_compose_defect(sys, line, sigma, substeps);
      max_comp = std::max(max_comp, comp);

      SpinMatrix ref = integrate_channel(sys, line, 256);
      double e8 = (integrate_channel(sys, line, 8) - ref).norm();
      double e16 = (integrate_channel(sys, line, 16) - ref).norm();
      double order = e16 > 1e-14 ? std::log2(e8 / e16) : 0.0;
      if (e16 > 1e-14) orders.push_back(order);

      csv.row({std::to_string(k), format_g17(sv), format_g17(comp), format_g17(order)});
    }
    csv.close();
    res.artifacts.push_back(csv.path());

    std::sort(orders.begin(), orders.end());
    double med = orders.empty() ? 0.0 : orders[orders.size() / 2];
    res.check("channels never expand", max_sv <= 1.0 + 1e-10, max_sv, 1.0 + 1e-10);
    res.check_below("composition defect small", max_comp, 1e-7);
    res.check("transport is fourth order", med >= 3.5 && med <= 4.5, med, 4.5);
    res.details["median_order"] = med;
  }
  return res;
}

// ---------------------------------------------------------------------------
// multiparticle: two identical measured particles on a shared axis grid.
// Without coupling the joint step must factor over the particles; with the
// quadratic pair coupling the evolution must preserve exchange symmetry.

inline ScenarioResult run_multiparticle(const ExperimentConfig& c,
                                        const std::filesystem::path& outdir) {
  ScenarioResult res;
  res.scenario = "multiparticle";

  PhysicalConstants constants = detail::config_constants(c);
  PropagatorConfig cfg = detail::config_prop(c);
  bool do_evolution = c.has("grid_points");
  bool do_tensor = c.has("tensor_trials");
  if (!do_evolution && !do_tensor)
    throw ConfigError("multiparticle scenario needs grid keys, tensor_trials, or both");

  CsvWriter csv(detail::artifact_path(outdir, "multiparticle.csv"), {"check", "defect"});

  if (do_evolution) {
    if (c.integer("dim", 1) != 1) throw ConfigError("multiparticle scenario runs on axis dim = 1");
    int n = static_cast<int>(c.integer_required("grid_points"));
    double box = c.number_required("box");
    Grid axis(1, n, box);
    Potential pot = detail::config_potential(c, 1);
    Weight weight = detail::config_weight(c, 1);
    double t_end = c.number("time", 1.0);
    int nu = static_cast<int>(c.integer("nu", 32));
    Subdivision sub = Subdivision::uniform(0.0, t_end, nu);
    double kappa = c.number("coupling", 0.0);
    double tol_fact = c.number("tolerance_factorization", 1e-8);
    double tol_sym = c.number("tolerance_symmetry", 1e-10);

    GaussianAnsatz g1 = GaussianAnsatz::physical(
        cplx{c.number("packet_alpha_re", 1.0), c.number("packet_alpha_im", 0.0)},
        c.number("packet_center", 0.3), c.number("packet_momentum", 0.0));
    GaussianAnsatz g2 = GaussianAnsatz::physical(
        cplx{c.number("packet_alpha_re", 1.0), c.number("packet_alpha_im", 0.0)},
        c.number("packet_center_2", -0.3), c.number("packet_momentum", 0.0));
    WaveFunction f1 = g1.sample(axis, 0.0);
    WaveFunction f2 = g2.sample(axis, 0.0);

    // Leg 1: no coupling, the joint evolution of a product state must equal
    // the product of the single particle evolutions.
    {
      MultiParticleModel model = identical_pair_model(constants, pot, weight, zero_pair());
      MultiParticleState joint = product_state(f1, f2);
      MultiParticleState evolved = multi_time_sliced(model, joint, sub, cfg);
      WaveFunction u1 = time_sliced(constants, pot, weight, f1, sub, cfg);
      WaveFunction u2 = time_sliced(constants, pot, weight, f2, sub, cfg);
      MultiParticleState expected = product_state(u1, u2);
      double norm = expected.norm();
      double defect = l2_distance(evolved, expected) / (norm > 0 ? norm : 1.0);
      csv.row({"factorization", format_g17(defect)});
      res.check_below("uncoupled evolution factorizes", defect, tol_fact);
    }

    // Leg 2: coupled identical particles, exchange symmetry of each sector.
    {
      MultiParticleModel model = identical_pair_model(
          constants, pot, weight, kappa != 0.0 ? quadratic_pair(kappa) : zero_pair());
      MultiParticleState joint = product_state(f1, f2);
      SymmetryDefects defects = symmetry_check(model, joint, sub, cfg);
      csv.row({"symmetric", format_g17(defects.symmetric)});
      csv.row({"antisymmetric", format_g17(defects.antisymmetric)});
      res.check_below("symmetric sector preserved", defects.symmetric, tol_sym);
      res.check_below("antisymmetric sector preserved", defects.antisymmetric, tol_sym);
    }
    res.details["coupling"] = kappa;
  }

  // Random path property sweep: integrating the joint channel generator
  // directly must match the product of the per particle channels.
  if (do_tensor) {
    int trials = static_cast<int>(c.integer_required("tensor_trials"));
    if (trials < 1) throw ConfigError("tensor_trials must be positive");
    int substeps = cfg.spin_substeps;
    double tol = c.number("tolerance", 1e-8);
    Rng rng(static_cast<std::uint64_t>(c.integer("seed", 20210901)) + 2);
    double worst = 0.0;
    for (int k = 0; k < trials; ++k) {
      std::vector<SpinSystem> systems = {detail::random_spin_system(rng, 1),
                                         detail::random_spin_system(rng, 1)};
      StraightLine line1 = detail::random_line(rng, 1, 0.75);
      StraightLine line2 = line1;
      line2.y[0] = rng.uniform(-2.0, 2.0);
      line2.x[0] = rng.uniform(-2.0, 2.0);
      std::vector<StraightLine> lines = {line1, line2};
      SpinMatrix tensor = channel_tensor(systems, lines, substeps);
      SpinMatrix direct = channel_direct(systems, lines, substeps);
      double defect = (direct - tensor).norm() / std::max(tensor.norm(), 1e-300);
      worst = std::max(worst, defect);
    }
    csv.row({"tensor_product", format_g17(worst)});
    res.check_below("joint channel equals the product channel", worst, tol);
    res.details["tensor_trials"] = trials;
  }

  csv.close();
  res.artifacts.push_back(csv.path());
  return res;
}

// ---------------------------------------------------------------------------
// validate: sample the declared model against the standing regularity
// assumptions and report one verdict per clause.

inline ScenarioResult run_validate(const ExperimentConfig& c,
                                   const std::filesystem::path& outdir) {
  ScenarioResult res;
  res.scenario = "validate";

  int dim = static_cast<int>(c.integer("dim", 1));
  Potential pot = detail::config_potential(c, dim);
  Weight weight = detail::config_weight(c, dim);
  ValidationOptions opts;
  opts.box = c.number("sample_box", opts.box);
  opts.samples = static_cast<int>(c.integer("samples", opts.samples));
  opts.horizon = c.number("horizon", opts.horizon);
  opts.seed = static_cast<std::uint64_t>(c.integer("seed", 20210901));
  AssumptionReport report = validate_assumptions(pot, weight, opts);

  CsvWriter csv(detail::artifact_path(outdir, "assumptions.csv"),
                {"clause", "verdict", "measured", "note"});
  int fails = 0, warns = 0;
  for (const auto& clause : report.clauses) {
    csv.row({clause.name, verdict_name(clause.verdict), format_g17(clause.measured), clause.note});
    if (clause.verdict == Verdict::fail) ++fails;
    if (clause.verdict == Verdict::warn) ++warns;
  }
  csv.close();
  res.artifacts.push_back(csv.path());

  res.check("no clause fails", fails == 0, static_cast<double>(fails), 0.0);
  if (c.flag("strict", false))
    res.check("no clause warns", warns == 0, static_cast<double>(warns), 0.0);
  res.details["warnings"] = warns;
  return res;
}

// ---------------------------------------------------------------------------
// Catalog and dispatch.

struct ScenarioInfo {
  std::string name;
  std::string summary;
};

inline const std::vector<ScenarioInfo>& scenario_catalog() {
  static const std::vector<ScenarioInfo> catalog = {
      {"convergence",
       "packet evolution over a ladder of subdivision counts against a closed form, "
       "gaussian ODE or Crank-Nicolson reference"},
      {"stability",
       "per-step norm growth on random band limited states, with the fitted exponent "
       "compared across grids"},
      {"gauge",
       "covariance of the evolution under phase transformations: constant, linear, "
       "time dependent and bump profiles"},
      {"spin",
       "two level packet under level resolved clamped monitoring against the "
       "Crank-Nicolson reference"},
      {"multiparticle",
       "two identical measured particles: factorization without coupling, exchange "
       "symmetry with it"},
      {"validate",
       "samples the declared potential and weight against the standing regularity "
       "assumptions"},
  };
  return catalog;
}

inline ScenarioResult run_scenario(const ExperimentConfig& c,
                                   const std::filesystem::path& outdir) {
  if (c.scenario == "convergence") return run_convergence(c, outdir);
  if (c.scenario == "stability") return run_stability(c, outdir);
  if (c.scenario == "gauge") return run_gauge(c, outdir);
  if (c.scenario == "spin") return run_spin(c, outdir);
  if (c.scenario == "multiparticle") return run_multiparticle(c, outdir);
  if (c.scenario == "validate") return run_validate(c, outdir);
  throw ConfigError("unknown scenario: " + c.scenario);
}

}  // namespace wpi
