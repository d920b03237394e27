// Release gate. Runs the bundled configurations and holds their results
// against the pinned criteria, one verdict line per criterion. The exit code
// is the number of criteria that failed, so 0 means the gate is green.
//
// Criterion 1 pins a 1024 point grid together with nu = 16; on a box of half
// width 12 that step cannot resolve the kernel phase (the guard value is 9.0
// against a limit of pi), so the bundle carries a guard-disabled diagnostic
// run that measures the true error instead of hiding the conflict. The gate
// reports that criterion honestly and prints the required resolution.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "wpi/config.hpp"
#include "wpi/scenarios.hpp"

namespace {

using namespace wpi;

struct Outcome {
  ScenarioResult res;
  double seconds = 0.0;
  bool threw = false;
  std::string error;
};

struct Gate {
  std::filesystem::path configs;
  std::filesystem::path scratch;
  std::map<std::string, Outcome> cache;
  int failures = 0;

  // Runs one bundled config, once; later criteria reuse the cached outcome.
  Outcome& run(const std::string& name) {
    auto it = cache.find(name);
    if (it != cache.end()) return it->second;
    Outcome out;
    std::filesystem::path outdir = scratch / std::filesystem::path(name).stem();
    std::filesystem::remove_all(outdir);
    std::filesystem::create_directories(outdir);
    auto t0 = std::chrono::steady_clock::now();
    try {
      ExperimentConfig cfg = load_config(configs / name);
      out.res = run_scenario(cfg, outdir);
    } catch (const Error& e) {
      out.threw = true;
      out.error = std::string(error_kind_name(e.kind)) + ": " + e.what();
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return cache.emplace(name, std::move(out)).first->second;
  }

  const Assertion* find(const Outcome& out, const std::string& name) const {
    for (const auto& a : out.res.assertions)
      if (a.name == name) return &a;
    return nullptr;
  }

  // Appends "label measured/bound" to the detail string and folds the
  // assertion verdict into ok. A missing assertion fails the criterion.
  bool fold(const Outcome& out, const std::string& name, const std::string& label,
            std::string& detail, bool ok) const {
    if (out.threw) {
      if (!detail.empty()) detail += "; ";
      detail += out.error;
      return false;
    }
    const Assertion* a = find(out, name);
    if (!detail.empty()) detail += "; ";
    if (!a) {
      detail += label + " missing";
      return false;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s %.3g vs %.3g", label.c_str(), a->measured, a->bound);
    detail += buf;
    return ok && a->passed;
  }

  bool time_within(double seconds, double limit, std::string& detail, bool ok) const {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.1f s (limit %.0f)", seconds, limit);
    if (!detail.empty()) detail += "; ";
    detail += buf;
    return ok && seconds < limit;
  }

  void report(int id, const char* title, bool ok, const std::string& detail) {
    std::printf("%s  %2d  %-46s  %s\n", ok ? "pass" : "FAIL", id, title, detail.c_str());
    if (!ok) ++failures;
  }

  void note(const std::string& line) { std::printf("          %s\n", line.c_str()); }
};

}  // namespace

int main(int argc, char** argv) {
  std::filesystem::path configs = "configs";
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--configs" && i + 1 < argc) {
      configs = argv[++i];
    } else {
      std::fprintf(stderr, "usage: %s [--configs <dir>]\n", argv[0]);
      return 99;
    }
  }
  if (!std::filesystem::is_directory(configs)) {
    std::fprintf(stderr, "config directory not found: %s\n", configs.string().c_str());
    return 99;
  }

  Gate gate;
  gate.configs = configs;
  gate.scratch = std::filesystem::temp_directory_path() / "wpilab-acceptance";

  // Every bundled config must at least parse; typos here would silently
  // detach the gate from the bundle it claims to exercise.
  int parsed = 0;
  for (const auto& entry : std::filesystem::directory_iterator(configs)) {
    if (entry.path().extension() != ".cfg") continue;
    try {
      load_config(entry.path());
      ++parsed;
    } catch (const Error& e) {
      std::printf("FAIL      %s does not parse: %s\n", entry.path().filename().string().c_str(),
                  e.what());
      ++gate.failures;
    }
  }
  std::printf("          %d bundled configs parse\n", parsed);

  // 1. Free packet against the closed form at nu = 4 and nu = 16. The second
  // rung needs roughly three times the pinned resolution, so it runs as a
  // guard-disabled diagnostic and the measured error is reported as is.
  {
    Outcome& fine = gate.run("free_particle.cfg");
    Outcome& coarse = gate.run("free_particle_undersampled.cfg");
    std::string detail;
    bool ok = gate.fold(fine, "largest error below tolerance", "nu<=4 err", detail, true);
    ok = gate.fold(coarse, "largest error below tolerance", "nu=16 err", detail, ok);
    ok = gate.time_within(fine.seconds + coarse.seconds, 30.0, detail, ok);
    gate.report(1, "free packet matches the closed form", ok, detail);
    if (!ok && !coarse.threw) {
      ExperimentConfig c = load_config(configs / "free_particle_undersampled.cfg");
      Grid grid(1, static_cast<int>(c.integer_required("grid_points")),
                c.number_required("box"));
      double mass = c.number("mass", 1.0);
      double rho = c.number("time", 1.0) / 16.0;
      double guard = sampling_guard_value(mass, grid, rho);
      int n_min = static_cast<int>(std::ceil(mass * sq(2.0 * grid.box) / (pi * rho)));
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "the nu=16 kernel phase is unresolved on %d points: guard %.2f > pi, "
                    "needs at least %d points per axis",
                    grid.n, guard, n_min);
      gate.note(buf);
      gate.note("nu<=4 on the same grid is exact to machine precision (first figure above)");
    }
  }

  // 2. Measured harmonic oscillator ladder against the Crank-Nicolson
  // reference: errors strictly decreasing, final below 1e-2, ten minutes max.
  {
    Outcome& out = gate.run("measured_ho.cfg");
    std::string detail;
    bool ok = gate.fold(out, "final error below tolerance", "final err", detail, true);
    ok = gate.fold(out, "errors strictly decreasing", "worst ratio", detail, ok);
    ok = gate.time_within(out.seconds, 600.0, detail, ok);
    gate.report(2, "measured oscillator ladder converges", ok, detail);
  }

  // 3. Growth exponent fitted on random states agrees across three grids,
  // and with a free Hamiltonian plus nonnegative weight no step may expand.
  {
    Outcome& spread = gate.run("stability.cfg");
    Outcome& damped = gate.run("stability_damped.cfg");
    std::string detail;
    bool ok = gate.fold(spread, "growth exponent grid independent", "spread", detail, true);
    ok = gate.fold(damped, "per-step norm ratio bounded", "worst ratio", detail, ok);
    gate.report(3, "growth exponent stable across grids", ok, detail);
  }

  // 4. Damping factors along random straight segments stay inside [0, 1].
  {
    Outcome& out = gate.run("stability_damped.cfg");
    std::string detail;
    bool ok = gate.fold(out, "damping factors within the unit interval", "worst excess",
                        detail, true);
    gate.report(4, "damping factors stay inside [0, 1]", ok, detail);
  }

  // 5. All four gauge families leave the evolution covariant.
  {
    Outcome& out = gate.run("gauge.cfg");
    std::string detail;
    bool ok = !out.threw;
    if (out.threw) {
      detail = out.error;
    } else {
      int families = 0;
      double worst = 0.0;
      double bound = 0.0;
      for (const auto& a : out.res.assertions) {
        if (a.name.find("gauge defect below tolerance") == std::string::npos) continue;
        ++families;
        worst = std::max(worst, a.measured);
        bound = a.bound;
        ok = ok && a.passed;
      }
      ok = ok && families == 4;
      char buf[120];
      std::snprintf(buf, sizeof buf, "%d families, worst defect %.3g vs %.3g", families, worst,
                    bound);
      detail = buf;
    }
    gate.report(5, "gauge transformations commute with evolution", ok, detail);
  }

  // 6. Random monitored channels: no singular value beyond one, composition
  // across a split point consistent, transport integrator fourth order.
  {
    Outcome& out = gate.run("spin_channels.cfg");
    std::string detail;
    bool ok = gate.fold(out, "channels never expand", "max sv", detail, true);
    ok = gate.fold(out, "composition defect small", "compose", detail, ok);
    ok = gate.fold(out, "transport is fourth order", "order", detail, ok);
    gate.report(6, "random channels contract and compose", ok, detail);
  }

  // 7. Two level packet under clamped monitoring of two distinct records
  // against the spinor Crank-Nicolson reference, strictly decreasing ladder.
  {
    Outcome& out = gate.run("spin.cfg");
    std::string detail;
    bool ok = gate.fold(out, "final error below tolerance", "final err", detail, true);
    ok = gate.fold(out, "errors strictly decreasing", "worst ratio", detail, ok);
    gate.report(7, "two level ladder tracks the spinor reference", ok, detail);
  }

  // 8. Direct joint channel integration equals the tensor product of the
  // per-particle channels over random paths.
  {
    Outcome& out = gate.run("multiparticle_channels.cfg");
    std::string detail;
    bool ok = gate.fold(out, "joint channel equals the product channel", "defect", detail, true);
    gate.report(8, "joint channels factor over particles", ok, detail);
  }

  // 9. Uncoupled two particle evolution factorizes; with coupling switched
  // on, the symmetric and antisymmetric sectors are preserved.
  {
    Outcome& out = gate.run("multiparticle.cfg");
    std::string detail;
    bool ok = gate.fold(out, "uncoupled evolution factorizes", "factor", detail, true);
    ok = gate.fold(out, "symmetric sector preserved", "sym", detail, ok);
    ok = gate.fold(out, "antisymmetric sector preserved", "antisym", detail, ok);
    ok = gate.time_within(out.seconds, 1200.0, detail, ok);
    gate.report(9, "separable models factor, exchange survives", ok, detail);
  }

  // 10. The two independent references (coefficient ODE and Crank-Nicolson)
  // agree on the measured harmonic oscillator.
  {
    Outcome& out = gate.run("oracles.cfg");
    std::string detail;
    bool ok = gate.fold(out, "independent oracles agree", "distance", detail, true);
    gate.report(10, "independent oracles agree", ok, detail);
  }

  std::printf("%d of 10 criteria pass\n", 10 - gate.failures);
  return gate.failures;
}
