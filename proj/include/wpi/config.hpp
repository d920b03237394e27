#pragma once

// Declarative experiment configs: one flat JSON object, numeric and string
// values only, fully validated against a key registry before anything runs.
// The canonical (sorted key) dump is hashed so reordering keys in the file
// never changes the config hash.

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wpi/common.hpp"
#include "wpi/io.hpp"

namespace wpi {

enum class KeyKind { number, integer, text, boolean };

struct KeySpec {
  const char* name;
  KeyKind kind;
  const char* doc;
};

// Every key any scenario understands. Keys that a scenario does not read
// are still validated for type but have no effect there.
inline const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys = {
      {"schema", KeyKind::integer, "config schema version, currently 1"},
      {"scenario", KeyKind::text,
       "one of convergence, stability, gauge, spin, multiparticle, validate"},
      {"mass", KeyKind::number, "particle mass (default 1)"},
      {"dim", KeyKind::integer, "spatial dimension, 1 or 2 (default 1)"},
      {"grid_points", KeyKind::integer, "grid points per axis"},
      {"box", KeyKind::number, "half width of the computational box"},
      {"time", KeyKind::number, "evolution target time"},
      {"theta_nodes", KeyKind::integer, "quadrature nodes for line integrals (default 8)"},
      {"spin_substeps", KeyKind::integer, "RK4 substeps per segment for level channels"},
      {"boundary_tol", KeyKind::number, "boundary mass guard tolerance (default 1e-8)"},
      {"enforce_sampling_guard", KeyKind::boolean,
       "disable only for guard diagnostics (default true)"},
      {"cutoff", KeyKind::text, "truncation (default) or profile"},
      {"cutoff_scale", KeyKind::number, "profile argument scale when cutoff=profile"},
      {"seed", KeyKind::integer, "random seed (default 1)"},
      {"potential", KeyKind::text, "free, harmonic, quartic, uniform_field or magnetic"},
      {"potential_param", KeyKind::number,
       "family parameter: spring constant, quartic coefficient, field strength"},
      {"weight", KeyKind::text, "zero, constant or quadratic"},
      {"weight_constant", KeyKind::number, "constant weight value"},
      {"weight_T", KeyKind::number, "measurement horizon in the quadratic weight"},
      {"weight_da", KeyKind::number, "measurement resolution in the quadratic weight"},
      {"weight_center", KeyKind::number, "record position at t=0"},
      {"weight_center_speed", KeyKind::number, "record drift speed (default 0)"},
      {"packet_alpha_re", KeyKind::number, "initial packet width, real part (default 1)"},
      {"packet_alpha_im", KeyKind::number, "initial packet width, imaginary part (default 0)"},
      {"packet_center", KeyKind::number, "initial packet center (default 0)"},
      {"packet_momentum", KeyKind::number, "initial packet momentum (default 0)"},
      {"tolerance", KeyKind::number, "headline pass tolerance of the scenario"},
      {"nu_min", KeyKind::integer, "smallest slice count in a doubling sweep"},
      {"nu_max", KeyKind::integer, "largest slice count in a doubling sweep"},
      {"nu", KeyKind::integer, "slice count for single subdivision runs"},
      {"reference", KeyKind::text, "convergence reference: free, gaussian or cn"},
      {"cn_steps", KeyKind::integer, "reference solver steps (default 4*nu_max)"},
      {"require_monotone", KeyKind::boolean, "assert strictly decreasing errors"},
      {"rho", KeyKind::number, "single step length for stability trials"},
      {"trials", KeyKind::integer, "random states per stability estimate"},
      {"modes", KeyKind::integer, "band limit of random trial states (default 8)"},
      {"grid_points_2", KeyKind::integer, "second grid for the stability trend (0 = off)"},
      {"grid_points_3", KeyKind::integer, "third grid for the stability trend (0 = off)"},
      {"k0_spread_max", KeyKind::number, "allowed growth factor spread across grids (default 2)"},
      {"norm_ratio_max", KeyKind::number, "per step norm ratio bound to assert (0 = off)"},
      {"gauge", KeyKind::text, "constant, linear, time, bump or all (default all)"},
      {"gauge_param", KeyKind::number, "gauge family parameter (default 1)"},
      {"spin_hs", KeyKind::text, "level Hamiltonian: zero, pauli_x or pauli_z"},
      {"spin_hs_scale", KeyKind::number, "level Hamiltonian scale (default 1)"},
      {"record_offset", KeyKind::number, "level records sit at +/- this offset"},
      {"clamp_level", KeyKind::number, "ceiling of the clamped level weight (default 4)"},
      {"coupling", KeyKind::number, "pair interaction strength kappa in kappa*r^2"},
      {"packet_center_2", KeyKind::number, "second particle packet center"},
      {"tolerance_factorization", KeyKind::number, "product state factorization tolerance"},
      {"tolerance_symmetry", KeyKind::number, "symmetry sector defect tolerance"},
      {"sample_box", KeyKind::number, "half width of the assumption sampling box"},
      {"samples", KeyKind::integer, "random assumption samples (default 2000)"},
      {"horizon", KeyKind::number, "time horizon for assumption sampling (default 1)"},
      {"strict", KeyKind::boolean, "treat warnings as failures in validate (default false)"},
      {"damping_samples", KeyKind::integer,
       "stability extra: random segments to test the unit damping bound on"},
      {"channel_trials", KeyKind::integer,
       "spin extra: random channels to test contraction, composition and order on"},
      {"tensor_trials", KeyKind::integer,
       "multiparticle extra: random paths to test the joint channel product on"},
      {"oracle_cross_tol", KeyKind::number,
       "convergence extra: assert the gaussian and Crank-Nicolson oracles agree"},
  };
  return keys;
}

struct ExperimentConfig {
  nlohmann::json raw;
  std::string scenario;
  std::uint64_t hash = 0;

  bool has(const std::string& key) const { return raw.contains(key); }

  double number(const std::string& key, double fallback) const {
    if (!raw.contains(key)) return fallback;
    return raw.at(key).get<double>();
  }
  double number_required(const std::string& key) const {
    if (!raw.contains(key)) throw ConfigError("missing required key: " + key);
    return raw.at(key).get<double>();
  }
  int integer(const std::string& key, int fallback) const {
    if (!raw.contains(key)) return fallback;
    return raw.at(key).get<int>();
  }
  int integer_required(const std::string& key) const {
    if (!raw.contains(key)) throw ConfigError("missing required key: " + key);
    return raw.at(key).get<int>();
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    if (!raw.contains(key)) return fallback;
    return raw.at(key).get<std::string>();
  }
  bool flag(const std::string& key, bool fallback) const {
    if (!raw.contains(key)) return fallback;
    return raw.at(key).get<bool>();
  }

  void rehash() { hash = fnv1a(raw.dump()); }
};

inline ExperimentConfig parse_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const KeySpec* spec = nullptr;
    for (const auto& k : config_keys())
      if (it.key() == k.name) {
        spec = &k;
        break;
      }
    if (!spec) throw ConfigError("unknown config key: " + it.key());
    const auto& v = it.value();
    switch (spec->kind) {
      case KeyKind::number:
        if (!v.is_number()) throw ConfigError(it.key() + " must be a number");
        break;
      case KeyKind::integer:
        if (!v.is_number_integer()) throw ConfigError(it.key() + " must be an integer");
        break;
      case KeyKind::text:
        if (!v.is_string()) throw ConfigError(it.key() + " must be a string");
        break;
      case KeyKind::boolean:
        if (!v.is_boolean()) throw ConfigError(it.key() + " must be true or false");
        break;
    }
  }
  if (!doc.contains("schema") || doc.at("schema").get<int>() != 1)
    throw ConfigError("config needs \"schema\": 1");
  if (!doc.contains("scenario")) throw ConfigError("config needs a \"scenario\" key");

  ExperimentConfig cfg;
  cfg.raw = doc;
  cfg.scenario = doc.at("scenario").get<std::string>();
  static const char* known[] = {"convergence", "stability",     "gauge",
                                "spin",        "multiparticle", "validate"};
  bool ok = false;
  for (const char* name : known) ok = ok || cfg.scenario == name;
  if (!ok) throw ConfigError("unknown scenario: " + cfg.scenario);
  cfg.rehash();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  try {
    return parse_config(doc);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config value error in " + path + ": " + e.what());
  }
}

}  // namespace wpi
