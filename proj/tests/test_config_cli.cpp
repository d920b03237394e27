#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "wpi/config.hpp"
#include "wpi/io.hpp"
#include "wpi/scenarios.hpp"

using namespace wpi;
namespace fs = std::filesystem;

namespace {

nlohmann::json minimal(const std::string& scenario) {
  nlohmann::json doc;
  doc["schema"] = 1;
  doc["scenario"] = scenario;
  return doc;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& tag) {
  fs::path d = fs::temp_directory_path() / ("wpi_test_" + tag);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("config keys are unique and documented") {
  std::set<std::string> seen;
  for (const KeySpec& k : config_keys()) {
    CHECK(seen.insert(k.name).second);
    CHECK_FALSE(std::string(k.doc).empty());
  }
  CHECK(seen.count("schema") == 1);
  CHECK(seen.count("scenario") == 1);
}

TEST_CASE("unknown keys are rejected by name") {
  nlohmann::json doc = minimal("validate");
  doc["banana"] = 3;
  bool thrown = false;
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    thrown = true;
    CHECK(std::string(e.what()).find("unknown config key: banana") != std::string::npos);
  }
  REQUIRE(thrown);
}

TEST_CASE("config values are type checked") {
  nlohmann::json doc = minimal("validate");
  doc["grid_points"] = 1.5;  // integer key
  REQUIRE_THROWS_AS(parse_config(doc), ConfigError);

  doc = minimal("validate");
  doc["mass"] = "heavy";  // number key
  REQUIRE_THROWS_AS(parse_config(doc), ConfigError);

  doc = minimal("validate");
  doc["require_monotone"] = 1;  // boolean key
  REQUIRE_THROWS_AS(parse_config(doc), ConfigError);

  doc = minimal("validate");
  doc["potential"] = 7;  // text key
  REQUIRE_THROWS_AS(parse_config(doc), ConfigError);
}

TEST_CASE("schema and scenario are mandatory and whitelisted") {
  nlohmann::json doc;
  doc["scenario"] = "validate";
  REQUIRE_THROWS_AS(parse_config(doc), ConfigError);

  doc["schema"] = 2;
  REQUIRE_THROWS_AS(parse_config(doc), ConfigError);

  doc["schema"] = 1;
  doc["scenario"] = "fresnel";
  bool thrown = false;
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    thrown = true;
    CHECK(std::string(e.what()).find("unknown scenario") != std::string::npos);
  }
  REQUIRE(thrown);

  for (const char* name :
       {"convergence", "stability", "gauge", "spin", "multiparticle", "validate"}) {
    CHECK_NOTHROW(parse_config(minimal(name)));
  }
}

TEST_CASE("the config hash ignores key order") {
  auto a = parse_config(nlohmann::json::parse(
      R"({"schema": 1, "scenario": "validate", "mass": 2.0, "samples": 100})"));
  auto b = parse_config(nlohmann::json::parse(
      R"({"samples": 100, "mass": 2.0, "scenario": "validate", "schema": 1})"));
  CHECK(a.hash == b.hash);

  auto c = parse_config(nlohmann::json::parse(
      R"({"schema": 1, "scenario": "validate", "mass": 2.5, "samples": 100})"));
  CHECK(a.hash != c.hash);
}

TEST_CASE("rehash reflects edits to the raw document") {
  ExperimentConfig cfg = parse_config(minimal("validate"));
  std::uint64_t before = cfg.hash;
  cfg.raw["seed"] = 7;
  cfg.rehash();
  CHECK(cfg.hash != before);

  nlohmann::json doc = minimal("validate");
  doc["seed"] = 7;
  CHECK(cfg.hash == parse_config(doc).hash);
}

TEST_CASE("typed accessors fall back and demand required keys") {
  ExperimentConfig cfg = parse_config(minimal("validate"));
  CHECK(cfg.number("mass", 2.5) == 2.5);
  CHECK(cfg.integer("grid_points", 64) == 64);
  CHECK(cfg.text("potential", "free") == "free");
  CHECK(cfg.flag("require_monotone", true));
  CHECK_FALSE(cfg.has("mass"));

  bool thrown = false;
  try {
    cfg.number_required("mass");
  } catch (const ConfigError& e) {
    thrown = true;
    CHECK(std::string(e.what()).find("missing required key: mass") != std::string::npos);
  }
  REQUIRE(thrown);
  REQUIRE_THROWS_AS(cfg.integer_required("grid_points"), ConfigError);
}

TEST_CASE("load_config reports unreadable and malformed files") {
  REQUIRE_THROWS_AS(load_config("/nonexistent/path.cfg"), ConfigError);

  fs::path dir = fresh_dir("badjson");
  fs::path p = dir / "broken.cfg";
  std::ofstream(p) << "{ not json";
  bool thrown = false;
  try {
    load_config(p.string());
  } catch (const ConfigError& e) {
    thrown = true;
    CHECK(std::string(e.what()).find("parse error") != std::string::npos);
  }
  REQUIRE(thrown);
  fs::remove_all(dir);
}

TEST_CASE("error kinds map to stable names and exit classes") {
  CHECK(std::string(error_kind_name(ErrorKind::undersampled_kernel)) == "undersampled_kernel");
  CHECK(std::string(error_kind_name(ErrorKind::config_error)) == "config_error");
  CHECK(std::string(error_kind_name(ErrorKind::boundary_leak)) == "boundary_leak");

  CHECK(is_config_error(ConfigError("x")));
  CHECK(is_config_error(InvalidParameter("x")));
  CHECK_FALSE(is_config_error(BoundaryLeak("x")));
  CHECK_FALSE(is_config_error(UndersampledKernel("x")));
  CHECK_FALSE(is_config_error(NonFinite("x")));
}

TEST_CASE("a degenerate weight resolution is a configuration mistake") {
  nlohmann::json doc = minimal("validate");
  doc["potential"] = "harmonic";
  doc["potential_param"] = 1.0;
  doc["weight"] = "quadratic";
  doc["weight_T"] = 1.0;
  doc["weight_da"] = 0.0;
  doc["samples"] = 50;
  ExperimentConfig cfg = parse_config(doc);

  fs::path dir = fresh_dir("da0");
  bool thrown = false;
  try {
    run_scenario(cfg, dir);
  } catch (const Error& e) {
    thrown = true;
    CHECK(is_config_error(e));
  }
  REQUIRE(thrown);
  fs::remove_all(dir);
}

TEST_CASE("identical configs produce byte identical artifacts") {
  nlohmann::json doc = minimal("validate");
  doc["potential"] = "harmonic";
  doc["potential_param"] = 1.0;
  doc["weight"] = "quadratic";
  doc["weight_T"] = 1.0;
  doc["weight_da"] = 1.0;
  doc["samples"] = 300;
  doc["sample_box"] = 4.0;
  doc["seed"] = 12345;
  ExperimentConfig cfg = parse_config(doc);

  fs::path d1 = fresh_dir("det1");
  fs::path d2 = fresh_dir("det2");
  ScenarioResult r1 = run_scenario(cfg, d1);
  ScenarioResult r2 = run_scenario(cfg, d2);
  REQUIRE(r1.artifacts.size() == r2.artifacts.size());
  REQUIRE_FALSE(r1.artifacts.empty());
  for (std::size_t k = 0; k < r1.artifacts.size(); ++k) {
    CHECK(slurp(r1.artifacts[k]) == slurp(r2.artifacts[k]));
  }
  CHECK(r1.passed == r2.passed);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("scenario catalog names every runnable scenario once") {
  auto catalog = scenario_catalog();
  REQUIRE(catalog.size() == 6);
  std::set<std::string> names;
  for (const auto& entry : catalog) {
    CHECK(names.insert(entry.name).second);
    CHECK_FALSE(entry.summary.empty());
  }
  CHECK(names.count("convergence") == 1);
  CHECK(names.count("validate") == 1);
}

TEST_CASE("csv cells with separators are quoted") {
  fs::path dir = fresh_dir("csv");
  fs::path p = dir / "table.csv";
  {
    CsvWriter csv(p.string(), {"name", "note"});
    csv.row({"plain", "a,b"});
    csv.row({"quoted", "say \"hi\""});
    REQUIRE_THROWS_AS(csv.row({"too", "many", "cells"}), InvalidParameter);
    csv.close();
  }
  std::string text = slurp(p);
  CHECK(text.find("plain,\"a,b\"\n") != std::string::npos);
  CHECK(text.find("quoted,\"say \"\"hi\"\"\"\n") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("g17 formatting round trips doubles exactly") {
  for (double v : {1.0 / 3.0, 1e-17, 12345.6789, 5.17e-2, -0.0, 2.718281828459045}) {
    std::string s = format_g17(v);
    double back = std::stod(s);
    CHECK(back == v);
  }
}

TEST_CASE("hex64 renders fixed width lowercase") {
  CHECK(hex64(0) == "0000000000000000");
  CHECK(hex64(0xdeadbeefULL) == "00000000deadbeef");
  CHECK(hex64(~0ULL) == "ffffffffffffffff");
}

TEST_CASE("fnv1a matches the published test vectors") {
  // Canonical 64 bit FNV-1a values.
  CHECK(fnv1a("") == 14695981039346656037ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}
