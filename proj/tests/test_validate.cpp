#include <catch_amalgamated.hpp>

#include "wpi/model.hpp"
#include "wpi/validate.hpp"

using namespace wpi;

namespace {

const AssumptionClause& clause(const AssumptionReport& r, const std::string& name) {
  return r.find(name);
}

}  // namespace

TEST_CASE("harmonic potential with the quadratic weight satisfies every clause") {
  Potential p = harmonic_potential(1, 1.0);
  Weight w = quadratic_weight(1, 1.0, 1.0, Point{0.0, 0.0});
  AssumptionReport rep = validate_assumptions(p, w);
  for (const auto& c : rep.clauses) {
    INFO(c.name << ": " << c.note);
    REQUIRE(c.verdict == Verdict::pass);
  }
  REQUIRE(rep.all_passed());
  REQUIRE_FALSE(rep.has_failure());
}

TEST_CASE("free model passes trivially") {
  AssumptionReport rep = validate_assumptions(free_potential(1), zero_weight(1));
  REQUIRE(rep.all_passed());
}

TEST_CASE("negative constant weight with an understated bound fails the lower bound clause") {
  Weight w = zero_weight(1);
  w.is_zero = false;
  w.W = [](double, const Point&) { return -1.0; };
  w.lower_bound_const = 0.0;  // claims W >= 0, which is false
  AssumptionReport rep = validate_assumptions(free_potential(1), w);
  REQUIRE(clause(rep, "weight lower bound").verdict == Verdict::fail);
  REQUIRE(rep.has_failure());
}

TEST_CASE("negative constant weight with an honest bound passes") {
  Weight w = constant_weight(1, -1.0);
  REQUIRE(w.lower_bound_const == Catch::Approx(1.0));
  AssumptionReport rep = validate_assumptions(free_potential(1), w);
  REQUIRE(clause(rep, "weight lower bound").verdict == Verdict::pass);
}

TEST_CASE("quartic potential is flagged on the electric derivative clause") {
  Potential p = quartic_potential(1, 1.0);
  AssumptionReport rep = validate_assumptions(p, zero_weight(1));
  REQUIRE(clause(rep, "electric derivative bound").verdict == Verdict::warn);
  // A warning is not a failure; strictness is the caller's choice.
  REQUIRE_FALSE(rep.has_failure());
}

TEST_CASE("magnetic model in two dimensions checks the field consistency clause") {
  Potential p = magnetic_potential(0.8);
  AssumptionReport rep = validate_assumptions(p, zero_weight(2));
  REQUIRE(clause(rep, "field derivative consistency").verdict == Verdict::pass);
  // The symmetric gauge field is uniform, so every derivative of B vanishes
  // and the decay clause holds with room to spare.
  REQUIRE(clause(rep, "magnetic derivative decay").verdict == Verdict::pass);
}

TEST_CASE("one dimensional models skip the magnetic clauses gracefully") {
  AssumptionReport rep = validate_assumptions(harmonic_potential(1, 1.0), zero_weight(1));
  REQUIRE(clause(rep, "magnetic derivative decay").verdict == Verdict::pass);
  REQUIRE(clause(rep, "field derivative consistency").verdict == Verdict::pass);
}

TEST_CASE("reports are deterministic for a fixed seed") {
  Potential p = harmonic_potential(1, 1.0);
  Weight w = quadratic_weight(1, 1.0, 1.0, Point{0.0, 0.0});
  ValidationOptions opts;
  opts.samples = 500;
  AssumptionReport a = validate_assumptions(p, w, opts);
  AssumptionReport b = validate_assumptions(p, w, opts);
  REQUIRE(a.clauses.size() == b.clauses.size());
  for (std::size_t k = 0; k < a.clauses.size(); ++k) {
    REQUIRE(a.clauses[k].measured == b.clauses[k].measured);
    REQUIRE(a.clauses[k].verdict == b.clauses[k].verdict);
  }
}

TEST_CASE("option validation") {
  ValidationOptions opts;
  opts.samples = 0;
  REQUIRE_THROWS_AS(opts.validate(), InvalidParameter);
  opts = ValidationOptions{};
  opts.box = -1.0;
  REQUIRE_THROWS_AS(opts.validate(), InvalidParameter);
}
