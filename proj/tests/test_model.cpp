#include <catch_amalgamated.hpp>

#include <cmath>

#include "wpi/model.hpp"

using namespace wpi;

TEST_CASE("constant vector potential produces no fields") {
  Potential p = free_potential(2);
  p.A = [](double, const Point&) { return Point{0.3, -0.8}; };
  p.zero_A = false;
  p.dA_dt = nullptr;
  p.jac_A = nullptr;
  FieldValues f = eval_fields(p, 0.4, Point{1.0, -2.0});
  REQUIRE(std::abs(f.E[0]) < 1e-9);
  REQUIRE(std::abs(f.E[1]) < 1e-9);
  REQUIRE(std::abs(f.B12) < 1e-9);
}

TEST_CASE("linear potential V = x1 gives E = (-1, 0)") {
  Potential p = uniform_field_potential(2, Point{-1.0, 0.0});
  // uniform_field_potential builds V = -e0 . x, so e0 = (-1,0) gives V = x1.
  REQUIRE(p.V(0.0, Point{2.0, 5.0}) == Catch::Approx(2.0));
  FieldValues f = eval_fields(p, 0.0, Point{0.7, -1.3});
  REQUIRE(f.E[0] == Catch::Approx(-1.0).margin(1e-10));
  REQUIRE(f.E[1] == Catch::Approx(0.0).margin(1e-10));
  REQUIRE(f.B12 == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("symmetric gauge reproduces a uniform magnetic field") {
  double b0 = 1.7;
  Potential p = magnetic_potential(b0);
  Point x{0.4, -0.9};
  Point a = p.A(0.0, x);
  REQUIRE(a[0] == Catch::Approx(-b0 * x[1] / 2));
  REQUIRE(a[1] == Catch::Approx(b0 * x[0] / 2));
  FieldValues f = eval_fields(p, 0.0, x);
  REQUIRE(f.E[0] == Catch::Approx(0.0).margin(1e-10));
  REQUIRE(f.E[1] == Catch::Approx(0.0).margin(1e-10));
  REQUIRE(f.B12 == Catch::Approx(b0).margin(1e-10));
}

TEST_CASE("fields are gauge invariant") {
  PhysicalConstants k;
  for (int dim : {1, 2}) {
    Potential p = dim == 2 ? magnetic_potential(0.8) : harmonic_potential(1, 1.0);
    std::vector<GaugeFunction> gauges = {constant_gauge(dim, 0.7),
                                         linear_gauge(dim, Point{0.4, dim == 2 ? -0.2 : 0.0}),
                                         time_gauge(dim, 1.3), bump_gauge(dim, 1.0)};
    for (const auto& g : gauges) {
      Potential q = gauge_transform(p, g);
      for (double t : {0.0, 0.4}) {
        for (double x0 : {-1.2, 0.3, 2.0}) {
          Point x{x0, dim == 2 ? 0.5 : 0.0};
          FieldValues fp = eval_fields(p, t, x);
          FieldValues fq = eval_fields(q, t, x);
          for (int a = 0; a < dim; ++a)
            REQUIRE(fq.E[a] == Catch::Approx(fp.E[a]).margin(1e-8));
          if (dim == 2) REQUIRE(fq.B12 == Catch::Approx(fp.B12).margin(1e-8));
        }
      }
    }
  }
}

TEST_CASE("gauge transform closed forms for simple phases") {
  Potential p = harmonic_potential(1, 2.0);
  Point x{0.9, 0.0};

  SECTION("constant phase changes nothing") {
    Potential q = gauge_transform(p, constant_gauge(1, 5.0));
    REQUIRE(q.V(0.3, x) == Catch::Approx(p.V(0.3, x)).margin(1e-12));
    REQUIRE(q.A(0.3, x)[0] == Catch::Approx(p.A(0.3, x)[0]).margin(1e-12));
  }

  SECTION("linear phase k.x shifts A by k") {
    Potential q = gauge_transform(p, linear_gauge(1, Point{0.6, 0.0}));
    REQUIRE(q.V(0.3, x) == Catch::Approx(p.V(0.3, x)).margin(1e-12));
    REQUIRE(q.A(0.3, x)[0] == Catch::Approx(p.A(0.3, x)[0] + 0.6).margin(1e-12));
  }

  SECTION("time phase c t shifts V by -c") {
    Potential q = gauge_transform(p, time_gauge(1, 0.8));
    REQUIRE(q.V(0.3, x) == Catch::Approx(p.V(0.3, x) - 0.8).margin(1e-12));
    REQUIRE(q.A(0.3, x)[0] == Catch::Approx(p.A(0.3, x)[0]).margin(1e-12));
  }
}

TEST_CASE("quadratic weight matches the defining formula") {
  SECTION("zero displacement gives zero rate") {
    Weight w = quadratic_weight(1, 1.0, 1.0, Point{0.0, 0.0});
    REQUIRE(w.W(0.0, Point{0.0, 0.0}) == 0.0);
  }

  SECTION("unit parameters at x=1 give rate 2") {
    Weight w = quadratic_weight(1, 1.0, 1.0, Point{0.0, 0.0});
    REQUIRE(w.W(0.0, Point{1.0, 0.0}) == Catch::Approx(2.0));
  }

  SECTION("moving record track") {
    Weight w = quadratic_weight(
        1, 2.0, 1.0, [](double t) { return Point{t, 0.0}; }, false);
    REQUIRE(w.W(1.0, Point{3.0, 0.0}) == Catch::Approx(4.0));
    REQUIRE_FALSE(w.time_independent);
  }

  SECTION("da = 0 is rejected") {
    REQUIRE_THROWS_AS(quadratic_weight(1, 1.0, 0.0, Point{0.0, 0.0}), InvalidParameter);
  }
}

TEST_CASE("constant weight reports a lower bound for negative values") {
  Weight w = constant_weight(1, -1.5);
  REQUIRE_FALSE(w.is_zero);
  REQUIRE(w.lower_bound_const == Catch::Approx(1.5));
  REQUIRE(constant_weight(1, 2.0).lower_bound_const == 0.0);
}

TEST_CASE("clamp profile is identity low, level high, monotone between") {
  ClampProfile omega(4.0);

  SECTION("identity branch") {
    REQUIRE(omega(0.5) == Catch::Approx(0.5));
    REQUIRE(omega(1.0) == Catch::Approx(1.0));
    REQUIRE(omega(0.0) == 0.0);
  }

  SECTION("clamp branch") {
    REQUIRE(omega(2.0) == Catch::Approx(4.0));
    REQUIRE(omega(17.0) == Catch::Approx(4.0));
  }

  SECTION("ramp is nondecreasing and continuous at the joints") {
    double prev = omega(1.0);
    for (int k = 1; k <= 400; ++k) {
      double u = 1.0 + k / 400.0;
      double v = omega(u);
      REQUIRE(v >= prev - 1e-12);
      prev = v;
    }
    REQUIRE(omega(1.0 + 1e-9) == Catch::Approx(1.0).margin(1e-6));
    REQUIRE(omega(2.0 - 1e-9) == Catch::Approx(4.0).margin(1e-6));
  }

  SECTION("levels without ramp headroom are rejected") {
    REQUIRE_THROWS_AS(ClampProfile(1.05), InvalidParameter);
    REQUIRE_THROWS_AS(ClampProfile(0.5), InvalidParameter);
  }
}

TEST_CASE("clamped quadratic weight is bounded by the level") {
  Weight w = clamped_quadratic_weight(1, 1.0, 1.0, Point{0.0, 0.0}, ClampProfile(4.0));
  for (double x : {0.0, 0.3, 1.0, 2.5, 40.0}) {
    double v = w.W(0.0, Point{x, 0.0});
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 4.0 + 1e-12);
  }
  // Below the clamp it matches the raw quadratic rate.
  REQUIRE(w.W(0.0, Point{0.5, 0.0}) == Catch::Approx(0.5));
}

TEST_CASE("factories validate their inputs") {
  REQUIRE_THROWS_AS(harmonic_potential(3, 1.0), InvalidParameter);
  REQUIRE_THROWS_AS(magnetic_potential(std::nan("")), Error);
  PhysicalConstants bad;
  bad.mass = -1.0;
  REQUIRE_THROWS_AS(bad.validate(), InvalidParameter);
}
