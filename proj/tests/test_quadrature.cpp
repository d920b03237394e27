#include <catch_amalgamated.hpp>

#include <cmath>

#include "wpi/quadrature.hpp"

using namespace wpi;

TEST_CASE("nodes lie in (0,1) ascending with positive weights summing to 1") {
  for (int n : {1, 2, 3, 5, 8, 16, 64}) {
    const QuadratureRule& r = gauss_legendre(n);
    REQUIRE(r.size() == n);
    double wsum = 0.0;
    for (int j = 0; j < n; ++j) {
      REQUIRE(r.nodes[j] > 0.0);
      REQUIRE(r.nodes[j] < 1.0);
      REQUIRE(r.weights[j] > 0.0);
      if (j) REQUIRE(r.nodes[j] > r.nodes[j - 1]);
      wsum += r.weights[j];
    }
    REQUIRE(wsum == Catch::Approx(1.0).margin(1e-14));
  }
}

TEST_CASE("rule with n nodes integrates monomials up to degree 2n-1 exactly") {
  for (int n : {1, 2, 3, 4, 6, 8}) {
    const QuadratureRule& r = gauss_legendre(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double got = r.integrate([k](double x) { return std::pow(x, k); });
      REQUIRE(got == Catch::Approx(1.0 / (k + 1)).margin(1e-13));
    }
  }
}

TEST_CASE("degree 2n monomial is not exact, confirming the order is sharp") {
  const QuadratureRule& r = gauss_legendre(3);
  double got = r.integrate([](double x) { return std::pow(x, 6); });
  REQUIRE(std::abs(got - 1.0 / 7.0) > 1e-8);
}

TEST_CASE("oscillatory integrand converges with the node count") {
  double exact = std::sin(10.0) / 10.0;
  double got = gauss_legendre(32).integrate([](double x) { return std::cos(10.0 * x); });
  REQUIRE(got == Catch::Approx(exact).margin(1e-12));
}

TEST_CASE("integrate works on complex valued integrands") {
  cplx got = gauss_legendre(16).integrate([](double x) {
    return cplx{std::cos(2.0 * x), std::sin(2.0 * x)};
  });
  REQUIRE(got.real() == Catch::Approx(std::sin(2.0) / 2.0).margin(1e-12));
  REQUIRE(got.imag() == Catch::Approx((1.0 - std::cos(2.0)) / 2.0).margin(1e-12));
}

TEST_CASE("cache returns one shared rule per node count") {
  const QuadratureRule& a = gauss_legendre(8);
  const QuadratureRule& b = gauss_legendre(8);
  REQUIRE(&a == &b);
}

TEST_CASE("node counts outside [1,256] are rejected") {
  REQUIRE_THROWS_AS(gauss_legendre(0), InvalidParameter);
  REQUIRE_THROWS_AS(gauss_legendre(-3), InvalidParameter);
  REQUIRE_THROWS_AS(gauss_legendre(257), InvalidParameter);
}
