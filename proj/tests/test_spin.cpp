#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "wpi/model.hpp"
#include "wpi/oracle.hpp"
#include "wpi/propagator.hpp"
#include "wpi/rng.hpp"
#include "wpi/spin.hpp"

using namespace wpi;

namespace {

StraightLine seg1(double s, double t, double y, double x) {
  StraightLine line;
  line.dim = 1;
  line.s = s;
  line.t = t;
  line.y = Point{y, 0.0};
  line.x = Point{x, 0.0};
  return line;
}

SpinMatrix random_hermitian(Rng& rng, int l) {
  SpinMatrix m(l, l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j) m(i, j) = rng.cnormal();
  return 0.5 * (m + m.adjoint().eval());
}

SpinMatrix random_psd(Rng& rng, int l) {
  SpinMatrix r(l, l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j) r(i, j) = rng.cnormal();
  return r * r.adjoint();
}

}  // namespace

TEST_CASE("pauli matrices are hermitian and traceless") {
  CHECK(hermiticity_defect(pauli_x()) == 0.0);
  CHECK(hermiticity_defect(pauli_y()) == 0.0);
  CHECK(hermiticity_defect(pauli_z()) == 0.0);
  CHECK(std::abs(pauli_x().trace()) == 0.0);
  // sigma_x sigma_y = i sigma_z
  CHECK((pauli_x() * pauli_y() - cplx{0.0, 1.0} * pauli_z()).norm() < 1e-15);
}

TEST_CASE("zero generators transport the identity exactly") {
  SpinSystem sys = trivial_spin_system(1, 2);
  StraightLine line = seg1(0.1, 0.9, -0.5, 1.2);
  SpinMatrix fast = integrate_channel(sys, line, 16);
  SpinMatrix slow = integrate_channel(sys, line, 16, false);
  CHECK((fast - SpinMatrix::Identity(2, 2)).norm() == 0.0);
  CHECK((slow - SpinMatrix::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("a constant hamiltonian gives the rotation exponential") {
  SpinSystem sys = constant_spin_system(1, pauli_x(), SpinMatrix::Zero(2, 2));
  StraightLine line = seg1(0.0, 0.8, 0.3, -0.4);

  SpinMatrix expected = std::cos(0.8) * SpinMatrix::Identity(2, 2) -
                        cplx{0.0, 1.0} * std::sin(0.8) * pauli_x();
  SpinMatrix fast = integrate_channel(sys, line, 4);
  SpinMatrix slow = integrate_channel(sys, line, 64, false);
  CHECK((fast - expected).norm() < 1e-13);
  CHECK((slow - expected).norm() < 1e-8);
  // Purely hamiltonian transport is unitary.
  CHECK((fast.adjoint() * fast - SpinMatrix::Identity(2, 2)).norm() < 1e-10);
}

TEST_CASE("a diagonal weight damps each level at its own rate") {
  SpinMatrix ws = SpinMatrix::Zero(2, 2);
  ws(0, 0) = 1.0;
  ws(1, 1) = 2.0;
  SpinSystem sys = constant_spin_system(1, SpinMatrix::Zero(2, 2), ws);
  StraightLine line = seg1(0.2, 0.5, 0.0, 0.0);

  SpinMatrix fast = integrate_channel(sys, line, 4);
  CHECK(std::abs(fast(0, 0) - std::exp(-0.3)) < 1e-12);
  CHECK(std::abs(fast(1, 1) - std::exp(-0.6)) < 1e-12);
  CHECK(std::abs(fast(0, 1)) < 1e-15);

  SpinMatrix slow = integrate_channel(sys, line, 64, false);
  CHECK((slow - fast).norm() < 1e-9);
}

TEST_CASE("channel transport validates its input") {
  SpinSystem sys = trivial_spin_system(1, 2);
  // Zero length with equal endpoints is the identity.
  SpinMatrix f = integrate_channel(sys, seg1(0.4, 0.4, 0.7, 0.7), 8);
  CHECK((f - SpinMatrix::Identity(2, 2)).norm() == 0.0);
  // Zero length with distinct endpoints is meaningless.
  REQUIRE_THROWS_AS(integrate_channel(sys, seg1(0.4, 0.4, 0.0, 0.7), 8), DegenerateInterval);
  REQUIRE_THROWS_AS(integrate_channel(sys, seg1(0.0, 1.0, 0.0, 0.7), 0), InvalidParameter);

  SpinSystem flat = trivial_spin_system(2, 2);
  REQUIRE_THROWS_AS(integrate_channel(flat, seg1(0.0, 1.0, 0.0, 0.7), 8), InvalidParameter);

  REQUIRE_THROWS_AS(channel_compose_defect(sys, seg1(0.0, 1.0, 0.0, 0.7), 1.5, 8),
                    InvalidParameter);
}

TEST_CASE("channels compose along the segment") {
  // Constant generators, forced through the RK4 path.
  SpinSystem sys = constant_spin_system(1, pauli_x(), SpinMatrix::Zero(2, 2));
  double zero_defect = channel_compose_defect(trivial_spin_system(1, 2),
                                              seg1(0.0, 1.0, -0.6, 0.8), 0.37, 16);
  CHECK(zero_defect == 0.0);

  double const_defect = channel_compose_defect(sys, seg1(0.0, 1.0, -0.6, 0.8), 0.37, 64, false);
  CHECK(const_defect < 1e-8);

  // A level resolved record system with clamped rates.
  SpinMatrix hs = pauli_x();
  std::vector<Point> records{Point{0.7, 0.0}, Point{-0.7, 0.0}};
  SpinSystem watched = clamped_record_system(1, hs, records, 1.0, 1.0, ClampProfile(4.0));
  double defect = channel_compose_defect(watched, seg1(0.3, 0.4, -1.1, 0.9), 0.35, 128);
  CHECK(defect < 1e-7);
}

TEST_CASE("nonnegative weights make every channel a contraction") {
  Rng rng(314159);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    SpinSystem sys =
        constant_spin_system(1, random_hermitian(rng, 2), random_psd(rng, 2));
    for (int k = 0; k < 5; ++k) {
      double s = rng.uniform(0.0, 1.0);
      double t = s + rng.uniform(0.05, 1.0);
      StraightLine line = seg1(s, t, rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
      worst = std::max(worst, operator_norm(integrate_channel(sys, line, 128, false)));
    }
  }
  INFO("largest singular value " << worst);
  CHECK(worst <= 1.0 + 1e-10);
}

TEST_CASE("a declared lower bound caps the channel growth") {
  // Ws >= -c with c = 0.5: the channel may grow, but only like e^{c rho}.
  SpinMatrix ws = SpinMatrix::Zero(2, 2);
  ws(0, 0) = -0.5;
  ws(1, 1) = 1.0;
  SpinSystem sys = constant_spin_system(1, pauli_y(), ws, 0.5);
  double rho = 0.8;
  SpinMatrix f = integrate_channel(sys, seg1(0.0, rho, 0.0, 0.5), 64, false);
  CHECK(operator_norm(f) <= std::exp(0.5 * rho) * (1.0 + 1e-10));

  REQUIRE_THROWS_AS(constant_spin_system(1, pauli_y(), ws, -0.1), InvalidParameter);
}

TEST_CASE("channel transport is fourth order in the substep") {
  SpinSystem sys;
  sys.dim = 1;
  sys.l = 2;
  sys.Hs = [](double t, const Point&) { return SpinMatrix(std::sin(3.0 * t) * pauli_x()); };
  sys.Ws = [](double t, const Point& x) {
    SpinMatrix w = SpinMatrix::Zero(2, 2);
    w(0, 0) = 1.0 + std::cos(2.0 * t + x[0]);
    w(1, 1) = 0.5 * (1.0 + std::sin(t));
    return w;
  };
  sys.validate();

  StraightLine line = seg1(0.0, 0.9, -0.8, 1.1);
  SpinMatrix ref = integrate_channel(sys, line, 512);
  double e8 = (integrate_channel(sys, line, 8) - ref).norm();
  double e16 = (integrate_channel(sys, line, 16) - ref).norm();
  double order = std::log2(e8 / e16);
  INFO("measured order " << order);
  CHECK(order > 3.5);
  CHECK(order < 4.5);
}

TEST_CASE("a single trivial level reduces to the scalar propagator bit for bit") {
  Grid grid{1, 512, 6.0};
  PhysicalConstants constants{1.0};
  Potential pot = harmonic_potential(1, 1.0);
  Weight wgt = quadratic_weight(1, 1.0, 1.0, Point{0.0, 0.0});
  WaveFunction f = GaussianAnsatz::physical(cplx{1.0, 0.0}, 0.2, 0.0).sample(grid, 0.0);

  SpinorWaveFunction s0(grid, 0.0, 1);
  s0.amp = f.amp;

  Subdivision sub = Subdivision::uniform(0.0, 0.3, 3);
  WaveFunction scalar = time_sliced(constants, pot, wgt, f, sub);
  SpinorWaveFunction spinor =
      spin_time_sliced(constants, pot, wgt, trivial_spin_system(1, 1), s0, sub);

  REQUIRE(spinor.amp.size() == scalar.amp.size());
  for (std::size_t p = 0; p < scalar.amp.size(); ++p) {
    CHECK(spinor.amp[p].real() == scalar.amp[p].real());
    CHECK(spinor.amp[p].imag() == scalar.amp[p].imag());
  }
}

TEST_CASE("spin steps share the scalar guards and identity branch") {
  Grid grid{1, 256, 6.0};
  PhysicalConstants constants{1.0};
  SpinSystem sys = trivial_spin_system(1, 2);
  SpinorWaveFunction s0(grid, 0.0, 2);
  WaveFunction f = GaussianAnsatz::physical(cplx{1.0, 0.0}, 0.0, 0.0).sample(grid, 0.0);
  for (std::size_t p = 0; p < grid.size(); ++p) s0.at(p, 0) = f.amp[p];

  SpinorWaveFunction same = spin_one_step(constants, free_potential(), zero_weight(), sys, s0,
                                          0.0, 0.0);
  for (std::size_t k = 0; k < s0.amp.size(); ++k) {
    CHECK(same.amp[k].real() == s0.amp[k].real());
    CHECK(same.amp[k].imag() == s0.amp[k].imag());
  }

  // Undersampled steps are rejected exactly as in the scalar path.
  REQUIRE_THROWS_AS(
      spin_one_step(constants, free_potential(), zero_weight(), sys, s0, 0.0, 0.05),
      UndersampledKernel);

  // The level resolved kernel refuses to allocate past the cache limit.
  PropagatorConfig tiny;
  tiny.cache_limit_bytes = 1024;
  REQUIRE_THROWS_AS(
      spin_one_step(constants, free_potential(), zero_weight(), sys, s0, 0.0, 0.5, tiny),
      ResourceLimit);

  // Level counts must match.
  SpinorWaveFunction wrong(grid, 0.0, 3);
  REQUIRE_THROWS_AS(
      spin_one_step(constants, free_potential(), zero_weight(), sys, wrong, 0.0, 0.5),
      InvalidParameter);
}

TEST_CASE("an x independent level hamiltonian only turns level phases") {
  Grid grid{1, 2048, 6.0};
  PhysicalConstants constants{1.0};
  SpinSystem sys = constant_spin_system(1, pauli_z(), SpinMatrix::Zero(2, 2));

  GaussianAnsatz g0 = GaussianAnsatz::physical(cplx{1.0, 0.0}, 0.0, 0.0);
  WaveFunction f = g0.sample(grid, 0.0);
  SpinorWaveFunction s0(grid, 0.0, 2);
  double inv = 1.0 / std::sqrt(2.0);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    s0.at(p, 0) = inv * f.amp[p];
    s0.at(p, 1) = inv * f.amp[p];
  }

  double t_end = 0.5;
  SpinorWaveFunction out = spin_time_sliced(constants, free_potential(), zero_weight(), sys, s0,
                                            Subdivision::uniform(0.0, t_end, 16));

  WaveFunction exact = free_evolve(g0, constants, t_end).sample(grid, t_end);
  cplx up = inv * std::exp(cplx{0.0, -t_end});
  cplx down = inv * std::exp(cplx{0.0, t_end});
  double worst = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    worst = std::max(worst, std::abs(out.at(p, 0) - up * exact.amp[p]));
    worst = std::max(worst, std::abs(out.at(p, 1) - down * exact.amp[p]));
  }
  INFO("worst pointwise phase error " << worst);
  CHECK(worst < 1e-4);
  CHECK(std::abs(out.norm() - s0.norm()) < 1e-6);
}

TEST_CASE("constant level dynamics factor out of the ladder") {
  Grid grid{1, 1024, 6.0};
  PhysicalConstants constants{1.0};
  Potential pot = harmonic_potential(1, 1.0);
  Weight wgt = zero_weight();

  SpinMatrix ws = SpinMatrix::Zero(2, 2);
  ws(0, 0) = 0.3;
  ws(1, 1) = 0.7;
  SpinSystem sys = constant_spin_system(1, pauli_x(), ws);

  WaveFunction f0 = GaussianAnsatz::physical(cplx{1.0, 0.0}, 0.4, 0.0).sample(grid, 0.0);
  WaveFunction f1 = GaussianAnsatz::physical(cplx{1.5, 0.0}, -0.2, 0.5).sample(grid, 0.0);
  SpinorWaveFunction s0(grid, 0.0, 2);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    s0.at(p, 0) = f0.amp[p];
    s0.at(p, 1) = f1.amp[p];
  }

  double t_end = 0.4;
  Subdivision sub = Subdivision::uniform(0.0, t_end, 8);
  SpinorWaveFunction joint = spin_time_sliced(constants, pot, wgt, sys, s0, sub);

  // The same ladder applied per component, mixed once by the full channel.
  WaveFunction e0 = time_sliced(constants, pot, wgt, f0, sub);
  WaveFunction e1 = time_sliced(constants, pot, wgt, f1, sub);
  SpinMatrix full = integrate_channel(sys, seg1(0.0, t_end, 0.0, 0.0), 4);

  double worst = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    cplx want0 = full(0, 0) * e0.amp[p] + full(0, 1) * e1.amp[p];
    cplx want1 = full(1, 0) * e0.amp[p] + full(1, 1) * e1.amp[p];
    worst = std::max(worst, std::abs(joint.at(p, 0) - want0));
    worst = std::max(worst, std::abs(joint.at(p, 1) - want1));
  }
  INFO("factorization defect " << worst);
  CHECK(worst < 1e-8);
}
