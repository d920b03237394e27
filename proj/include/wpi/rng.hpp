#pragma once

// Deterministic random numbers for stability trials and property tests.
//
// mt19937_64 is specified bit for bit by the standard, but the standard
// *distributions* are not, so uniform and normal variates are produced by
// explicit constructions (53 bit mantissa scaling and Box-Muller). Streams
// are therefore byte reproducible across compilers and platforms.

#include <random>

#include "wpi/common.hpp"

namespace wpi {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform on [a, b).
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Standard normal via Box-Muller (both values used, in order).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * pi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * pi * u2);
  }

  // Complex standard normal, Re and Im independent N(0, 1).
  cplx cnormal() {
    double re = normal();
    double im = normal();
    return {re, im};
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace wpi
