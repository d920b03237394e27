#pragma once

// Gauss-Legendre quadrature on [0, 1].
//
// All line integrals along broken paths are one dimensional integrals in the
// parameter theta in [0, 1], so a single cached rule per node count serves
// the whole library. Nodes are roots of the Legendre polynomial P_n found by
// Newton iteration from the Chebyshev initial guess; this is deterministic
// and accurate to full double precision for the node counts used here.

#include <map>
#include <mutex>
#include <vector>

#include "wpi/common.hpp"

namespace wpi {

struct QuadratureRule {
  std::vector<double> nodes;    // in (0, 1), ascending
  std::vector<double> weights;  // positive, sum to 1

  int size() const { return static_cast<int>(nodes.size()); }

  // Approximates the integral of f over [0, 1].
  template <class F>
  auto integrate(F&& f) const {
    auto acc = weights[0] * f(nodes[0]);
    for (int j = 1; j < size(); ++j) acc += weights[j] * f(nodes[j]);
    return acc;
  }
};

namespace detail {

inline QuadratureRule make_gauss_legendre(int n) {
  if (n < 1 || n > 256) throw InvalidParameter("quadrature node count must be in [1, 256]");
  QuadratureRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  // Roots on [-1, 1]; exploit symmetry and map to [0, 1] at the end.
  for (int k = 0; k < (n + 1) / 2; ++k) {
    double x = std::cos(pi * (k + 0.75) / (n + 0.5));
    double p0 = 0.0, p1 = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Evaluate P_n(x) and P_{n-1}(x) by the three term recurrence.
      p0 = 1.0;
      p1 = x;
      for (int m = 2; m <= n; ++m) {
        double p2 = ((2 * m - 1) * x * p1 - (m - 1) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    p0 = 1.0;
    p1 = x;
    for (int m = 2; m <= n; ++m) {
      double p2 = ((2 * m - 1) * x * p1 - (m - 1) * p0) / m;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (x * p1 - p0) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[k] = 0.5 * (1.0 - x);  // descending x maps to ascending theta
    r.weights[k] = 0.5 * w;
    r.nodes[n - 1 - k] = 0.5 * (1.0 + x);
    r.weights[n - 1 - k] = 0.5 * w;
  }
  return r;
}

}  // namespace detail

// Cached shared rule. Node counts above a few hundred are never needed.
inline const QuadratureRule& gauss_legendre(int n) {
  static std::map<int, QuadratureRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, detail::make_gauss_legendre(n)).first;
  return it->second;
}

}  // namespace wpi
