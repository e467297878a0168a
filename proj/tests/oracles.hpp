#pragma once

#include "camp/rng.hpp"
#include "camp/types.hpp"

#include <doctest.h>

#include <functional>

namespace camp::testing {

// Central finite difference of f along dir at x.
inline double directional_fd(const std::function<double(const VecX&)>& f, const VecX& x,
                             const VecX& dir, double h = 1e-5) {
  return (f(x + h * dir) - f(x - h * dir)) / (2.0 * h);
}

// Verifies an analytic gradient against central differences along random unit
// directions. The comparison is relative with an absolute floor so near-zero
// derivatives do not blow up the ratio.
inline void check_gradient(const std::function<double(const VecX&)>& f, const VecX& x,
                           const VecX& analytic, int probes, Rng& rng, double tol = 1e-6,
                           double h = 1e-5) {
  REQUIRE(analytic.size() == x.size());
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    VecX dir(x.size());
    for (Eigen::Index i = 0; i < dir.size(); ++i) dir(i) = rng.normal();
    dir /= dir.norm();
    const double fd = directional_fd(f, x, dir, h);
    const double an = analytic.dot(dir);
    const double rel = std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
    worst = std::max(worst, rel);
  }
  CHECK(worst < tol);
}

}  // namespace camp::testing
