#pragma once

// Adaptive one-dimensional integration used for normalization checks, moments,
// and the exact Gaussian-case density. Backed by Boost.Math's Gauss-Kronrod.

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace rode {

/// Adaptive G15/K31 on [lo, hi]; infinite endpoints are mapped internally.
template <class F>
double integrate_adaptive(F&& f, double lo, double hi, double rel_tol = 1e-12,
                          double* error_estimate = nullptr) {
  if (lo == hi) return 0.0;
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, lo, hi, 20, rel_tol, &err);
  if (error_estimate) *error_estimate = err;
  return v;
}

/// Like integrate_adaptive, but splits the range at the given interior breakpoints
/// (points where the integrand has jumps or kinks). Breakpoints outside (lo, hi) are ignored.
template <class F>
double integrate_piecewise(F&& f, double lo, double hi, std::vector<double> breaks,
                           double rel_tol = 1e-12) {
  std::vector<double> cuts{lo};
  std::sort(breaks.begin(), breaks.end());
  for (double b : breaks)
    if (b > lo && b < hi && std::isfinite(b) && b > cuts.back()) cuts.push_back(b);
  cuts.push_back(hi);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total += integrate_adaptive(f, cuts[i], cuts[i + 1], rel_tol);
  return total;
}

}  // namespace rode
