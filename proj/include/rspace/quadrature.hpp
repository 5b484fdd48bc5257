#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace rspace::quad {

/// Adaptive 61-point Gauss-Kronrod over [a, b]; infinite limits allowed.
/// A single-panel pass gives the L1 scale, which turns `abs_tol` into the
/// relative tolerance the integrator works with.
template <class F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-10, double* error = nullptr) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  double err = 0.0;
  double l1 = 0.0;
  double value = GK::integrate(f, a, b, 0, 0.0, &err, &l1);
  if (err > abs_tol && l1 > 0.0) {
    const double rel = std::max(0.1 * abs_tol / l1, 4.0 * std::numeric_limits<double>::epsilon());
    value = GK::integrate(f, a, b, 25, rel, &err, &l1);
  }
  if (error) *error = err;
  return value;
}

inline double normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

inline double normal_cdf(double x, double mean, double var) {
  if (x == std::numeric_limits<double>::infinity()) return 1.0;
  if (x == -std::numeric_limits<double>::infinity()) return 0.0;
  return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * var));
}

/// P[lo < Y <= hi] for Y ~ N(mean, var), taken from the nearer tail so the
/// difference keeps its relative accuracy far from the mean.
inline double normal_mass(double lo, double hi, double mean, double var) {
  if (!(hi > lo)) return 0.0;
  const double s = std::sqrt(2.0 * var);
  if (lo >= mean) return 0.5 * (std::erfc((lo - mean) / s) - std::erfc((hi - mean) / s));
  if (hi <= mean) return 0.5 * (std::erfc((mean - hi) / s) - std::erfc((mean - lo) / s));
  return 1.0 - 0.5 * (std::erfc((mean - lo) / s) + std::erfc((hi - mean) / s));
}

}  // namespace rspace::quad
