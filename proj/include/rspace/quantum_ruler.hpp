#pragma once

// Spin-flip statistics of a ruler made of N independent Gaussian particles
// and their dense limit.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <vector>

#include "rspace/errors.hpp"
#include "rspace/prob.hpp"
#include "rspace/quadrature.hpp"

namespace rspace::ruler {

/// |phi(y)|^2 = N(y; mean, width^2).
struct GaussianWavefunction {
  double mean = 0.0;
  double width = 1.0;

  [[nodiscard]] double density(double y) const { return quad::normal_pdf(y, mean, width * width); }
};

/// Particle i of the ruler has |g(y - X_i)|^2 = N(y; X_i, sigma^2).
struct RulerSpec {
  std::vector<double> centers;
  double sigma = 1.0;
  double lo = -10.0;
  double hi = 10.0;

  void validate() const {
    require(!centers.empty(), "ruler: need at least one particle");
    require(sigma > 0.0, "ruler: sigma must be positive");
    require(hi > lo, "ruler: empty window");
    for (double c : centers) require(c >= lo && c <= hi, "ruler: center outside the window");
  }

  /// n equally spaced centers across [lo, hi], cell midpoints.
  static RulerSpec uniform(std::size_t n, double sigma, double lo, double hi) {
    RulerSpec r;
    r.sigma = sigma;
    r.lo = lo;
    r.hi = hi;
    const double h = (hi - lo) / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) r.centers.push_back(lo + (static_cast<double>(k) + 0.5) * h);
    return r;
  }
};

/// Overlap of an arbitrary ruler-particle density (supported on [a, b])
/// with the particle's position density.
inline double flip_probability(const std::function<double(double)>& ruler_density, double a, double b,
                               const GaussianWavefunction& phi, double abs_tol = 1e-10) {
  require(phi.width > 0.0, "ruler: wavefunction width must be positive");
  return quad::integrate([&](double y) { return ruler_density(y) * phi.density(y); }, a, b, abs_tol);
}

inline double flip_probability(const RulerSpec& ruler, const GaussianWavefunction& phi, std::size_t i,
                               double abs_tol = 1e-10) {
  ruler.validate();
  require(i < ruler.centers.size(), "ruler: particle index out of range");
  const double xi = ruler.centers[i], s2 = ruler.sigma * ruler.sigma;
  // The ruler factor is below e^{-800} of its peak beyond 40 sigma.
  const double a = xi - 40.0 * ruler.sigma, b = xi + 40.0 * ruler.sigma;
  auto g = [&](double y) { return quad::normal_pdf(y, xi, s2); };
  return flip_probability(g, a, xi, phi, abs_tol / 2) + flip_probability(g, xi, b, phi, abs_tol / 2);
}

struct FlipDistribution {
  std::vector<double> raw;
  double raw_sum = 0.0;
  FiniteDistribution normalized;  // labels 0..N-1
};

inline FlipDistribution flip_distribution(const RulerSpec& ruler, const GaussianWavefunction& phi) {
  FlipDistribution out;
  std::map<Label, double> m;
  for (std::size_t i = 0; i < ruler.centers.size(); ++i) {
    out.raw.push_back(flip_probability(ruler, phi, i));
    out.raw_sum += out.raw.back();
    m[static_cast<Label>(i)] = out.raw.back();
  }
  out.normalized = FiniteDistribution::normalized(m);
  return out;
}

struct DenseLimitRow {
  std::size_t n = 0;
  double sigma = 0.0;
  double max_rel_error = 0.0;
  double mean_rel_error = 0.0;
  double center_rel_error = 0.0;  // at the center closest to phi.mean
};

/// Relative error of each flip probability against |phi(X_i)|^2 for every
/// (N, sigma) pair, centers spread uniformly over [lo, hi].
inline std::vector<DenseLimitRow> dense_limit_study(const std::vector<std::pair<std::size_t, double>>& grid,
                                                    const GaussianWavefunction& phi, double lo, double hi) {
  std::vector<DenseLimitRow> rows;
  for (const auto& [n, sigma] : grid) {
    const RulerSpec r = RulerSpec::uniform(n, sigma, lo, hi);
    DenseLimitRow row;
    row.n = n;
    row.sigma = sigma;
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double exact = phi.density(r.centers[i]);
      const double err = std::abs(flip_probability(r, phi, i) - exact) / exact;
      row.max_rel_error = std::max(row.max_rel_error, err);
      row.mean_rel_error += err / static_cast<double>(n);
      if (std::abs(r.centers[i] - phi.mean) < best_gap) {
        best_gap = std::abs(r.centers[i] - phi.mean);
        row.center_rel_error = err;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

inline void write_dense_limit_csv(std::ostream& os, const std::vector<DenseLimitRow>& rows) {
  os << "N,sigma,max_error,mean_error\n";
  os.precision(12);
  for (const auto& r : rows) os << r.n << ',' << r.sigma << ',' << r.max_rel_error << ',' << r.mean_rel_error << '\n';
}

}  // namespace rspace::ruler
