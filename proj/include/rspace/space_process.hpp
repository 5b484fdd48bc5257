#pragma once

// Space processes: M independent lattice random walks (Model A) or Wiener
// processes (Model B), their exact laws, samplers, and the binning that turns
// Model B into a discrete process of the same shape as Model A.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "rspace/errors.hpp"
#include "rspace/prob.hpp"
#include "rspace/quadrature.hpp"

namespace rspace {

inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

/// Parameters of M independent lattice walks. `p_left[i]` is P[step = -l]
/// for walker i; the right-step probability is 1 - p_left[i].
struct RandomWalkParams {
  std::vector<double> p_left;
  Label spacing = 1;
  std::vector<FiniteDistribution> initial;  // empty -> point mass at 0 for all

  [[nodiscard]] std::size_t walkers() const { return p_left.size(); }
  [[nodiscard]] double p_right(std::size_t i) const { return 1.0 - p_left.at(i); }

  [[nodiscard]] const FiniteDistribution& initial_law(std::size_t i) const {
    static const FiniteDistribution origin = FiniteDistribution::point_mass(0);
    return initial.empty() ? origin : initial.at(i);
  }

  void validate() const {
    require(walkers() >= 2, "walk params: M must be at least 2 (origin plus one point)");
    for (std::size_t i = 0; i < p_left.size(); ++i)
      require(p_left[i] > 0.0 && p_left[i] < 1.0,
              "walk params: p[" + std::to_string(i) + "] must lie strictly inside (0,1)");
    require(spacing > 0, "walk params: lattice spacing must be positive");
    require(initial.empty() || initial.size() == walkers(), "walk params: need one initial law per walker");
  }

  /// Uniform p for every walker, point-mass initial laws at 0.
  static RandomWalkParams iid(std::size_t m, double p) {
    RandomWalkParams r;
    r.p_left.assign(m, p);
    return r;
  }
};

/// Walker positions at one time step; overlaps are allowed.
struct SpaceConfiguration {
  std::vector<Label> positions;
  std::int64_t time = 0;

  friend auto operator<=>(const SpaceConfiguration&, const SpaceConfiguration&) = default;
};

namespace detail {
inline double binomial_pmf(std::int64_t n, std::int64_t k, double p) {
  if (k < 0 || k > n) return 0.0;
  const double lg = std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
                    std::lgamma(static_cast<double>(n - k) + 1.0);
  const double lk = k == 0 ? 0.0 : static_cast<double>(k) * std::log(p);
  const double lr = n - k == 0 ? 0.0 : static_cast<double>(n - k) * std::log1p(-p);
  return std::exp(lg + lk + lr);
}

/// P[S_{t+steps} = to | S_t = from] for one walker.
inline double walk_transition(Label from, Label to, std::int64_t steps, double p_left, Label l) {
  const Label disp = to - from;
  if (disp % l != 0) return 0.0;
  const std::int64_t d = disp / l;
  if ((d + steps) % 2 != 0 || d > steps || d < -steps) return 0.0;
  const std::int64_t n_left = (steps - d) / 2;
  return binomial_pmf(steps, n_left, p_left);
}
}  // namespace detail

/// Law of walker i after N steps, mixed over its initial law.
inline FiniteDistribution walk_marginal(const RandomWalkParams& params, std::size_t i, std::int64_t n) {
  params.validate();
  require(n >= 0, "walk_marginal: N must be non-negative");
  require(i < params.walkers(), "walk_marginal: walker index out of range");
  const double p = params.p_left[i];
  const Label l = params.spacing;
  const FiniteDistribution& pi = params.initial_law(i);
  std::map<Label, double> m;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    if (pi.probs()[k] == 0.0) continue;
    for (std::int64_t left = 0; left <= n; ++left) {
      const Label d = pi.support()[k] + (n - 2 * left) * l;
      m[d] += pi.probs()[k] * detail::binomial_pmf(n, left, p);
    }
  }
  return FiniteDistribution::normalized(m);
}

/// Probability of a full configuration at step N (walkers independent).
inline double config_probability(const RandomWalkParams& params, const SpaceConfiguration& config, std::int64_t n) {
  require(config.positions.size() == params.walkers(), "config_probability: configuration length != M");
  double prob = 1.0;
  for (std::size_t i = 0; i < params.walkers(); ++i) prob *= walk_marginal(params, i, n).prob(config.positions[i]);
  return prob;
}

/// Two-time joint probability P[S_N = config_n, S_T = config_t]; each walker is
/// a Markov chain and walkers are independent.
inline double joint_config_probability(const RandomWalkParams& params, const SpaceConfiguration& config_n,
                                       std::int64_t n, const SpaceConfiguration& config_t, std::int64_t t) {
  require(n <= t, "joint_config_probability: need N <= T");
  require(config_n.positions.size() == params.walkers() && config_t.positions.size() == params.walkers(),
          "joint_config_probability: configuration length != M");
  double prob = 1.0;
  for (std::size_t i = 0; i < params.walkers(); ++i) {
    const double at_n = walk_marginal(params, i, n).prob(config_n.positions[i]);
    prob *= at_n * detail::walk_transition(config_n.positions[i], config_t.positions[i], t - n, params.p_left[i],
                                           params.spacing);
  }
  return prob;
}

struct WeightedConfiguration {
  SpaceConfiguration config;
  double probability = 0.0;
};

/// Cartesian product of per-walker laws with positive mass. Order is
/// lexicographic in the position tuple.
inline std::vector<WeightedConfiguration> enumerate_product(const std::vector<FiniteDistribution>& laws,
                                                            std::int64_t time,
                                                            std::size_t cap = kDefaultEnumerationCap) {
  std::vector<std::vector<Label>> supports;
  double count = 1.0;
  for (const auto& law : laws) {
    supports.push_back(law.positive_support());
    count *= static_cast<double>(supports.back().size());
  }
  if (count > static_cast<double>(cap))
    throw SizeError("enumeration of " + std::to_string(static_cast<long long>(count)) +
                    " configurations exceeds cap " + std::to_string(cap));
  std::vector<WeightedConfiguration> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<std::size_t> idx(laws.size(), 0);
  while (true) {
    WeightedConfiguration w;
    w.config.time = time;
    w.probability = 1.0;
    for (std::size_t i = 0; i < laws.size(); ++i) {
      const Label pos = supports[i][idx[i]];
      w.config.positions.push_back(pos);
      w.probability *= laws[i].prob(pos);
    }
    out.push_back(std::move(w));
    std::size_t k = laws.size();
    while (k > 0) {
      --k;
      if (++idx[k] < supports[k].size()) break;
      idx[k] = 0;
      if (k == 0) return out;
    }
    if (laws.empty()) return out;
  }
}

/// Every reachable configuration at step N with its probability.
inline std::vector<WeightedConfiguration> enumerate_configurations(const RandomWalkParams& params, std::int64_t n,
                                                                   std::size_t cap = kDefaultEnumerationCap) {
  params.validate();
  std::vector<FiniteDistribution> laws;
  for (std::size_t i = 0; i < params.walkers(); ++i) laws.push_back(walk_marginal(params, i, n));
  return enumerate_product(laws, n, cap);
}

namespace detail {
inline Label draw(const FiniteDistribution& d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double x = u(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    acc += d.probs()[k];
    if (x < acc) return d.support()[k];
  }
  return d.positive_support().back();
}
}  // namespace detail

/// One realization S_0 ... S_{N_max}; walker i draws from substream i.
inline std::vector<SpaceConfiguration> sample_space_path(const RandomWalkParams& params, std::int64_t n_max,
                                                         const RngSeed& seed) {
  params.validate();
  require(n_max >= 0, "sample_space_path: N_max must be non-negative");
  const std::size_t m = params.walkers();
  std::vector<SpaceConfiguration> path(static_cast<std::size_t>(n_max + 1));
  for (std::int64_t t = 0; t <= n_max; ++t) {
    path[static_cast<std::size_t>(t)].time = t;
    path[static_cast<std::size_t>(t)].positions.resize(m);
  }
  for (std::size_t i = 0; i < m; ++i) {
    auto rng = seed.substream(i).engine();
    std::bernoulli_distribution left(params.p_left[i]);
    Label pos = detail::draw(params.initial_law(i), rng);
    path[0].positions[i] = pos;
    for (std::int64_t t = 1; t <= n_max; ++t) {
      pos += left(rng) ? -params.spacing : params.spacing;
      path[static_cast<std::size_t>(t)].positions[i] = pos;
    }
  }
  return path;
}

inline void write_paths_csv(std::ostream& os, const std::vector<SpaceConfiguration>& path) {
  const std::size_t m = path.empty() ? 0 : path.front().positions.size();
  os << "time";
  for (std::size_t i = 0; i < m; ++i) os << ",walker_" << i;
  os << '\n';
  for (const auto& c : path) {
    os << c.time;
    for (Label x : c.positions) os << ',' << x;
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Model B: Wiener space process

/// Gaussian law N(mean, var); var == 0 is a point mass.
struct GaussianLaw {
  double mean = 0.0;
  double var = 0.0;
};

struct WienerParams {
  std::vector<GaussianLaw> initial;  // law of W^{(i)} at time_grid.front()
  std::vector<double> time_grid;

  [[nodiscard]] std::size_t walkers() const { return initial.size(); }

  void validate() const {
    require(walkers() >= 2, "wiener params: M must be at least 2");
    require(!time_grid.empty(), "wiener params: empty time grid");
    for (std::size_t k = 1; k < time_grid.size(); ++k)
      require(time_grid[k] > time_grid[k - 1], "wiener params: time grid not strictly increasing");
    for (const auto& g : initial) require(g.var >= 0.0, "wiener params: negative variance");
  }

  /// Law of walker i at time t >= time_grid.front().
  [[nodiscard]] GaussianLaw law_at(std::size_t i, double t) const {
    require(t >= time_grid.front(), "wiener params: time before the initial time");
    return GaussianLaw{initial.at(i).mean, initial.at(i).var + (t - time_grid.front())};
  }
};

/// Transition density of a standard Wiener process from (y, t1) to (x, t2).
inline double wiener_transition_density(double x, double t2, double y, double t1) {
  if (!(t2 > t1)) throw ValidationError("wiener_transition_density: need t2 > t1");
  return quad::normal_pdf(x, y, t2 - t1);
}

/// paths[i][k] is walker i at time_grid[k]; exact Gaussian increments.
inline std::vector<std::vector<double>> sample_wiener_grid(const WienerParams& params, const RngSeed& seed) {
  params.validate();
  std::vector<std::vector<double>> paths(params.walkers(), std::vector<double>(params.time_grid.size()));
  for (std::size_t i = 0; i < params.walkers(); ++i) {
    auto rng = seed.substream(i).engine();
    std::normal_distribution<double> z(0.0, 1.0);
    const auto& g = params.initial[i];
    double w = g.var > 0.0 ? g.mean + std::sqrt(g.var) * z(rng) : g.mean;
    paths[i][0] = w;
    for (std::size_t k = 1; k < params.time_grid.size(); ++k) {
      w += std::sqrt(params.time_grid[k] - params.time_grid[k - 1]) * z(rng);
      paths[i][k] = w;
    }
  }
  return paths;
}

inline void write_wiener_csv(std::ostream& os, const std::vector<double>& grid,
                             const std::vector<std::vector<double>>& paths) {
  os << "time";
  for (std::size_t i = 0; i < paths.size(); ++i) os << ",walker_" << i;
  os << '\n';
  os.precision(12);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    os << grid[k];
    for (const auto& p : paths) os << ',' << p[k];
    os << '\n';
  }
}

/// Equal-width bins [e_k, e_{k+1}) covering a bounded window.
class Partition {
 public:
  explicit Partition(std::vector<double> edges) : edges_(std::move(edges)) {
    require(edges_.size() >= 2, "partition: need at least one bin");
    for (std::size_t k = 1; k < edges_.size(); ++k) {
      require(std::isfinite(edges_[k - 1]) && std::isfinite(edges_[k]), "partition: edges must be finite");
      require(edges_[k] > edges_[k - 1], "partition: edges not strictly increasing");
    }
    const double w = edges_[1] - edges_[0];
    for (std::size_t k = 2; k < edges_.size(); ++k)
      require(std::abs((edges_[k] - edges_[k - 1]) - w) <= 1e-12 * std::max(1.0, std::abs(w)),
              "partition: bins must share one width");
  }

  static Partition uniform(double lo, double hi, std::size_t bins) {
    require(bins >= 1 && hi > lo, "partition: bad window");
    std::vector<double> e(bins + 1);
    for (std::size_t k = 0; k <= bins; ++k)
      e[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
    e.back() = hi;
    return Partition(std::move(e));
  }

  [[nodiscard]] std::size_t bins() const { return edges_.size() - 1; }
  [[nodiscard]] const std::vector<double>& edges() const { return edges_; }
  [[nodiscard]] double lo(std::size_t k) const { return edges_.at(k); }
  [[nodiscard]] double hi(std::size_t k) const { return edges_.at(k + 1); }
  [[nodiscard]] double width() const { return edges_[1] - edges_[0]; }

  /// Bin containing x, or -1 outside the window.
  [[nodiscard]] Label bin_of(double x) const {
    if (x < edges_.front() || x >= edges_.back()) return -1;
    auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
    return static_cast<Label>(it - edges_.begin()) - 1;
  }

 private:
  std::vector<double> edges_;
};

inline constexpr double kEmptyBinMass = 1e-14;

struct BinTransition {
  TransitionKernel kernel;
  std::vector<double> source_mass;  // mass of each kept source bin at t1
  std::vector<double> window_mass;  // row normalizer: mass starting in bin j and landing in the window
};

/// P[bin at t2 = k | bin at t1 = j] for one Wiener walker whose law at t1 is
/// `at_t1`. Rows are conditioned on landing inside the window. Source bins
/// with negligible mass raise unless `drop_empty` is set.
inline BinTransition bin_transition_matrix(const Partition& part, double t1, double t2, const GaussianLaw& at_t1,
                                           bool drop_empty = false, double abs_tol = 1e-9) {
  require(t2 > t1, "bin_transition_matrix: need t2 > t1");
  require(at_t1.var > 0.0, "bin_transition_matrix: source law must have positive variance");
  const double tau = t2 - t1;
  const std::size_t nb = part.bins();
  std::vector<Label> from, to;
  for (std::size_t k = 0; k < nb; ++k) to.push_back(static_cast<Label>(k));
  std::vector<std::vector<double>> rows;
  BinTransition out;
  for (std::size_t j = 0; j < nb; ++j) {
    const double src = quad::normal_mass(part.lo(j), part.hi(j), at_t1.mean, at_t1.var);
    std::vector<double> row(nb);
    double total = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      auto f = [&](double y) {
        return quad::normal_pdf(y, at_t1.mean, at_t1.var) *
               quad::normal_mass(part.lo(k), part.hi(k), y, tau);
      };
      row[k] = quad::integrate(f, part.lo(j), part.hi(j), abs_tol * 1e-2);
      total += row[k];
    }
    if (src < kEmptyBinMass || total < kEmptyBinMass) {
      if (drop_empty) continue;
      throw NullEventError("source bin " + std::to_string(j) + " has no mass at t1");
    }
    for (double& v : row) v /= total;
    double s = 0.0;
    for (double v : row) s += v;
    for (double& v : row) v /= s;
    from.push_back(static_cast<Label>(j));
    rows.push_back(std::move(row));
    out.source_mass.push_back(src);
    out.window_mass.push_back(total);
  }
  require(!from.empty(), "bin_transition_matrix: every source bin is empty");
  out.kernel = TransitionKernel(std::move(from), std::move(to), std::move(rows));
  return out;
}

// ---------------------------------------------------------------------------
// Discrete walker view shared by Model A and binned Model B

/// One walker seen at a fixed time: its current law and its one-step kernel.
struct DiscreteWalker {
  FiniteDistribution marginal;
  TransitionKernel step;
};

using DiscreteSpace = std::vector<DiscreteWalker>;

/// Model A at step N. Step kernels are tabulated on a band wide enough to
/// cover every position any walker can occupy, plus two lattice steps.
inline DiscreteSpace discrete_walkers(const RandomWalkParams& params, std::int64_t n) {
  params.validate();
  DiscreteSpace out;
  Label lo = std::numeric_limits<Label>::max(), hi = std::numeric_limits<Label>::min();
  std::vector<FiniteDistribution> laws;
  for (std::size_t i = 0; i < params.walkers(); ++i) {
    laws.push_back(walk_marginal(params, i, n));
    lo = std::min(lo, laws.back().support().front());
    hi = std::max(hi, laws.back().support().back());
  }
  const Label l = params.spacing;
  std::vector<Label> from, to;
  for (Label x = lo - 2 * l; x <= hi + 2 * l; ++x) from.push_back(x);
  for (Label x = lo - 3 * l; x <= hi + 3 * l; ++x) to.push_back(x);
  for (std::size_t i = 0; i < params.walkers(); ++i) {
    std::vector<std::vector<double>> rows(from.size(), std::vector<double>(to.size(), 0.0));
    for (std::size_t r = 0; r < from.size(); ++r) {
      rows[r][static_cast<std::size_t>(from[r] - l - to.front())] = params.p_left[i];
      rows[r][static_cast<std::size_t>(from[r] + l - to.front())] = params.p_right(i);
    }
    out.push_back(DiscreteWalker{laws[i], TransitionKernel(from, to, std::move(rows))});
  }
  return out;
}

/// Model B binned on `part` between t1 and t2: bin-index walkers whose law at
/// t1 is the window-restricted bin mass.
inline DiscreteSpace binned_walkers(const WienerParams& params, const Partition& part, double t1, double t2) {
  params.validate();
  DiscreteSpace out;
  for (std::size_t i = 0; i < params.walkers(); ++i) {
    const GaussianLaw g = params.law_at(i, t1);
    BinTransition bt = bin_transition_matrix(part, t1, t2, g, /*drop_empty=*/true);
    std::map<Label, double> m;
    for (std::size_t k = 0; k < bt.kernel.from_support().size(); ++k)
      m[bt.kernel.from_support()[k]] = bt.source_mass[k];
    out.push_back(DiscreteWalker{FiniteDistribution::normalized(m), std::move(bt.kernel)});
  }
  return out;
}

/// Configurations of a discrete space with their probabilities.
inline std::vector<WeightedConfiguration> enumerate_configurations(const DiscreteSpace& space, std::int64_t time = 0,
                                                                   std::size_t cap = kDefaultEnumerationCap) {
  std::vector<FiniteDistribution> laws;
  for (const auto& w : space) laws.push_back(w.marginal);
  return enumerate_product(laws, time, cap);
}

}  // namespace rspace
