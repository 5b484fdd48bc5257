#pragma once

// The particle living on a space realization: selection process, position
// and velocity variables, exact joint laws over (X_N, X_{N+1}, S_N).
//
// Coordinates. Both X_N and X_{N+1} are measured from the origin walker's
// position at step N, so V_N = X_{N+1} - X_N = s_{I_{N+1}}(N+1) - s_{I_N}(N)
// and the origin's own step never enters a velocity.

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "rspace/errors.hpp"
#include "rspace/prob.hpp"
#include "rspace/space_process.hpp"

namespace rspace {

/// Row-major M x M matrix of P[I_N = j, I_{N+1} = i] stored as pair[j][i].
using PairLaw = std::vector<std::vector<double>>;

/// Law of the selection process I_N. Walker indices are 0-based.
struct SelectionKernel {
  enum class Mode { iid_uniform, iid_weighted, markov, space_dependent };

  Mode mode = Mode::iid_uniform;
  std::vector<double> weights;               // iid_weighted; markov: law of I_0
  std::vector<std::vector<double>> matrix;   // markov: P[I_{N+1} = i | I_N = j] = matrix[j][i]
  std::function<PairLaw(const SpaceConfiguration&)> by_config;  // space_dependent

  static SelectionKernel uniform() { return {}; }
  static SelectionKernel weighted(std::vector<double> w) {
    SelectionKernel k;
    k.mode = Mode::iid_weighted;
    k.weights = std::move(w);
    return k;
  }
  static SelectionKernel markov(std::vector<double> initial, std::vector<std::vector<double>> rows) {
    SelectionKernel k;
    k.mode = Mode::markov;
    k.weights = std::move(initial);
    k.matrix = std::move(rows);
    return k;
  }
  /// Index law that may look at the configuration at step N.
  static SelectionKernel space_dependent(std::function<PairLaw(const SpaceConfiguration&)> f) {
    SelectionKernel k;
    k.mode = Mode::space_dependent;
    k.by_config = std::move(f);
    return k;
  }

  [[nodiscard]] std::string name() const {
    switch (mode) {
      case Mode::iid_uniform: return "iid_uniform";
      case Mode::iid_weighted: return "iid_weighted";
      case Mode::markov: return "markov";
      case Mode::space_dependent: return "space_dependent";
    }
    return "?";
  }

  /// Joint law of (I_N, I_{N+1}) for M walkers, given the configuration at N.
  [[nodiscard]] PairLaw pair_law(std::size_t m, std::int64_t n, const SpaceConfiguration& config) const {
    auto check_dist = [&](const std::vector<double>& w, const std::string& what) {
      require(w.size() == m, "selection: " + what + " must have M entries");
      double s = 0.0;
      for (double x : w) {
        require(std::isfinite(x) && x >= 0.0, "selection: negative " + what);
        s += x;
      }
      require(std::abs(s - 1.0) <= 1e-12, "selection: " + what + " does not sum to 1");
    };
    PairLaw out(m, std::vector<double>(m, 0.0));
    switch (mode) {
      case Mode::iid_uniform:
        for (auto& row : out) row.assign(m, 1.0 / static_cast<double>(m * m));
        return out;
      case Mode::iid_weighted:
        check_dist(weights, "weights");
        for (std::size_t j = 0; j < m; ++j)
          for (std::size_t i = 0; i < m; ++i) out[j][i] = weights[j] * weights[i];
        return out;
      case Mode::markov: {
        check_dist(weights, "initial law");
        require(matrix.size() == m, "selection: markov kernel must be M x M");
        for (const auto& r : matrix) check_dist(r, "markov row");
        std::vector<double> law = weights;
        for (std::int64_t t = 0; t < n; ++t) {
          std::vector<double> next(m, 0.0);
          for (std::size_t j = 0; j < m; ++j)
            for (std::size_t i = 0; i < m; ++i) next[i] += law[j] * matrix[j][i];
          law = next;
        }
        for (std::size_t j = 0; j < m; ++j)
          for (std::size_t i = 0; i < m; ++i) out[j][i] = law[j] * matrix[j][i];
        return out;
      }
      case Mode::space_dependent: {
        require(static_cast<bool>(by_config), "selection: space_dependent mode without a law");
        out = by_config(config);
        require(out.size() == m, "selection: pair law must be M x M");
        double s = 0.0;
        for (const auto& r : out) {
          require(r.size() == m, "selection: pair law must be M x M");
          for (double x : r) {
            require(std::isfinite(x) && x >= 0.0, "selection: negative pair mass");
            s += x;
          }
        }
        require(std::abs(s - 1.0) <= 1e-12, "selection: pair law does not sum to 1");
        return out;
      }
    }
    return out;
  }
};

inline Label position_value(const SpaceConfiguration& config, std::size_t selected, std::size_t origin) {
  require(selected < config.positions.size() && origin < config.positions.size(),
          "position_value: walker index out of range");
  return config.positions[selected] - config.positions[origin];
}

inline constexpr const char* kAxisX = "X_N";
inline constexpr const char* kAxisX1 = "X_N1";
inline constexpr const char* kAxisS = "S";

/// Exact joint law over (X_N, X_{N+1}, S_N). The S axis holds an index into
/// `configs`; `config_probs[s]` is P[S_N = configs[s]].
struct ParticleLaw {
  JointLaw joint;
  std::vector<SpaceConfiguration> configs;
  std::vector<double> config_probs;
  std::size_t origin = 0;

  [[nodiscard]] std::size_t index_of(const SpaceConfiguration& s) const {
    for (std::size_t k = 0; k < configs.size(); ++k)
      if (configs[k].positions == s.positions) return k;
    throw NullEventError("configuration not attainable");
  }

  [[nodiscard]] FiniteDistribution position_law() const { return joint.marginal(kAxisX); }

  [[nodiscard]] FiniteDistribution velocity_law() const {
    const std::size_t x = joint.axis(kAxisX), x1 = joint.axis(kAxisX1);
    return joint.marginal([x, x1](const Outcome& o) { return o[x1] - o[x]; });
  }
};

/// Enumerates configurations, index pairs and the selected walker's step.
inline ParticleLaw build_joint_law(const DiscreteSpace& space, const SelectionKernel& selection, std::size_t origin,
                                   std::int64_t n, std::size_t cap = kDefaultEnumerationCap) {
  const std::size_t m = space.size();
  require(m >= 2, "build_joint_law: M must be at least 2");
  require(origin < m, "build_joint_law: origin index out of range");
  ParticleLaw law;
  law.origin = origin;
  std::map<Outcome, double> cells;
  auto configs = enumerate_configurations(space, n, cap);
  for (std::size_t s = 0; s < configs.size(); ++s) {
    const auto& cfg = configs[s].config;
    const double ps = configs[s].probability;
    law.configs.push_back(cfg);
    law.config_probs.push_back(ps);
    const PairLaw pair = selection.pair_law(m, n, cfg);
    const Label o = cfg.positions[origin];
    for (std::size_t i = 0; i < m; ++i) {
      const auto& k = space[i].step;
      const FiniteDistribution row = k.row(cfg.positions[i]);
      for (std::size_t j = 0; j < m; ++j) {
        const double pij = pair[j][i];
        if (pij == 0.0) continue;
        const Label x = cfg.positions[j] - o;
        for (std::size_t t = 0; t < row.size(); ++t) {
          if (row.probs()[t] == 0.0) continue;
          cells[Outcome{x, row.support()[t] - o, static_cast<Label>(s)}] += ps * pij * row.probs()[t];
        }
      }
    }
  }
  law.joint = JointLaw({kAxisX, kAxisX1, kAxisS}, std::move(cells));
  return law;
}

inline ParticleLaw build_joint_law(const RandomWalkParams& params, const SelectionKernel& selection,
                                   std::size_t origin, std::int64_t n, std::size_t cap = kDefaultEnumerationCap) {
  return build_joint_law(discrete_walkers(params, n), selection, origin, n, cap);
}

/// alpha(b | a) = P[X_{N+1} = b | X_N = a] over positions with positive mass.
inline TransitionKernel alpha_from_joint(const JointLaw& joint) {
  const std::size_t x = joint.axis(kAxisX), x1 = joint.axis(kAxisX1);
  const std::vector<Label> from = joint.labels(kAxisX);
  const std::vector<Label> to = joint.labels(kAxisX1);
  std::map<Label, std::map<Label, double>> acc;
  for (const auto& [o, p] : joint.cells()) acc[o[x]][o[x1]] += p;
  std::vector<std::vector<double>> rows;
  for (Label a : from) {
    double total = 0.0;
    for (const auto& kv : acc[a]) total += kv.second;
    std::vector<double> row(to.size(), 0.0);
    for (std::size_t k = 0; k < to.size(); ++k) {
      auto it = acc[a].find(to[k]);
      if (it != acc[a].end()) row[k] = it->second / total;
    }
    double s = 0.0;
    for (double v : row) s += v;
    for (double& v : row) v /= s;
    rows.push_back(std::move(row));
  }
  return TransitionKernel(from, to, std::move(rows));
}

/// P[V = c | X = a] = alpha(a + c | a), relabelled by c = b - a.
inline FiniteDistribution velocity_given_position(const TransitionKernel& alpha, Label a) {
  const FiniteDistribution row = alpha.row(a);
  std::map<Label, double> m;
  for (std::size_t k = 0; k < row.size(); ++k) m[row.support()[k] - a] += row.probs()[k];
  return FiniteDistribution::from_map(m);
}

/// The kernel a -> c = b - a, tabulated over the union of velocity labels.
inline TransitionKernel velocity_kernel(const TransitionKernel& alpha) {
  std::vector<Label> cs;
  for (Label a : alpha.from_support())
    for (Label b : alpha.to_support()) cs.push_back(b - a);
  std::sort(cs.begin(), cs.end());
  cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
  std::vector<std::vector<double>> rows;
  for (Label a : alpha.from_support()) {
    std::vector<double> row(cs.size(), 0.0);
    for (std::size_t k = 0; k < cs.size(); ++k) row[k] = alpha(a, a + cs[k]);
    rows.push_back(std::move(row));
  }
  return TransitionKernel(alpha.from_support(), std::move(cs), std::move(rows));
}

struct SymmetryReport {
  double max_gap = 0.0;
  Label worst_a = 0;
  Label worst_c = 0;
  bool pass = true;
};

/// Compares P[V=c | X=a] with P[X=a | V=c] for every pair with positive mass.
inline SymmetryReport check_alpha_symmetry(const TransitionKernel& alpha, const FiniteDistribution& px,
                                           const FiniteDistribution& pv, double tol = 1e-9) {
  SymmetryReport r;
  for (Label a : px.positive_support()) {
    for (Label c : pv.positive_support()) {
      const double fwd = alpha(a, a + c);
      const double rev = fwd * px.prob(a) / pv.prob(c);
      const double gap = std::abs(fwd - rev);
      if (gap > r.max_gap) {
        r.max_gap = gap;
        r.worst_a = a;
        r.worst_c = c;
      }
    }
  }
  r.pass = r.max_gap <= tol;
  return r;
}

/// One sampled particle trajectory. positions[t] = s_{I_t}(t) - s_o(t);
/// velocities[t] = s_{I_{t+1}}(t+1) - s_{I_t}(t). The two are tied by
/// velocities[t] = positions[t+1] - positions[t] + origin_steps[t].
struct ParticleSample {
  std::vector<Label> positions;
  std::vector<Label> velocities;
  std::vector<Label> origin_steps;
  std::vector<std::size_t> indices;
  std::size_t origin_index = 0;
};

namespace detail {
inline std::size_t draw_index(const std::vector<double>& w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double x = u(rng);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] <= 0.0) continue;
    acc += w[k];
    last = k;
    if (x < acc) return k;
  }
  return last;
}
}  // namespace detail

/// Samples I_0..I_{N_max} and reads the particle off `path`. Markov mode
/// starts from its initial law at t = 0; space-dependent mode draws each
/// consecutive index from the conditional of its pair law.
inline ParticleSample sample_particle_path(const std::vector<SpaceConfiguration>& path,
                                           const SelectionKernel& selection, std::size_t origin,
                                           const RngSeed& seed) {
  require(!path.empty(), "sample_particle_path: empty space path");
  const std::size_t m = path.front().positions.size();
  require(origin < m, "sample_particle_path: origin index out of range");
  auto rng = seed.engine();
  ParticleSample out;
  out.origin_index = origin;
  std::vector<double> uniform(m, 1.0 / static_cast<double>(m));
  for (std::size_t t = 0; t < path.size(); ++t) {
    std::size_t idx = 0;
    switch (selection.mode) {
      case SelectionKernel::Mode::iid_uniform: idx = detail::draw_index(uniform, rng); break;
      case SelectionKernel::Mode::iid_weighted: idx = detail::draw_index(selection.weights, rng); break;
      case SelectionKernel::Mode::markov:
        idx = t == 0 ? detail::draw_index(selection.weights, rng)
                     : detail::draw_index(selection.matrix.at(out.indices.back()), rng);
        break;
      case SelectionKernel::Mode::space_dependent: {
        if (t == 0) {
          const PairLaw pl = selection.pair_law(m, 0, path[0]);
          std::vector<double> w(m, 0.0);
          for (std::size_t j = 0; j < m; ++j)
            for (std::size_t i = 0; i < m; ++i) w[j] += pl[j][i];
          idx = detail::draw_index(w, rng);
        } else {
          const PairLaw pl = selection.pair_law(m, static_cast<std::int64_t>(t - 1), path[t - 1]);
          const auto& row = pl[out.indices.back()];
          double s = 0.0;
          for (double x : row) s += x;
          std::vector<double> w = row;
          if (s > 0.0)
            for (double& x : w) x /= s;
          else
            w = uniform;
          idx = detail::draw_index(w, rng);
        }
        break;
      }
    }
    out.indices.push_back(idx);
    out.positions.push_back(position_value(path[t], idx, origin));
  }
  for (std::size_t t = 0; t + 1 < path.size(); ++t) {
    out.velocities.push_back(path[t + 1].positions[out.indices[t + 1]] - path[t].positions[out.indices[t]]);
    out.origin_steps.push_back(path[t + 1].positions[origin] - path[t].positions[origin]);
  }
  return out;
}

inline void write_particle_csv(std::ostream& os, const ParticleSample& s) {
  os << "time,index,position,velocity\n";
  for (std::size_t t = 0; t < s.positions.size(); ++t) {
    os << t << ',' << s.indices[t] << ',' << s.positions[t] << ',';
    if (t < s.velocities.size()) os << s.velocities[t];
    os << '\n';
  }
}

}  // namespace rspace
