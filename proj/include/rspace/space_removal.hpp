#pragma once

// Removal of the space process: conditioning the particle law on one
// configuration, the correction term delta, and the single-space check.

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "rspace/errors.hpp"
#include "rspace/particle_process.hpp"
#include "rspace/prob.hpp"

namespace rspace {

/// Forward kernel a -> c and reverse kernel c -> a of one (X, V) law.
struct BayesPair {
  TransitionKernel forward;  // P[V = c | X = a]
  TransitionKernel reverse;  // P[X = a | V = c]
};

namespace detail {
/// Builds both conditionals from a table of P[X = a, V = c].
inline BayesPair pair_from_table(const std::map<std::pair<Label, Label>, double>& xv) {
  std::map<Label, std::map<Label, double>> fwd, rev;
  for (const auto& [k, p] : xv) {
    if (p <= 0.0) continue;
    fwd[k.first][k.second] += p;
    rev[k.second][k.first] += p;
  }
  auto to_kernel = [](const std::map<Label, std::map<Label, double>>& m) {
    std::vector<Label> from, to;
    for (const auto& [a, row] : m) {
      from.push_back(a);
      for (const auto& kv : row) to.push_back(kv.first);
    }
    std::sort(to.begin(), to.end());
    to.erase(std::unique(to.begin(), to.end()), to.end());
    std::vector<std::vector<double>> rows;
    for (const auto& [a, row] : m) {
      double total = 0.0;
      for (const auto& kv : row) total += kv.second;
      std::vector<double> r(to.size(), 0.0);
      for (const auto& [b, p] : row)
        r[static_cast<std::size_t>(std::lower_bound(to.begin(), to.end(), b) - to.begin())] = p / total;
      double s = 0.0;
      for (double v : r) s += v;
      for (double& v : r) v /= s;
      rows.push_back(std::move(r));
    }
    return TransitionKernel(std::move(from), std::move(to), std::move(rows));
  };
  return BayesPair{to_kernel(fwd), to_kernel(rev)};
}

inline std::map<std::pair<Label, Label>, double> xv_table(const ParticleLaw& law, long s_index) {
  const std::size_t x = law.joint.axis(kAxisX), x1 = law.joint.axis(kAxisX1), s = law.joint.axis(kAxisS);
  std::map<std::pair<Label, Label>, double> t;
  for (const auto& [o, p] : law.joint.cells())
    if (s_index < 0 || o[s] == s_index) t[{o[x], o[x1] - o[x]}] += p;
  return t;
}
}  // namespace detail

/// Conditionals of the unconditional law of (X_N, V_N).
inline BayesPair unconditional_pair(const ParticleLaw& law) { return detail::pair_from_table(detail::xv_table(law, -1)); }

/// The particle law after conditioning on S_N = configuration.
struct ConditionalEnsemble {
  SpaceConfiguration configuration;
  std::size_t config_index = 0;
  double config_probability = 0.0;
  FiniteDistribution p_x;
  FiniteDistribution p_v;
  TransitionKernel alpha_cond;          // alpha_S: a -> c
  TransitionKernel alpha_cond_reverse;  // c -> a under the same conditional law
};

inline ConditionalEnsemble condition_on_configuration(const ParticleLaw& law, const SpaceConfiguration& config) {
  const std::size_t idx = law.index_of(config);
  const double ps = law.config_probs[idx];
  if (!(ps > 0.0)) throw NullEventError("configuration has zero probability");
  auto table = detail::xv_table(law, static_cast<long>(idx));
  std::map<Label, double> mx, mv;
  for (auto& [k, p] : table) {
    p /= ps;
    mx[k.first] += p;
    mv[k.second] += p;
  }
  BayesPair bp = detail::pair_from_table(table);
  return ConditionalEnsemble{law.configs[idx], idx,
                             ps,                            FiniteDistribution::normalized(mx),
                             FiniteDistribution::normalized(mv), std::move(bp.forward),
                             std::move(bp.reverse)};
}

inline BayesPair conditional_pair(const ConditionalEnsemble& e) { return BayesPair{e.alpha_cond, e.alpha_cond_reverse}; }

/// Largest |alpha_S(c|a) P_S[X=a] - rho_S(a|c) P_S[V=c]| of the ensemble's own kernels.
inline double bayes_symmetry_gap(const ConditionalEnsemble& e) {
  double gap = 0.0;
  for (Label a : e.p_x.positive_support())
    for (Label c : e.p_v.positive_support())
      gap = std::max(gap, std::abs(e.alpha_cond(a, c) * e.p_x.prob(a) - e.alpha_cond_reverse(c, a) * e.p_v.prob(c)));
  return gap;
}

struct DeltaReport {
  std::vector<Label> velocities;
  std::vector<double> delta;       // by the sum over the other configurations
  std::vector<double> p_v;         // P_S[V = c]
  std::vector<double> bayes_part;  // sum_a alpha(c|a) P_S[X = a]
  double sum = 0.0;
  double reconstruction_residual = 0.0;

  [[nodiscard]] double max_abs() const {
    double m = 0.0;
    for (double d : delta) m = std::max(m, std::abs(d));
    return m;
  }
  [[nodiscard]] double min_value() const { return *std::min_element(delta.begin(), delta.end()); }
};

/// delta(c) = (1/P[S]) sum_{S' != S} [ sum_a alpha(c|a) P[X=a, S'] - P[V=c, S'] ]
/// with `velocity_alpha` the unconditional kernel a -> c. The report also
/// checks P_S[V=c] = sum_a alpha(c|a) P_S[X=a] + delta(c).
inline DeltaReport delta_correction(const ParticleLaw& law, const SpaceConfiguration& config,
                                    const TransitionKernel& velocity_alpha) {
  const std::size_t idx = law.index_of(config);
  const double ps = law.config_probs[idx];
  if (!(ps > 0.0)) throw NullEventError("configuration has zero probability");
  const std::size_t ax = law.joint.axis(kAxisX), ax1 = law.joint.axis(kAxisX1), as = law.joint.axis(kAxisS);

  // P[X=a, S'] and P[V=c, S'] split into S' = S and S' != S.
  std::map<Label, double> x_in, x_out, v_in, v_out;
  for (const auto& [o, p] : law.joint.cells()) {
    const bool in = o[as] == static_cast<Label>(idx);
    (in ? x_in : x_out)[o[ax]] += p;
    (in ? v_in : v_out)[o[ax1] - o[ax]] += p;
  }
  std::vector<Label> cs = velocity_alpha.to_support();
  for (const auto& kv : v_in) cs.push_back(kv.first);
  for (const auto& kv : v_out) cs.push_back(kv.first);
  std::sort(cs.begin(), cs.end());
  cs.erase(std::unique(cs.begin(), cs.end()), cs.end());

  auto bayes = [&](const std::map<Label, double>& xs, Label c) {
    double b = 0.0;
    for (const auto& [a, p] : xs) {
      if (p == 0.0) continue;
      if (!velocity_alpha.has_row(a)) throw NullEventError("alpha undefined at position " + std::to_string(a));
      b += velocity_alpha(a, c) * p;
    }
    return b;
  };

  DeltaReport r;
  for (Label c : cs) {
    const double outside = bayes(x_out, c) - (v_out.count(c) ? v_out[c] : 0.0);
    const double d = outside / ps;
    const double pv = (v_in.count(c) ? v_in[c] : 0.0) / ps;
    const double bp = bayes(x_in, c) / ps;
    r.velocities.push_back(c);
    r.delta.push_back(d);
    r.p_v.push_back(pv);
    r.bayes_part.push_back(bp);
    r.sum += d;
    r.reconstruction_residual = std::max(r.reconstruction_residual, std::abs(pv - bp - d));
  }
  return r;
}

/// P_S[V=c] - sum_a alpha(c|a) P_S[X=a] for an arbitrary kernel; equals
/// delta for the unconditional kernel and vanishes for alpha_S.
inline std::map<Label, double> bayes_defect(const ConditionalEnsemble& e, const TransitionKernel& velocity_alpha) {
  std::map<Label, double> out;
  for (Label c : e.p_v.support()) out[c] += e.p_v.prob(c);
  for (Label a : e.p_x.positive_support()) {
    const FiniteDistribution row = velocity_alpha.row(a);
    for (std::size_t k = 0; k < row.size(); ++k) out[row.support()[k]] -= row.probs()[k] * e.p_x.prob(a);
  }
  return out;
}

struct ViolationReport {
  double value = 0.0;
  Label worst_a = 0;
  Label worst_c = 0;
};

/// max |alpha(c|a) P_S[X=a] - rho(a|c) P_S[V=c]| for a Bayes pair taken
/// from outside the ensemble (typically the unconditional law).
inline ViolationReport single_space_violation(const ConditionalEnsemble& e, const BayesPair& pair) {
  ViolationReport r;
  std::vector<Label> as = e.p_x.positive_support();
  std::vector<Label> cs = e.p_v.positive_support();
  for (Label a : pair.forward.from_support()) as.push_back(a);
  for (Label c : pair.reverse.from_support()) cs.push_back(c);
  std::sort(as.begin(), as.end());
  as.erase(std::unique(as.begin(), as.end()), as.end());
  std::sort(cs.begin(), cs.end());
  cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
  for (Label a : as) {
    for (Label c : cs) {
      const double v = std::abs(pair.forward(a, c) * e.p_x.prob(a) - pair.reverse(c, a) * e.p_v.prob(c));
      if (v > r.value) {
        r.value = v;
        r.worst_a = a;
        r.worst_c = c;
      }
    }
  }
  return r;
}

/// Model B on bins: same contract as delta_correction, labels are bin indices.
inline DeltaReport binned_delta_model_b(const ParticleLaw& binned, const SpaceConfiguration& config,
                                        const TransitionKernel& binned_velocity_alpha) {
  return delta_correction(binned, config, binned_velocity_alpha);
}

}  // namespace rspace
