#pragma once

// Finite probability primitives shared by every module: distributions over
// integer labels, row-stochastic kernels, entropy, exact joint tables and
// elementary conditioning.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rspace/errors.hpp"

namespace rspace {

using Label = std::int64_t;

/// Tolerance for identities that hold exactly in exact arithmetic.
inline constexpr double kExactTol = 1e-12;

class FiniteDistribution {
 public:
  FiniteDistribution() = default;

  FiniteDistribution(std::vector<Label> support, std::vector<double> probs)
      : support_(std::move(support)), probs_(std::move(probs)) {
    validate();
  }

  /// Builds from a label -> mass map; labels come out sorted.
  static FiniteDistribution from_map(const std::map<Label, double>& m) {
    std::vector<Label> s;
    std::vector<double> p;
    s.reserve(m.size());
    p.reserve(m.size());
    for (const auto& [k, v] : m) {
      s.push_back(k);
      p.push_back(v);
    }
    return FiniteDistribution(std::move(s), std::move(p));
  }

  /// Like from_map but divides by the total mass first.
  static FiniteDistribution normalized(const std::map<Label, double>& m) {
    double total = 0.0;
    for (const auto& kv : m) total += kv.second;
    if (!(total > 0.0)) throw NullEventError("distribution with zero total mass");
    std::map<Label, double> n;
    for (const auto& [k, v] : m) n[k] = v / total;
    return from_map(n);
  }

  static FiniteDistribution point_mass(Label at) { return FiniteDistribution({at}, {1.0}); }

  static FiniteDistribution uniform(std::vector<Label> labels) {
    std::sort(labels.begin(), labels.end());
    const double w = 1.0 / static_cast<double>(labels.size());
    std::vector<double> p(labels.size(), w);
    return FiniteDistribution(std::move(labels), std::move(p));
  }

  [[nodiscard]] const std::vector<Label>& support() const { return support_; }
  [[nodiscard]] const std::vector<double>& probs() const { return probs_; }
  [[nodiscard]] std::size_t size() const { return support_.size(); }

  /// Mass at `label`, zero when the label is outside the support.
  [[nodiscard]] double prob(Label label) const {
    auto it = std::lower_bound(support_.begin(), support_.end(), label);
    if (it == support_.end() || *it != label) return 0.0;
    return probs_[static_cast<std::size_t>(it - support_.begin())];
  }

  [[nodiscard]] bool contains(Label label) const {
    return std::binary_search(support_.begin(), support_.end(), label);
  }

  [[nodiscard]] std::map<Label, double> to_map() const {
    std::map<Label, double> m;
    for (std::size_t k = 0; k < size(); ++k) m[support_[k]] = probs_[k];
    return m;
  }

  /// Support restricted to labels with strictly positive mass.
  [[nodiscard]] std::vector<Label> positive_support() const {
    std::vector<Label> out;
    for (std::size_t k = 0; k < size(); ++k)
      if (probs_[k] > 0.0) out.push_back(support_[k]);
    return out;
  }

  [[nodiscard]] double mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < size(); ++k) m += static_cast<double>(support_[k]) * probs_[k];
    return m;
  }

  friend bool operator==(const FiniteDistribution&, const FiniteDistribution&) = default;

 private:
  void validate() const {
    require(!support_.empty(), "distribution: empty support");
    require(support_.size() == probs_.size(), "distribution: support/probs length mismatch");
    double total = 0.0;
    for (std::size_t k = 0; k < probs_.size(); ++k) {
      require(std::isfinite(probs_[k]) && probs_[k] >= 0.0, "distribution: negative or non-finite mass");
      if (k > 0) require(support_[k - 1] < support_[k], "distribution: support not strictly increasing");
      total += probs_[k];
    }
    require(std::abs(total - 1.0) <= kExactTol, "distribution: masses sum to " + std::to_string(total));
  }

  std::vector<Label> support_;
  std::vector<double> probs_;
};

/// Row-stochastic matrix; rows indexed by `from`, columns by `to`.
class TransitionKernel {
 public:
  TransitionKernel() = default;

  TransitionKernel(std::vector<Label> from, std::vector<Label> to, std::vector<std::vector<double>> rows)
      : from_(std::move(from)), to_(std::move(to)), rows_(std::move(rows)) {
    require(!from_.empty() && !to_.empty(), "kernel: empty support");
    require(std::is_sorted(from_.begin(), from_.end()) &&
                std::adjacent_find(from_.begin(), from_.end()) == from_.end(),
            "kernel: from-support not strictly increasing");
    require(std::is_sorted(to_.begin(), to_.end()) &&
                std::adjacent_find(to_.begin(), to_.end()) == to_.end(),
            "kernel: to-support not strictly increasing");
    require(rows_.size() == from_.size(), "kernel: row count mismatch");
    for (const auto& r : rows_) {
      require(r.size() == to_.size(), "kernel: column count mismatch");
      double s = 0.0;
      for (double v : r) {
        require(std::isfinite(v) && v >= 0.0, "kernel: negative entry");
        s += v;
      }
      require(std::abs(s - 1.0) <= kExactTol, "kernel: row sums to " + std::to_string(s));
    }
  }

  static TransitionKernel identity(const std::vector<Label>& labels) {
    std::vector<std::vector<double>> rows(labels.size(), std::vector<double>(labels.size(), 0.0));
    for (std::size_t k = 0; k < labels.size(); ++k) rows[k][k] = 1.0;
    return TransitionKernel(labels, labels, std::move(rows));
  }

  [[nodiscard]] const std::vector<Label>& from_support() const { return from_; }
  [[nodiscard]] const std::vector<Label>& to_support() const { return to_; }
  [[nodiscard]] const std::vector<std::vector<double>>& rows() const { return rows_; }

  [[nodiscard]] bool has_row(Label from) const {
    return std::binary_search(from_.begin(), from_.end(), from);
  }

  /// k(to | from); zero for labels outside the supports.
  [[nodiscard]] double operator()(Label from, Label to) const {
    auto fi = std::lower_bound(from_.begin(), from_.end(), from);
    if (fi == from_.end() || *fi != from) return 0.0;
    auto ti = std::lower_bound(to_.begin(), to_.end(), to);
    if (ti == to_.end() || *ti != to) return 0.0;
    return rows_[static_cast<std::size_t>(fi - from_.begin())][static_cast<std::size_t>(ti - to_.begin())];
  }

  [[nodiscard]] FiniteDistribution row(Label from) const {
    auto fi = std::lower_bound(from_.begin(), from_.end(), from);
    if (fi == from_.end() || *fi != from)
      throw NullEventError("kernel row undefined for label " + std::to_string(from));
    return FiniteDistribution(to_, rows_[static_cast<std::size_t>(fi - from_.begin())]);
  }

 private:
  std::vector<Label> from_;
  std::vector<Label> to_;
  std::vector<std::vector<double>> rows_;
};

/// Reproducible randomness: identical (seed, stream_id) gives identical draws.
struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  [[nodiscard]] std::mt19937_64 engine() const {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)};
    return std::mt19937_64(seq);
  }

  [[nodiscard]] RngSeed substream(std::uint64_t k) const {
    return RngSeed{seed, stream_id * 0x9E3779B97F4A7C15ULL + k + 1};
  }
};

/// Shannon entropy -sum p log_base p, with 0 log 0 = 0.
inline double entropy(std::span<const double> probs, double base = std::exp(1.0)) {
  require(base > 1.0, "entropy: base must exceed 1");
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return std::max(0.0, h / std::log(base));
}

inline double entropy(const FiniteDistribution& d, double base = std::exp(1.0)) {
  return entropy(std::span<const double>(d.probs()), base);
}

/// Output law sum_a k(c|a) d(a).
inline FiniteDistribution bayes_marginal(const TransitionKernel& k, const FiniteDistribution& d) {
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.probs()[i] > 0.0 && !k.has_row(d.support()[i]))
      throw ValidationError("bayes_marginal: label " + std::to_string(d.support()[i]) +
                            " missing from kernel support");
  std::vector<double> out(k.to_support().size(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.probs()[i] == 0.0) continue;
    const auto idx = static_cast<std::size_t>(
        std::lower_bound(k.from_support().begin(), k.from_support().end(), d.support()[i]) -
        k.from_support().begin());
    const auto& row = k.rows()[idx];
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c] * d.probs()[i];
  }
  return FiniteDistribution(k.to_support(), std::move(out));
}

// ---------------------------------------------------------------------------
// Exact joint tables

using Outcome = std::vector<Label>;

/// Sparse joint probability table over named integer axes.
class JointLaw {
 public:
  JointLaw() = default;

  JointLaw(std::vector<std::string> axes, std::map<Outcome, double> cells)
      : axes_(std::move(axes)), cells_(std::move(cells)) {
    double total = 0.0;
    for (const auto& [o, p] : cells_) {
      require(o.size() == axes_.size(), "joint law: outcome arity mismatch");
      require(std::isfinite(p) && p >= 0.0, "joint law: negative cell");
      total += p;
    }
    require(std::abs(total - 1.0) <= 1e-10, "joint law: total mass " + std::to_string(total));
  }

  [[nodiscard]] const std::vector<std::string>& axes() const { return axes_; }
  [[nodiscard]] const std::map<Outcome, double>& cells() const { return cells_; }

  [[nodiscard]] std::size_t axis(const std::string& name) const {
    auto it = std::find(axes_.begin(), axes_.end(), name);
    if (it == axes_.end()) throw ValidationError("joint law: no axis named " + name);
    return static_cast<std::size_t>(it - axes_.begin());
  }

  [[nodiscard]] double total() const {
    double t = 0.0;
    for (const auto& kv : cells_) t += kv.second;
    return t;
  }

  /// Probability of the event described by `pred`.
  [[nodiscard]] double probability(const std::function<bool(const Outcome&)>& pred) const {
    double t = 0.0;
    for (const auto& [o, p] : cells_)
      if (pred(o)) t += p;
    return t;
  }

  /// Marginal law of a derived integer feature of the outcome.
  [[nodiscard]] FiniteDistribution marginal(const std::function<Label(const Outcome&)>& f) const {
    std::map<Label, double> m;
    for (const auto& [o, p] : cells_) m[f(o)] += p;
    return FiniteDistribution::normalized(m);
  }

  [[nodiscard]] FiniteDistribution marginal(const std::string& name) const {
    const std::size_t k = axis(name);
    return marginal([k](const Outcome& o) { return o[k]; });
  }

  /// Labels that appear on `name` with positive mass.
  [[nodiscard]] std::vector<Label> labels(const std::string& name) const {
    const std::size_t k = axis(name);
    std::vector<Label> out;
    for (const auto& [o, p] : cells_)
      if (p > 0.0) out.push_back(o[k]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Renormalized restriction to the event `pred`.
  [[nodiscard]] JointLaw conditioned(const std::function<bool(const Outcome&)>& pred) const {
    const double pb = probability(pred);
    if (!(pb > 0.0)) throw NullEventError("event has zero probability");
    std::map<Outcome, double> out;
    for (const auto& [o, p] : cells_)
      if (pred(o)) out[o] = p / pb;
    return JointLaw(axes_, std::move(out));
  }

 private:
  std::vector<std::string> axes_;
  std::map<Outcome, double> cells_;
};

/// Law of `target` given the event `pred`: P(target = t, B) / P(B).
inline FiniteDistribution condition_event(const JointLaw& joint,
                                          const std::function<bool(const Outcome&)>& pred,
                                          const std::string& target) {
  return joint.conditioned(pred).marginal(target);
}

/// Both sides of the law of total expectation over the partition induced by
/// `block`: (E[f], sum_B P(B) E[f | B]).
inline std::pair<double, double> total_expectation_check(const JointLaw& joint,
                                                         const std::function<double(const Outcome&)>& f,
                                                         const std::function<Label(const Outcome&)>& block) {
  double direct = 0.0;
  std::map<Label, std::pair<double, double>> parts;  // block -> (P(B), E[f 1_B])
  for (const auto& [o, p] : joint.cells()) {
    const double v = f(o);
    direct += p * v;
    auto& acc = parts[block(o)];
    acc.first += p;
    acc.second += p * v;
  }
  double tower = 0.0;
  for (const auto& [b, acc] : parts)
    if (acc.first > 0.0) tower += acc.first * (acc.second / acc.first);
  return {direct, tower};
}

}  // namespace rspace
