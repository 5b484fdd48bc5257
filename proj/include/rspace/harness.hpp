#pragma once

// Batch front door: config parsing, the experiment pipelines, the fixture
// catalog and the run manifest. Used by tools/rspace_cli.cpp.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "rspace/entropic_bounds.hpp"
#include "rspace/errors.hpp"
#include "rspace/geometry.hpp"
#include "rspace/hilbert_rep.hpp"
#include "rspace/particle_process.hpp"
#include "rspace/prob.hpp"
#include "rspace/quantum_ruler.hpp"
#include "rspace/space_process.hpp"
#include "rspace/space_removal.hpp"

namespace rspace::harness {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Config

/// Flat key/value config. Keys are dotted; an INI section header [model]
/// prefixes the keys below it, so `[model] p = 0.5` and `model.p = 0.5` agree.
class Config {
 public:
  Config() = default;
  explicit Config(std::map<std::string, std::string> v) : values_(std::move(v)) {}

  static Config parse(const std::string& text) {
    boost::property_tree::ptree pt;
    std::istringstream in(text);
    try {
      boost::property_tree::ini_parser::read_ini(in, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ValidationError("config line " + std::to_string(e.line()) + ": " + e.message());
    }
    std::map<std::string, std::string> flat;
    std::function<void(const boost::property_tree::ptree&, const std::string&)> walk =
        [&](const boost::property_tree::ptree& node, const std::string& prefix) {
          for (const auto& [k, child] : node) {
            const std::string key = prefix.empty() ? k : prefix + "." + k;
            if (child.empty()) {
              if (!flat.emplace(key, boost::algorithm::trim_copy(child.data())).second)
                throw ValidationError("config: duplicate key " + key);
            } else {
              walk(child, key);
            }
          }
        };
    walk(pt, "");
    return Config(std::move(flat));
  }

  static Config load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("config: cannot read " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
  }

  [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  [[nodiscard]] const std::map<std::string, std::string>& values() const { return values_; }

  [[nodiscard]] std::string str(const std::string& key, const std::string& def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
  }

  [[nodiscard]] double real(const std::string& key, double def) const {
    if (!has(key)) return def;
    return parse_real(key, values_.at(key));
  }

  [[nodiscard]] std::int64_t integer(const std::string& key, std::int64_t def) const {
    if (!has(key)) return def;
    const std::string& s = values_.at(key);
    try {
      std::size_t used = 0;
      const long long v = std::stoll(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ValidationError("config key '" + key + "': expected an integer, got '" + s + "'");
    }
  }

  /// Comma-separated reals; a single value is broadcast to `n` entries when n > 0.
  [[nodiscard]] std::vector<double> reals(const std::string& key, const std::vector<double>& def,
                                          std::size_t n = 0) const {
    std::vector<double> out;
    if (!has(key)) {
      out = def;
    } else {
      std::vector<std::string> parts;
      boost::algorithm::split(parts, values_.at(key), boost::is_any_of(","));
      for (auto& p : parts) out.push_back(parse_real(key, boost::algorithm::trim_copy(p)));
    }
    if (n > 0 && out.size() == 1) out.assign(n, out.front());
    if (n > 0 && out.size() != n)
      throw ValidationError("config key '" + key + "': expected " + std::to_string(n) + " values");
    return out;
  }

  /// Rows separated by ';', entries by ','.
  [[nodiscard]] std::vector<std::vector<double>> matrix(const std::string& key) const {
    if (!has(key)) throw ValidationError("config key '" + key + "' is required");
    std::vector<std::string> rows;
    boost::algorithm::split(rows, values_.at(key), boost::is_any_of(";"));
    std::vector<std::vector<double>> out;
    for (auto& r : rows) {
      std::vector<std::string> parts;
      boost::algorithm::split(parts, r, boost::is_any_of(","));
      std::vector<double> row;
      for (auto& p : parts) row.push_back(parse_real(key, boost::algorithm::trim_copy(p)));
      out.push_back(std::move(row));
    }
    return out;
  }

  /// Canonical text: sorted "key=value" lines.
  [[nodiscard]] std::string canonical() const {
    std::string s;
    for (const auto& [k, v] : values_) s += k + "=" + v + "\n";
    return s;
  }

 private:
  static double parse_real(const std::string& key, const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ValidationError("config key '" + key + "': expected a number, got '" + s + "'");
    }
  }

  std::map<std::string, std::string> values_;
};

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// JSON helpers

inline json to_json(const FiniteDistribution& d) { return json{{"support", d.support()}, {"probs", d.probs()}}; }

inline FiniteDistribution distribution_from_json(const json& j) {
  return FiniteDistribution(j.at("support").get<std::vector<Label>>(), j.at("probs").get<std::vector<double>>());
}

inline json to_json(const TransitionKernel& k) {
  return json{{"from", k.from_support()}, {"to", k.to_support()}, {"rows", k.rows()}};
}

inline json to_json(const EurBound& b) {
  json t1 = json::array(), t2 = json::array();
  for (const auto& t : b.d1_terms) t1.push_back({{"c", t.label}, {"walker", t.walker}, {"value", t.value}});
  for (const auto& t : b.d2_terms) t2.push_back({{"source", t.label}, {"walker", t.walker}, {"value", t.value}});
  return json{{"d1", b.d1},
              {"d2", b.d2},
              {"d", b.d},
              {"base", b.base},
              {"argmins", {{"d1_source", b.d1_source}, {"d1_terms", t1}, {"d2_target", b.d2_target}, {"d2_terms", t2}}}};
}

// ---------------------------------------------------------------------------
// Parameter readers. Errors name the config key.

template <class F>
auto with_key(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ValidationError& e) {
    throw ValidationError(key + ": " + e.what());
  }
}

inline RandomWalkParams read_walk_params(const Config& c) {
  const auto m = c.integer("model.M", 2);
  if (m < 2) throw ValidationError("model.M: must be at least 2, got " + std::to_string(m));
  RandomWalkParams p;
  p.p_left = c.reals("model.p", {0.5}, static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < p.p_left.size(); ++i)
    if (!(p.p_left[i] > 0.0 && p.p_left[i] < 1.0)) {
      std::ostringstream os;
      os << "model.p: entry " << i << " = " << p.p_left[i] << " must lie strictly inside (0,1)";
      throw ValidationError(os.str());
    }
  p.spacing = c.integer("model.spacing", 1);
  with_key("model", [&] { p.validate(); });
  return p;
}

inline SelectionKernel read_selection(const Config& c, std::size_t m) {
  const std::string mode = c.str("selection.mode", "iid_uniform");
  if (mode == "iid_uniform") return SelectionKernel::uniform();
  if (mode == "iid_weighted") {
    auto w = c.reals("selection.weights", {}, m);
    auto k = SelectionKernel::weighted(w);
    with_key("selection.weights", [&] { (void)k.pair_law(m, 0, SpaceConfiguration{std::vector<Label>(m, 0), 0}); });
    return k;
  }
  if (mode == "markov") {
    auto k = SelectionKernel::markov(c.reals("selection.weights", {}, m), c.matrix("selection.matrix"));
    with_key("selection", [&] { (void)k.pair_law(m, 0, SpaceConfiguration{std::vector<Label>(m, 0), 0}); });
    return k;
  }
  throw ValidationError("selection.mode: unknown mode '" + mode + "'");
}

inline std::size_t read_origin(const Config& c, std::size_t m) {
  const auto o = c.integer("origin", 0);
  if (o < 0 || static_cast<std::size_t>(o) >= m) throw ValidationError("origin: index out of range");
  return static_cast<std::size_t>(o);
}

/// K(i | j) of the selection, when it has one.
inline std::optional<std::vector<std::vector<double>>> selection_transition(const SelectionKernel& s, std::size_t m) {
  switch (s.mode) {
    case SelectionKernel::Mode::iid_uniform:
      return std::vector<std::vector<double>>(m, std::vector<double>(m, 1.0 / static_cast<double>(m)));
    case SelectionKernel::Mode::iid_weighted: return std::vector<std::vector<double>>(m, s.weights);
    case SelectionKernel::Mode::markov: return s.matrix;
    default: return std::nullopt;
  }
}

inline WienerParams read_wiener(const Config& c) {
  const auto m = c.integer("model.M", 2);
  if (m < 2) throw ValidationError("model.M: must be at least 2");
  const auto n = static_cast<std::size_t>(m);
  WienerParams w;
  const auto means = c.reals("wiener.means", {0.0, 0.5}, n);
  const auto vars = c.reals("wiener.vars", {1.0}, n);
  for (std::size_t i = 0; i < n; ++i) w.initial.push_back(GaussianLaw{means[i], vars[i]});
  w.time_grid = c.reals("wiener.times", {0.0, 1.0, 2.0});
  with_key("wiener", [&] { w.validate(); });
  if (w.time_grid.size() < 3) throw ValidationError("wiener.times: need t0 < t1 < t2");
  return w;
}

// ---------------------------------------------------------------------------
// Experiments

struct ExperimentResult {
  json payload;
  std::map<std::string, std::string> side_files;  // file name -> contents (CSV)
  bool checks_passed = true;
};

inline json checks_block(const std::vector<std::pair<std::string, bool>>& checks, bool& all) {
  json j = json::object();
  for (const auto& [k, v] : checks) {
    j[k] = v;
    all = all && v;
  }
  return j;
}

/// Hilbert certificates for the model overlap target of a selection kernel.
inline json hilbert_block(std::size_t m, const std::optional<std::vector<std::vector<double>>>& k, double d,
                          std::uint64_t seed, std::size_t battery) {
  json j;
  j["dim"] = hilbert_dimension(m);
  if (!k) {
    j["doubly_stochastic"] = false;
    j["note"] = "selection has no transition matrix";
    return j;
  }
  const RMatrix target = model_overlap_target(*k);
  try {
    require_doubly_stochastic(target);
  } catch (const ValidationError&) {
    j["doubly_stochastic"] = false;
    return j;
  }
  j["doubly_stochastic"] = true;
  const SynthesisResult s = synthesize_overlap_unitary(target, 10000, 1e-13, seed);
  j["synthesis_residual"] = s.residual;
  const UnitaryMatrix u(s.u);
  const MaassenReport mr = maassen_certificate(u, d, std::exp(1.0), battery, seed);
  j["c_star"] = mr.c_star;
  j["bound"] = mr.bound;
  j["maassen_pass"] = mr.pass;
  j["battery"] = {{"trials", mr.battery_trials}, {"violations", mr.battery_violations}};
  std::vector<double> labels(hilbert_dimension(m));
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<double>(i);
  j["commutator_norm"] = commutator_certificate(build_position_operator(labels), build_velocity_operator(u, labels));
  return j;
}

inline ExperimentResult run_model_a(const Config& c, std::uint64_t seed) {
  const RandomWalkParams params = read_walk_params(c);
  const std::size_t m = params.walkers();
  const std::int64_t n = c.integer("model.N", 1);
  if (n < 0) throw ValidationError("model.N: must be non-negative");
  const SelectionKernel sel = read_selection(c, m);
  const std::size_t origin = read_origin(c, m);

  const DiscreteSpace space = discrete_walkers(params, n);
  const ParticleLaw law = build_joint_law(space, sel, origin, n);
  const TransitionKernel alpha = alpha_from_joint(law.joint);
  const TransitionKernel va = velocity_kernel(alpha);
  const BayesPair pair = unconditional_pair(law);
  const FiniteDistribution px = law.position_law(), pv = law.velocity_law();
  const FiniteDistribution bayes_v = bayes_marginal(va, px);
  double bayes_residual = 0.0;
  for (Label v : pv.support()) bayes_residual = std::max(bayes_residual, std::abs(bayes_v.prob(v) - pv.prob(v)));

  ExperimentResult r;
  json& j = r.payload;
  j["experiment"] = "model-a";
  j["params"] = {{"M", m}, {"N", n}, {"p", params.p_left}, {"spacing", params.spacing}, {"origin", origin},
                 {"selection", sel.name()}};
  json cells = json::array();
  for (const auto& [o, p] : law.joint.cells()) cells.push_back({o[0], o[1], o[2], p});
  json cfgs = json::array();
  for (std::size_t s = 0; s < law.configs.size(); ++s)
    cfgs.push_back({{"positions", law.configs[s].positions}, {"probability", law.config_probs[s]}});
  j["joint"] = {{"axes", law.joint.axes()}, {"cells", cells}, {"configurations", cfgs}};
  j["alpha"] = to_json(alpha);
  j["unconditional"] = {{"p_x", to_json(px)}, {"p_v", to_json(pv)}, {"bayes_residual", bayes_residual}};

  double worst_residual = 0.0, worst_sum = 0.0, worst_cond_violation = 0.0, max_delta = 0.0, min_delta = 0.0;
  double min_d = std::numeric_limits<double>::infinity();
  bool eur_ok = true;
  json rows = json::array();
  for (std::size_t s = 0; s < law.configs.size(); ++s) {
    if (!(law.config_probs[s] > 0.0)) continue;
    const auto& cfg = law.configs[s];
    const ConditionalEnsemble e = condition_on_configuration(law, cfg);
    const DeltaReport d = delta_correction(law, cfg, va);
    const EurBound b = compute_bound(space, cfg);
    const EurCheck ec = verify_eur(e, b);
    const double viol = single_space_violation(e, pair).value;
    const double viol_cond = single_space_violation(e, conditional_pair(e)).value;
    json deltas = json::array();
    for (std::size_t k = 0; k < d.velocities.size(); ++k)
      deltas.push_back({{"c", d.velocities[k]}, {"delta", d.delta[k]}, {"bayes_part", d.bayes_part[k]}});
    rows.push_back({{"configuration", cfg.positions},
                    {"probability", law.config_probs[s]},
                    {"p_x", to_json(e.p_x)},
                    {"p_v", to_json(e.p_v)},
                    {"delta", deltas},
                    {"delta_sum", d.sum},
                    {"reconstruction_residual", d.reconstruction_residual},
                    {"violation", viol},
                    {"violation_conditional_alpha", viol_cond},
                    {"bound", to_json(b)},
                    {"eur", {{"h_x", ec.h_x}, {"h_v", ec.h_v}, {"sum", ec.sum}, {"slack", ec.slack}, {"pass", ec.pass}}}});
    worst_residual = std::max(worst_residual, d.reconstruction_residual);
    worst_sum = std::max(worst_sum, std::abs(d.sum));
    worst_cond_violation = std::max(worst_cond_violation, viol_cond);
    max_delta = std::max(max_delta, d.max_abs());
    min_delta = std::min(min_delta, d.min_value());
    min_d = std::min(min_d, b.d);
    eur_ok = eur_ok && ec.pass;
  }
  j["configurations"] = rows;
  j["summary"] = {{"max_abs_delta", max_delta}, {"min_delta", min_delta}, {"min_bound", min_d}};
  j["hilbert"] = hilbert_block(m, selection_transition(sel, m), min_d, seed, 1000);

  std::vector<std::pair<std::string, bool>> checks = {
      {"unconditional_bayes", bayes_residual <= 1e-12},
      {"reconstruction", worst_residual <= 1e-10},
      {"delta_sum_zero", worst_sum <= 1e-10},
      {"conditional_alpha_joint_space", worst_cond_violation <= 1e-10},
      {"eur", eur_ok}};
  if (j["hilbert"].value("doubly_stochastic", false))
    checks.emplace_back("maassen_battery", j["hilbert"]["battery"]["violations"].get<std::size_t>() == 0);
  j["checks"] = checks_block(checks, r.checks_passed);

  const auto samples = c.integer("sample.paths", 0);
  if (samples > 0) {
    std::ostringstream space_csv, particle_csv;
    const auto steps = c.integer("sample.steps", 20);
    const auto path = sample_space_path(params, steps, RngSeed{seed, 0});
    write_paths_csv(space_csv, path);
    write_particle_csv(particle_csv, sample_particle_path(path, sel, origin, RngSeed{seed, 1}));
    r.side_files["space_path.csv"] = space_csv.str();
    r.side_files["particle_path.csv"] = particle_csv.str();
  }
  return r;
}

inline ExperimentResult run_eur(const Config& c, std::uint64_t seed) {
  const RandomWalkParams params = read_walk_params(c);
  const std::int64_t n = c.integer("model.N", 1);
  const std::size_t origin = read_origin(c, params.walkers());
  const auto budget = c.integer("eur.budget", 10000);
  if (budget <= 0) throw ValidationError("eur.budget: must be positive");
  const bool cond = c.str("eur.alpha", "unconditional") == "conditional";
  const DiscreteSpace space = discrete_walkers(params, n);
  const EurSearchReport rep =
      eur_adversarial_search(space, origin, n, static_cast<std::size_t>(budget), RngSeed{seed, 11}, cond);
  ExperimentResult r;
  json& j = r.payload;
  j["experiment"] = "eur";
  j["params"] = {{"M", params.walkers()}, {"N", n}, {"p", params.p_left}, {"origin", origin}, {"budget", budget},
                 {"alpha", cond ? "conditional" : "unconditional"}};
  json bounds = json::array();
  for (const auto& [s, b] : rep.bounds) bounds.push_back({{"config_index", s}, {"bound", to_json(b)}});
  j["bounds"] = bounds;
  j["trials"] = rep.trials;
  j["checks_run"] = rep.checks;
  j["violations"] = rep.violations;
  j["min_sum"] = rep.min_sum;
  j["min_slack"] = rep.min_slack;
  j["argmin_trial"] = rep.argmin_trial;
  j["bound_bitwise_stable"] = rep.bound_bitwise_stable;
  j["checks"] = checks_block({{"no_violation", rep.violations == 0}, {"bound_independent", rep.bound_bitwise_stable}},
                             r.checks_passed);
  return r;
}

inline ExperimentResult run_model_b(const Config& c, std::uint64_t seed) {
  const WienerParams w = read_wiener(c);
  const double t0 = w.time_grid[0], t1 = w.time_grid[1], t2 = w.time_grid[2];
  const double lo = c.real("window.lo", -2.0), hi = c.real("window.hi", 2.0);
  if (!(hi > lo)) throw ValidationError("window: need lo < hi");
  std::vector<std::size_t> sizes;
  for (double s : c.reals("partitions", {4, 8, 16})) {
    if (!(s >= 1.0) || s != std::floor(s)) throw ValidationError("partitions: entries must be positive integers");
    sizes.push_back(static_cast<std::size_t>(s));
  }
  const std::size_t origin = read_origin(c, w.walkers());
  const SelectionKernel sel = SelectionKernel::uniform();

  ExperimentResult r;
  json& j = r.payload;
  j["experiment"] = "model-b";
  json init = json::array();
  for (const auto& g : w.initial) init.push_back({{"mean", g.mean}, {"var", g.var}});
  j["params"] = {{"M", w.walkers()}, {"initial", init}, {"times", w.time_grid}, {"window", {lo, hi}},
                 {"partitions", sizes}, {"origin", origin}};

  bool eur_ok = true, delta_ok = true;
  json parts = json::array();
  const auto eur_rows = binned_eur_model_b(w, lo, hi, sizes, t1, t2, sel, origin);
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const DiscreteSpace space = binned_walkers(w, Partition::uniform(lo, hi, sizes[k]), t1, t2);
    const ParticleLaw law = build_joint_law(space, sel, origin, 0);
    const TransitionKernel va = velocity_kernel(alpha_from_joint(law.joint));
    double max_delta = 0.0, min_delta = 0.0, worst_res = 0.0, worst_sum = 0.0;
    for (std::size_t s = 0; s < law.configs.size(); ++s) {
      const DeltaReport d = binned_delta_model_b(law, law.configs[s], va);
      max_delta = std::max(max_delta, d.max_abs());
      min_delta = std::min(min_delta, d.min_value());
      worst_res = std::max(worst_res, d.reconstruction_residual);
      worst_sum = std::max(worst_sum, std::abs(d.sum));
    }
    const auto& er = eur_rows[k];
    parts.push_back({{"bins", er.bins},
                     {"degenerate", er.degenerate},
                     {"configurations", er.configs},
                     {"min_bound", er.min_d},
                     {"min_sum", er.min_sum},
                     {"min_slack", er.min_slack},
                     {"violations", er.violations},
                     {"max_abs_delta", max_delta},
                     {"min_delta", min_delta},
                     {"max_reconstruction_residual", worst_res},
                     {"max_abs_delta_sum", worst_sum},
                     {"walker0_kernel", to_json(space[0].step)}});
    eur_ok = eur_ok && er.violations == 0;
    delta_ok = delta_ok && worst_res <= 1e-10 && worst_sum <= 1e-10;
  }
  j["partitions"] = parts;

  const auto paths = c.integer("mc.paths", 100000);
  if (paths < 2) throw ValidationError("mc.paths: need at least 2 paths");
  WienerParams one = w;
  one.time_grid = {t0, t1};
  double sum = 0.0, sum2 = 0.0;
  for (std::int64_t k = 0; k < paths; ++k) {
    const auto p = sample_wiener_grid(one, RngSeed{seed, 100}.substream(static_cast<std::uint64_t>(k)));
    const double inc = p[0][1] - p[0][0];
    sum += inc;
    sum2 += inc * inc;
  }
  const double nn = static_cast<double>(paths), tau = t1 - t0;
  const double mean = sum / nn, var = (sum2 - nn * mean * mean) / (nn - 1.0);
  const double mean_se = std::sqrt(tau / nn), var_se = tau * std::sqrt(2.0 / (nn - 1.0));
  j["increments"] = {{"paths", paths}, {"mean", mean}, {"var", var}, {"mean_se", mean_se}, {"var_se", var_se}};
  j["checks"] = checks_block({{"binned_eur", eur_ok},
                              {"binned_delta", delta_ok},
                              {"increment_mean", std::abs(mean) <= 3.0 * mean_se},
                              {"increment_var", std::abs(var - tau) <= 3.0 * var_se}},
                             r.checks_passed);
  return r;
}

inline ExperimentResult run_hilbert(const Config& c, std::uint64_t seed) {
  Config mc = c;
  if (!mc.has("model.M")) mc.set("model.M", "2");
  const RandomWalkParams params = read_walk_params(mc);
  const std::size_t m = params.walkers();
  const DiscreteSpace space = discrete_walkers(params, 1);
  const ParticleLaw law = build_joint_law(space, SelectionKernel::uniform(), 0, 1);
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < law.configs.size(); ++s) d = std::min(d, compute_bound(space, law.configs[s]).d);
  const auto states = static_cast<std::size_t>(c.integer("hilbert.states", 1000));

  ExperimentResult r;
  json& j = r.payload;
  j["experiment"] = "hilbert";
  j["params"] = {{"M", m}, {"p", params.p_left}, {"states", states}};
  j["bound_d"] = d;
  j["model"] = hilbert_block(m, selection_transition(SelectionKernel::uniform(), m), d, seed, states);

  const auto dim = static_cast<Eigen::Index>(hilbert_dimension(m));
  const UnitaryMatrix flat(fourier_matrix(dim));
  std::vector<double> labels(static_cast<std::size_t>(dim));
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<double>(i);
  const double comm = commutator_certificate(build_position_operator(labels), build_velocity_operator(flat, labels));
  j["flat_commutator_norm"] = comm;

  json recover = json::array();
  double worst_recover = 0.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  for (double dd : c.reals("hilbert.recover_dims", {2, 3, 4, 5, 6})) {
    const auto k = static_cast<Eigen::Index>(dd);
    CMatrix g(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = 0; b < k; ++b) g(a, b) = cplx(z(rng), z(rng));
    const CMatrix hidden = polar_unitary(g);
    const SynthesisResult s = synthesize_overlap_unitary(hidden.cwiseAbs2(), 10000, 1e-13, seed + static_cast<std::uint64_t>(k));
    recover.push_back({{"dim", k}, {"residual", s.residual}, {"iterations", s.iterations}, {"restarts", s.restarts}});
    worst_recover = std::max(worst_recover, s.residual);
  }
  j["construct_then_recover"] = recover;

  double worst_identity = 0.0, worst_sum = 0.0;
  for (std::size_t t = 0; t < states; ++t) {
    const StateVector psi = random_state(dim, rng);
    const InterferenceReport ir = interference_decomposition(psi, flat, flat.overlaps());
    worst_identity = std::max(worst_identity, (ir.born - ir.bayes - ir.interference).cwiseAbs().maxCoeff());
    worst_sum = std::max(worst_sum, std::abs(ir.interference.sum()));
  }
  j["interference"] = {{"states", states}, {"max_identity_residual", worst_identity}, {"max_abs_sum", worst_sum}};

  const json& model = j["model"];
  j["checks"] = checks_block({{"dimension", model["dim"].get<std::size_t>() == m * m},
                              {"recover", worst_recover < 1e-8},
                              {"flat_commutator", comm > 0.1},
                              {"battery", model["battery"]["violations"].get<std::size_t>() == 0},
                              {"maassen_bound", model["maassen_pass"].get<bool>()},
                              {"interference_identity", worst_identity <= 1e-10 && worst_sum <= 1e-10}},
                             r.checks_passed);
  return r;
}

inline json point_set_json(const geo::PointSet& s) {
  json pts = json::array();
  for (const auto& p : s.points) pts.push_back({{"label", p.label}, {"x", p.x}, {"y", p.y}});
  return pts;
}

inline std::string distance_matrix_csv(const std::vector<Label>& labels, const std::function<double(Label, Label)>& d) {
  std::ostringstream os;
  os << "label";
  for (Label l : labels) os << ',' << l;
  os << '\n';
  for (Label a : labels) {
    os << a;
    for (Label b : labels) os << ',' << d(a, b);
    os << '\n';
  }
  return os.str();
}

inline ExperimentResult run_distances(const Config& c, std::uint64_t seed) {
  const auto w = c.integer("geometry.window", 5);
  const auto k = c.integer("geometry.points", 4);
  const auto budget = c.integer("geometry.budget", 20000);
  const auto tw = c.integer("geometry.t_window", 8);
  if (w < 2 || k < 2 || k > w * w || budget <= 0 || tw < 2) throw ValidationError("geometry: invalid search sizes");

  ExperimentResult r;
  json& j = r.payload;
  j["experiment"] = "distances";
  j["params"] = {{"window", w}, {"points", k}, {"budget", budget}, {"t_window", tw}};
  const auto asym = geo::find_nng_asymmetry(static_cast<int>(w), static_cast<int>(k));
  if (asym)
    j["nng_asymmetry"] = {{"points", point_set_json(asym->set)}, {"a", asym->a}, {"b", asym->b},
                          {"delta_ab", asym->delta_ab}, {"delta_ba", asym->delta_ba}};
  else
    j["nng_asymmetry"] = nullptr;
  const auto viol = geo::find_t_violation(RngSeed{seed, 21}, static_cast<std::size_t>(budget), static_cast<int>(tw));
  if (viol) {
    const geo::Tessellation t = geo::tessellate(viol->set);
    json tris = json::array(), areas = json::array();
    bool empty = true;
    for (const auto& tr : t.triangles) {
      tris.push_back({t.labels[tr.v[0]], t.labels[tr.v[1]], t.labels[tr.v[2]]});
      areas.push_back(0.5 * static_cast<double>(tr.twice_area));
      empty = empty && geo::triangle_is_empty(t, tr);
    }
    j["t_violation"] = {{"points", point_set_json(viol->set)}, {"a", viol->a}, {"c", viol->c}, {"b", viol->b},
                        {"d_ac", viol->d_ac}, {"d_cb", viol->d_cb}, {"d_ab", viol->d_ab},
                        {"triangulation", {{"triangles", tris}, {"areas", areas}, {"complete", t.complete},
                                           {"all_empty", empty}}}};
    r.side_files["t_distance_matrix.csv"] =
        distance_matrix_csv(viol->set.labels(), [&](Label a, Label b) { return geo::t_distance_2d(a, b, t); });
    r.side_files["nng_distance_matrix.csv"] =
        distance_matrix_csv(viol->set.labels(), [&](Label a, Label b) { return geo::nng_distance(a, b, viol->set); });
  } else {
    j["t_violation"] = nullptr;
  }
  j["checks"] = checks_block({{"nng_asymmetry_found", asym.has_value()}, {"t_violation_found", viol.has_value()}},
                             r.checks_passed);
  return r;
}

inline ExperimentResult run_ruler(const Config& c, std::uint64_t /*seed*/) {
  const ruler::GaussianWavefunction phi{c.real("ruler.mean", 0.0), c.real("ruler.width", 1.0)};
  if (!(phi.width > 0.0)) throw ValidationError("ruler.width: must be positive");
  const auto n = c.integer("ruler.N", 9);
  if (n < 1) throw ValidationError("ruler.N: must be at least 1");
  const double sigma = c.real("ruler.sigma", 0.5);
  if (!(sigma > 0.0)) throw ValidationError("ruler.sigma: must be positive");
  const double lo = c.real("ruler.lo", -4.0), hi = c.real("ruler.hi", 4.0);
  const ruler::RulerSpec spec = with_key("ruler", [&] {
    auto s = ruler::RulerSpec::uniform(static_cast<std::size_t>(n), sigma, lo, hi);
    s.validate();
    return s;
  });
  const ruler::FlipDistribution fd = ruler::flip_distribution(spec, phi);
  double worst_oracle = 0.0;
  for (std::size_t i = 0; i < spec.centers.size(); ++i) {
    const double oracle = quad::normal_pdf(spec.centers[i] - phi.mean, 0.0, sigma * sigma + phi.width * phi.width);
    worst_oracle = std::max(worst_oracle, std::abs(fd.raw[i] - oracle));
  }
  std::vector<std::pair<std::size_t, double>> grid;
  for (double f : c.reals("ruler.dense_divisors", {1, 2, 4, 8, 16, 32, 64, 100}))
    grid.emplace_back(static_cast<std::size_t>(n), phi.width / f);
  const auto rows = ruler::dense_limit_study(grid, phi, lo, hi);
  bool decreasing = true;
  for (std::size_t k = 1; k < rows.size(); ++k) decreasing = decreasing && rows[k].max_rel_error < rows[k - 1].max_rel_error;

  ExperimentResult r;
  json& j = r.payload;
  j["experiment"] = "ruler";
  j["params"] = {{"N", n}, {"sigma", sigma}, {"mean", phi.mean}, {"width", phi.width}, {"window", {lo, hi}}};
  j["centers"] = spec.centers;
  j["raw"] = fd.raw;
  j["raw_sum"] = fd.raw_sum;
  j["normalized"] = to_json(fd.normalized);
  j["max_oracle_gap"] = worst_oracle;
  json dl = json::array();
  for (const auto& row : rows)
    dl.push_back({{"N", row.n}, {"sigma", row.sigma}, {"max_error", row.max_rel_error},
                  {"mean_error", row.mean_rel_error}, {"center_error", row.center_rel_error}});
  j["dense_limit"] = dl;
  std::ostringstream csv;
  ruler::write_dense_limit_csv(csv, rows);
  r.side_files["dense_limit.csv"] = csv.str();
  j["checks"] = checks_block({{"oracle", worst_oracle <= 1e-9}, {"dense_limit_decreasing", decreasing}}, r.checks_passed);
  return r;
}

inline const std::map<std::string, std::function<ExperimentResult(const Config&, std::uint64_t)>>& experiments() {
  static const std::map<std::string, std::function<ExperimentResult(const Config&, std::uint64_t)>> table = {
      {"model-a", run_model_a}, {"model-b", run_model_b},     {"eur", run_eur},
      {"hilbert", run_hilbert}, {"distances", run_distances}, {"ruler", run_ruler}};
  return table;
}

// ---------------------------------------------------------------------------
// Running and manifests

struct RunManifest {
  std::string config_hash;
  std::string tool_version = kToolVersion;
  std::vector<std::string> files;
  double wall_clock_seconds = 0.0;
  bool checks_passed = true;

  [[nodiscard]] json to_json() const {
    return json{{"config_hash", config_hash},
                {"tool_version", tool_version},
                {"files", files},
                {"wall_clock_seconds", wall_clock_seconds},
                {"checks_passed", checks_passed}};
  }
};

/// Seed from the config unless overridden; folded into the hash.
inline std::uint64_t effective_seed(const Config& c) {
  const auto s = c.integer("seed", 1);
  if (s < 0) throw ValidationError("seed: must be non-negative");
  return static_cast<std::uint64_t>(s);
}

inline const std::function<ExperimentResult(const Config&, std::uint64_t)>& experiment_for(const Config& c) {
  const std::string kind = c.str("experiment", "");
  auto it = experiments().find(kind);
  if (it == experiments().end()) throw ValidationError("experiment: unknown kind '" + kind + "'");
  return it->second;
}

/// Parses every parameter the experiment reads without running it.
inline void validate(const Config& c) {
  const std::string kind = c.str("experiment", "");
  experiment_for(c);
  effective_seed(c);
  if (kind == "model-a" || kind == "eur" || kind == "hilbert") {
    Config mc = c;
    if (kind == "hilbert" && !mc.has("model.M")) mc.set("model.M", "2");
    const auto p = read_walk_params(mc);
    read_origin(mc, p.walkers());
    if (kind == "model-a") read_selection(mc, p.walkers());
  } else if (kind == "model-b") {
    const auto w = read_wiener(c);
    read_origin(c, w.walkers());
  }
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// Flattens a JSON object into "path,value" rows.
inline std::string flat_csv(const json& j) {
  std::ostringstream os;
  os << "key,value\n";
  std::function<void(const json&, const std::string&)> walk = [&](const json& node, const std::string& path) {
    if (node.is_object()) {
      for (auto it = node.begin(); it != node.end(); ++it) walk(it.value(), path.empty() ? it.key() : path + "." + it.key());
    } else if (node.is_array()) {
      for (std::size_t k = 0; k < node.size(); ++k) walk(node[k], path + "." + std::to_string(k));
    } else {
      os << path << ',' << (node.is_string() ? node.get<std::string>() : node.dump()) << '\n';
    }
  };
  walk(j, "");
  return os.str();
}

inline RunManifest run(const Config& c, const std::filesystem::path& out_dir, const std::string& format = "json") {
  const auto start = std::chrono::steady_clock::now();
  if (format != "json" && format != "csv") throw ValidationError("format: must be json or csv");
  validate(c);
  const std::string kind = c.str("experiment", "");
  const ExperimentResult res = experiment_for(c)(c, effective_seed(c));

  RunManifest m;
  m.config_hash = hex64(fnv1a(c.canonical()));
  m.checks_passed = res.checks_passed;
  std::filesystem::create_directories(out_dir);
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream f(out_dir / name, std::ios::binary);
    f << body;
    m.files.push_back(name);
  };
  if (format == "json")
    write(kind + ".json", dump(res.payload));
  else
    write(kind + ".csv", flat_csv(res.payload));
  for (const auto& [name, body] : res.side_files) write(name, body);
  m.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream f(out_dir / "manifest.json", std::ios::binary);
  f << dump(m.to_json());
  return m;
}

// ---------------------------------------------------------------------------
// Fixture catalog

struct Fixture {
  std::string name;
  std::string description;
  std::string config;  // INI text runnable with `run`
  std::function<json()> headline;
};

inline std::vector<Fixture> fixture_catalog() {
  std::vector<Fixture> f;
  f.push_back({"iid-p05", "M=2 iid walkers, p=0.5, N=1, uniform selection",
               "experiment = model-a\nseed = 1\n[model]\nM = 2\nN = 1\np = 0.5\n", [] {
                 const auto space = discrete_walkers(RandomWalkParams::iid(2, 0.5), 1);
                 const double d = compute_d1(space, SpaceConfiguration{{1, -1}, 1}).d1;
                 return json{{"D", d}, {"ln2", std::numbers::ln2}};
               }});
  f.push_back({"delta-witness", "M=2, p=0.5, N=1: configuration (-1,+1) carries a negative delta",
               "experiment = model-a\nseed = 1\n[model]\nM = 2\nN = 1\np = 0.5\n", [] {
                 const auto params = RandomWalkParams::iid(2, 0.5);
                 const auto law = build_joint_law(params, SelectionKernel::uniform(), 0, 1);
                 const auto va = velocity_kernel(alpha_from_joint(law.joint));
                 const auto d = delta_correction(law, SpaceConfiguration{{-1, 1}, 1}, va);
                 return json{{"configuration", {-1, 1}}, {"max_abs_delta", d.max_abs()}, {"min_delta", d.min_value()}};
               }});
  f.push_back({"hetero-p", "M=2 walkers with p = 0.3 and 0.5",
               "experiment = model-a\nseed = 1\n[model]\nM = 2\nN = 1\np = 0.3,0.5\n", [] {
                 RandomWalkParams p;
                 p.p_left = {0.3, 0.5};
                 const auto b = compute_bound(discrete_walkers(p, 1), SpaceConfiguration{{1, -1}, 1});
                 return json{{"D1", b.d1}, {"D2", b.d2}};
               }});
  f.push_back({"eur-stress", "10^4 random preparations on the iid p=0.5 fixture",
               "experiment = eur\nseed = 1\n[model]\nM = 2\nN = 1\np = 0.5\n[eur]\nbudget = 10000\n",
               [] { return json{{"D", std::numbers::ln2}}; }});
  f.push_back({"wiener-m2", "Model B, M=2, means 0 and 0.5, window [-2,2], partitions 4/8/16",
               "experiment = model-b\nseed = 1\n[model]\nM = 2\n[wiener]\nmeans = 0,0.5\nvars = 1\ntimes = 0,1,2\n"
               "[window]\nlo = -2\nhi = 2\n",
               [] {
                 WienerParams w;
                 w.initial = {{0.0, 1.0}, {0.5, 1.0}};
                 w.time_grid = {0.0, 1.0, 2.0};
                 const auto rows = binned_eur_model_b(w, -2, 2, {4}, 1.0, 2.0, SelectionKernel::uniform());
                 return json{{"bins", 4}, {"min_bound", rows[0].min_d}};
               }});
  f.push_back({"hilbert-m2", "Hilbert certificates for M=2 iid p=0.5",
               "experiment = hilbert\nseed = 1\n[model]\nM = 2\np = 0.5\n",
               [] { return json{{"dim", 4}, {"bound", std::exp(-std::numbers::ln2 / 2)}}; }});
  f.push_back({"nng-asymmetry", "smallest 4-point grid set with delta(A,B) != delta(B,A)",
               "experiment = distances\nseed = 1\n[geometry]\nwindow = 5\npoints = 4\n", [] {
                 const auto w = geo::find_nng_asymmetry(5, 4);
                 return json{{"delta_ab", w->delta_ab}, {"delta_ba", w->delta_ba}};
               }});
  f.push_back({"ruler-unit", "single ruler particle on the wavefunction mean, sigma = width = 1",
               "experiment = ruler\nseed = 1\n[ruler]\nN = 1\nsigma = 1\nwidth = 1\nlo = 0\nhi = 0.000001\n", [] {
                 ruler::RulerSpec s;
                 s.centers = {0.0};
                 return json{{"flip_probability", ruler::flip_probability(s, {0.0, 1.0}, 0)}};
               }});
  return f;
}

inline json list_fixtures(const std::string& filter = "") {
  json out = json::array();
  for (const auto& f : fixture_catalog()) {
    if (!filter.empty() && f.name.find(filter) == std::string::npos) continue;
    out.push_back({{"name", f.name}, {"description", f.description}, {"expected", f.headline()}});
  }
  return out;
}

inline Config fixture_config(const std::string& name) {
  for (const auto& f : fixture_catalog())
    if (f.name == name) return Config::parse(f.config);
  throw ValidationError("fixture: unknown name '" + name + "'");
}

}  // namespace rspace::harness
