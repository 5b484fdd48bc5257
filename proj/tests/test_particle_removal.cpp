#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rspace/particle_process.hpp"
#include "rspace/space_removal.hpp"

using namespace rspace;

using fixture::kernels;
using fixture::to_space;

TEST(PositionValue, Cases) {
  const SpaceConfiguration s{{3, 5}, 0};
  EXPECT_EQ(position_value(s, 0, 0), 0);
  EXPECT_EQ(position_value(s, 1, 1), 0);
  const SpaceConfiguration t{{0, 3, 5}, 0};
  EXPECT_EQ(position_value(t, 2, 1), 2);
  EXPECT_THROW((void)position_value(s, 2, 0), ValidationError);
}

TEST(JointLaw, SelectionOnOriginGivesZero) {
  const auto law = build_joint_law(RandomWalkParams::iid(2, 0.4), SelectionKernel::weighted({1.0, 0.0}), 0, 2);
  EXPECT_EQ(law.position_law(), FiniteDistribution::point_mass(0));
}

TEST(JointLaw, RelativeLawOfFreeWalker) {
  // X = s_1 - s_0 after N steps; both walkers start at 0.
  RandomWalkParams p;
  p.p_left = {0.3, 0.6};
  const int n = 2;
  const auto law = build_joint_law(p, SelectionKernel::weighted({0.0, 1.0}), 0, n);
  std::map<Label, double> oracle;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const int l0 = __builtin_popcount(a), l1 = __builtin_popcount(b);
      const double pr = std::pow(0.3, l0) * std::pow(0.7, n - l0) * std::pow(0.6, l1) * std::pow(0.4, n - l1);
      oracle[(n - 2 * l1) - (n - 2 * l0)] += pr;
    }
  const auto px = law.position_law();
  for (const auto& [x, pr] : oracle) EXPECT_NEAR(px.prob(x), pr, 1e-14);
}

TEST(JointLaw, MatchesOracleTables) {
  for (std::size_t m : {2u, 3u})
    for (int n : {0, 1, 2}) {
      std::vector<double> p(m);
      for (std::size_t i = 0; i < m; ++i) p[i] = 0.25 + 0.2 * static_cast<double>(i);
      RandomWalkParams params;
      params.p_left = p;
      for (const auto& k : kernels(m, n)) {
        const auto law = build_joint_law(params, k.kernel, 0, n);
        const auto t = oracle::enumerate(p, n, 0, k.pair);
        std::map<std::pair<Label, Label>, double> got;
        for (const auto& [o, pr] : law.joint.cells()) got[{o[0], o[1] - o[0]}] += pr;
        for (const auto& [key, pr] : t.xv) EXPECT_NEAR(got[key], pr, 1e-13) << k.kernel.name();
        double total = 0.0;
        for (const auto& kv : got) total += kv.second;
        EXPECT_NEAR(total, 1.0, 1e-12);
      }
    }
}

TEST(Alpha, IdentityAndShift) {
  const auto id = TransitionKernel::identity({-1, 0, 1});
  EXPECT_EQ(velocity_given_position(id, 0).prob(0), 1.0);
  const TransitionKernel shift({0, 1}, {1, 2}, {{1.0, 0.0}, {0.0, 1.0}});
  EXPECT_EQ(velocity_given_position(shift, 0).prob(1), 1.0);
  EXPECT_EQ(velocity_given_position(shift, 1).prob(1), 1.0);
  EXPECT_EQ(velocity_given_position(shift, 1).prob(0), 0.0);
}

TEST(Alpha, DeterministicJumpIsPermutation) {
  const JointLaw j({kAxisX, kAxisX1, kAxisS}, {{{0, 1, 0}, 0.5}, {{1, 0, 0}, 0.5}});
  const auto a = alpha_from_joint(j);
  EXPECT_EQ(a(0, 1), 1.0);
  EXPECT_EQ(a(1, 0), 1.0);
  EXPECT_EQ(a(0, 0), 0.0);
}

TEST(Alpha, FixtureRatios) {
  const auto law = build_joint_law(RandomWalkParams::iid(2, 0.5), SelectionKernel::uniform(), 0, 1);
  const auto t = oracle::enumerate({0.5, 0.5}, 1, 0, [](std::size_t, std::size_t, const oracle::Config&) { return 0.25; });
  const auto va = velocity_kernel(alpha_from_joint(law.joint));
  for (const auto& [key, pr] : t.xv) EXPECT_NEAR(va(key.first, key.second), oracle::alpha(t, key.first, key.second), 1e-13);
  EXPECT_THROW((void)alpha_from_joint(law.joint).row(17), NullEventError);
}

TEST(AlphaSymmetry, ConstructedAndBiased) {
  const TransitionKernel a({0, 1}, {0, 1, 2}, {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}});
  const auto pv = FiniteDistribution::uniform({0, 1});
  const auto ok = check_alpha_symmetry(a, FiniteDistribution::uniform({0, 1}), pv);
  EXPECT_TRUE(ok.pass);
  EXPECT_EQ(ok.max_gap, 0.0);
  const auto bad = check_alpha_symmetry(a, FiniteDistribution({0, 1}, {0.8, 0.2}), pv);
  EXPECT_FALSE(bad.pass);
  EXPECT_NEAR(bad.max_gap, 0.3, 1e-12);
}

TEST(Sampling, DeterministicSelectionFollowsWalker) {
  const auto p = RandomWalkParams::iid(3, 0.4);
  const auto path = sample_space_path(p, 25, RngSeed{2, 0});
  const auto s = sample_particle_path(path, SelectionKernel::weighted({0.0, 0.0, 1.0}), 1, RngSeed{2, 1});
  for (std::size_t t = 0; t < path.size(); ++t) EXPECT_EQ(s.positions[t], path[t].positions[2] - path[t].positions[1]);
  for (std::size_t t = 0; t < s.velocities.size(); ++t)
    EXPECT_EQ(s.velocities[t], s.positions[t + 1] - s.positions[t] + s.origin_steps[t]);
}

TEST(Sampling, Reproducible) {
  const auto p = RandomWalkParams::iid(2, 0.5);
  const auto path = sample_space_path(p, 10, RngSeed{3, 0});
  const auto k = kernels(2, 1)[2].kernel;
  const auto a = sample_particle_path(path, k, 0, RngSeed{3, 1});
  const auto b = sample_particle_path(path, k, 0, RngSeed{3, 1});
  EXPECT_EQ(a.indices, b.indices);
  EXPECT_EQ(a.velocities, b.velocities);
}

TEST(Sampling, MonteCarloAlphaAndMarginal) {
  const auto p = RandomWalkParams::iid(2, 0.5);
  const auto law = build_joint_law(p, SelectionKernel::uniform(), 0, 1);
  const auto va = velocity_kernel(alpha_from_joint(law.joint));
  const auto px = law.position_law();
  const int n = 100000;
  std::map<Label, int> x_count;
  std::map<std::pair<Label, Label>, int> xv_count;
  for (int k = 0; k < n; ++k) {
    const RngSeed seed{21, static_cast<std::uint64_t>(k)};
    const auto path = sample_space_path(p, 2, seed.substream(0));
    const auto s = sample_particle_path(path, SelectionKernel::uniform(), 0, seed.substream(1));
    ++x_count[s.positions[1]];
    ++xv_count[{s.positions[1], s.velocities[1]}];
  }
  for (Label a : px.support()) {
    const double q = px.prob(a);
    EXPECT_NEAR(x_count[a] / static_cast<double>(n), q, 3.0 * std::sqrt(q * (1 - q) / n) + 1e-12);
    for (Label c : va.to_support()) {
      const double e = va(a, c);
      const double na = x_count[a];
      if (na == 0) continue;
      EXPECT_NEAR((xv_count[{a, c}]) / na, e, 3.0 * std::sqrt(e * (1 - e) / na) + 1e-12) << a << ' ' << c;
    }
  }
}

TEST(Removal, SingleConfigurationSpace) {
  const auto law = build_joint_law(RandomWalkParams::iid(2, 0.3), SelectionKernel::uniform(), 0, 0);
  ASSERT_EQ(law.configs.size(), 1u);
  const auto e = condition_on_configuration(law, law.configs[0]);
  EXPECT_EQ(e.p_x, law.position_law());
  for (std::size_t k = 0; k < e.p_v.size(); ++k)
    EXPECT_NEAR(e.p_v.probs()[k], law.velocity_law().prob(e.p_v.support()[k]), 1e-15);
  const auto va = velocity_kernel(alpha_from_joint(law.joint));
  const auto d = delta_correction(law, law.configs[0], va);
  EXPECT_EQ(d.max_abs(), 0.0);
  EXPECT_LE(single_space_violation(e, unconditional_pair(law)).value, 1e-15);
}

TEST(Removal, ConditionalMatchesTableRatios) {
  const auto law = build_joint_law(RandomWalkParams::iid(2, 0.5), SelectionKernel::uniform(), 0, 1);
  const auto t = oracle::enumerate({0.5, 0.5}, 1, 0, [](std::size_t, std::size_t, const oracle::Config&) { return 0.25; });
  const oracle::Config s{1, -1};
  const auto e = condition_on_configuration(law, to_space(s, 1));
  const double ps = t.ps.at(s);
  EXPECT_NEAR(e.config_probability, 0.25, 1e-15);
  for (const auto& [a, pr] : t.xs.at(s)) EXPECT_NEAR(e.p_x.prob(a), pr / ps, 1e-14);
  for (const auto& [c, pr] : t.vs.at(s)) EXPECT_NEAR(e.p_v.prob(c), pr / ps, 1e-14);
  EXPECT_THROW((void)condition_on_configuration(law, to_space({3, 3}, 1)), NullEventError);
}

TEST(Removal, DeltaMatchesDoubleSum) {
  for (std::size_t m : {2u, 3u})
    for (int n : {1, 2}) {
      std::vector<double> p(m);
      for (std::size_t i = 0; i < m; ++i) p[i] = 0.5 - 0.15 * static_cast<double>(i);
      RandomWalkParams params;
      params.p_left = p;
      for (const auto& k : kernels(m, n)) {
        const auto law = build_joint_law(params, k.kernel, 0, n);
        const auto va = velocity_kernel(alpha_from_joint(law.joint));
        const auto t = oracle::enumerate(p, n, 0, k.pair);
        for (const auto& [s, ps] : t.ps) {
          if (ps <= 0.0) continue;
          const auto d = delta_correction(law, to_space(s, n), va);
          const auto o = oracle::delta(t, s);
          for (std::size_t c = 0; c < d.velocities.size(); ++c) {
            auto it = o.find(d.velocities[c]);
            EXPECT_NEAR(d.delta[c], it == o.end() ? 0.0 : it->second, 1e-10) << k.kernel.name();
          }
          EXPECT_NEAR(d.sum, 0.0, 1e-10);
          EXPECT_LE(d.reconstruction_residual, 1e-10);
        }
      }
    }
}

TEST(Removal, DeltaWitness) {
  const auto law = build_joint_law(RandomWalkParams::iid(2, 0.5), SelectionKernel::uniform(), 0, 1);
  const auto va = velocity_kernel(alpha_from_joint(law.joint));
  const auto d = delta_correction(law, to_space({-1, 1}, 1), va);
  EXPECT_GT(d.max_abs(), 1e-3);
  EXPECT_LT(d.min_value(), 0.0);
}

TEST(Removal, BayesDefect) {
  const auto law = build_joint_law(RandomWalkParams::iid(2, 0.4), kernels(2, 1)[3].kernel, 0, 1);
  const auto va = velocity_kernel(alpha_from_joint(law.joint));
  for (const auto& cfg : law.configs) {
    const auto e = condition_on_configuration(law, cfg);
    const auto d = delta_correction(law, cfg, va);
    const auto defect = bayes_defect(e, va);
    for (std::size_t k = 0; k < d.velocities.size(); ++k) {
      auto it = defect.find(d.velocities[k]);
      EXPECT_NEAR(it == defect.end() ? 0.0 : it->second, d.delta[k], 1e-12);
    }
    for (const auto& [c, v] : bayes_defect(e, e.alpha_cond)) EXPECT_NEAR(v, 0.0, 1e-12);
  }
}

TEST(Removal, ViolationAgainstOracle) {
  const auto law = build_joint_law(RandomWalkParams::iid(2, 0.5), SelectionKernel::uniform(), 0, 1);
  const auto t = oracle::enumerate({0.5, 0.5}, 1, 0, [](std::size_t, std::size_t, const oracle::Config&) { return 0.25; });
  const auto pair = unconditional_pair(law);
  for (const auto& [s, ps] : t.ps) {
    const auto e = condition_on_configuration(law, to_space(s, 1));
    // oracle: |P[V=c|X=a] P_S[X=a] - P[X=a|V=c] P_S[V=c]| maximized over (a, c)
    std::map<long, double> pa, pc;
    for (const auto& [k, v] : t.xv) {
      pa[k.first] += v;
      pc[k.second] += v;
    }
    double worst = 0.0;
    for (const auto& [k, v] : t.xv) {
      const double fwd = v / pa[k.first], rev = v / pc[k.second];
      const double px = t.xs.at(s).count(k.first) ? t.xs.at(s).at(k.first) / ps : 0.0;
      const double pv = t.vs.at(s).count(k.second) ? t.vs.at(s).at(k.second) / ps : 0.0;
      worst = std::max(worst, std::abs(fwd * px - rev * pv));
    }
    const double got = single_space_violation(e, pair).value;
    EXPECT_NEAR(got, worst, 1e-13);
    EXPECT_GT(got, 0.0);
    EXPECT_LE(single_space_violation(e, conditional_pair(e)).value, 1e-10);
    EXPECT_LE(bayes_symmetry_gap(e), 1e-12);
  }
}

TEST(Removal, ZeroDeltaMeansZeroViolationForSingleConfig) {
  const auto law = build_joint_law(RandomWalkParams::iid(3, 0.7), SelectionKernel::weighted({0.2, 0.3, 0.5}), 1, 0);
  const auto e = condition_on_configuration(law, law.configs[0]);
  EXPECT_EQ(single_space_violation(e, unconditional_pair(law)).value, 0.0);
}
