#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "rspace/hilbert_rep.hpp"

using namespace rspace;

namespace {

CMatrix random_unitary(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  CMatrix g(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) g(a, b) = cplx(z(rng), z(rng));
  return polar_unitary(g);
}

std::vector<double> iota(Eigen::Index d) {
  std::vector<double> v(static_cast<std::size_t>(d));
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = static_cast<double>(k);
  return v;
}

double plain_entropy(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k)
    if (p(k) > 0) h -= p(k) * std::log(p(k));
  return h;
}

}  // namespace

TEST(Dimension, SquareOfM) {
  EXPECT_EQ(hilbert_dimension(2), 4u);
  EXPECT_EQ(hilbert_dimension(3), 9u);
  EXPECT_THROW((void)hilbert_dimension(1), ValidationError);
}

TEST(PositionOperator, Diagonal) {
  EXPECT_EQ(build_position_operator({0}).matrix()(0, 0), cplx(0, 0));
  const auto x = build_position_operator({-1, 0, 1});
  EXPECT_EQ(x.matrix()(0, 0), cplx(-1, 0));
  EXPECT_EQ(x.matrix()(2, 2), cplx(1, 0));
  EXPECT_EQ(x.matrix()(0, 1), cplx(0, 0));
  const auto s = x.spectrum();
  EXPECT_NEAR(s(0), -1.0, 1e-15);
  EXPECT_NEAR(s(2), 1.0, 1e-15);
  EXPECT_THROW((void)build_position_operator({1, 1}), ValidationError);
}

TEST(Synthesis, FlatTarget) {
  const RMatrix flat = RMatrix::Constant(4, 4, 0.25);
  const auto s = synthesize_overlap_unitary(flat);
  EXPECT_LT(s.residual, 1e-12);
  EXPECT_NEAR(UnitaryMatrix(s.u).overlaps()(1, 2), 0.25, 1e-12);
}

TEST(Synthesis, Permutation) {
  RMatrix p = RMatrix::Zero(3, 3);
  p(0, 2) = p(1, 0) = p(2, 1) = 1.0;
  const auto s = synthesize_overlap_unitary(p);
  EXPECT_LE(s.residual, 1e-15);
  EXPECT_NEAR((s.u.cwiseAbs2() - p).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(Synthesis, ConstructThenRecoverThree) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 5; ++t) {
    const CMatrix w = random_unitary(3, rng);
    const auto s = synthesize_overlap_unitary(w.cwiseAbs2(), 10000);
    EXPECT_LT(s.residual, 1e-8);
    EXPECT_NO_THROW(UnitaryMatrix{s.u});
  }
}

TEST(Synthesis, RejectsNonDoublyStochastic) {
  RMatrix t(2, 2);
  t << 0.9, 0.1, 0.9, 0.1;
  EXPECT_THROW((void)synthesize_overlap_unitary(t), ValidationError);
}

TEST(VelocityOperator, Cases) {
  const auto v = build_velocity_operator(UnitaryMatrix(CMatrix::Identity(3, 3)), {1, 2, 3});
  EXPECT_EQ(v.matrix()(1, 1), cplx(2, 0));
  CMatrix perm = CMatrix::Zero(3, 3);
  perm(0, 1) = perm(1, 2) = perm(2, 0) = 1.0;
  const auto vp = build_velocity_operator(UnitaryMatrix(perm), {1, 2, 3});
  EXPECT_NEAR(vp.matrix()(0, 0).real(), 2.0, 1e-15);
  EXPECT_NEAR(vp.matrix()(1, 1).real(), 3.0, 1e-15);
  std::mt19937_64 rng(2);
  const auto vr = build_velocity_operator(UnitaryMatrix(random_unitary(5, rng)), {-2, -1, 0, 1, 4});
  const auto spec = vr.spectrum();
  const std::vector<double> want{-2, -1, 0, 1, 4};
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(spec(k), want[static_cast<std::size_t>(k)], 1e-10);
}

TEST(Commutator, Cases) {
  const auto x = build_position_operator(iota(4));
  EXPECT_EQ(commutator_certificate(x, build_velocity_operator(UnitaryMatrix(CMatrix::Identity(4, 4)), iota(4))), 0.0);
  const CMatrix f = fourier_matrix(4);
  const auto v = build_velocity_operator(UnitaryMatrix(f), iota(4));
  const double c = commutator_certificate(x, v);
  EXPECT_GT(c, 0.1);
  // direct arithmetic: V = F diag(0..3) F^dagger, C = XV - VX, spectral norm via eigen of C^dagger C
  CMatrix vv = CMatrix::Zero(4, 4);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int k = 0; k < 4; ++k) vv(a, b) += f(a, k) * static_cast<double>(k) * std::conj(f(b, k));
  CMatrix cc(4, 4);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) cc(a, b) = (static_cast<double>(a) - static_cast<double>(b)) * vv(a, b);
  const double oracle = std::sqrt(Eigen::SelfAdjointEigenSolver<CMatrix>(cc.adjoint() * cc).eigenvalues().maxCoeff());
  EXPECT_NEAR(c, oracle, 1e-10);
  std::mt19937_64 rng(4);
  const CMatrix w = random_unitary(4, rng);
  const HermitianOperator xr(w * x.matrix() * w.adjoint()), vr(w * v.matrix() * w.adjoint());
  EXPECT_NEAR(commutator_certificate(xr, vr), c, 1e-10);
}

TEST(Maassen, FlatDimFour) {
  const auto r = maassen_certificate(UnitaryMatrix(fourier_matrix(4)), std::numbers::ln2);
  EXPECT_NEAR(r.c_star, 0.5, 1e-15);
  EXPECT_NEAR(r.bound, std::exp(-std::numbers::ln2 / 2), 1e-15);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.battery_violations, 0u);
}

TEST(Maassen, IdentityFails) {
  const auto r = maassen_certificate(UnitaryMatrix(CMatrix::Identity(4, 4)), 0.3);
  EXPECT_EQ(r.c_star, 1.0);
  EXPECT_FALSE(r.pass);
}

TEST(Maassen, RandomUnitaryBattery) {
  std::mt19937_64 rng(6);
  const auto r = maassen_certificate(UnitaryMatrix(random_unitary(5, rng)), 0.1, std::exp(1.0), 1000, 3);
  EXPECT_EQ(r.battery_trials, 1000u);
  EXPECT_EQ(r.battery_violations, 0u);
}

TEST(Maassen, ModelTargetForUniformSelection) {
  const RMatrix t = model_overlap_target({{0.5, 0.5}, {0.5, 0.5}});
  const auto s = synthesize_overlap_unitary(t);
  EXPECT_LT(s.residual, 1e-12);
  const auto r = maassen_certificate(UnitaryMatrix(s.u), std::numbers::ln2);
  EXPECT_NEAR(r.c_star, 1.0 / std::sqrt(2.0), 1e-9);
  EXPECT_TRUE(r.pass);
}

TEST(State, FromConditional) {
  const auto pm = state_from_conditional(FiniteDistribution::point_mass(3));
  EXPECT_EQ(pm.amplitudes()(0), cplx(1, 0));
  const auto u = state_from_conditional(FiniteDistribution::uniform({0, 1, 2, 3}));
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(std::abs(u.amplitudes()(k)), 0.5, 1e-15);
  const auto psi = state_from_conditional(FiniteDistribution({0, 1, 2, 3}, {0.1, 0.2, 0.3, 0.4}), {0.3, 1.0, -2.0, 0.0});
  const CMatrix f = fourier_matrix(4);
  const auto born = born_velocity(psi, UnitaryMatrix(f));
  for (int v = 0; v < 4; ++v) {
    cplx amp = 0.0;
    for (int x = 0; x < 4; ++x) amp += std::conj(f(x, v)) * psi.amplitudes()(x);
    EXPECT_NEAR(born(v), std::norm(amp), 1e-12);
  }
  EXPECT_NEAR(shannon(born), plain_entropy(born), 1e-15);
}

TEST(Interference, BasisStateHasNone) {
  CVector e = CVector::Zero(4);
  e(2) = 1.0;
  const UnitaryMatrix f(fourier_matrix(4));
  const auto r = interference_decomposition(StateVector(e), f, f.overlaps());
  EXPECT_EQ(r.interference.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NEAR((r.born - r.bayes).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(Interference, FlatStateFourier) {
  const UnitaryMatrix f(fourier_matrix(4));
  const auto psi = state_from_conditional(FiniteDistribution::uniform({0, 1, 2, 3}));
  const auto r = interference_decomposition(psi, f, f.overlaps());
  EXPECT_GT(r.interference.cwiseAbs().maxCoeff(), 0.1);
  EXPECT_NEAR(r.interference.sum(), 0.0, 1e-12);
  EXPECT_NEAR((r.born - r.bayes - r.interference).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Interference, RandomStatesSumToZero) {
  std::mt19937_64 rng(17);
  const UnitaryMatrix u(random_unitary(6, rng));
  for (int t = 0; t < 200; ++t) {
    const auto r = interference_decomposition(random_state(6, rng), u, u.overlaps());
    EXPECT_NEAR(r.interference.sum(), 0.0, 1e-10);
    EXPECT_LE((r.born - r.bayes - r.interference).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Interference, InconsistentAlphaRejected) {
  const UnitaryMatrix f(fourier_matrix(3));
  EXPECT_THROW((void)interference_decomposition(state_from_conditional(FiniteDistribution::uniform({0, 1, 2})), f,
                                                RMatrix::Identity(3, 3)),
               ValidationError);
}
