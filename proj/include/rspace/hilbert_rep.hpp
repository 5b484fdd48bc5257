#pragma once

// Finite Hilbert-space picture after removal: diagonal position operator,
// velocity operator U diag(v) U^dagger for a unitary U whose squared moduli
// reproduce the transition probabilities, and the certificates built on it.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rspace/errors.hpp"
#include "rspace/prob.hpp"

namespace rspace {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;

inline std::size_t hilbert_dimension(std::size_t m) {
  require(m >= 2, "hilbert_dimension: M must be at least 2");
  return m * m;
}

class HermitianOperator {
 public:
  explicit HermitianOperator(CMatrix a) : a_(std::move(a)) {
    require(a_.rows() == a_.cols(), "hermitian operator: matrix not square");
    require((a_ - a_.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, a_.cwiseAbs().maxCoeff()),
            "hermitian operator: matrix not hermitian");
  }
  [[nodiscard]] const CMatrix& matrix() const { return a_; }
  [[nodiscard]] Eigen::Index dim() const { return a_.rows(); }
  [[nodiscard]] Eigen::VectorXd spectrum() const {
    return Eigen::SelfAdjointEigenSolver<CMatrix>(a_, Eigen::EigenvaluesOnly).eigenvalues();
  }

 private:
  CMatrix a_;
};

class UnitaryMatrix {
 public:
  explicit UnitaryMatrix(CMatrix u) : u_(std::move(u)) {
    require(u_.rows() == u_.cols(), "unitary: matrix not square");
    const CMatrix e = u_ * u_.adjoint() - CMatrix::Identity(u_.rows(), u_.cols());
    require(Eigen::JacobiSVD<CMatrix>(e).singularValues()(0) <= 1e-10, "unitary: U U^dagger != I");
  }
  [[nodiscard]] const CMatrix& matrix() const { return u_; }
  [[nodiscard]] Eigen::Index dim() const { return u_.rows(); }
  /// Squared moduli |<x|v>|^2; rows x, columns v.
  [[nodiscard]] RMatrix overlaps() const { return u_.cwiseAbs2(); }

 private:
  CMatrix u_;
};

class StateVector {
 public:
  explicit StateVector(CVector a) : a_(std::move(a)) {
    require(std::abs(a_.squaredNorm() - 1.0) <= 1e-12, "state: squared norm != 1");
  }
  [[nodiscard]] const CVector& amplitudes() const { return a_; }
  [[nodiscard]] Eigen::Index dim() const { return a_.size(); }

 private:
  CVector a_;
};

inline HermitianOperator build_position_operator(const std::vector<double>& support) {
  require(!support.empty(), "position operator: empty support");
  std::vector<double> s = support;
  std::sort(s.begin(), s.end());
  require(std::adjacent_find(s.begin(), s.end()) == s.end(), "position operator: outcomes must be distinct");
  CMatrix x = CMatrix::Zero(static_cast<Eigen::Index>(support.size()), static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = support[k];
  return HermitianOperator(std::move(x));
}

/// Unitary polar factor W V^dagger of A = W S V^dagger.
inline CMatrix polar_unitary(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

inline CMatrix fourier_matrix(Eigen::Index d) {
  CMatrix f(d, d);
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index k = 0; k < d; ++k)
      f(j, k) = std::polar(s, 2.0 * std::numbers::pi * static_cast<double>(j * k) / static_cast<double>(d));
  return f;
}

struct SynthesisResult {
  CMatrix u;
  double residual = 0.0;
  std::size_t iterations = 0;
  std::size_t restarts = 0;
};

inline void require_doubly_stochastic(const RMatrix& t, double tol = 1e-9) {
  require(t.rows() == t.cols() && t.rows() > 0, "overlap target: matrix must be square");
  require(t.minCoeff() >= 0.0, "overlap target: negative entry");
  for (Eigen::Index k = 0; k < t.rows(); ++k) {
    require(std::abs(t.row(k).sum() - 1.0) <= tol, "overlap target: row " + std::to_string(k) + " does not sum to 1");
    require(std::abs(t.col(k).sum() - 1.0) <= tol, "overlap target: column " + std::to_string(k) + " does not sum to 1");
  }
}

namespace detail {

// Levenberg-Marquardt on U exp(iH), H Hermitian, for the residual |U|^2 - target.
inline CMatrix polish_overlap_unitary(CMatrix u, const RMatrix& target, double tol, std::size_t max_iter = 200) {
  const Eigen::Index d = u.rows(), n = d * d;
  std::vector<CMatrix> basis;
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index k = j; k < d; ++k) {
      CMatrix g = CMatrix::Zero(d, d);
      g(j, k) = g(k, j) = 1.0;
      basis.push_back(g);
      if (j != k) {
        g(j, k) = cplx(0, 1);
        g(k, j) = cplx(0, -1);
        basis.push_back(g);
      }
    }
  auto residual = [&](const CMatrix& v) {
    Eigen::VectorXd r(n);
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b) r(a * d + b) = std::norm(v(a, b)) - target(a, b);
    return r;
  };
  Eigen::VectorXd r = residual(u);
  double lambda = 1e-3;
  for (std::size_t it = 0; it < max_iter && r.cwiseAbs().maxCoeff() > tol; ++it) {
    Eigen::MatrixXd jac(n, n);
    for (Eigen::Index p = 0; p < n; ++p) {
      const CMatrix du = u * (cplx(0, 1) * basis[static_cast<std::size_t>(p)]);
      for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b) jac(a * d + b, p) = 2.0 * (std::conj(u(a, b)) * du(a, b)).real();
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 20 && !improved; ++tries) {
      Eigen::MatrixXd lhs = jtj;
      lhs.diagonal().array() += lambda * (1.0 + jtj.diagonal().array());
      const Eigen::VectorXd step = lhs.ldlt().solve(-g);
      CMatrix h = CMatrix::Zero(d, d);
      for (Eigen::Index p = 0; p < n; ++p) h += step(p) * basis[static_cast<std::size_t>(p)];
      Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
      const CVector ph = (cplx(0, 1) * es.eigenvalues().cast<cplx>()).array().exp();
      const CMatrix trial = polar_unitary(u * es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint());
      const Eigen::VectorXd rt = residual(trial);
      if (rt.squaredNorm() < r.squaredNorm()) {
        u = trial;
        r = rt;
        lambda = std::max(lambda / 5.0, 1e-15);
        improved = true;
      } else {
        lambda *= 8.0;
      }
    }
    if (!improved) break;
  }
  return u;
}

}  // namespace detail

/// Alternating projections between unitaries and matrices with moduli
/// sqrt(target). The first attempt starts from Fourier phases, later restarts
/// from seeded random phases, and each attempt ends with a local
/// least-squares polish. The residual max | |U|^2 - target | is returned,
/// not thrown: a target need not be unistochastic.
inline SynthesisResult synthesize_overlap_unitary(const RMatrix& target, std::size_t max_iter = 10000,
                                                  double tol = 1e-13, std::uint64_t seed = 1) {
  require_doubly_stochastic(target);
  const Eigen::Index d = target.rows();
  const RMatrix mod = target.cwiseSqrt();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  SynthesisResult best;
  best.residual = std::numeric_limits<double>::infinity();
  const std::size_t per_start = std::max<std::size_t>(200, max_iter / 8);
  std::size_t used = 0;
  CMatrix start = fourier_matrix(d);
  while (used < max_iter) {
    CMatrix a(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index k = 0; k < d; ++k) a(j, k) = mod(j, k) * start(j, k) / std::max(std::abs(start(j, k)), 1e-300);
    CMatrix u = polar_unitary(a);
    double prev = std::numeric_limits<double>::infinity();
    std::size_t stall = 0;
    const std::size_t budget = std::min(per_start, max_iter - used);
    for (std::size_t it = 0; it < budget; ++it, ++used) {
      const double res = (u.cwiseAbs2() - target).cwiseAbs().maxCoeff();
      if (res < best.residual) {
        best.residual = res;
        best.u = u;
        best.iterations = used;
      }
      if (res <= tol) return best;
      stall = res > prev * (1.0 - 1e-6) ? stall + 1 : 0;
      if (stall > 50) break;
      prev = res;
      for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index k = 0; k < d; ++k) {
          const double m = std::abs(u(j, k));
          a(j, k) = m > 1e-300 ? mod(j, k) * u(j, k) / m : cplx(mod(j, k), 0.0);
        }
      u = polar_unitary(a);
    }
    const CMatrix polished = detail::polish_overlap_unitary(best.u, target, tol);
    const double pres = (polished.cwiseAbs2() - target).cwiseAbs().maxCoeff();
    if (pres < best.residual) {
      best.residual = pres;
      best.u = polished;
    }
    if (best.residual <= tol) return best;
    ++used;
    ++best.restarts;
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index k = 0; k < d; ++k) start(j, k) = std::polar(1.0, phase(rng));
  }
  return best;
}

inline HermitianOperator build_velocity_operator(const UnitaryMatrix& u, const std::vector<double>& v_support) {
  require(static_cast<Eigen::Index>(v_support.size()) == u.dim(), "velocity operator: dimension mismatch");
  Eigen::VectorXcd diag(u.dim());
  for (Eigen::Index k = 0; k < u.dim(); ++k) diag(k) = v_support[static_cast<std::size_t>(k)];
  CMatrix v = u.matrix() * diag.asDiagonal() * u.matrix().adjoint();
  v = 0.5 * (v + v.adjoint());
  return HermitianOperator(std::move(v));
}

/// Operator norm of X V - V X.
inline double commutator_certificate(const HermitianOperator& x, const HermitianOperator& v) {
  require(x.dim() == v.dim(), "commutator: dimension mismatch");
  const CMatrix c = x.matrix() * v.matrix() - v.matrix() * x.matrix();
  return Eigen::JacobiSVD<CMatrix>(c).singularValues()(0);
}

inline double shannon(const Eigen::VectorXd& p, double base = std::exp(1.0)) {
  std::vector<double> v(p.data(), p.data() + p.size());
  return entropy(std::span<const double>(v), base);
}

/// Born-rule law of V: |<v|psi>|^2 with |v> = U e_v.
inline Eigen::VectorXd born_velocity(const StateVector& psi, const UnitaryMatrix& u) {
  require(psi.dim() == u.dim(), "born_velocity: dimension mismatch");
  return (u.matrix().adjoint() * psi.amplitudes()).cwiseAbs2();
}

inline StateVector random_state(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  CVector a(d);
  for (Eigen::Index k = 0; k < d; ++k) a(k) = cplx(z(rng), z(rng));
  return StateVector(a / a.norm());
}

struct MaassenReport {
  double c_star = 0.0;
  double bound = 0.0;
  bool bound_asserted = true;  // only in natural-log units
  bool pass = false;
  std::size_t battery_trials = 0;
  std::size_t battery_violations = 0;
  double battery_min_slack = 0.0;
};

/// c* = max |U_xv| against e^{-D/2}, plus the Maassen-Uffink battery
/// H(X) + H(V) >= -2 ln c* on random states.
inline MaassenReport maassen_certificate(const UnitaryMatrix& u, double d, double base = std::exp(1.0),
                                         std::size_t trials = 1000, std::uint64_t seed = 7) {
  MaassenReport r;
  r.c_star = u.matrix().cwiseAbs().maxCoeff();
  r.bound = std::exp(-d / 2.0);
  r.bound_asserted = std::abs(base - std::exp(1.0)) < 1e-15;
  r.pass = r.bound_asserted && r.c_star <= r.bound + 1e-9;
  const double mu = -2.0 * std::log(r.c_star);
  std::mt19937_64 rng(seed);
  r.battery_min_slack = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < trials; ++k) {
    const StateVector psi = random_state(u.dim(), rng);
    const double h = shannon(psi.amplitudes().cwiseAbs2()) + shannon(born_velocity(psi, u));
    const double slack = h - mu;
    r.battery_min_slack = std::min(r.battery_min_slack, slack);
    if (slack < -1e-12) ++r.battery_violations;
    ++r.battery_trials;
  }
  return r;
}

/// Amplitudes sqrt(p(x)) e^{i theta_x} over the distribution's support.
inline StateVector state_from_conditional(const FiniteDistribution& p, const std::vector<double>& phases = {}) {
  require(phases.empty() || phases.size() == p.size(), "state_from_conditional: one phase per outcome");
  CVector a(static_cast<Eigen::Index>(p.size()));
  for (std::size_t k = 0; k < p.size(); ++k)
    a(static_cast<Eigen::Index>(k)) = std::polar(std::sqrt(p.probs()[k]), phases.empty() ? 0.0 : phases[k]);
  return StateVector(a / a.norm());
}

struct InterferenceReport {
  Eigen::VectorXd born;          // |<v|psi>|^2
  Eigen::VectorXd bayes;         // sum_x alpha(v|x) |<x|psi>|^2
  Eigen::VectorXd interference;  // sum_{x != x'} <x|psi><psi|x'><x'|v><v|x>
  double max_imag = 0.0;
  double alpha_mismatch = 0.0;   // max | alpha - |U|^2 |
};

/// `alpha(x, v)` is the transition probability from position x to velocity
/// v; it must agree with |U|^2 within `tol`.
inline InterferenceReport interference_decomposition(const StateVector& psi, const UnitaryMatrix& u,
                                                     const RMatrix& alpha, double tol = 1e-6) {
  const Eigen::Index d = u.dim();
  require(psi.dim() == d && alpha.rows() == d && alpha.cols() == d, "interference: dimension mismatch");
  InterferenceReport r;
  r.alpha_mismatch = (alpha - u.overlaps()).cwiseAbs().maxCoeff();
  if (r.alpha_mismatch > tol)
    throw ValidationError("interference: alpha differs from |U|^2 by " + std::to_string(r.alpha_mismatch));
  const CVector& a = psi.amplitudes();
  const CMatrix& m = u.matrix();
  r.born = born_velocity(psi, u);
  r.bayes = alpha.transpose() * a.cwiseAbs2();
  r.interference = Eigen::VectorXd::Zero(d);
  for (Eigen::Index v = 0; v < d; ++v) {
    cplx cross = 0.0;
    for (Eigen::Index x = 0; x < d; ++x)
      for (Eigen::Index y = 0; y < d; ++y)
        if (x != y) cross += a(x) * std::conj(a(y)) * m(y, v) * std::conj(m(x, v));
    r.interference(v) = cross.real();
    r.max_imag = std::max(r.max_imag, std::abs(cross.imag()));
  }
  return r;
}

/// Overlap target on the M^2 labels: X-label (o, j) for origin o and selected
/// walker j, V-label (i, j') for I_{N+1} = i and I_N = j'. The entry is
/// delta_{j j'} K(i | j). Doubly stochastic only for the uniform K.
inline RMatrix model_overlap_target(const std::vector<std::vector<double>>& k) {
  const std::size_t m = k.size();
  const std::size_t d = hilbert_dimension(m);
  RMatrix t = RMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t o = 0; o < m; ++o)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t i = 0; i < m; ++i) {
        require(k[j].size() == m, "model_overlap_target: kernel must be M x M");
        t(static_cast<Eigen::Index>(o * m + j), static_cast<Eigen::Index>(i * m + j)) = k[j][i];
      }
  return t;
}

}  // namespace rspace
