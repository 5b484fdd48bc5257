#pragma once

// Selection kernels paired with hand-written pair functions for the oracle.

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rspace/particle_process.hpp"

namespace fixture {

struct NamedKernel {
  rspace::SelectionKernel kernel;
  oracle::PairFn pair;
};

inline std::vector<double> config_weights(const oracle::Config& s) {
  std::vector<double> w;
  double t = 0.0;
  for (long x : s) t += w.emplace_back(1.0 + std::abs(static_cast<double>(x)));
  for (double& x : w) x /= t;
  return w;
}

// Five selection laws for M walkers at step n, each with a hand-written pair function.
inline std::vector<NamedKernel> kernels(std::size_t m, int n) {
  std::vector<NamedKernel> out;
  out.push_back({rspace::SelectionKernel::uniform(), [m](std::size_t, std::size_t, const oracle::Config&) {
                   return 1.0 / static_cast<double>(m * m);
                 }});
  std::vector<double> w(m);
  for (std::size_t k = 0; k < m; ++k) w[k] = static_cast<double>(k + 1) / static_cast<double>(m * (m + 1) / 2);
  out.push_back({rspace::SelectionKernel::weighted(w), [w](std::size_t j, std::size_t i, const oracle::Config&) {
                   return w[j] * w[i];
                 }});
  std::vector<std::vector<double>> k(m, std::vector<double>(m, 0.1 / static_cast<double>(m - 1)));
  for (std::size_t j = 0; j < m; ++j) k[j][j] = 0.9;
  std::vector<double> w0(m, 0.0);
  w0[m - 1] = 1.0;
  std::vector<double> lawn = w0;
  for (int t = 0; t < n; ++t) {
    std::vector<double> nx(m, 0.0);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t i = 0; i < m; ++i) nx[i] += lawn[j] * k[j][i];
    lawn = nx;
  }
  out.push_back({rspace::SelectionKernel::markov(w0, k), [lawn, k](std::size_t j, std::size_t i, const oracle::Config&) {
                   return lawn[j] * k[j][i];
                 }});
  out.push_back({rspace::SelectionKernel::space_dependent([](const rspace::SpaceConfiguration& s) {
                   std::vector<long> c(s.positions.begin(), s.positions.end());
                   const auto cw = config_weights(c);
                   rspace::PairLaw p(cw.size(), std::vector<double>(cw.size()));
                   for (std::size_t j = 0; j < cw.size(); ++j)
                     for (std::size_t i = 0; i < cw.size(); ++i) p[j][i] = cw[j] * cw[i];
                   return p;
                 }),
                 [](std::size_t j, std::size_t i, const oracle::Config& s) {
                   const auto cw = config_weights(s);
                   return cw[j] * cw[i];
                 }});
  // stay on the same walker, start uniform
  std::vector<std::vector<double>> eye(m, std::vector<double>(m, 0.0));
  for (std::size_t j = 0; j < m; ++j) eye[j][j] = 1.0;
  out.push_back({rspace::SelectionKernel::markov(std::vector<double>(m, 1.0 / static_cast<double>(m)), eye),
                 [m](std::size_t j, std::size_t i, const oracle::Config&) {
                   return j == i ? 1.0 / static_cast<double>(m) : 0.0;
                 }});
  return out;
}

inline rspace::SpaceConfiguration to_space(const oracle::Config& c, std::int64_t n) {
  return rspace::SpaceConfiguration{std::vector<rspace::Label>(c.begin(), c.end()), n};
}

}  // namespace fixture
