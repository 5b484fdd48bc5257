#pragma once

// Brute-force reference computations shared by the unit and acceptance tests.
// They enumerate raw step sequences and index pairs and never call the
// library's enumeration or conditioning code.

#include <cmath>
#include <functional>
#include <map>
#include <vector>

namespace oracle {

using Config = std::vector<long>;
// P[I_N = j, I_{N+1} = i] given the configuration at N
using PairFn = std::function<double(std::size_t j, std::size_t i, const Config& s)>;

struct Tables {
  std::map<Config, double> ps;                               // P[S_N = s]
  std::map<std::pair<long, long>, double> xv;                // P[X = a, V = c]
  std::map<Config, std::map<long, double>> xs;               // P[X = a, S = s]
  std::map<Config, std::map<long, double>> vs;               // P[V = c, S = s]
  std::map<Config, std::map<std::pair<long, long>, double>> xvs;
};

/// Walkers start at 0 and take N+1 steps of size +-1 (left with p[i]). The
/// particle sits on walker j at N and i at N+1; both positions are read
/// relative to the origin walker at time N.
inline Tables enumerate(const std::vector<double>& p, int n, std::size_t origin, const PairFn& pair) {
  const std::size_t m = p.size();
  const int steps = n + 1;
  const long total_bits = static_cast<long>(m) * steps;
  Tables t;
  for (long mask = 0; mask < (1L << total_bits); ++mask) {
    Config at_n(m, 0), at_n1(m, 0);
    double pr = 1.0;
    for (std::size_t w = 0; w < m; ++w) {
      long pos = 0;
      for (int k = 0; k < steps; ++k) {
        const bool left = (mask >> (static_cast<long>(w) * steps + k)) & 1L;
        pos += left ? -1 : 1;
        pr *= left ? p[w] : 1.0 - p[w];
        if (k == n - 1) at_n[w] = pos;
      }
      if (n == 0) at_n[w] = 0;
      at_n1[w] = pos;
    }
    t.ps[at_n] += pr;
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t i = 0; i < m; ++i) {
        const double q = pr * pair(j, i, at_n);
        if (q == 0.0) continue;
        const long a = at_n[j] - at_n[origin];
        const long c = at_n1[i] - at_n[j];
        t.xv[{a, c}] += q;
        t.xs[at_n][a] += q;
        t.vs[at_n][c] += q;
        t.xvs[at_n][{a, c}] += q;
      }
  }
  return t;
}

/// Unconditional alpha(c | a).
inline double alpha(const Tables& t, long a, long c) {
  double pa = 0.0, pac = 0.0;
  for (const auto& [k, v] : t.xv)
    if (k.first == a) {
      pa += v;
      if (k.second == c) pac += v;
    }
  return pa > 0.0 ? pac / pa : 0.0;
}

/// delta(c) for configuration s by the double sum over the other configurations.
inline std::map<long, double> delta(const Tables& t, const Config& s) {
  std::map<long, double> out;
  std::vector<long> cs;
  for (const auto& [k, v] : t.xv) cs.push_back(k.second);
  const double ps = t.ps.at(s);
  for (long c : cs) {
    double acc = 0.0;
    for (const auto& [s2, xrow] : t.xs) {
      if (s2 == s) continue;
      for (const auto& [a, pxa] : xrow) acc += alpha(t, a, c) * pxa;
      auto it = t.vs.at(s2).find(c);
      if (it != t.vs.at(s2).end()) acc -= it->second;
    }
    out[c] = acc / ps;
  }
  return out;
}

inline double eta(double x) { return x > 0.0 ? -x * std::log(x) : 0.0; }

}  // namespace oracle
