#pragma once

// Distances on finite point sets: the nearest-neighbour chain distance and
// the triangle-counting distance, with semi-metric checks and the searches
// that produce their counterexamples.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rspace/errors.hpp"
#include "rspace/prob.hpp"

namespace rspace::geo {

struct Point {
  Label label = 0;
  double x = 0.0;
  double y = 0.0;
};

struct PointSet {
  int dim = 2;
  std::vector<Point> points;

  PointSet() = default;
  PointSet(int d, std::vector<Point> pts) : dim(d), points(std::move(pts)) { validate(); }

  void validate() const {
    require(dim == 1 || dim == 2, "point set: dimension must be 1 or 2");
    std::set<Label> seen;
    for (const auto& p : points) require(seen.insert(p.label).second, "point set: duplicate label");
  }

  [[nodiscard]] std::size_t index_of(Label label) const {
    for (std::size_t k = 0; k < points.size(); ++k)
      if (points[k].label == label) return k;
    throw ValidationError("point set: no point labelled " + std::to_string(label));
  }

  [[nodiscard]] std::vector<Label> labels() const {
    std::vector<Label> out;
    for (const auto& p : points) out.push_back(p.label);
    return out;
  }

  /// Integer grid points labelled 0, 1, ... in the given order.
  static PointSet from_grid(const std::vector<std::pair<std::int64_t, std::int64_t>>& xy) {
    std::vector<Point> pts;
    for (std::size_t k = 0; k < xy.size(); ++k)
      pts.push_back(Point{static_cast<Label>(k), static_cast<double>(xy[k].first), static_cast<double>(xy[k].second)});
    return PointSet(2, std::move(pts));
  }
};

inline double squared_distance(const Point& a, const Point& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

/// All nearest points to A outside `exclusions` (several labels on a tie).
inline std::vector<Label> closest_point(Label a, const PointSet& set, const std::set<Label>& exclusions = {}) {
  const Point& pa = set.points[set.index_of(a)];
  double best = std::numeric_limits<double>::infinity();
  std::vector<Label> out;
  for (const auto& p : set.points) {
    if (p.label == a || exclusions.count(p.label)) continue;
    const double d = squared_distance(pa, p);
    if (d < best) {
      best = d;
      out.assign(1, p.label);
    } else if (d == best) {
      out.push_back(p.label);
    }
  }
  if (out.empty()) throw ValidationError("closest_point: no candidate points");
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {
/// Chain length from `cur` to point `b`; `mask` holds A and the points
/// already visited. Ties branch, the shortest chain wins.
inline int nng_chain(std::size_t cur, std::size_t b, std::uint64_t mask, const std::vector<std::vector<double>>& d2,
                     std::map<std::pair<std::size_t, std::uint64_t>, int>& memo) {
  const auto key = std::make_pair(cur, mask);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  const std::size_t n = d2.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k)
    if (k != cur && !(mask >> k & 1U)) best = std::min(best, d2[cur][k]);
  int result = std::numeric_limits<int>::max();
  for (std::size_t k = 0; k < n; ++k) {
    if (k == cur || (mask >> k & 1U) || d2[cur][k] != best) continue;
    const int len = k == b ? 1 : 1 + nng_chain(k, b, mask | (std::uint64_t{1} << k), d2, memo);
    result = std::min(result, len);
  }
  memo[key] = result;
  return result;
}

inline std::vector<std::vector<double>> distance_table(const PointSet& set) {
  const std::size_t n = set.points.size();
  std::vector<std::vector<double>> d2(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d2[i][j] = squared_distance(set.points[i], set.points[j]);
  return d2;
}
}  // namespace detail

/// Number of points collected on the exclusion chain from A until B.
inline int nng_delta(Label a, Label b, const PointSet& set) {
  require(a != b, "nng_delta: A and B must differ");
  require(set.points.size() <= 64, "nng_delta: at most 64 points");
  const std::size_t ia = set.index_of(a), ib = set.index_of(b);
  std::map<std::pair<std::size_t, std::uint64_t>, int> memo;
  const int len = detail::nng_chain(ia, ib, std::uint64_t{1} << ia, detail::distance_table(set), memo);
  if (len == std::numeric_limits<int>::max()) throw std::logic_error("nng_delta: chain never reached B");
  return len;
}

inline double nng_distance(Label a, Label b, const PointSet& set) {
  if (a == b) return 0.0;
  return 0.5 * (nng_delta(a, b, set) + nng_delta(b, a, set));
}

/// All chain lengths delta(a, b) of a small integer point set, a != b.
/// Same recursion as nng_delta on exact squared distances with a flat memo.
inline std::vector<std::vector<int>> nng_delta_table(const std::vector<std::pair<std::int64_t, std::int64_t>>& xy) {
  const std::size_t n = xy.size();
  require(n <= 16, "nng_delta_table: at most 16 points");
  std::vector<std::vector<std::int64_t>> d2(n, std::vector<std::int64_t>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const std::int64_t dx = xy[i].first - xy[j].first, dy = xy[i].second - xy[j].second;
      d2[i][j] = dx * dx + dy * dy;
    }
  std::vector<std::vector<int>> out(n, std::vector<int>(n, 0));
  std::vector<int> memo(n << n);
  for (std::size_t b = 0; b < n; ++b) {
    std::fill(memo.begin(), memo.end(), -1);
    std::function<int(std::size_t, std::uint32_t)> chain = [&](std::size_t cur, std::uint32_t mask) {
      int& slot = memo[cur * (std::size_t{1} << n) + mask];
      if (slot >= 0) return slot;
      std::int64_t best = std::numeric_limits<std::int64_t>::max();
      for (std::size_t k = 0; k < n; ++k)
        if (k != cur && !(mask >> k & 1U)) best = std::min(best, d2[cur][k]);
      int result = std::numeric_limits<int>::max();
      for (std::size_t k = 0; k < n; ++k) {
        if (k == cur || (mask >> k & 1U) || d2[cur][k] != best) continue;
        result = std::min(result, k == b ? 1 : 1 + chain(k, mask | (1U << k)));
      }
      slot = result;
      return result;
    };
    for (std::size_t a = 0; a < n; ++a)
      if (a != b) out[a][b] = chain(a, 1U << a);
  }
  return out;
}

/// Points strictly between A and B on a line.
inline int t_distance_1d(Label a, Label b, const PointSet& set) {
  require(set.dim == 1, "t_distance_1d: point set must be one-dimensional");
  const double xa = set.points[set.index_of(a)].x, xb = set.points[set.index_of(b)].x;
  const double lo = std::min(xa, xb), hi = std::max(xa, xb);
  int n = 0;
  for (const auto& p : set.points)
    if (p.x > lo && p.x < hi) ++n;
  return n;
}

// ---------------------------------------------------------------------------
// Exact lattice predicates and the empty-triangle tessellation

struct IPoint {
  std::int64_t x = 0;
  std::int64_t y = 0;
  friend bool operator==(const IPoint&, const IPoint&) = default;
};

inline std::int64_t orient(const IPoint& a, const IPoint& b, const IPoint& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

inline int sign(std::int64_t v) { return (v > 0) - (v < 0); }

/// > 0 when d lies strictly inside the circumcircle of the counter-clockwise triangle abc.
inline __int128 incircle(const IPoint& a, const IPoint& b, const IPoint& c, const IPoint& d) {
  const __int128 adx = a.x - d.x, ady = a.y - d.y, bdx = b.x - d.x, bdy = b.y - d.y, cdx = c.x - d.x,
                 cdy = c.y - d.y;
  const __int128 ad = adx * adx + ady * ady, bd = bdx * bdx + bdy * bdy, cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

inline bool on_segment(const IPoint& p, const IPoint& a, const IPoint& b) {
  return orient(a, b, p) == 0 && std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

/// Closed segments intersect.
inline bool segments_meet(const IPoint& p1, const IPoint& p2, const IPoint& q1, const IPoint& q2) {
  const int d1 = sign(orient(q1, q2, p1)), d2 = sign(orient(q1, q2, p2));
  const int d3 = sign(orient(p1, p2, q1)), d4 = sign(orient(p1, p2, q2));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  return on_segment(p1, q1, q2) || on_segment(p2, q1, q2) || on_segment(q1, p1, p2) || on_segment(q2, p1, p2);
}

struct Triangle {
  std::array<std::size_t, 3> v{};  // indices into the point set, counter-clockwise
  std::int64_t twice_area = 0;     // 2I + B - 2 from lattice counting
  std::int64_t interior = 0;       // lattice points strictly inside
  std::int64_t boundary = 0;       // lattice points on the boundary
};

/// Point in the closed triangle.
inline bool in_closed_triangle(const IPoint& p, const IPoint& a, const IPoint& b, const IPoint& c) {
  return orient(a, b, p) >= 0 && orient(b, c, p) >= 0 && orient(c, a, p) >= 0;
}

inline bool in_open_triangle(const IPoint& p, const IPoint& a, const IPoint& b, const IPoint& c) {
  return orient(a, b, p) > 0 && orient(b, c, p) > 0 && orient(c, a, p) > 0;
}

/// Pick data of a counter-clockwise lattice triangle by counting lattice points.
inline void pick_count(Triangle& t, const std::vector<IPoint>& pts) {
  const IPoint &a = pts[t.v[0]], &b = pts[t.v[1]], &c = pts[t.v[2]];
  auto g = [](const IPoint& p, const IPoint& q) { return std::gcd(std::abs(p.x - q.x), std::abs(p.y - q.y)); };
  t.boundary = g(a, b) + g(b, c) + g(c, a);
  t.interior = 0;
  const std::int64_t x0 = std::min({a.x, b.x, c.x}), x1 = std::max({a.x, b.x, c.x});
  const std::int64_t y0 = std::min({a.y, b.y, c.y}), y1 = std::max({a.y, b.y, c.y});
  for (std::int64_t x = x0; x <= x1; ++x)
    for (std::int64_t y = y0; y <= y1; ++y)
      if (in_open_triangle(IPoint{x, y}, a, b, c)) ++t.interior;
  t.twice_area = 2 * t.interior + t.boundary - 2;
}

/// Interiors of two counter-clockwise triangles overlap (separating axis on edges).
inline bool interiors_overlap(const std::array<IPoint, 3>& s, const std::array<IPoint, 3>& t) {
  auto separated = [](const std::array<IPoint, 3>& p, const std::array<IPoint, 3>& q) {
    for (int e = 0; e < 3; ++e) {
      const IPoint &a = p[e], &b = p[(e + 1) % 3];
      bool all_out = true;
      for (const auto& v : q)
        if (orient(a, b, v) > 0) all_out = false;
      if (all_out) return true;
    }
    return false;
  };
  return !(separated(s, t) || separated(t, s));
}

struct Tessellation {
  std::vector<IPoint> points;
  std::vector<Label> labels;
  std::vector<Triangle> triangles;
  bool complete = false;  // triangle areas add up to the convex hull area
};

inline std::vector<IPoint> lattice_points(const PointSet& set) {
  require(set.dim == 2, "tessellation: point set must be two-dimensional");
  std::vector<IPoint> out;
  for (const auto& p : set.points) {
    require(p.x == std::floor(p.x) && p.y == std::floor(p.y) && std::abs(p.x) < 1e9 && std::abs(p.y) < 1e9,
            "tessellation: coordinates must be integers");
    out.push_back(IPoint{static_cast<std::int64_t>(p.x), static_cast<std::int64_t>(p.y)});
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = i + 1; j < out.size(); ++j)
      require(!(out[i] == out[j]), "tessellation: coincident points");
  return out;
}

inline std::int64_t twice_hull_area(std::vector<IPoint> p) {
  std::sort(p.begin(), p.end(), [](const IPoint& a, const IPoint& b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  std::vector<IPoint> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && orient(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && orient(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);
  std::int64_t a = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto& u = h[i];
    const auto& v = h[(i + 1) % h.size()];
    a += u.x * v.y - v.x * u.y;
  }
  return std::abs(a);
}

/// Triangulation by empty-circumcircle triangles. Candidates are taken in
/// order of Pick area then labels; a candidate is kept unless its interior
/// overlaps one already kept.
inline Tessellation tessellate(const PointSet& set) {
  Tessellation t;
  t.points = lattice_points(set);
  t.labels = set.labels();
  const auto& p = t.points;
  const std::size_t n = p.size();
  require(n >= 3, "tessellation: need at least three points");
  bool collinear = true;
  for (std::size_t k = 2; k < n && collinear; ++k)
    if (orient(p[0], p[1], p[k]) != 0) collinear = false;
  if (collinear) throw ValidationError("tessellation: all points collinear, use t_distance_1d");

  std::vector<Triangle> cand;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        const std::int64_t o = orient(p[i], p[j], p[k]);
        if (o == 0) continue;
        Triangle tr;
        tr.v = o > 0 ? std::array<std::size_t, 3>{i, j, k} : std::array<std::size_t, 3>{i, k, j};
        bool empty = true;
        for (std::size_t q = 0; q < n && empty; ++q) {
          if (q == i || q == j || q == k) continue;
          if (incircle(p[tr.v[0]], p[tr.v[1]], p[tr.v[2]], p[q]) > 0) empty = false;
        }
        if (!empty) continue;
        pick_count(tr, p);
        cand.push_back(tr);
      }
  auto sorted_labels = [&](const Triangle& tr) {
    std::array<Label, 3> l{t.labels[tr.v[0]], t.labels[tr.v[1]], t.labels[tr.v[2]]};
    std::sort(l.begin(), l.end());
    return l;
  };
  std::sort(cand.begin(), cand.end(), [&](const Triangle& a, const Triangle& b) {
    if (a.twice_area != b.twice_area) return a.twice_area < b.twice_area;
    return sorted_labels(a) < sorted_labels(b);
  });
  std::int64_t covered = 0;
  for (const auto& c : cand) {
    const std::array<IPoint, 3> ct{p[c.v[0]], p[c.v[1]], p[c.v[2]]};
    bool clash = false;
    for (const auto& k : t.triangles)
      if (interiors_overlap(ct, {p[k.v[0]], p[k.v[1]], p[k.v[2]]})) {
        clash = true;
        break;
      }
    if (clash) continue;
    t.triangles.push_back(c);
    covered += c.twice_area;
  }
  t.complete = covered == twice_hull_area(p);
  return t;
}

/// No point of the set lies in a closed triangle except its own vertices.
inline bool triangle_is_empty(const Tessellation& t, const Triangle& tr) {
  for (std::size_t q = 0; q < t.points.size(); ++q) {
    if (q == tr.v[0] || q == tr.v[1] || q == tr.v[2]) continue;
    if (in_closed_triangle(t.points[q], t.points[tr.v[0]], t.points[tr.v[1]], t.points[tr.v[2]])) return false;
  }
  return true;
}

inline bool segment_meets_triangle(const IPoint& a, const IPoint& b, const IPoint& p, const IPoint& q,
                                   const IPoint& r) {
  if (in_closed_triangle(a, p, q, r) || in_closed_triangle(b, p, q, r)) return true;
  return segments_meet(a, b, p, q) || segments_meet(a, b, q, r) || segments_meet(a, b, r, p);
}

/// Triangles whose closed region meets the closed segment AB; 0 when A = B.
inline int t_distance_2d(Label a, Label b, const Tessellation& t) {
  if (a == b) return 0;
  auto idx = [&](Label l) {
    for (std::size_t k = 0; k < t.labels.size(); ++k)
      if (t.labels[k] == l) return k;
    throw ValidationError("t_distance_2d: no point labelled " + std::to_string(l));
  };
  const IPoint pa = t.points[idx(a)], pb = t.points[idx(b)];
  int n = 0;
  for (const auto& tr : t.triangles)
    if (segment_meets_triangle(pa, pb, t.points[tr.v[0]], t.points[tr.v[1]], t.points[tr.v[2]])) ++n;
  return n;
}

inline int t_distance_2d(Label a, Label b, const PointSet& set) { return t_distance_2d(a, b, tessellate(set)); }

// ---------------------------------------------------------------------------
// Semi-metric axioms

struct SemiMetricReport {
  bool symmetric = true;
  bool identity = true;  // d(x, y) = 0 iff x = y
  bool triangle = true;
  std::optional<std::array<Label, 2>> asymmetric_pair;
  std::optional<std::array<Label, 2>> identity_failure;
  std::optional<std::array<Label, 3>> violating_triple;  // (a, c, b): d(a,c) + d(c,b) < d(a,b)
};

inline SemiMetricReport semi_metric_check(const std::vector<Label>& labels,
                                          const std::function<double(Label, Label)>& d) {
  SemiMetricReport r;
  const std::size_t n = labels.size();
  std::vector<std::vector<double>> m(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i][j] = d(labels[i], labels[j]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (m[i][j] != m[j][i] && r.symmetric) {
        r.symmetric = false;
        r.asymmetric_pair = {labels[i], labels[j]};
      }
      if (((i == j) != (m[i][j] == 0.0) || m[i][j] < 0.0) && r.identity) {
        r.identity = false;
        r.identity_failure = {labels[i], labels[j]};
      }
    }
  for (std::size_t a = 0; a < n && r.triangle; ++a)
    for (std::size_t b = 0; b < n && r.triangle; ++b)
      for (std::size_t c = 0; c < n && r.triangle; ++c)
        if (m[a][c] + m[c][b] < m[a][b]) {
          r.triangle = false;
          r.violating_triple = {labels[a], labels[c], labels[b]};
        }
  return r;
}

// ---------------------------------------------------------------------------
// Searches

struct AsymmetryWitness {
  PointSet set;
  Label a = 0;
  Label b = 0;
  int delta_ab = 0;
  int delta_ba = 0;
};

/// Exhaustive scan of `k`-point subsets of the w x w integer grid, in
/// lexicographic order, for a pair with delta(A,B) != delta(B,A).
inline std::optional<AsymmetryWitness> find_nng_asymmetry(int w, int k) {
  std::vector<std::pair<std::int64_t, std::int64_t>> grid;
  for (int x = 0; x < w; ++x)
    for (int y = 0; y < w; ++y) grid.emplace_back(x, y);
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  const int g = static_cast<int>(grid.size());
  while (true) {
    std::vector<std::pair<std::int64_t, std::int64_t>> xy;
    for (int i : idx) xy.push_back(grid[static_cast<std::size_t>(i)]);
    const PointSet s = PointSet::from_grid(xy);
    for (Label a = 0; a < k; ++a)
      for (Label b = a + 1; b < k; ++b) {
        const int ab = nng_delta(a, b, s), ba = nng_delta(b, a, s);
        if (ab != ba) return AsymmetryWitness{s, a, b, ab, ba};
      }
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == g - k + i) --i;
    if (i < 0) return std::nullopt;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

struct TriangleViolation {
  PointSet set;
  Label a = 0;
  Label c = 0;
  Label b = 0;
  int d_ac = 0;
  int d_cb = 0;
  int d_ab = 0;
};

/// Random point sets on a w x w grid until some triple breaks the triangle
/// inequality for the T-distance; returns the first one found.
inline std::optional<TriangleViolation> find_t_violation(const RngSeed& seed, std::size_t budget, int w = 8,
                                                         int min_points = 5, int max_points = 10) {
  auto rng = seed.engine();
  std::uniform_int_distribution<int> coord(0, w - 1), count(min_points, max_points);
  for (std::size_t trial = 0; trial < budget; ++trial) {
    const int n = count(rng);
    std::set<std::pair<std::int64_t, std::int64_t>> pts;
    while (static_cast<int>(pts.size()) < n) pts.emplace(coord(rng), coord(rng));
    const PointSet s = PointSet::from_grid({pts.begin(), pts.end()});
    Tessellation t;
    try {
      t = tessellate(s);
    } catch (const ValidationError&) {
      continue;
    }
    const auto r = semi_metric_check(s.labels(), [&](Label x, Label y) { return t_distance_2d(x, y, t); });
    if (r.violating_triple) {
      const auto [a, c, b] = *r.violating_triple;
      return TriangleViolation{s, a, c, b, t_distance_2d(a, c, t), t_distance_2d(c, b, t), t_distance_2d(a, b, t)};
    }
  }
  return std::nullopt;
}

}  // namespace rspace::geo
