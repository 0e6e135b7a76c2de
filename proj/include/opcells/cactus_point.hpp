#pragma once

// Points of cacti cells in exact rational coordinates: the path of a cactus,
// the point-level composition, and the base point rotation.

#include "cacti.hpp"

namespace opcells {

struct CactusPoint {
  Cell cell;
  std::vector<Q> t;  // one coordinate per letter position
};

inline void check_point(const CactusPoint& p) {
  if (p.t.size() != p.cell.w.size()) throw Error(Err::Precondition, "coordinate count differs from word length");
  std::vector<Q> sum(p.cell.k + 1, Q(0));
  for (size_t i = 0; i < p.t.size(); ++i) {
    if (p.t[i] < 0) throw Error(Err::Precondition, "negative coordinate");
    sum[p.cell.w[i]] += p.t[i];
  }
  for (int j = 1; j <= p.cell.k; ++j)
    if (sum[j] != 1) throw Error(Err::Precondition, "lobe " + std::to_string(j) + " coordinates do not sum to 1");
}

inline bool is_interior(const CactusPoint& p) {
  return std::all_of(p.t.begin(), p.t.end(), [](const Q& q) { return q > 0; });
}

/** Barycentre of the cell: each lobe split evenly among its occurrences. */
inline CactusPoint barycenter(const Cell& c) {
  auto m = c.multidegree();
  CactusPoint p{c, {}};
  for (int x : c.w) p.t.push_back(Q(1) / (m[x] + 1));
  return p;
}

struct PathBreak {
  std::vector<Q> y;       // y_0 = 0 .. y_L = k
  std::vector<int> lobe;  // lobe traversed on [y_r, y_{r+1}]
};

inline PathBreak cactus_path(const CactusPoint& p) {
  check_point(p);
  PathBreak b;
  b.y.push_back(Q(0));
  for (size_t i = 0; i < p.t.size(); ++i) {
    b.y.push_back(b.y.back() + p.t[i]);
    b.lobe.push_back(p.cell.w[i]);
  }
  return b;
}

/** theta on points: lobe j of x is dilated to length n_j and glued along the
 *  path of inners[j]. Requires interior points and no breakpoint collisions. */
inline CactusPoint compose_points(const CactusPoint& x, const std::vector<CactusPoint>& inners) {
  check_point(x);
  if (static_cast<int>(inners.size()) != x.cell.k) throw Error(Err::ArityMismatch, "need one inner point per lobe");
  if (!is_interior(x)) throw Error(Err::DegenerateCoordinate, "outer point on the boundary");
  std::vector<int> off(inners.size() + 1, 0);
  std::vector<PathBreak> paths;
  for (size_t j = 0; j < inners.size(); ++j) {
    if (!is_interior(inners[j])) throw Error(Err::DegenerateCoordinate, "inner point on the boundary");
    paths.push_back(cactus_path(inners[j]));
    off[j + 1] = off[j] + inners[j].cell.k;
  }
  std::vector<Q> pos(inners.size(), Q(0));
  CactusPoint out;
  out.cell.k = off.back();
  for (size_t i = 0; i < x.t.size(); ++i) {
    const int j = x.cell.w[i] - 1;
    const auto& pb = paths[j];
    const Q n = inners[j].cell.k;
    Q a = pos[j], b = pos[j] + n * x.t[i];
    if (b != n)
      for (size_t r = 1; r + 1 < pb.y.size(); ++r)
        if (pb.y[r] == b) throw Error(Err::DegenerateCoordinate, "visit ends on an inner breakpoint");
    for (size_t r = 0; r + 1 < pb.y.size(); ++r) {
      Q lo = std::max(a, pb.y[r]), hi = std::min(b, pb.y[r + 1]);
      if (hi <= lo) continue;
      int letter = pb.lobe[r] + off[j];
      if (!out.cell.w.empty() && out.cell.w.back() == letter) {
        out.t.back() += hi - lo;
      } else {
        out.cell.w.push_back(letter);
        out.t.push_back(hi - lo);
      }
    }
    pos[j] = b;
  }
  out.cell = validate_word(out.cell.w, out.cell.k);
  return out;
}

/** Inverse of compose_points on top cells of the image. */
inline std::optional<std::pair<CactusPoint, std::vector<CactusPoint>>> decompose_point(const CactusPoint& f,
                                                                                       const std::vector<int>& arities) {
  check_point(f);
  auto d = decompose(f.cell, arities);
  if (!d) return std::nullopt;
  CactusPoint x{d->outer, std::vector<Q>(d->outer.w.size(), Q(0))};
  std::vector<CactusPoint> in;
  for (auto& c : d->inner) in.push_back(CactusPoint{c, std::vector<Q>(c.w.size(), Q(0))});
  for (size_t p = 0; p < f.t.size(); ++p) {
    x.t[d->outer_pos[p]] += f.t[p] / arities[d->block[p]];
    in[d->block[p]].t[d->inner_pos[p]] += f.t[p];
  }
  return std::make_pair(std::move(x), std::move(in));
}

namespace detail {

/** Cyclic arcs of the closed path; first and last merged when they share a lobe. */
inline std::pair<std::vector<int>, std::vector<Q>> cyclic_arcs(const CactusPoint& p) {
  std::vector<int> l(p.cell.w.begin(), p.cell.w.end());
  std::vector<Q> t(p.t.begin(), p.t.end());
  if (l.size() > 1 && l.front() == l.back()) {
    t.front() += t.back();
    l.pop_back();
    t.pop_back();
  }
  return {l, t};
}

/** Word read from arc `start` at offset `into` (0 <= into < arc length). */
inline CactusPoint read_from(const std::vector<int>& l, const std::vector<Q>& t, size_t start, const Q& into, int k) {
  CactusPoint out;
  const size_t n = l.size();
  out.cell.w.push_back(l[start]);
  out.t.push_back(t[start] - into);
  for (size_t r = 1; r < n; ++r) {
    out.cell.w.push_back(l[(start + r) % n]);
    out.t.push_back(t[(start + r) % n]);
  }
  if (into > 0) {
    out.cell.w.push_back(l[start]);
    out.t.push_back(into);
  }
  out.cell = validate_word(out.cell.w, k);
  return out;
}

}  // namespace detail

/** Moves the base point forward along the path by arc length s. A base point
 *  landing on a junction goes with the lobe about to be traversed. */
inline CactusPoint basepoint_shift(const CactusPoint& p, Q s) {
  check_point(p);
  const int k = p.cell.k;
  if (k < 2) throw Error(Err::Precondition, "shift needs k >= 2");
  auto [l, t] = detail::cyclic_arcs(p);
  // position of the original base point inside arc 0
  Q origin = (p.cell.w.front() == p.cell.w.back() && p.cell.w.size() > 1) ? p.t.back() : Q(0);
  Q total = k;
  Q x = origin + s;
  {
    Q r = x / total;
    BigInt fl = boost::multiprecision::numerator(r) / boost::multiprecision::denominator(r);
    x -= total * Q(fl);
  }
  while (x < 0) x += total;
  while (x >= total) x -= total;
  for (size_t r = 0; r < l.size(); ++r) {
    if (x < t[r]) return detail::read_from(l, t, r, x, k);
    x -= t[r];
  }
  return detail::read_from(l, t, 0, Q(0), k);
}

/** Base point at the first point of lobe 2 met after leaving lobe 1. */
inline CactusPoint canonical_section(const CactusPoint& p) {
  check_point(p);
  if (p.cell.k < 2) throw Error(Err::Precondition, "section needs k >= 2");
  auto [l, t] = detail::cyclic_arcs(p);
  const size_t n = l.size();
  for (size_t r = 0; r < n; ++r) {
    if (l[r] != 2) continue;
    // most recent arc among lobes {1,2} before r
    for (size_t q = 1; q < n; ++q) {
      int prev = l[(r + n - q) % n];
      if (prev == 2) break;
      if (prev == 1) return detail::read_from(l, t, r, Q(0), p.cell.k);
    }
  }
  throw Error(Err::Precondition, "no 1 -> 2 transition");
}

}  // namespace opcells
