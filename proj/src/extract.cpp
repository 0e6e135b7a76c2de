#include "opcells/flow.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace opcells {

namespace {

void erase_value(std::vector<int>& v, int x) { v.erase(std::remove(v.begin(), v.end(), x), v.end()); }

void insert_after(std::vector<int>& v, int anchor, int x) {
  auto it = std::find(v.begin(), v.end(), anchor);
  if (it == v.end()) throw Error(Err::Precondition, "anchor edge missing");
  v.insert(it + 1, x);
}

void insert_before(std::vector<int>& v, int anchor, int x) {
  auto it = std::find(v.begin(), v.end(), anchor);
  if (it == v.end()) throw Error(Err::Precondition, "anchor edge missing");
  v.insert(it, x);
}

/** Merges black vertex v into u, identifying edge eu at u with edge ev at v
 *  (the same edge for a contraction). Rotation: u after eu, then v after ev. */
void merge_blacks(LabelledTreeNum& t, std::vector<bool>& dead, int u, int v, int eu, int ev) {
  auto ru = t.cyc[u], rv = t.cyc[v];
  std::rotate(ru.begin(), std::find(ru.begin(), ru.end(), eu), ru.end());
  std::rotate(rv.begin(), std::find(rv.begin(), rv.end(), ev), rv.end());
  std::vector<int> merged;
  if (eu != ev) merged.push_back(eu);
  merged.insert(merged.end(), ru.begin() + 1, ru.end());
  merged.insert(merged.end(), rv.begin() + 1, rv.end());
  t.cyc[u] = std::move(merged);
  t.cyc[v].clear();
  for (auto& e : t.edges) {
    if (e.from == v) e.from = u;
    if (e.to == v) e.to = u;
  }
  t.f[u - t.k] = std::max(t.f[u - t.k], t.f[v - t.k]);
  dead[v] = true;
}

/** Removes dead vertices and edges, renumbering everything. */
LabelledTreeNum compact(const LabelledTreeNum& t, const std::vector<bool>& dead, const std::vector<bool>& gone) {
  const int k = t.k, V = k + t.blacks();
  std::vector<int> vmap(V, -1), emap(t.edges.size(), -1);
  LabelledTreeNum n;
  n.k = k;
  int nv = 0;
  for (int v = 0; v < V; ++v)
    if (!dead[v]) {
      vmap[v] = nv++;
      if (v >= k) {
        n.f.push_back(t.f[v - k]);
        n.order.push_back(t.order[v - k]);
        n.pos.push_back(t.pos[v - k]);
      }
    }
  for (size_t e = 0; e < t.edges.size(); ++e)
    if (!gone[e]) {
      emap[e] = static_cast<int>(n.edges.size());
      auto x = t.edges[e];
      x.from = vmap[x.from];
      x.to = vmap[x.to];
      n.edges.push_back(x);
    }
  n.cyc.resize(nv);
  for (int v = 0; v < V; ++v)
    if (!dead[v])
      for (int e : t.cyc[v]) n.cyc[vmap[v]].push_back(emap[e]);
  n.base_lobe = t.base_lobe;
  n.base_edge = emap[t.base_edge];
  n.base_offset = t.base_offset;
  n.base_angle = t.base_angle;
  return n;
}

}  // namespace

LabelledTreeNum normalize_labelled_tree(const LabelledTreeNum& in, double tol) {
  LabelledTreeNum t = in;
  const int k = t.k;
  std::vector<bool> dead(k + t.blacks(), false), gone(t.edges.size(), false);
  for (bool changed = true; changed;) {
    changed = false;
    // equal labels across a black-black edge: contract it
    for (size_t id = 0; id < t.edges.size() && !changed; ++id) {
      if (gone[id]) continue;
      auto e = t.edges[id];
      if (t.is_white(e.to) || std::abs(t.f[e.from - k] - t.f[e.to - k]) > tol) continue;
      merge_blacks(t, dead, e.from, e.to, static_cast<int>(id), static_cast<int>(id));
      gone[id] = true;
      changed = true;
    }
    // vanishing angle between consecutive edges into a white vertex
    for (int i = 0; i < k && !changed; ++i) {
      if (t.cyc[i].size() < 2) continue;
      for (int e : t.cyc[i]) {
        if (t.edges[e].g > tol) continue;
        int e2 = t.next_at(i, e);
        int b = t.edges[e].from, b2 = t.edges[e2].from;
        double fb = t.f[b - k], fb2 = t.f[b2 - k];
        if (std::abs(fb - fb2) <= tol) {
          merge_blacks(t, dead, b, b2, e, e2);
          for (auto& c : t.cyc) std::replace(c.begin(), c.end(), e, e2);
          t.cyc[i].erase(std::unique(t.cyc[i].begin(), t.cyc[i].end()), t.cyc[i].end());
          if (t.cyc[i].size() > 1 && t.cyc[i].front() == t.cyc[i].back()) t.cyc[i].pop_back();
          gone[e] = true;
          if (t.base_edge == e) {
            t.base_edge = e2;
            t.base_offset = std::max(0.0, t.base_offset - t.edges[e].g);
          }
        } else if (fb2 < fb) {
          // e is redirected to b2, next to e2 on its clockwise side
          erase_value(t.cyc[i], e);
          t.edges[e].to = b2;
          insert_after(t.cyc[b2], e2, e);
          if (t.base_edge == e) {
            t.base_edge = e2;
            t.base_offset = std::max(0.0, t.base_offset - t.edges[e].g);
          }
          t.edges[e].g = 0;
        } else {
          // e2 is redirected to b and e inherits its angle
          erase_value(t.cyc[i], e2);
          t.edges[e2].to = b;
          insert_before(t.cyc[b], e, e2);
          if (t.base_edge == e2) {
            t.base_edge = e;
            t.base_offset += t.edges[e].g;
          }
          t.edges[e].g += t.edges[e2].g;
          t.edges[e2].g = 0;
        }
        changed = true;
        break;
      }
    }
  }
  return compact(t, dead, gone);
}

// ---------------------------------------------------------------- extraction

Q rational_approx(double x, long long max_den) {
  if (!std::isfinite(x)) throw Error(Err::Precondition, "non-finite value");
  const bool neg = x < 0;
  double y = std::abs(x);
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double r = y;
  for (int it = 0; it < 64; ++it) {
    double a = std::floor(r);
    if (a > 9e15) break;
    long long ai = static_cast<long long>(a);
    long long p2 = ai * p1 + p0, q2 = ai * q1 + q0;
    if (q2 > max_den) {
      long long s = (max_den - q0) / q1;
      long long ps = s * p1 + p0, qs = s * q1 + q0;
      if (std::abs(y - static_cast<double>(ps) / qs) < std::abs(y - static_cast<double>(p1) / q1)) p1 = ps, q1 = qs;
      break;
    }
    p0 = p1, q0 = q1, p1 = p2, q1 = q2;
    double frac = r - a;
    if (frac < 1e-15) break;
    r = 1 / frac;
  }
  Q out{BigInt(p1), BigInt(q1)};
  return neg ? Q(-out) : out;
}

namespace {

struct Levels {
  std::vector<Mask> masks;
  std::vector<double> lambda;
};

void split_levels(const LabelledTreeNum& t, const std::vector<int>& blacks, Mask S, const FlowTolerances& tol,
                  Levels& out, double& clearance) {
  const int k = t.k;
  double fm = 0;
  for (int b : blacks) fm = std::max(fm, t.f[b]);
  std::vector<int> rest;
  for (int b : blacks)
    if (t.f[b] < fm * (1 - tol.snap)) rest.push_back(b);
  if (rest.empty()) return;
  // components of whites in S and the remaining blacks, edges out of the top removed
  const int V = k + t.blacks();
  std::vector<int> par(V);
  std::iota(par.begin(), par.end(), 0);
  std::function<int(int)> find = [&](int x) { return par[x] == x ? x : par[x] = find(par[x]); };
  std::vector<bool> in_rest(t.blacks(), false);
  for (int b : rest) in_rest[b] = true;
  for (auto& e : t.edges) {
    if (t.is_white(e.from) || !in_rest[e.from - k]) continue;
    par[find(e.from)] = find(e.to);
  }
  std::map<int, std::pair<Mask, std::vector<int>>> comp;
  for (int i = 0; i < k; ++i)
    if (S >> i & 1) comp[find(i)].first |= Mask(1) << i;
  for (int b : rest) comp[find(k + b)].second.push_back(b);
  for (auto& [r, c] : comp) {
    if (c.second.empty()) continue;
    double lm = 0;
    for (int b : c.second) lm = std::max(lm, t.f[b]);
    const double lambda = lm / fm;
    clearance = std::min(clearance, 1 - lambda);
    if (1 - lambda < tol.boundary) throw Error(Err::BoundaryProximity, "edge label within tolerance of 1");
    if (mask_size(c.first) < 2) throw Error(Err::Precondition, "component with a black vertex and one white vertex");
    out.masks.push_back(c.first);
    out.lambda.push_back(lambda);
    split_levels(t, c.second, c.first, tol, out, clearance);
  }
}

std::vector<int> leaves_of(Mask m) {
  std::vector<int> v;
  for (int l = 1; l <= 32; ++l)
    if (m >> (l - 1) & 1) v.push_back(l);
  return v;
}

void decompose_vertex(const NestedTree& nt, int vi, const Cell& cell, const std::vector<double>& t,
                      std::vector<Cell>& lab, std::vector<std::vector<double>>& coords) {
  const auto& ins = nt.inputs[vi];
  auto leaves = leaves_of(nt.v[vi]);
  std::vector<int> arities;
  Perm pi(leaves.size());
  int off = 0;
  for (auto& in : ins) {
    auto sub = leaves_of(in.mask);
    for (size_t r = 0; r < sub.size(); ++r) {
      size_t local = std::find(leaves.begin(), leaves.end(), sub[r]) - leaves.begin();
      pi[local] = off + static_cast<int>(r) + 1;
    }
    arities.push_back(static_cast<int>(sub.size()));
    off += static_cast<int>(sub.size());
  }
  auto d = decompose(relabel(cell, pi), arities);
  if (!d) throw Error(Err::BoundaryProximity, "point lies on a composition wall");
  std::vector<double> ot(d->outer.w.size(), 0);
  std::vector<std::vector<double>> it(ins.size());
  for (size_t b = 0; b < ins.size(); ++b) it[b].assign(d->inner[b].w.size(), 0);
  for (size_t p = 0; p < t.size(); ++p) {
    ot[d->outer_pos[p]] += t[p] / arities[d->block[p]];
    it[d->block[p]][d->inner_pos[p]] += t[p];
  }
  lab[vi] = d->outer;
  coords[vi] = ot;
  for (size_t b = 0; b < ins.size(); ++b)
    if (!ins[b].leaf) decompose_vertex(nt, ins[b].id, d->inner[b], it[b], lab, coords);
}

}  // namespace

BarPoint extract_point(const LabelledTreeNum& in, const FlowTolerances& tol, double* clearance_out) {
  LabelledTreeNum t = normalize_labelled_tree(in, tol.snap);
  auto bad = check_tree(t, 1e-9);
  if (!bad.empty()) throw Error(Err::Precondition, "invalid labelled tree: " + bad.front());
  const int k = t.k;
  double clearance = 1;
  // base point on a junction goes with the lobe about to be traversed
  if (t.base_offset <= tol.snap) t.base_offset = 0;
  if (t.edges[t.base_edge].g - t.base_offset <= tol.snap) {
    auto rd = read_cactus(t);
    int e = rd.start_edge.size() > 1 ? rd.start_edge[1] : t.base_edge;
    t.base_edge = e;
    t.base_lobe = t.edges[e].to;
    t.base_offset = 0;
  }
  Levels lv;
  std::vector<int> all(t.blacks());
  std::iota(all.begin(), all.end(), 0);
  split_levels(t, all, full_mask(k), tol, lv, clearance);
  std::vector<Mask> fam{full_mask(k)};
  fam.insert(fam.end(), lv.masks.begin(), lv.masks.end());
  NestedTree nt = make_tree(k, fam);
  auto rd = read_cactus(t);
  for (double x : rd.t) {
    clearance = std::min(clearance, x);
    if (x < tol.boundary) throw Error(Err::BoundaryProximity, "cactus coordinate within tolerance of 0");
  }
  BarPoint p;
  std::vector<Cell> lab(nt.size());
  p.t.resize(nt.size());
  decompose_vertex(nt, 0, rd.cell, rd.t, lab, p.t);
  p.lambda.assign(nt.size(), 1.0);
  for (int i = 1; i < nt.size(); ++i) {
    auto it = std::find(lv.masks.begin(), lv.masks.end(), nt.v[i]);
    p.lambda[i] = lv.lambda[it - lv.masks.begin()];
  }
  std::vector<std::uint8_t> e(nt.size(), 1);
  e[0] = 0;
  p.cell = TreeCell{nt, lab, e};
  check_cell(p.cell);
  if (clearance_out) *clearance_out = clearance;
  return p;
}

std::string bar_point_str(const BarPoint& p) {
  std::ostringstream os;
  os << cell_str(p.cell, false) << " |";
  for (int i = 0; i < p.cell.t.size(); ++i) {
    os << (i ? " ; " : " ") << (i == 0 ? std::string("root") : "v{" + mask_str(p.cell.t.v[i], p.cell.t.k) + "}");
    if (i > 0) os << " lambda=" << rational_approx(p.lambda[i]).str();
    os << " t=(";
    for (size_t j = 0; j < p.t[i].size(); ++j) os << (j ? "," : "") << rational_approx(p.t[i][j]).str();
    os << ')';
  }
  return os.str();
}

TraceResult extract_cell(const Configuration& cfg, const FlowTolerances& tol) {
  auto tt = build_labelled_tree(cfg, tol);
  TraceResult r;
  double clr = 1;
  r.point = extract_point(tt.tree, tol, &clr);
  r.cell = r.point.cell;
  r.tree = normalize_labelled_tree(tt.tree, tol.snap);
  r.diag = tt.diag;
  r.diag.min_clearance = clr;
  r.crit = std::move(tt.crit);
  r.seps = std::move(tt.seps);
  return r;
}

}  // namespace opcells
