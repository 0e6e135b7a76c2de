#pragma once

// Cells of the cacti complexes: surjection words with no adjacent repeats and
// no a..b..a..b pattern, together with faces, relabelling, the star product,
// and the combinatorial side of the operad composition.

#include "error.hpp"
#include "util.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace opcells {

using Word = std::vector<int>;

struct Cell {
  Word w;
  int k = 0;

  int dim() const { return static_cast<int>(w.size()) - k; }
  int len() const { return static_cast<int>(w.size()); }
  /** m_j = occurrences of j minus one, indexed 1..k (slot 0 unused). */
  std::vector<int> multidegree() const {
    std::vector<int> m(k + 1, -1);
    m[0] = 0;
    for (int c : w) ++m[c];
    return m;
  }
  std::string str() const {
    std::string s;
    if (k <= 9) {
      for (int c : w) s += static_cast<char>('0' + c);
    } else {
      for (size_t i = 0; i < w.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(w[i]);
      }
    }
    return s;
  }
  auto operator<=>(const Cell&) const = default;
  bool operator==(const Cell&) const = default;
};

using Perm = std::vector<int>;  // images of 1..k, stored 0-based: p[j-1]

/** Accepts "1,2,1" or the compact digit form "121". */
inline Word parse_word(const std::string& s) {
  Word w;
  if (s.find(',') != std::string::npos) {
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      size_t used = 0;
      int v = 0;
      try { v = std::stoi(tok, &used); } catch (...) { throw Error(Err::Parse, "bad letter '" + tok + "'"); }
      w.push_back(v);
    }
  } else {
    for (char c : s) {
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      if (c < '0' || c > '9') throw Error(Err::Parse, std::string("bad letter '") + c + "'");
      w.push_back(c - '0');
    }
  }
  if (w.empty()) throw Error(Err::Parse, "empty word");
  return w;
}

namespace detail {

/** First a<b<c<d with w[a]=w[c] != w[b]=w[d], 0-based, if any. */
inline std::optional<std::array<int, 4>> find_interleave(const Word& w, int k) {
  const int n = static_cast<int>(w.size());
  for (int u = 1; u <= k; ++u)
    for (int v = 1; v <= k; ++v) {
      if (u == v) continue;
      int st = 0;
      std::array<int, 4> pos{};
      const int want[4] = {u, v, u, v};
      for (int i = 0; i < n && st < 4; ++i)
        if (w[i] == want[st]) pos[st++] = i;
      if (st == 4) return pos;
    }
  return std::nullopt;
}

}  // namespace detail

inline Cell validate_word(const Word& w, int k) {
  if (w.empty() || k < 1) throw Error(Err::Precondition, "empty word or k < 1");
  std::vector<bool> seen(k + 1, false);
  for (int c : w) {
    if (c < 1 || c > k) throw Error(Err::Precondition, "letter " + std::to_string(c) + " outside 1.." + std::to_string(k));
    seen[c] = true;
  }
  for (int j = 1; j <= k; ++j)
    if (!seen[j]) throw Error(Err::NotSurjective, "lobe " + std::to_string(j) + " missing");
  for (size_t i = 0; i + 1 < w.size(); ++i)
    if (w[i] == w[i + 1])
      throw Error(Err::AdjacentRepeat, "positions (" + std::to_string(i + 1) + "," + std::to_string(i + 2) + ")");
  if (auto p = detail::find_interleave(w, k)) {
    auto& a = *p;
    throw Error(Err::ComplexityViolation, "positions (" + std::to_string(a[0] + 1) + "," + std::to_string(a[1] + 1) +
                                              "," + std::to_string(a[2] + 1) + "," + std::to_string(a[3] + 1) + ")");
  }
  return Cell{w, k};
}

inline bool is_valid(const Word& w, int k) {
  if (w.empty()) return false;
  std::vector<bool> seen(k + 1, false);
  for (size_t i = 0; i < w.size(); ++i) {
    if (w[i] < 1 || w[i] > k) return false;
    if (i && w[i] == w[i - 1]) return false;
    seen[w[i]] = true;
  }
  for (int j = 1; j <= k; ++j)
    if (!seen[j]) return false;
  return !detail::find_interleave(w, k);
}

inline Cell parse_cell(const std::string& s, int k = 0) {
  Word w = parse_word(s);
  if (k == 0) k = *std::max_element(w.begin(), w.end());
  return validate_word(w, k);
}

// ---------------------------------------------------------------- enumeration

constexpr int kMaxEnumK = 12;

/** Streams every cell of arity k in lexicographic order. The callback may
 *  return false to stop. */
inline void for_each_cell(int k, const std::function<bool(const Word&)>& fn) {
  if (k < 1) throw Error(Err::Precondition, "k must be >= 1");
  if (k > kMaxEnumK) throw Error(Err::ResourceLimit, "k=" + std::to_string(k) + " beyond enumeration bound");
  struct St {
    std::array<std::array<bool, kMaxEnumK + 1>, kMaxEnumK + 1> pair{}, uvu{};
    std::array<bool, kMaxEnumK + 1> seen{};
    int nseen = 0;
  };
  Word w;
  w.reserve(2 * k);
  bool stop = false;
  std::function<void(const St&)> rec = [&](const St& s) {
    if (stop) return;
    if (s.nseen == k && !fn(w)) { stop = true; return; }
    if (static_cast<int>(w.size()) == 2 * k - 1) return;
    // letters still missing must fit in the remaining length
    if (k - s.nseen > 2 * k - 1 - static_cast<int>(w.size())) return;
    for (int c = 1; c <= k && !stop; ++c) {
      if (!w.empty() && w.back() == c) continue;
      bool bad = false;
      for (int u = 1; u <= k; ++u)
        if (u != c && s.uvu[u][c]) { bad = true; break; }
      if (bad) continue;
      St t = s;
      for (int v = 1; v <= k; ++v)
        if (v != c && t.pair[c][v]) t.uvu[c][v] = true;
      for (int v = 1; v <= k; ++v)
        if (v != c && t.seen[v]) t.pair[v][c] = true;
      if (!t.seen[c]) { t.seen[c] = true; ++t.nseen; }
      w.push_back(c);
      rec(t);
      w.pop_back();
    }
  };
  rec(St{});
}

/** Number of cells of each dimension 0..k-1. */
inline std::vector<std::uint64_t> count_cells(int k) {
  std::vector<std::uint64_t> c(k, 0);
  for_each_cell(k, [&](const Word& w) { ++c[w.size() - k]; return true; });
  return c;
}

inline std::vector<std::vector<Cell>> enumerate_cells(int k, std::uint64_t limit = 5'000'000) {
  std::vector<std::vector<Cell>> out(k);
  std::uint64_t n = 0;
  for_each_cell(k, [&](const Word& w) {
    if (++n > limit) throw Error(Err::ResourceLimit, "more than " + std::to_string(limit) + " cells");
    out[w.size() - k].push_back(Cell{w, k});
    return true;
  });
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

// ---------------------------------------------------------------- faces

/** Delete the i-th (0-based) occurrence of lobe j. */
inline Cell face(const Cell& c, int j, int i) {
  auto m = c.multidegree();
  if (j < 1 || j > c.k) throw Error(Err::Precondition, "lobe out of range");
  if (m[j] == 0) throw Error(Err::FaceUndefined, "lobe " + std::to_string(j) + " occurs once");
  if (i < 0 || i > m[j]) throw Error(Err::Precondition, "occurrence out of range");
  Word w;
  int seen = 0;
  for (int x : c.w) {
    if (x == j && seen++ == i) continue;
    w.push_back(x);
  }
  return Cell{std::move(w), c.k};
}

/** Orientation: product of standard simplices in lobe order. */
inline int face_sign(const Cell& c, int j, int i) {
  auto m = c.multidegree();
  int e = i;
  for (int l = 1; l < j; ++l) e += m[l];
  return (e & 1) ? -1 : 1;
}

inline std::vector<std::pair<Cell, int>> boundary(const Cell& c) {
  std::vector<std::pair<Cell, int>> out;
  auto m = c.multidegree();
  for (int j = 1; j <= c.k; ++j)
    for (int i = 0; m[j] > 0 && i <= m[j]; ++i) out.emplace_back(face(c, j, i), face_sign(c, j, i));
  return out;
}

// ---------------------------------------------------------------- symmetric group

inline Perm identity_perm(int k) {
  Perm p(k);
  std::iota(p.begin(), p.end(), 1);
  return p;
}

inline bool is_perm(const Perm& p) {
  std::vector<bool> hit(p.size() + 1, false);
  for (int x : p) {
    if (x < 1 || x > static_cast<int>(p.size()) || hit[x]) return false;
    hit[x] = true;
  }
  return true;
}

inline Cell relabel(const Cell& c, const Perm& p) {
  if (static_cast<int>(p.size()) != c.k) throw Error(Err::ArityMismatch, "permutation size differs from arity");
  if (!is_perm(p)) throw Error(Err::Precondition, "not a bijection");
  Word w(c.w.size());
  for (size_t i = 0; i < w.size(); ++i) w[i] = p[c.w[i] - 1];
  return Cell{std::move(w), c.k};
}

/** Orientation sign of the homeomorphism from c onto relabel(c, p): the lobe
 *  simplices get reordered by their new labels. */
inline int relabel_sign(const Cell& c, const Perm& p) {
  auto m = c.multidegree();
  std::vector<int> deg(c.k), tgt(c.k);
  for (int j = 1; j <= c.k; ++j) {
    deg[j - 1] = m[j];
    tgt[j - 1] = p[j - 1];
  }
  return koszul_sign(deg, tgt);
}

/** p then q: j -> q(p(j)). */
inline Perm compose_perm(const Perm& p, const Perm& q) {
  Perm r(p.size());
  for (size_t j = 0; j < p.size(); ++j) r[j] = q[p[j] - 1];
  return r;
}

inline Cell star(const Cell& f, const Cell& g) {
  Word w = f.w;
  for (int x : g.w) w.push_back(x + f.k);
  return Cell{std::move(w), f.k + g.k};
}

// ---------------------------------------------------------------- (de)composition

struct Decomposition {
  Cell outer;
  std::vector<Cell> inner;
  // per position of f: index into outer.w, and index into inner[block].w
  std::vector<int> outer_pos, inner_pos, block;
};

/** Splits f along the blocks of sizes n_1..n_r. Present exactly when f is a top
 *  cell of the image of the composition of (outer; inner...). */
inline std::optional<Decomposition> decompose(const Cell& f, const std::vector<int>& arities) {
  int tot = 0;
  for (int n : arities) {
    if (n < 1) throw Error(Err::Precondition, "arity < 1");
    tot += n;
  }
  if (tot != f.k) throw Error(Err::ArityMismatch, "arities sum to " + std::to_string(tot) + ", cell has " + std::to_string(f.k));
  const int r = static_cast<int>(arities.size());
  std::vector<int> blk(f.k + 1), off(r + 1, 0);
  for (int j = 0; j < r; ++j) off[j + 1] = off[j] + arities[j];
  for (int j = 0; j < r; ++j)
    for (int l = off[j] + 1; l <= off[j + 1]; ++l) blk[l] = j;

  Decomposition d;
  d.outer.k = r;
  d.inner.resize(r);
  for (int j = 0; j < r; ++j) d.inner[j].k = arities[j];
  const int L = f.len();
  d.outer_pos.resize(L);
  d.inner_pos.resize(L);
  d.block.resize(L);
  std::vector<int> last_pos(r, -1);
  for (int p = 0; p < L; ++p) {
    int b = blk[f.w[p]];
    d.block[p] = b;
    if (d.outer.w.empty() || d.outer.w.back() != b + 1) d.outer.w.push_back(b + 1);
    d.outer_pos[p] = d.outer.len() - 1;
    auto& in = d.inner[b].w;
    int letter = f.w[p] - off[b];
    if (in.empty() || in.back() != letter) {
      // a fresh inner letter right after a gap means a breakpoint sits on the
      // lobe junction: not a top cell of the image
      if (!in.empty() && last_pos[b] != p - 1) return std::nullopt;
      in.push_back(letter);
    }
    d.inner_pos[p] = d.inner[b].len() - 1;
    last_pos[b] = p;
  }
  if (!is_valid(d.outer.w, r)) return std::nullopt;
  for (int j = 0; j < r; ++j)
    if (!is_valid(d.inner[j].w, arities[j])) return std::nullopt;
  return d;
}

inline std::vector<int> slot_arities(int k, int slot, int n) {
  std::vector<int> a(k, 1);
  a[slot - 1] = n;
  return a;
}

/** All cells f of arity k+n-1 with decompose(f) = (g; id..h..id), built by
 *  distributing h over the occurrences of `slot` in g. */
inline std::vector<Cell> compose(const Cell& g, int slot, const Cell& h) {
  if (slot < 1 || slot > g.k) throw Error(Err::Precondition, "slot out of range");
  const int n = h.k, occ = g.multidegree()[slot] + 1, Lh = h.len();
  std::set<Cell> out;
  std::vector<int> cut(occ + 1, 0);
  cut[occ] = Lh - 1;
  std::function<void(int)> rec = [&](int r) {
    if (r == occ) {
      Word w;
      int run = 0;
      for (int x : g.w) {
        if (x < slot) w.push_back(x);
        else if (x > slot) w.push_back(x + n - 1);
        else {
          for (int q = cut[run]; q <= cut[run + 1]; ++q) w.push_back(h.w[q] + slot - 1);
          ++run;
        }
      }
      if (is_valid(w, g.k + n - 1)) out.insert(Cell{std::move(w), g.k + n - 1});
      return;
    }
    for (int c = cut[r - 1]; c <= Lh - 1; ++c) {
      cut[r] = c;
      rec(r + 1);
    }
  };
  rec(1);
  return {out.begin(), out.end()};
}

/** Reference implementation: filter every cell of the target arity. */
inline std::vector<Cell> compose_bruteforce(const Cell& g, int slot, const Cell& h) {
  const int N = g.k + h.k - 1, dim = g.dim() + h.dim();
  auto ar = slot_arities(g.k, slot, h.k);
  std::vector<Cell> out;
  for_each_cell(N, [&](const Word& w) {
    if (static_cast<int>(w.size()) - N != dim) return true;
    Cell f{w, N};
    auto d = decompose(f, ar);
    if (!d || d->outer != g || d->inner[slot - 1] != h) return true;
    for (int j = 0; j < g.k; ++j)
      if (j != slot - 1 && d->inner[j].len() != 1) return true;
    out.push_back(f);
    return true;
  });
  return out;
}

/** Orientation sign of f inside the image of g x h (g's simplices first).
 *  Computed as the sign of the Jacobian of the coordinate change from f's
 *  local coordinates to those of (g, h). */
inline int compose_sign(const Cell& g, int slot, const Cell& h, const Cell& f) {
  auto d = decompose(f, slot_arities(g.k, slot, h.k));
  if (!d) throw Error(Err::Precondition, f.str() + " is not in the image");
  const int L = f.len();
  // local coordinate = non-first occurrence of a lobe, ordered by lobe then position
  auto local_index = [](const Word& w, int k) {
    std::vector<int> idx(w.size(), -1);
    int cnt = 0;
    for (int l = 1; l <= k; ++l) {
      bool first = true;
      for (size_t p = 0; p < w.size(); ++p)
        if (w[p] == l) {
          if (!first) idx[p] = cnt++;
          first = false;
        }
    }
    return std::make_pair(idx, cnt);
  };
  auto [fi, fn] = local_index(f.w, f.k);
  auto [gi, gn] = local_index(g.w, g.k);
  auto [hi, hn] = local_index(h.w, h.k);
  if (fn != gn + hn) throw Error(Err::Precondition, "dimension mismatch");
  std::vector<int> first_occ(f.k + 1, -1);
  for (int p = 0; p < L; ++p)
    if (first_occ[f.w[p]] < 0) first_occ[f.w[p]] = p;
  // column per f-local coordinate: d t_p = +1, d t_first = -1
  std::vector<std::vector<Q>> J(fn, std::vector<Q>(fn, Q(0)));
  for (int p = 0; p < L; ++p) {
    if (fi[p] < 0) continue;
    int col = fi[p];
    for (int q : {p, first_occ[f.w[p]]}) {
      Q s = (q == p) ? Q(1) : Q(-1);
      int op = d->outer_pos[q];
      if (gi[op] >= 0) J[gi[op]][col] += (d->block[q] == slot - 1) ? s / h.k : s;
      if (d->block[q] == slot - 1) {
        int ip = d->inner_pos[q];
        if (hi[ip] >= 0) J[gn + hi[ip]][col] += s;
      }
    }
  }
  int s = det_sign(J);
  if (s == 0) throw Error(Err::Precondition, "degenerate coordinate change");
  return s;
}

inline std::vector<std::pair<Cell, int>> compose_signed(const Cell& g, int slot, const Cell& h) {
  std::vector<std::pair<Cell, int>> out;
  for (auto& f : compose(g, slot, h)) out.emplace_back(f, compose_sign(g, slot, h, f));
  return out;
}

/** Memoized compose_signed; not thread safe. */
class ComposeCache {
 public:
  const std::vector<std::pair<Cell, int>>& get(const Cell& g, int slot, const Cell& h) {
    auto key = std::make_tuple(g, slot, h);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    return memo_.emplace(key, compose_signed(g, slot, h)).first->second;
  }

 private:
  std::map<std::tuple<Cell, int, Cell>, std::vector<std::pair<Cell, int>>> memo_;
};

}  // namespace opcells
