#pragma once

// Nested trees (laminar families containing the root), cells labelled by cacti
// cells on their vertices, the bar and Fulton-MacPherson differentials, and
// grafting.

#include "cacti.hpp"
#include "chain.hpp"

#include <bit>
#include <cstdint>
#include <map>

namespace opcells {

using Mask = std::uint32_t;

inline int mask_min(Mask m) { return std::countr_zero(m) + 1; }
inline int mask_size(Mask m) { return std::popcount(m); }
inline Mask full_mask(int k) { return k >= 32 ? ~Mask(0) : ((Mask(1) << k) - 1); }

/** One input of a vertex: a leaf (1-based) or a child vertex index. */
struct Input {
  bool leaf;
  int id;
  Mask mask;
};

struct NestedTree {
  int k = 0;
  std::vector<Mask> v;  // depth-first order, children by least element; v[0] is the root
  std::vector<int> parent;
  std::vector<std::vector<Input>> inputs;  // sorted by least element

  int size() const { return static_cast<int>(v.size()); }
  int valence(int i) const { return static_cast<int>(inputs[i].size()); }
  int edges() const { return size() - 1; }
  /** Position (1-based) of child c among the inputs of its parent. */
  int slot_of(int c) const {
    const auto& in = inputs[parent[c]];
    for (size_t s = 0; s < in.size(); ++s)
      if (!in[s].leaf && in[s].id == c) return static_cast<int>(s) + 1;
    return 0;
  }
  bool operator==(const NestedTree& o) const { return k == o.k && v == o.v; }
  auto operator<=>(const NestedTree& o) const {
    if (auto c = k <=> o.k; c != 0) return c;
    return v <=> o.v;
  }
};

/** Canonicalizes an unordered laminar family (root included). */
inline NestedTree make_tree(int k, std::vector<Mask> fam) {
  const Mask root = full_mask(k);
  std::sort(fam.begin(), fam.end());
  fam.erase(std::unique(fam.begin(), fam.end()), fam.end());
  if (std::find(fam.begin(), fam.end(), root) == fam.end()) throw Error(Err::Precondition, "family lacks the root");
  for (Mask a : fam) {
    if (mask_size(a) < 2 || (a & ~root)) throw Error(Err::Precondition, "vertex of size < 2 or outside 1..k");
    for (Mask b : fam)
      if ((a & b) && (a & b) != a && (a & b) != b) throw Error(Err::Precondition, "family is not laminar");
  }
  // parent = smallest strict superset
  auto par_of = [&](Mask a) {
    Mask best = 0;
    for (Mask b : fam)
      if (b != a && (a & b) == a && (!best || mask_size(b) < mask_size(best))) best = b;
    return best;
  };
  NestedTree t;
  t.k = k;
  std::function<void(Mask, int)> visit = [&](Mask a, int par) {
    int me = t.size();
    t.v.push_back(a);
    t.parent.push_back(par);
    t.inputs.emplace_back();
    std::vector<Mask> kids;
    for (Mask b : fam)
      if (b != a && par_of(b) == a) kids.push_back(b);
    Mask covered = 0;
    for (Mask b : kids) covered |= b;
    std::vector<std::pair<int, Mask>> items;  // (least element, mask)
    for (Mask b : kids) items.emplace_back(mask_min(b), b);
    for (int l = 1; l <= k; ++l)
      if ((a >> (l - 1) & 1) && !(covered >> (l - 1) & 1)) items.emplace_back(l, Mask(1) << (l - 1));
    std::sort(items.begin(), items.end());
    for (auto& [mn, b] : items) {
      if (mask_size(b) == 1) {
        t.inputs[me].push_back(Input{true, mn, b});
      } else {
        int id = t.size();
        t.inputs[me].push_back(Input{false, id, b});
        visit(b, me);
      }
    }
  };
  visit(root, -1);
  return t;
}

inline std::vector<NestedTree> enumerate_nested_trees(int k) {
  if (k < 2) throw Error(Err::Precondition, "nested trees need k >= 2");
  if (k > 12) throw Error(Err::ResourceLimit, "k too large for nested tree enumeration");
  // all laminar families on a set: split into >= 2 blocks, recurse into big blocks
  std::function<std::vector<std::vector<Mask>>(Mask)> fams = [&](Mask s) {
    std::vector<std::vector<Mask>> out;
    std::vector<int> el;
    for (int l = 0; l < 32; ++l)
      if (s >> l & 1) el.push_back(l);
    // set partitions via restricted growth strings
    std::vector<int> rg(el.size(), 0);
    std::function<void(size_t, int)> rec = [&](size_t i, int nb) {
      if (i == el.size()) {
        if (nb < 2) return;
        std::vector<Mask> blocks(nb, 0);
        for (size_t j = 0; j < el.size(); ++j) blocks[rg[j]] |= Mask(1) << el[j];
        std::vector<std::vector<Mask>> acc{{s}};
        for (Mask b : blocks) {
          if (mask_size(b) < 2) continue;
          auto sub = fams(b);
          std::vector<std::vector<Mask>> next;
          for (auto& a : acc)
            for (auto& f : sub) {
              auto c = a;
              c.insert(c.end(), f.begin(), f.end());
              next.push_back(std::move(c));
            }
          acc = std::move(next);
        }
        for (auto& a : acc) out.push_back(std::move(a));
        return;
      }
      for (int b = 0; b <= nb; ++b) {
        rg[i] = b;
        rec(i + 1, std::max(nb, b + 1));
      }
    };
    rec(0, 0);
    return out;
  };
  std::vector<NestedTree> out;
  for (auto& f : fams(full_mask(k))) out.push_back(make_tree(k, f));
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------- text forms

inline std::string mask_str(Mask m, int k) {
  std::string s;
  for (int l = 1; l <= k; ++l)
    if (m >> (l - 1) & 1) {
      if (k > 9 && !s.empty()) s += ',';
      s += std::to_string(l);
    }
  return s;
}

/** "1(23)", "(12)(34)"; for k > 9 "{1}({2}{3})". */
inline std::string tree_str(const NestedTree& t) {
  std::function<std::string(int)> rec = [&](int i) {
    std::string s;
    for (auto& in : t.inputs[i]) {
      if (in.leaf) s += t.k > 9 ? "{" + std::to_string(in.id) + "}" : std::to_string(in.id);
      else s += "(" + rec(in.id) + ")";
    }
    return s;
  };
  return rec(0);
}

inline NestedTree parse_tree(const std::string& s) {
  std::vector<Mask> fam;
  std::vector<Mask> stack{0};
  int k = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (c == '(') stack.push_back(0);
    else if (c == ')') {
      if (stack.size() < 2) throw Error(Err::Parse, "unbalanced ')'");
      Mask m = stack.back();
      stack.pop_back();
      fam.push_back(m);
      stack.back() |= m;
    } else {
      int l = 0;
      if (c == '{') {
        size_t j = s.find('}', i);
        if (j == std::string::npos) throw Error(Err::Parse, "unterminated '{'");
        l = std::stoi(s.substr(i + 1, j - i - 1));
        i = j;
      } else if (c >= '1' && c <= '9') {
        l = c - '0';
      } else {
        throw Error(Err::Parse, std::string("unexpected '") + c + "'");
      }
      if (l < 1 || l > 31) throw Error(Err::Parse, "leaf out of range");
      if (stack.back() >> (l - 1) & 1) throw Error(Err::Parse, "repeated leaf");
      stack.back() |= Mask(1) << (l - 1);
      k = std::max(k, l);
    }
  }
  if (stack.size() != 1) throw Error(Err::Parse, "unbalanced '('");
  if (stack[0] != full_mask(k)) throw Error(Err::Parse, "leaves are not 1..k");
  fam.push_back(stack[0]);
  for (Mask m : fam)
    if (mask_size(m) < 2) throw Error(Err::Parse, "vertex with fewer than two leaves");
  return make_tree(k, fam);
}

// ---------------------------------------------------------------- labelled cells

/** Nested tree with a cacti label per vertex and, per non-root vertex, the
 *  marker of the edge to its parent: 1 (I1, a free length) or 0 (I0).
 *  Bar cells carry 1 on every edge. */
struct TreeCell {
  NestedTree t;
  std::vector<Cell> lab;
  std::vector<std::uint8_t> e;  // e[0] unused (0)

  int k() const { return t.k; }
  int dim() const {
    int d = 0;
    for (auto& c : lab) d += c.dim();
    for (size_t i = 1; i < e.size(); ++i) d += e[i];
    return d;
  }
  bool operator==(const TreeCell& o) const { return t == o.t && lab == o.lab && e == o.e; }
  auto operator<=>(const TreeCell& o) const {
    if (auto c = t <=> o.t; c != 0) return c;
    if (auto c = lab <=> o.lab; c != 0) return c;
    return e <=> o.e;
  }
};

using BarCell = TreeCell;
using FMCell = TreeCell;

inline void check_cell(const TreeCell& c) {
  if (c.lab.size() != c.t.v.size() || c.e.size() != c.t.v.size()) throw Error(Err::Precondition, "label count mismatch");
  for (int i = 0; i < c.t.size(); ++i)
    if (c.lab[i].k != c.t.valence(i)) throw Error(Err::ArityMismatch, "label arity differs from valence");
}

/** "1(23)[1] : root=121 ; v{23}=12"; bar cells omit the edge markers. */
inline std::string cell_str(const TreeCell& c, bool fm) {
  std::string s = tree_str(c.t);
  if (fm && c.t.size() > 1) {
    s += '[';
    for (int i = 1; i < c.t.size(); ++i) s += static_cast<char>('0' + c.e[i]);
    s += ']';
  }
  s += " : root=" + c.lab[0].str();
  for (int i = 1; i < c.t.size(); ++i) s += " ; v{" + mask_str(c.t.v[i], c.t.k) + "}=" + c.lab[i].str();
  return s;
}

inline TreeCell parse_tree_cell(const std::string& s, bool fm) {
  auto colon = s.find(':');
  if (colon == std::string::npos) throw Error(Err::Parse, "missing ':'");
  std::string head = s.substr(0, colon), rest = s.substr(colon + 1);
  std::string marks;
  if (auto lb = head.find('['); lb != std::string::npos) {
    auto rb = head.find(']', lb);
    if (rb == std::string::npos) throw Error(Err::Parse, "missing ']'");
    marks = head.substr(lb + 1, rb - lb - 1);
    head = head.substr(0, lb);
  }
  TreeCell c;
  c.t = parse_tree(head);
  const int n = c.t.size();
  c.lab.resize(n);
  c.e.assign(n, fm ? 0 : 1);
  c.e[0] = 0;
  if (fm && n > 1) {
    if (static_cast<int>(marks.size()) != n - 1) throw Error(Err::Parse, "need one edge marker per internal edge");
    for (int i = 1; i < n; ++i) {
      if (marks[i - 1] != '0' && marks[i - 1] != '1') throw Error(Err::Parse, "edge marker must be 0 or 1");
      c.e[i] = static_cast<std::uint8_t>(marks[i - 1] - '0');
    }
  }
  std::vector<bool> got(n, false);
  std::stringstream ss(rest);
  std::string item;
  while (std::getline(ss, item, ';')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(Err::Parse, "label needs '='");
    auto trim = [](std::string x) {
      while (!x.empty() && std::isspace(static_cast<unsigned char>(x.front()))) x.erase(x.begin());
      while (!x.empty() && std::isspace(static_cast<unsigned char>(x.back()))) x.pop_back();
      return x;
    };
    std::string key = trim(item.substr(0, eq)), val = trim(item.substr(eq + 1));
    int idx = -1;
    if (key == "root") idx = 0;
    else if (key.size() > 3 && key[0] == 'v' && key[1] == '{' && key.back() == '}') {
      Mask m = 0;
      for (int l : parse_word(key.substr(2, key.size() - 3))) {
        if (l < 1 || l > c.t.k) throw Error(Err::Parse, "bad vertex leaf");
        m |= Mask(1) << (l - 1);
      }
      for (int i = 0; i < n; ++i)
        if (c.t.v[i] == m) idx = i;
    }
    if (idx < 0) throw Error(Err::Parse, "unknown vertex '" + key + "'");
    c.lab[idx] = validate_word(parse_word(val), c.t.valence(idx));
    got[idx] = true;
  }
  for (int i = 0; i < n; ++i)
    if (!got[i]) throw Error(Err::Parse, "vertex without label");
  return c;
}

// ---------------------------------------------------------------- enumeration

/** Streams all labelled cells of arity k (fm: with every I0/I1 marking). */
inline void for_each_tree_cell(int k, bool fm, const std::function<void(const TreeCell&)>& fn) {
  std::map<int, std::vector<Cell>> by_arity;
  auto cells_of = [&](int a) -> const std::vector<Cell>& {
    auto it = by_arity.find(a);
    if (it != by_arity.end()) return it->second;
    std::vector<Cell> all;
    for (auto& dv : enumerate_cells(a))
      for (auto& c : dv) all.push_back(c);
    return by_arity.emplace(a, std::move(all)).first->second;
  };
  for (auto& t : enumerate_nested_trees(k)) {
    const int n = t.size();
    TreeCell c{t, std::vector<Cell>(n), std::vector<std::uint8_t>(n, 0)};
    std::vector<const std::vector<Cell>*> opts(n);
    for (int i = 0; i < n; ++i) opts[i] = &cells_of(t.valence(i));
    std::function<void(int)> rec = [&](int i) {
      if (i == n) {
        if (!fm) {
          for (int j = 1; j < n; ++j) c.e[j] = 1;
          fn(c);
          return;
        }
        for (std::uint32_t s = 0; s < (1u << (n - 1)); ++s) {
          for (int j = 1; j < n; ++j) c.e[j] = (s >> (j - 1)) & 1;
          fn(c);
        }
        return;
      }
      for (auto& l : *opts[i]) {
        c.lab[i] = l;
        rec(i + 1);
      }
    };
    rec(0);
  }
}

inline std::vector<std::vector<TreeCell>> enumerate_tree_cells(int k, bool fm, std::uint64_t limit = 2'000'000) {
  std::vector<std::vector<TreeCell>> out(2 * k - 2);
  std::uint64_t n = 0;
  for_each_tree_cell(k, fm, [&](const TreeCell& c) {
    if (++n > limit) throw Error(Err::ResourceLimit, "more than " + std::to_string(limit) + " cells");
    out[c.dim()].push_back(c);
  });
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

inline std::vector<std::vector<BarCell>> enumerate_bar_cells(int k, std::uint64_t limit = 2'000'000) {
  return enumerate_tree_cells(k, false, limit);
}
inline std::vector<std::vector<FMCell>> enumerate_fm_cells(int k, std::uint64_t limit = 2'000'000) {
  return enumerate_tree_cells(k, true, limit);
}

inline std::vector<std::uint64_t> count_tree_cells(int k, bool fm) {
  std::vector<std::uint64_t> c(2 * k - 2, 0);
  for_each_tree_cell(k, fm, [&](const TreeCell& x) { ++c[x.dim()]; });
  return c;
}

// ---------------------------------------------------------------- orientation

namespace detail {

/** Orientation atoms of a cell: per vertex in depth-first order, its edge
 *  length (if marked 1) then its label. Identified by vertex mask. */
struct Atom {
  Mask vertex;
  bool edge;
  int deg;
  bool operator==(const Atom&) const = default;
};

inline std::vector<Atom> atoms(const TreeCell& c) {
  std::vector<Atom> a;
  for (int i = 0; i < c.t.size(); ++i) {
    if (i > 0 && c.e[i]) a.push_back(Atom{c.t.v[i], true, 1});
    a.push_back(Atom{c.t.v[i], false, c.lab[i].dim()});
  }
  return a;
}

/** Koszul sign carrying `from` into the order `to` (same atoms). */
inline int reorder_sign(const std::vector<Atom>& from, const std::vector<Atom>& to) {
  std::vector<int> deg, tgt;
  for (auto& x : from) {
    auto it = std::find_if(to.begin(), to.end(), [&](const Atom& y) { return y.vertex == x.vertex && y.edge == x.edge; });
    if (it == to.end()) throw Error(Err::Precondition, "atom lists differ");
    deg.push_back(x.deg);
    tgt.push_back(static_cast<int>(it - to.begin()));
  }
  return koszul_sign(deg, tgt);
}

inline int parity_sign(int n) { return (n & 1) ? -1 : 1; }

}  // namespace detail

using SignedChain = std::map<TreeCell, long long>;

inline void chain_add(SignedChain& c, const TreeCell& x, long long v) {
  if (v == 0) return;
  auto it = c.find(x);
  if (it == c.end()) c.emplace(x, v);
  else if ((it->second += v) == 0) c.erase(it);
}

/** Contracts the edge above vertex i: every cell of the composed label, with
 *  its orientation sign relative to the face where that edge length is 1. */
inline std::vector<std::pair<TreeCell, int>> contract_edge(const TreeCell& c, int i, ComposeCache& cache) {
  using detail::Atom;
  const auto& t = c.t;
  const int p = t.parent[i];
  const int s = t.slot_of(i);
  // atom list of the face: drop the edge atom, slide label i right after label p
  auto A = detail::atoms(c);
  int sign = 1;
  {
    auto it = std::find(A.begin(), A.end(), Atom{t.v[i], true, 1});
    A.erase(it);
    auto li = std::find_if(A.begin(), A.end(), [&](const Atom& a) { return a.vertex == t.v[i] && !a.edge; });
    auto lp = std::find_if(A.begin(), A.end(), [&](const Atom& a) { return a.vertex == t.v[p] && !a.edge; });
    int between = 0;
    for (auto q = lp + 1; q != li; ++q) between += q->deg;
    if ((li->deg & 1) && (between & 1)) sign = -sign;
    Atom moved = *li;
    A.erase(li);
    lp = std::find_if(A.begin(), A.end(), [&](const Atom& a) { return a.vertex == t.v[p] && !a.edge; });
    A.insert(lp + 1, moved);
  }
  // composed input order: p's inputs with i replaced by i's inputs
  std::vector<Mask> order;
  for (auto& in : t.inputs[p]) {
    if (!in.leaf && in.id == i)
      for (auto& in2 : t.inputs[i]) order.push_back(in2.mask);
    else order.push_back(in.mask);
  }
  std::vector<Mask> sorted = order;
  std::sort(sorted.begin(), sorted.end(), [](Mask a, Mask b) { return mask_min(a) < mask_min(b); });
  Perm rho(order.size());
  for (size_t q = 0; q < order.size(); ++q)
    rho[q] = static_cast<int>(std::find(sorted.begin(), sorted.end(), order[q]) - sorted.begin()) + 1;

  std::vector<Mask> fam;
  for (int j = 0; j < t.size(); ++j)
    if (j != i) fam.push_back(t.v[j]);
  NestedTree nt = make_tree(t.k, fam);
  std::vector<std::pair<TreeCell, int>> out;
  for (auto& [f, eps] : cache.get(c.lab[p], s, c.lab[i])) {
    TreeCell n{nt, std::vector<Cell>(nt.size()), std::vector<std::uint8_t>(nt.size(), 0)};
    Cell merged = relabel(f, rho);
    int sg = sign * eps * relabel_sign(f, rho);
    for (int j = 0; j < nt.size(); ++j) {
      if (nt.v[j] == t.v[p]) {
        n.lab[j] = merged;
        n.e[j] = c.e[p];
        continue;
      }
      int old = static_cast<int>(std::find(t.v.begin(), t.v.end(), nt.v[j]) - t.v.begin());
      n.lab[j] = c.lab[old];
      n.e[j] = c.e[old];
    }
    n.e[0] = 0;
    // A currently lists label p then label i; fold them into label p
    std::vector<Atom> cur;
    for (auto& a : A) {
      if (a.vertex == t.v[i] && !a.edge) continue;
      Atom b = a;
      if (a.vertex == t.v[p] && !a.edge) b.deg = merged.dim();
      cur.push_back(b);
    }
    sg *= detail::reorder_sign(cur, detail::atoms(n));
    out.emplace_back(std::move(n), sg);
  }
  return out;
}

/** Boundary. Bar complex (fm = false): label faces and edge contractions.
 *  FM complex: additionally the edge-length-zero faces, marking the edge I0. */
inline SignedChain tree_differential(const TreeCell& c, bool fm, ComposeCache& cache) {
  SignedChain out;
  const auto A = detail::atoms(c);
  int pre = 0;
  for (auto& a : A) {
    int i = static_cast<int>(std::find(c.t.v.begin(), c.t.v.end(), a.vertex) - c.t.v.begin());
    if (!a.edge) {
      for (auto& [f, s] : boundary(c.lab[i])) {
        TreeCell n = c;
        n.lab[i] = f;
        chain_add(out, n, detail::parity_sign(pre) * s);
      }
    } else {
      for (auto& [n, s] : contract_edge(c, i, cache)) chain_add(out, n, detail::parity_sign(pre) * s);
      if (fm) {
        TreeCell n = c;
        n.e[i] = 0;
        chain_add(out, n, -detail::parity_sign(pre));
      }
    }
    pre += a.deg;
  }
  return out;
}

inline SignedChain bar_differential(const BarCell& c, ComposeCache& cache) { return tree_differential(c, false, cache); }
inline SignedChain fm_differential(const FMCell& c, ComposeCache& cache) { return tree_differential(c, true, cache); }

inline GradedComplex tree_complex(int k, bool fm, std::uint64_t limit = 2'000'000) {
  ComposeCache cache;
  auto cells = enumerate_tree_cells(k, fm, limit);
  return assemble(
      cells,
      [&](const TreeCell& c) {
        auto d = tree_differential(c, fm, cache);
        return std::vector<std::pair<TreeCell, long long>>(d.begin(), d.end());
      },
      [fm](const TreeCell& c) { return cell_str(c, fm); });
}

inline GradedComplex cacti_complex(int k, std::uint64_t limit = 5'000'000) {
  return assemble(enumerate_cells(k, limit), [](const Cell& c) { return boundary(c); }, [](const Cell& c) { return c.str(); });
}

// ---------------------------------------------------------------- grafting

/** a o_i b: b's tree grafted on leaf i, the new edge marked I0. Returns the
 *  cell and the orientation sign relative to a x b. */
inline std::pair<FMCell, int> fm_compose_signed(const FMCell& a, int slot, const FMCell& b) {
  const int k = a.k(), l = b.k();
  if (slot < 1 || slot > k) throw Error(Err::ArityMismatch, "slot outside 1..k");
  auto lift_a = [&](Mask m) {
    Mask r = 0;
    for (int j = 1; j <= k; ++j) {
      if (!(m >> (j - 1) & 1)) continue;
      if (j < slot) r |= Mask(1) << (j - 1);
      else if (j > slot) r |= Mask(1) << (j + l - 2);
      else r |= full_mask(l) << (slot - 1);
    }
    return r;
  };
  auto lift_b = [&](Mask m) { return m << (slot - 1); };
  std::vector<Mask> fam;
  std::map<Mask, std::pair<Cell, std::uint8_t>> info;
  for (int i = 0; i < a.t.size(); ++i) {
    fam.push_back(lift_a(a.t.v[i]));
    info[fam.back()] = {a.lab[i], a.e[i]};
  }
  for (int i = 0; i < b.t.size(); ++i) {
    fam.push_back(lift_b(b.t.v[i]));
    info[fam.back()] = {b.lab[i], i == 0 ? std::uint8_t(0) : b.e[i]};
  }
  FMCell c;
  c.t = make_tree(k + l - 1, fam);
  for (int i = 0; i < c.t.size(); ++i) {
    c.lab.push_back(info[c.t.v[i]].first);
    c.e.push_back(info[c.t.v[i]].second);
  }
  c.e[0] = 0;
  std::vector<detail::Atom> cur;
  for (auto x : detail::atoms(a)) { x.vertex = lift_a(x.vertex); cur.push_back(x); }
  for (auto x : detail::atoms(b)) { x.vertex = lift_b(x.vertex); cur.push_back(x); }
  return {c, detail::reorder_sign(cur, detail::atoms(c))};
}

inline FMCell fm_compose(const FMCell& a, int slot, const FMCell& b) { return fm_compose_signed(a, slot, b).first; }

/** Corolla with the given label. */
inline TreeCell corolla(const Cell& c) {
  return TreeCell{make_tree(c.k, {full_mask(c.k)}), {c}, {0}};
}

// ---------------------------------------------------------------- symmetric group

/** Permutes leaves (leaf j goes to perm[j-1]); labels follow their inputs. */
inline std::pair<TreeCell, int> relabel_tree_cell_signed(const TreeCell& c, const Perm& perm) {
  if (static_cast<int>(perm.size()) != c.k()) throw Error(Err::ArityMismatch, "permutation size differs from arity");
  if (!is_perm(perm)) throw Error(Err::Precondition, "not a bijection");
  auto img = [&](Mask m) {
    Mask r = 0;
    for (int j = 1; j <= c.k(); ++j)
      if (m >> (j - 1) & 1) r |= Mask(1) << (perm[j - 1] - 1);
    return r;
  };
  std::vector<Mask> fam;
  for (Mask m : c.t.v) fam.push_back(img(m));
  TreeCell n;
  n.t = make_tree(c.k(), fam);
  n.lab.resize(n.t.size());
  n.e.assign(n.t.size(), 0);
  int sign = 1;
  for (int i = 0; i < c.t.size(); ++i) {
    Mask m = img(c.t.v[i]);
    int j = static_cast<int>(std::find(n.t.v.begin(), n.t.v.end(), m) - n.t.v.begin());
    // old input q (sorted) lands at new position rho[q]
    Perm rho;
    for (auto& in : c.t.inputs[i]) {
      Mask im = img(in.mask);
      const auto& nin = n.t.inputs[j];
      int pos = 0;
      for (size_t q = 0; q < nin.size(); ++q)
        if (nin[q].mask == im) pos = static_cast<int>(q) + 1;
      rho.push_back(pos);
    }
    n.lab[j] = relabel(c.lab[i], rho);
    sign *= relabel_sign(c.lab[i], rho);
    n.e[j] = c.e[i];
  }
  n.e[0] = 0;
  std::vector<detail::Atom> cur;
  for (auto x : detail::atoms(c)) {
    x.vertex = img(x.vertex);
    cur.push_back(x);
  }
  sign *= detail::reorder_sign(cur, detail::atoms(n));
  return {n, sign};
}

inline TreeCell relabel_tree_cell(const TreeCell& c, const Perm& perm) { return relabel_tree_cell_signed(c, perm).first; }

// ---------------------------------------------------------------- two-level form

/** Two-level description: the outer tree (root plus sources of I0 edges) and,
 *  for each of its vertices, the set of tree vertices reached through I1 edges. */
struct TwoLevel {
  std::vector<Mask> outer;               // vertices of the coarse tree
  std::vector<std::vector<Mask>> inner;  // vertex groups, aligned with outer
};

inline TwoLevel to_two_level(const TreeCell& c) {
  TwoLevel r;
  std::map<Mask, int> group;
  for (int i = 0; i < c.t.size(); ++i) {
    if (i == 0 || c.e[i] == 0) {
      group[c.t.v[i]] = static_cast<int>(r.outer.size());
      r.outer.push_back(c.t.v[i]);
      r.inner.push_back({c.t.v[i]});
    } else {
      int g = group[c.t.v[c.t.parent[i]]];
      group[c.t.v[i]] = g;
      r.inner[g].push_back(c.t.v[i]);
    }
  }
  return r;
}

/** Rebuilds the edge markers from a two-level description. */
inline TreeCell from_two_level(const NestedTree& t, const std::vector<Cell>& lab, const TwoLevel& tl) {
  TreeCell c{t, lab, std::vector<std::uint8_t>(t.size(), 0)};
  for (int i = 1; i < t.size(); ++i) {
    bool source = std::find(tl.outer.begin(), tl.outer.end(), t.v[i]) != tl.outer.end();
    c.e[i] = source ? 0 : 1;
  }
  return c;
}

// ---------------------------------------------------------------- simplex operad

/** (a_1..a_i b_1 .. a_i b_l .. a_k) */
inline std::vector<Q> simplex_compose(const std::vector<Q>& a, int slot, const std::vector<Q>& b) {
  auto check = [](const std::vector<Q>& w) {
    Q s = 0;
    for (auto& x : w) {
      if (x <= 0) throw Error(Err::Precondition, "weights must be positive");
      s += x;
    }
    if (s != 1) throw Error(Err::Precondition, "weights must sum to 1");
  };
  check(a);
  check(b);
  if (slot < 1 || slot > static_cast<int>(a.size())) throw Error(Err::ArityMismatch, "slot out of range");
  std::vector<Q> r;
  for (int j = 1; j <= static_cast<int>(a.size()); ++j) {
    if (j != slot) r.push_back(a[j - 1]);
    else
      for (auto& x : b) r.push_back(a[j - 1] * x);
  }
  return r;
}

}  // namespace opcells
