#pragma once

// Integer chain complexes: sparse boundary matrices, d^2 checks, Smith normal
// form and integral homology.

#include "error.hpp"
#include "util.hpp"

#include <algorithm>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace opcells {

/** Column-major sparse integer matrix. */
struct IntMatrix {
  int rows = 0, cols = 0;
  std::vector<std::map<int, BigInt>> col;

  IntMatrix() = default;
  IntMatrix(int r, int c) : rows(r), cols(c), col(c) {}

  void add(int r, int c, const BigInt& v) {
    if (v == 0) return;
    auto& m = col[c];
    auto it = m.find(r);
    if (it == m.end()) m.emplace(r, v);
    else if ((it->second += v) == 0) m.erase(it);
  }
  BigInt at(int r, int c) const {
    auto it = col[c].find(r);
    return it == col[c].end() ? BigInt(0) : it->second;
  }
  size_t nnz() const {
    size_t n = 0;
    for (auto& m : col) n += m.size();
    return n;
  }
  static IntMatrix dense(const std::vector<std::vector<long long>>& a) {
    IntMatrix m(static_cast<int>(a.size()), a.empty() ? 0 : static_cast<int>(a[0].size()));
    for (int r = 0; r < m.rows; ++r)
      for (int c = 0; c < m.cols; ++c) m.add(r, c, a[r][c]);
    return m;
  }
  std::vector<std::vector<BigInt>> to_dense() const {
    std::vector<std::vector<BigInt>> a(rows, std::vector<BigInt>(cols, BigInt(0)));
    for (int c = 0; c < cols; ++c)
      for (auto& [r, v] : col[c]) a[r][c] = v;
    return a;
  }
};

/** a * b */
inline IntMatrix multiply(const IntMatrix& a, const IntMatrix& b) {
  if (a.cols != b.rows) throw Error(Err::ArityMismatch, "shape mismatch in product");
  IntMatrix p(a.rows, b.cols);
  for (int c = 0; c < b.cols; ++c)
    for (auto& [k, v] : b.col[c])
      for (auto& [r, w] : a.col[k]) p.add(r, c, v * w);
  return p;
}

/** Coordinate list: header "shape R C", then "row col entry" per line, 0-based. */
inline void write_coo(std::ostream& os, const IntMatrix& m) {
  os << "shape " << m.rows << ' ' << m.cols << '\n';
  for (int c = 0; c < m.cols; ++c)
    for (auto& [r, v] : m.col[c]) os << r << ' ' << c << ' ' << v << '\n';
}

inline IntMatrix read_coo(std::istream& is) {
  std::string tag;
  int R = 0, C = 0;
  if (!(is >> tag >> R >> C) || tag != "shape" || R < 0 || C < 0) throw Error(Err::Parse, "missing shape header");
  IntMatrix m(R, C);
  long long r, c;
  std::string v;
  while (is >> r >> c >> v) {
    if (r < 0 || r >= R || c < 0 || c >= C) throw Error(Err::Parse, "entry out of range");
    m.add(static_cast<int>(r), static_cast<int>(c), BigInt(v));
  }
  return m;
}

struct GradedComplex {
  std::vector<std::vector<std::string>> cells;  // names by degree
  std::vector<IntMatrix> d;                     // d[n] : C_n -> C_{n-1}; d[0] has 0 rows

  int top() const { return static_cast<int>(cells.size()) - 1; }
  std::vector<size_t> counts() const {
    std::vector<size_t> c;
    for (auto& v : cells) c.push_back(v.size());
    return c;
  }
  long long euler() const {
    long long e = 0;
    for (size_t n = 0; n < cells.size(); ++n) e += (n & 1 ? -1 : 1) * static_cast<long long>(cells[n].size());
    return e;
  }
};

/** Builds the complex from cells grouped by degree and a boundary function.
 *  Faces must be cells of the previous degree. */
template <class T, class Bd, class Name>
GradedComplex assemble(const std::vector<std::vector<T>>& by_dim, Bd&& boundary, Name&& name) {
  GradedComplex g;
  std::vector<std::map<T, int>> idx(by_dim.size());
  for (size_t n = 0; n < by_dim.size(); ++n) {
    std::vector<std::string> names;
    for (size_t i = 0; i < by_dim[n].size(); ++i) {
      idx[n].emplace(by_dim[n][i], static_cast<int>(i));
      names.push_back(name(by_dim[n][i]));
    }
    g.cells.push_back(std::move(names));
  }
  for (size_t n = 0; n < by_dim.size(); ++n) {
    IntMatrix m(n ? static_cast<int>(by_dim[n - 1].size()) : 0, static_cast<int>(by_dim[n].size()));
    for (size_t i = 0; n && i < by_dim[n].size(); ++i)
      for (auto& [f, s] : boundary(by_dim[n][i])) {
        auto it = idx[n - 1].find(f);
        if (it == idx[n - 1].end())
          throw Error(Err::Precondition, "face " + name(f) + " of " + name(by_dim[n][i]) + " is not a listed cell");
        m.add(it->second, static_cast<int>(i), s);
      }
    g.d.push_back(std::move(m));
  }
  return g;
}

struct D2Report {
  bool ok = true;
  int degree = -1;  // degree of the source cell
  std::string source, target;
  BigInt entry;
  std::string str() const {
    if (ok) return "d^2 = 0";
    std::ostringstream os;
    os << "d^2 != 0: coefficient " << entry << " of " << target << " in d^2(" << source << "), degree " << degree;
    return os.str();
  }
};

inline D2Report verify_d2(const GradedComplex& g) {
  D2Report rep;
  for (int n = 2; n <= g.top(); ++n) {
    const auto& a = g.d[n - 1];
    const auto& b = g.d[n];
    for (int c = 0; c < b.cols; ++c) {
      std::map<int, BigInt> acc;
      for (auto& [k, v] : b.col[c])
        for (auto& [r, w] : a.col[k]) acc[r] += v * w;
      for (auto& [r, v] : acc)
        if (v != 0) {
          rep.ok = false;
          rep.degree = n;
          rep.source = g.cells[n][c];
          rep.target = g.cells[n - 2][r];
          rep.entry = v;
          return rep;
        }
    }
  }
  return rep;
}

// ---------------------------------------------------------------- Smith normal form

struct SNF {
  std::vector<BigInt> factors;  // nonzero invariant factors, each dividing the next
  // present when requested: U * M * V = D with U, V unimodular
  std::optional<std::vector<std::vector<BigInt>>> U, V, D;
  size_t rank() const { return factors.size(); }
};

namespace detail {

inline BigInt babs(const BigInt& x) { return x < 0 ? BigInt(-x) : x; }

/** Dense SNF with minimal-absolute-value pivoting. */
inline SNF dense_snf(std::vector<std::vector<BigInt>> a, bool transforms) {
  const int R = static_cast<int>(a.size());
  const int C = R ? static_cast<int>(a[0].size()) : 0;
  std::vector<std::vector<BigInt>> U, V;
  if (transforms) {
    U.assign(R, std::vector<BigInt>(R, BigInt(0)));
    V.assign(C, std::vector<BigInt>(C, BigInt(0)));
    for (int i = 0; i < R; ++i) U[i][i] = 1;
    for (int i = 0; i < C; ++i) V[i][i] = 1;
  }
  auto swap_rows = [&](int i, int j) {
    if (i == j) return;
    std::swap(a[i], a[j]);
    if (transforms) std::swap(U[i], U[j]);
  };
  auto swap_cols = [&](int i, int j) {
    if (i == j) return;
    for (auto& row : a) std::swap(row[i], row[j]);
    if (transforms)
      for (auto& row : V) std::swap(row[i], row[j]);
  };
  auto row_axpy = [&](int dst, int src, const BigInt& q) {  // row dst -= q * row src
    for (int c = 0; c < C; ++c) a[dst][c] -= q * a[src][c];
    if (transforms)
      for (int c = 0; c < R; ++c) U[dst][c] -= q * U[src][c];
  };
  auto col_axpy = [&](int dst, int src, const BigInt& q) {
    for (int r = 0; r < R; ++r) a[r][dst] -= q * a[r][src];
    if (transforms)
      for (int r = 0; r < C; ++r) V[r][dst] -= q * V[r][src];
  };
  SNF out;
  for (int t = 0; t < std::min(R, C); ++t) {
    for (;;) {
      int pr = -1, pc = -1;
      BigInt best;
      for (int r = t; r < R; ++r)
        for (int c = t; c < C; ++c)
          if (a[r][c] != 0 && (pr < 0 || babs(a[r][c]) < best)) {
            best = babs(a[r][c]);
            pr = r;
            pc = c;
          }
      if (pr < 0) goto done;
      swap_rows(t, pr);
      swap_cols(t, pc);
      bool clean = true;
      for (int r = t + 1; r < R; ++r)
        if (a[r][t] != 0) {
          BigInt q = a[r][t] / a[t][t];
          row_axpy(r, t, q);
          if (a[r][t] != 0) clean = false;
        }
      for (int c = t + 1; c < C; ++c)
        if (a[t][c] != 0) {
          BigInt q = a[t][c] / a[t][t];
          col_axpy(c, t, q);
          if (a[t][c] != 0) clean = false;
        }
      if (!clean) continue;
      // divisibility of the remaining block
      int bad = -1;
      for (int r = t + 1; r < R && bad < 0; ++r)
        for (int c = t + 1; c < C; ++c)
          if (a[r][c] % a[t][t] != 0) { bad = r; break; }
      if (bad < 0) break;
      row_axpy(t, bad, BigInt(-1));
    }
    if (a[t][t] < 0) {
      for (int c = 0; c < C; ++c) a[t][c] = -a[t][c];
      if (transforms)
        for (int c = 0; c < R; ++c) U[t][c] = -U[t][c];
    }
    out.factors.push_back(a[t][t]);
  }
done:
  if (transforms) {
    out.U = std::move(U);
    out.V = std::move(V);
    out.D = a;
  }
  return out;
}

}  // namespace detail

struct SNFLimits {
  size_t max_dense = 4000;          // side of the residual block handed to dense SNF
  size_t max_entry_bits = 1 << 16;  // entry growth guard
};

/** Invariant factors. Unit pivots are eliminated sparsely (Markowitz order);
 *  the residual block goes through dense SNF. */
inline SNF smith_normal_form(const IntMatrix& m, bool transforms = false, SNFLimits lim = {}) {
  if (transforms) return detail::dense_snf(m.to_dense(), true);
  std::vector<std::map<int, BigInt>> R(m.rows);
  std::vector<std::set<int>> C(m.cols);
  for (int c = 0; c < m.cols; ++c)
    for (auto& [r, v] : m.col[c]) {
      R[r].emplace(c, v);
      C[c].insert(r);
    }
  size_t units = 0;
  for (;;) {
    int pr = -1, pc = -1;
    size_t best = SIZE_MAX;
    for (int r = 0; r < m.rows && best; ++r)
      for (auto& [c, v] : R[r])
        if (v == 1 || v == -1) {
          size_t cost = (R[r].size() - 1) * (C[c].size() - 1);
          if (cost < best) {
            best = cost;
            pr = r;
            pc = c;
            if (!best) break;
          }
        }
    if (pr < 0) break;
    const BigInt piv = R[pr][pc];
    std::vector<int> others(C[pc].begin(), C[pc].end());
    for (int i : others) {
      if (i == pr) continue;
      BigInt q = R[i][pc] * piv;  // piv is a unit
      for (auto& [c, v] : R[pr]) {
        auto it = R[i].find(c);
        if (it == R[i].end()) {
          R[i].emplace(c, -q * v);
          C[c].insert(i);
        } else if ((it->second -= q * v) == 0) {
          R[i].erase(it);
          C[c].erase(i);
        } else if (boost::multiprecision::msb(detail::babs(it->second)) > lim.max_entry_bits) {
          throw Error(Err::ResourceLimit, "entry growth in Smith normal form");
        }
      }
    }
    for (auto& [c, v] : R[pr]) C[c].erase(pr);
    R[pr].clear();
    ++units;
  }
  std::vector<int> rows, cols;
  for (int r = 0; r < m.rows; ++r)
    if (!R[r].empty()) rows.push_back(r);
  for (int c = 0; c < m.cols; ++c)
    if (!C[c].empty()) cols.push_back(c);
  SNF out;
  out.factors.assign(units, BigInt(1));
  if (!rows.empty()) {
    if (rows.size() > lim.max_dense || cols.size() > lim.max_dense)
      throw Error(Err::ResourceLimit, "residual block " + std::to_string(rows.size()) + "x" + std::to_string(cols.size()));
    std::map<int, int> cix;
    for (size_t j = 0; j < cols.size(); ++j) cix[cols[j]] = static_cast<int>(j);
    std::vector<std::vector<BigInt>> a(rows.size(), std::vector<BigInt>(cols.size(), BigInt(0)));
    for (size_t i = 0; i < rows.size(); ++i)
      for (auto& [c, v] : R[rows[i]]) a[i][cix[c]] = v;
    auto rest = detail::dense_snf(std::move(a), false);
    out.factors.insert(out.factors.end(), rest.factors.begin(), rest.factors.end());
  }
  return out;
}

/** Rank over Z/p (p prime), for quick betti numbers. */
inline size_t rank_mod_p(const IntMatrix& m, long long p = 2147483629LL) {
  auto md = [p](long long x) { x %= p; return x < 0 ? x + p : x; };
  auto inv = [&](long long a) {
    long long r = 1, e = p - 2;
    a = md(a);
    while (e) {
      if (e & 1) r = static_cast<long long>((__int128)r * a % p);
      a = static_cast<long long>((__int128)a * a % p);
      e >>= 1;
    }
    return r;
  };
  std::vector<std::map<int, long long>> cols(m.cols);
  for (int c = 0; c < m.cols; ++c)
    for (auto& [r, v] : m.col[c]) {
      long long x = md(static_cast<long long>(v % p));
      if (x) cols[c][r] = x;
    }
  std::map<int, std::map<int, long long>> pivots;  // pivot row -> normalized column
  size_t rank = 0;
  for (int c = 0; c < m.cols; ++c) {
    auto col = std::move(cols[c]);
    while (!col.empty()) {
      auto it = pivots.find(col.begin()->first);
      if (it == pivots.end()) break;
      long long f = col.begin()->second;
      for (auto& [r, v] : it->second) {
        long long nv = md(col[r] - static_cast<long long>((__int128)f * v % p));
        if (nv) col[r] = nv;
        else col.erase(r);
      }
    }
    if (col.empty()) continue;
    long long iv = inv(col.begin()->second);
    for (auto& [r, v] : col) v = static_cast<long long>((__int128)v * iv % p);
    pivots.emplace(col.begin()->first, std::move(col));
    ++rank;
  }
  return rank;
}

struct HomologySummary {
  std::vector<size_t> betti;
  std::vector<std::vector<BigInt>> torsion;

  bool torsion_free() const {
    for (auto& t : torsion)
      if (!t.empty()) return false;
    return true;
  }
  /** "H0=Z H1=Z^3 H2=Z^2+Z/2" */
  std::string str() const {
    std::ostringstream os;
    for (size_t n = 0; n < betti.size(); ++n) {
      if (n) os << ' ';
      os << 'H' << n << '=';
      bool any = false;
      if (betti[n]) {
        os << 'Z';
        if (betti[n] > 1) os << '^' << betti[n];
        any = true;
      }
      for (auto& f : torsion[n]) {
        os << (any ? "+" : "") << "Z/" << f;
        any = true;
      }
      if (!any) os << '0';
    }
    return os.str();
  }
};

inline HomologySummary homology(const GradedComplex& g, SNFLimits lim = {}) {
  const int top = g.top();
  std::vector<SNF> snf(top + 2);
  for (int n = 1; n <= top; ++n) snf[n] = smith_normal_form(g.d[n], false, lim);
  HomologySummary h;
  for (int n = 0; n <= top; ++n) {
    size_t rk_out = n >= 1 ? snf[n].rank() : 0;
    size_t rk_in = n + 1 <= top ? snf[n + 1].rank() : 0;
    h.betti.push_back(g.cells[n].size() - rk_out - rk_in);
    std::vector<BigInt> tor;
    if (n + 1 <= top)
      for (auto& f : snf[n + 1].factors)
        if (f > 1) tor.push_back(f);
    h.torsion.push_back(std::move(tor));
  }
  return h;
}

/** Betti numbers over Q via modular rank. */
inline std::vector<size_t> betti_mod_p(const GradedComplex& g) {
  const int top = g.top();
  std::vector<size_t> rk(top + 2, 0), b;
  for (int n = 1; n <= top; ++n) rk[n] = rank_mod_p(g.d[n]);
  for (int n = 0; n <= top; ++n) b.push_back(g.cells[n].size() - rk[n] - rk[n + 1]);
  return b;
}

}  // namespace opcells
