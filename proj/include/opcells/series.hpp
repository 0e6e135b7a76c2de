#pragma once

// Truncated bivariate power series in x (arity) and t (dimension) with exact
// rational coefficients, and the counting series of the three cell families.

#include "error.hpp"
#include "util.hpp"

#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace opcells {

/** q[m][k] is the coefficient of t^m x^k, 0 <= m <= M, 0 <= k <= K. */
struct BiSeries {
  int M = 0, K = 0;
  std::vector<std::vector<Q>> q;

  BiSeries() = default;
  BiSeries(int M_, int K_) : M(M_), K(K_), q(M_ + 1, std::vector<Q>(K_ + 1, Q(0))) {}

  static BiSeries constant(int M, int K, Q c) { BiSeries s(M, K); s.q[0][0] = c; return s; }
  static BiSeries x(int M, int K) { BiSeries s(M, K); if (K >= 1) s.q[0][1] = 1; return s; }
  static BiSeries t(int M, int K) { BiSeries s(M, K); if (M >= 1) s.q[1][0] = 1; return s; }

  const Q& at(int m, int k) const { return q[m][k]; }
  Q& at(int m, int k) { return q[m][k]; }
  Q get(int m, int k) const { return (m <= M && k <= K && m >= 0 && k >= 0) ? q[m][k] : Q(0); }

  /** Coefficients of x^k as a polynomial in t. */
  std::vector<Q> x_coeff(int k) const {
    std::vector<Q> c(M + 1);
    for (int m = 0; m <= M; ++m) c[m] = q[m][k];
    return c;
  }
  BiSeries truncate(int M2, int K2) const {
    BiSeries s(M2, K2);
    for (int m = 0; m <= M2; ++m)
      for (int k = 0; k <= K2; ++k) s.q[m][k] = get(m, k);
    return s;
  }
  bool operator==(const BiSeries& o) const { return M == o.M && K == o.K && q == o.q; }

  BiSeries operator+(const BiSeries& o) const {
    BiSeries s = *this;
    for (int m = 0; m <= M; ++m)
      for (int k = 0; k <= K; ++k) s.q[m][k] += o.get(m, k);
    return s;
  }
  BiSeries operator-(const BiSeries& o) const {
    BiSeries s = *this;
    for (int m = 0; m <= M; ++m)
      for (int k = 0; k <= K; ++k) s.q[m][k] -= o.get(m, k);
    return s;
  }
  BiSeries operator*(const Q& c) const {
    BiSeries s = *this;
    for (auto& row : s.q)
      for (auto& v : row) v *= c;
    return s;
  }
  BiSeries operator*(const BiSeries& o) const {
    BiSeries s(M, K);
    for (int m1 = 0; m1 <= M; ++m1)
      for (int k1 = 0; k1 <= K; ++k1) {
        if (q[m1][k1] == 0) continue;
        for (int m2 = 0; m1 + m2 <= M && m2 <= o.M; ++m2)
          for (int k2 = 0; k1 + k2 <= K && k2 <= o.K; ++k2)
            if (o.q[m2][k2] != 0) s.q[m1 + m2][k1 + k2] += q[m1][k1] * o.q[m2][k2];
      }
    return s;
  }
  /** Multiply by t^e (e may be negative when the low rows vanish). */
  BiSeries shift_t(int e) const {
    BiSeries s(M, K);
    for (int m = 0; m <= M; ++m)
      for (int k = 0; k <= K; ++k) {
        int src = m - e;
        if (src < 0 || src > M) continue;
        s.q[m][k] = q[src][k];
      }
    if (e < 0)
      for (int m = 0; m < -e && m <= M; ++m)
        for (int k = 0; k <= K; ++k)
          if (q[m][k] != 0) throw Error(Err::ValuationViolation, "division by t of a series with a t^0 term");
    return s;
  }
  /** Evaluate the t-polynomial of each x^k at t = v. */
  std::vector<Q> at_t(const Q& v) const {
    std::vector<Q> r(K + 1, Q(0));
    for (int k = 0; k <= K; ++k) {
      Q p = 1;
      for (int m = 0; m <= M; ++m) {
        r[k] += q[m][k] * p;
        p *= v;
      }
    }
    return r;
  }
  int x_valuation() const {
    for (int k = 0; k <= K; ++k)
      for (int m = 0; m <= M; ++m)
        if (q[m][k] != 0) return k;
    return K + 1;
  }
};

/** 1 / s, constant term must be nonzero. */
inline BiSeries series_inverse(const BiSeries& s) {
  if (s.q[0][0] == 0) throw Error(Err::BadConstantTerm, "inverse needs a nonzero constant term");
  BiSeries r(s.M, s.K);
  const Q c = s.q[0][0];
  for (int m = 0; m <= s.M; ++m)
    for (int k = 0; k <= s.K; ++k) {
      Q acc = (m == 0 && k == 0) ? Q(1) : Q(0);
      for (int m1 = 0; m1 <= m; ++m1)
        for (int k1 = 0; k1 <= k; ++k1) {
          if (m1 == 0 && k1 == 0) continue;
          if (s.q[m1][k1] != 0) acc -= s.q[m1][k1] * r.q[m - m1][k - k1];
        }
      r.q[m][k] = acc / c;
    }
  return r;
}

/** Square root with constant term 1. */
inline BiSeries series_sqrt(const BiSeries& s) {
  if (s.q[0][0] != 1) throw Error(Err::BadConstantTerm, "sqrt needs constant term 1");
  BiSeries r(s.M, s.K);
  // r^2 = s, r_00 = 1: 2 r_{mk} = s_{mk} - sum over proper splits
  for (int m = 0; m <= s.M; ++m)
    for (int k = 0; k <= s.K; ++k) {
      if (m == 0 && k == 0) { r.q[0][0] = 1; continue; }
      Q acc = s.q[m][k];
      for (int m1 = 0; m1 <= m; ++m1)
        for (int k1 = 0; k1 <= k; ++k1) {
          if ((m1 == 0 && k1 == 0) || (m1 == m && k1 == k)) continue;
          acc -= r.q[m1][k1] * r.q[m - m1][k - k1];
        }
      r.q[m][k] = acc / 2;
    }
  return r;
}

/** outer(inner(x,t), t); the x of `outer` is the substitution variable. */
inline BiSeries compose_x(const BiSeries& outer, const BiSeries& inner) {
  if (inner.x_valuation() < 1) throw Error(Err::ValuationViolation, "inner series has an x^0 term");
  const int M = std::min(outer.M, inner.M), K = std::min(outer.K, inner.K);
  BiSeries res(M, K), pw = BiSeries::constant(M, K, 1);
  BiSeries in = inner.truncate(M, K);
  for (int j = 0; j <= K; ++j) {
    for (int m = 0; m <= M; ++m) {
      if (outer.q[m][j] == 0) continue;
      for (int m2 = 0; m + m2 <= M; ++m2)
        for (int k = 0; k <= K; ++k)
          if (pw.q[m2][k] != 0) res.q[m + m2][k] += outer.q[m][j] * pw.q[m2][k];
    }
    pw = pw * in;
  }
  return res;
}

/** Solves S = rhs(S) one x-degree at a time; rhs must only read x-degrees
 *  below the one it is producing. */
inline BiSeries solve_by_degree(int M, int K, const std::function<BiSeries(const BiSeries&)>& rhs) {
  BiSeries s(M, K);
  for (int n = 0; n <= K; ++n) {
    BiSeries r = rhs(s);
    for (int m = 0; m <= M; ++m) s.q[m][n] = r.get(m, n);
  }
  return s;
}

// ---------------------------------------------------------------- counting series

/** (1 - x - sqrt((1-x)^2 - 4xt)) / (2t) */
inline BiSeries P_closed(int M, int K) {
  const int M1 = M + 1;
  BiSeries x = BiSeries::x(M1, K), t = BiSeries::t(M1, K), one = BiSeries::constant(M1, K, 1);
  BiSeries disc = (one - x) * (one - x) - x * t * Q(4);
  BiSeries num = one - x - series_sqrt(disc);
  return num.shift_t(-1).truncate(M, K) * Q(1, 2);
}

/** W = x / (1 - tP), P = W / (1 - W). */
inline BiSeries P_grammar(int M, int K) {
  return solve_by_degree(M, K, [M, K](const BiSeries& P) {
    BiSeries one = BiSeries::constant(M, K, 1), t = BiSeries::t(M, K), x = BiSeries::x(M, K);
    BiSeries W = x * series_inverse(one - t * P);
    return W * series_inverse(one - W);
  });
}

/** Both constructions; they must agree exactly. */
inline BiSeries P_series(int M, int K) {
  BiSeries a = P_closed(M, K), b = P_grammar(M, K);
  if (!(a == b)) throw Error(Err::Precondition, "closed form and grammar disagree for P");
  return a;
}

inline BiSeries P_tilde(int M, int K) {
  BiSeries p = P_series(M, K);
  if (K >= 1) p.q[0][1] -= 1;
  return p;
}

/** o = P~(x + t o, t): a root vertex whose inputs are leaves or subtrees. */
inline BiSeries o_series(int M, int K) {
  BiSeries Pt = P_tilde(M, K);
  return solve_by_degree(M, K, [&](const BiSeries& o) {
    return compose_x(Pt, BiSeries::x(M, K) + BiSeries::t(M, K) * o);
  });
}

/** F = o(x + F, t): an open root cell with leaves or further cells grafted on. */
inline BiSeries F_series(int M, int K) {
  BiSeries o = o_series(M, K);
  return solve_by_degree(M, K, [&](const BiSeries& F) { return compose_x(o, BiSeries::x(M, K) + F); });
}

/** Printed quadratic relation t P~(t o) + t P~(x) = t o, solved for o. */
inline BiSeries o_printed(int M, int K) {
  BiSeries Pt = P_tilde(M, K);
  return solve_by_degree(M, K, [&](const BiSeries& o) { return Pt + compose_x(Pt, BiSeries::t(M, K) * o); });
}

/** Printed relation o(F/t) + o(x) = F, solved for F. The substitution needs
 *  negative powers of t from x^4 on, so only K <= 3 is supported. */
inline BiSeries F_printed(int M, int K) {
  if (K > 3) throw Error(Err::Precondition, "printed F relation leaves formal power series beyond x^3");
  // o(F/t) has x-valuation >= 4, so up to x^3 the relation reads F = o
  return o_series(M, K);
}

/** "1 + 5t + 6t^2 + 2t^3" */
inline std::string poly_str(const std::vector<Q>& c) {
  std::ostringstream os;
  bool first = true;
  for (size_t m = 0; m < c.size(); ++m) {
    if (c[m] == 0) continue;
    Q v = c[m];
    bool neg = v < 0;
    if (neg) v = -v;
    if (first) os << (neg ? "-" : "");
    else os << (neg ? " - " : " + ");
    first = false;
    bool unit = (v == 1);
    if (!unit || m == 0) os << v;
    if (m >= 1) os << 't';
    if (m >= 2) os << '^' << m;
  }
  if (first) os << '0';
  return os.str();
}

inline std::string series_line(const BiSeries& s, int k) { return "x^" + std::to_string(k) + ": " + poly_str(s.x_coeff(k)); }

struct CountMismatch {
  int k = 0, m = 0;
  BigInt expected, got;
};

/** k! [t^m x^k] s against counts[k][m] for 2 <= k <= kmax. */
inline std::optional<CountMismatch> compare_with_counts(const BiSeries& s,
                                                        const std::function<std::vector<std::uint64_t>(int)>& counter,
                                                        int kmax, int kmin = 2) {
  for (int k = kmin; k <= kmax; ++k) {
    auto c = counter(k);
    const int mmax = std::max<int>(s.M, static_cast<int>(c.size()) - 1);
    for (int m = 0; m <= mmax; ++m) {
      Q v = (k <= s.K) ? s.get(m, k) * Q(BigInt(factorial(k))) : Q(0);
      BigInt got = m < static_cast<int>(c.size()) ? BigInt(c[m]) : BigInt(0);
      if (boost::multiprecision::denominator(v) != 1 || boost::multiprecision::numerator(v) != got)
        return CountMismatch{k, m, boost::multiprecision::numerator(v), got};
    }
  }
  return std::nullopt;
}

}  // namespace opcells
