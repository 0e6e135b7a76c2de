#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <numeric>
#include <vector>

namespace opcells {

using BigInt = boost::multiprecision::cpp_int;
using Q = boost::multiprecision::cpp_rational;

/** Sign of reordering graded factors: factor p of degree deg[p] goes to slot
 *  target[p]. Only swaps of two odd factors contribute. */
inline int koszul_sign(const std::vector<int>& deg, const std::vector<int>& target) {
  int s = 1;
  for (size_t a = 0; a < deg.size(); ++a)
    for (size_t b = a + 1; b < deg.size(); ++b)
      if (target[a] > target[b] && (deg[a] & 1) && (deg[b] & 1)) s = -s;
  return s;
}

/** Sign of det of a square rational matrix (0 if singular). */
inline int det_sign(std::vector<std::vector<Q>> m) {
  const size_t n = m.size();
  int s = 1;
  for (size_t c = 0; c < n; ++c) {
    size_t p = c;
    while (p < n && m[p][c] == 0) ++p;
    if (p == n) return 0;
    if (p != c) { std::swap(m[p], m[c]); s = -s; }
    if (m[c][c] < 0) s = -s;
    for (size_t r = c + 1; r < n; ++r) {
      if (m[r][c] == 0) continue;
      Q f = m[r][c] / m[c][c];
      for (size_t j = c; j < n; ++j) m[r][j] -= f * m[c][j];
    }
  }
  return s;
}

inline std::uint64_t factorial(int n) {
  std::uint64_t r = 1;
  for (int i = 2; i <= n; ++i) r *= static_cast<std::uint64_t>(i);
  return r;
}

}  // namespace opcells
