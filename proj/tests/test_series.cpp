#include <catch2/catch_amalgamated.hpp>

#include "opcells/cacti.hpp"
#include "opcells/series.hpp"

using namespace opcells;

static std::vector<Q> poly(std::initializer_list<long long> c, int M) {
  std::vector<Q> v(M + 1, Q(0));
  int i = 0;
  for (auto x : c) v[i++] = x;
  return v;
}

TEST_CASE("series_sqrt") {
  const int M = 6, K = 6;
  auto one = BiSeries::constant(M, K, 1);
  CHECK(series_sqrt(one) == one);
  auto x = BiSeries::x(M, K), t = BiSeries::t(M, K);
  auto r = series_sqrt(one - x * t * Q(4));
  // sqrt(1-4u) = 1 - 2u - 2u^2 - 4u^3 - 10u^4 ...
  CHECK(r.at(0, 0) == 1);
  CHECK(r.at(1, 1) == -2);
  CHECK(r.at(2, 2) == -2);
  CHECK(r.at(3, 3) == -4);
  CHECK(r.at(4, 4) == -10);
  CHECK(r.at(1, 2) == 0);
  CHECK(r * r == one - x * t * Q(4));
  CHECK(series_sqrt((one - x) * (one - x)) == one - x);
  CHECK_THROWS_AS(series_sqrt(x), Error);
}

TEST_CASE("compose_x") {
  const int M = 3, K = 5;
  auto x = BiSeries::x(M, K);
  auto y2 = x * x;
  auto s = compose_x(y2, x + x * x);
  CHECK(s.at(0, 3) == 2);
  CHECK(s.at(0, 2) == 1);
  CHECK(compose_x(x, y2 + x) == y2 + x);
  auto Pt = P_tilde(M, K);
  CHECK(compose_x(Pt, x) == Pt);
  CHECK_THROWS_AS(compose_x(x, BiSeries::constant(M, K, 1)), Error);
}

TEST_CASE("P series reference coefficients") {
  auto P = P_series(6, 6);
  CHECK(P.x_coeff(1) == poly({1}, 6));
  CHECK(P.x_coeff(2) == poly({1, 1}, 6));
  CHECK(P.x_coeff(3) == poly({1, 3, 2}, 6));
  CHECK(P.x_coeff(4) == poly({1, 6, 10, 5}, 6));
  CHECK(series_line(P, 4) == "x^4: 1 + 6t + 10t^2 + 5t^3");
  CHECK(P_closed(10, 10) == P_grammar(10, 10));
}

TEST_CASE("o and F series reference coefficients") {
  auto o = o_series(8, 5);
  CHECK(o.x_coeff(2) == poly({1, 1}, 8));
  CHECK(o.x_coeff(3) == poly({1, 5, 6, 2}, 8));
  CHECK(series_line(o, 3) == "x^3: 1 + 5t + 6t^2 + 2t^3");
  auto F = F_series(8, 5);
  CHECK(F.x_coeff(2) == poly({1, 1}, 8));
  CHECK(F.x_coeff(3) == poly({3, 9, 8, 2}, 8));
  // Euler characteristic vanishes
  for (auto& s : {o, F}) {
    auto v = s.at_t(Q(-1));
    for (int k = 2; k <= 5; ++k) CHECK(v[k] == 0);
  }
  // k! times each coefficient is an integer, top degree 2k-3
  for (auto& s : {o, F})
    for (int k = 2; k <= 5; ++k)
      for (int m = 0; m <= 8; ++m) {
        Q v = s.at(m, k) * Q(BigInt(factorial(k)));
        CHECK(boost::multiprecision::denominator(v) == 1);
        CHECK(v >= 0);
        if (m > 2 * k - 3) CHECK(v == 0);
      }
}

TEST_CASE("printed quadratic relation disagrees at x^3") {
  auto printed = o_printed(6, 4);
  CHECK(printed.x_coeff(2) == poly({1, 1}, 6));
  CHECK(printed.x_coeff(3) == poly({1, 3, 2}, 6));
  CHECK(printed.x_coeff(3) != o_series(6, 4).x_coeff(3));
}

TEST_CASE("compare_with_counts") {
  auto P = P_series(6, 6);
  auto cacti = [](int k) { return count_cells(k); };
  CHECK_FALSE(compare_with_counts(P, cacti, 5));
  auto cut = P.truncate(2, 6);
  auto mm = compare_with_counts(cut, cacti, 5);
  REQUIRE(mm);
  CHECK(mm->k == 4);
  CHECK(mm->m == 3);
  CHECK(mm->got == 120);
  CHECK(mm->expected == 0);
}

TEST_CASE("poly_str") {
  CHECK(poly_str(poly({3, 9, 8, 2}, 3)) == "3 + 9t + 8t^2 + 2t^3");
  CHECK(poly_str(poly({0, -1}, 1)) == "-t");
  CHECK(poly_str(poly({}, 2)) == "0");
  CHECK(poly_str({Q(1, 2), Q(0), Q(-3, 4)}) == "1/2 - 3/4t^2");
}
