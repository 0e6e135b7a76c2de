#include <catch2/catch_amalgamated.hpp>

#include "opcells/cactus_point.hpp"

#include <algorithm>
#include <set>

using namespace opcells;

static Cell C(const char* s, int k = 0) { return parse_cell(s, k); }

static std::set<std::string> strs(const std::vector<Cell>& v) {
  std::set<std::string> s;
  for (auto& c : v) s.insert(c.str());
  return s;
}

TEST_CASE("validate_word") {
  CHECK(C("1,2,1").dim() == 1);
  CHECK(C("1", 1).dim() == 0);
  try {
    validate_word({1, 2, 1, 2}, 2);
    FAIL("expected ComplexityViolation");
  } catch (const Error& e) {
    CHECK(e.kind == Err::ComplexityViolation);
    CHECK(std::string(e.what()).find("(1,2,3,4)") != std::string::npos);
  }
  CHECK_THROWS_MATCHES(validate_word({1, 1, 2}, 2), Error, Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("AdjacentRepeat")));
  CHECK_THROWS_MATCHES(validate_word({1, 3}, 3), Error, Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("NotSurjective")));
  CHECK(C("1231").multidegree() == std::vector<int>{0, 1, 0, 0});
}

TEST_CASE("enumerate_cells reference counts") {
  auto e2 = enumerate_cells(2);
  CHECK(strs(e2[0]) == std::set<std::string>{"12", "21"});
  CHECK(strs(e2[1]) == std::set<std::string>{"121", "212"});
  CHECK(count_cells(3) == std::vector<std::uint64_t>{6, 18, 12});
  CHECK(count_cells(4) == std::vector<std::uint64_t>{24, 144, 240, 120});
  auto e3 = enumerate_cells(3);
  CHECK(strs(e3[1]).count("1231"));
  CHECK(strs(e3[1]).count("1213"));
  CHECK(strs(e3[2]).count("12131"));
  CHECK(strs(e3[2]).count("12321"));
  CHECK(std::is_sorted(e3[1].begin(), e3[1].end()));
}

TEST_CASE("enumeration agrees with a brute-force word filter") {
  for (int k = 1; k <= 4; ++k) {
    std::vector<std::uint64_t> c(k, 0);
    for (int L = k; L <= 2 * k - 1; ++L) {
      Word w(L, 1);
      for (;;) {
        if (is_valid(w, k)) ++c[L - k];
        int i = L - 1;
        while (i >= 0 && w[i] == k) w[i--] = 1;
        if (i < 0) break;
        ++w[i];
      }
    }
    CHECK(c == count_cells(k));
  }
}

TEST_CASE("faces") {
  CHECK(face(C("121"), 1, 0).str() == "21");
  CHECK(face(C("121"), 1, 1).str() == "12");
  CHECK(face(C("1231"), 1, 1).str() == "123");
  CHECK_THROWS_AS(face(C("121"), 2, 0), Error);
  auto b = boundary(C("121"));
  REQUIRE(b.size() == 2);
  CHECK(b[0].first.str() == "21");
  CHECK(b[0].second == 1);
  CHECK(b[1].first.str() == "12");
  CHECK(b[1].second == -1);
}

TEST_CASE("semi-simplicial identities, k <= 4") {
  for (int k = 2; k <= 4; ++k)
    for (auto& dimv : enumerate_cells(k))
      for (auto& c : dimv) {
        auto m = c.multidegree();
        for (int j = 1; j <= k; ++j)
          for (int j2 = 1; j2 <= k; ++j2)
            for (int i = 0; i <= m[j]; ++i)
              for (int i2 = 0; i2 <= m[j2]; ++i2) {
                if (m[j] == 0) continue;
                auto f = face(c, j, i);
                if (j == j2) {
                  if (m[j] < 2 || i2 >= m[j] || i >= i2 + 1) continue;
                  // d_i d_{i'} = d_{i'-1} d_i for i < i'
                  auto a = face(face(c, j, i2 + 1), j, i);
                  auto b2 = face(face(c, j, i), j, i2);
                  CHECK(a == b2);
                } else if (m[j2] > 0) {
                  CHECK(face(face(c, j, i), j2, i2) == face(face(c, j2, i2), j, i));
                }
                CHECK(f.dim() == c.dim() - 1);
              }
      }
}

TEST_CASE("relabel") {
  CHECK(relabel(C("123"), identity_perm(3)).str() == "123");
  CHECK(relabel(C("121"), {2, 1}).str() == "212");
  CHECK(relabel(C("1213"), {2, 3, 1}).str() == "2321");
  CHECK_THROWS_AS(relabel(C("12"), {1, 2, 3}), Error);
  // free action and group law on k = 3
  auto cells = enumerate_cells(3);
  std::vector<Perm> perms;
  Perm p = identity_perm(3);
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  for (auto& dv : cells)
    for (auto& c : dv) {
      std::set<Cell> orbit;
      for (auto& q : perms) {
        orbit.insert(relabel(c, q));
        for (auto& r : perms) CHECK(relabel(relabel(c, q), r) == relabel(c, compose_perm(q, r)));
      }
      CHECK(orbit.size() == 6);
    }
}

TEST_CASE("star product") {
  CHECK(star(C("12"), C("12")).str() == "1234");
  CHECK(star(C("121"), C("1")).str() == "1213");
  CHECK(star(star(C("12"), C("21")), C("1")) == star(C("12"), star(C("21"), C("1"))));
  CHECK(star(star(C("12"), C("21")), C("1")).str() == "12435");
  CHECK(star(C("121"), C("212")).dim() == 2);
}

TEST_CASE("decompose") {
  auto d = decompose(C("123"), {2, 1});
  REQUIRE(d);
  CHECK(d->outer.str() == "12");
  CHECK(d->inner[0].str() == "12");
  CHECK(d->inner[1].str() == "1");
  d = decompose(C("1231"), {1, 2});
  REQUIRE(d);
  CHECK(d->outer.str() == "121");
  CHECK(d->inner[0].str() == "1");
  CHECK(d->inner[1].str() == "12");
  // 1213 over blocks (2,1): the outer path reads 1112 -> 12 and block 1 reads 121
  d = decompose(C("1213"), {2, 1});
  REQUIRE(d);
  CHECK(d->outer.str() == "12");
  CHECK(d->inner[0].str() == "121");
  CHECK(d->inner[1].str() == "1");
  // outer word 1212 is not a cell
  CHECK_FALSE(decompose(C("1324"), {2, 2}));
  // 132 over (2,1): outer 121 is fine but dimensions do not add up
  CHECK_FALSE(decompose(C("132"), {2, 1}));
}

TEST_CASE("compose reference values") {
  CHECK(strs(compose(C("12"), 1, C("12"))) == std::set<std::string>{"123"});
  CHECK(strs(compose(C("21"), 1, C("12"))) == std::set<std::string>{"312"});
  CHECK(strs(compose(C("121"), 2, C("12"))) == std::set<std::string>{"1231"});
}

TEST_CASE("compose matches the brute-force oracle up to arity 4") {
  for (int k = 1; k <= 4; ++k)
    for (int n = 1; k + n - 1 <= 4; ++n)
      for (auto& gd : enumerate_cells(k))
        for (auto& g : gd)
          for (auto& hd : enumerate_cells(n))
            for (auto& h : hd)
              for (int i = 1; i <= k; ++i) {
                auto a = compose(g, i, h), b = compose_bruteforce(g, i, h);
                REQUIRE(a == b);
                for (auto& f : a) {
                  CHECK(f.dim() == g.dim() + h.dim());
                  auto d = decompose(f, slot_arities(k, i, n));
                  REQUIRE(d);
                  CHECK(d->outer == g);
                  CHECK(d->inner[i - 1] == h);
                }
              }
}

namespace {
using Chain = std::map<Cell, long>;
void add_to(Chain& c, const Cell& x, long v) {
  if ((c[x] += v) == 0) c.erase(x);
}
Chain compose_chain(const Chain& a, int i, const Chain& b) {
  Chain out;
  for (auto& [g, u] : a)
    for (auto& [h, v] : b)
      for (auto& [f, s] : compose_signed(g, i, h)) add_to(out, f, s * u * v);
  return out;
}
Chain d_chain(const Chain& a) {
  Chain out;
  for (auto& [g, u] : a)
    for (auto& [f, s] : boundary(g)) add_to(out, f, s * u);
  return out;
}
}  // namespace

TEST_CASE("signed composition is a chain map (Leibniz rule), arity <= 5") {
  for (int k = 1; k <= 3; ++k)
    for (int n = 1; k + n - 1 <= 5 && n <= 3; ++n)
      for (auto& gd : enumerate_cells(k))
        for (auto& g : gd)
          for (auto& hd : enumerate_cells(n))
            for (auto& h : hd)
              for (int i = 1; i <= k; ++i) {
                Chain G{{g, 1}}, H{{h, 1}};
                Chain lhs = d_chain(compose_chain(G, i, H));
                Chain rhs = compose_chain(d_chain(G), i, H);
                long sg = (g.dim() & 1) ? -1 : 1;
                for (auto& [f, v] : compose_chain(G, i, d_chain(H))) add_to(rhs, f, sg * v);
                INFO(g.str() << " o" << i << " " << h.str());
                CHECK(lhs == rhs);
              }
}

TEST_CASE("partial compositions commute on C2, C3 cells") {
  // (x o_i y) o_{j+n-1} z = (x o_j z) o_i y for i < j
  std::vector<Cell> small;
  for (int k = 2; k <= 3; ++k)
    for (auto& dv : enumerate_cells(k))
      for (auto& c : dv) small.push_back(c);
  for (auto& x : small)
    for (auto& y : small)
      for (auto& z : small) {
        for (int i = 1; i <= x.k; ++i)
          for (int j = i + 1; j <= x.k; ++j) {
            std::set<Cell> a, b;
            for (auto& u : compose(x, i, y))
              for (auto& v : compose(u, j + y.k - 1, z)) a.insert(v);
            for (auto& u : compose(x, j, z))
              for (auto& v : compose(u, i, y)) b.insert(v);
            CHECK(a == b);
          }
      }
}

TEST_CASE("cactus path") {
  auto b = cactus_path({C("12"), {1, 1}});
  CHECK(b.y == std::vector<Q>{0, 1, 2});
  CHECK(b.lobe == std::vector<int>{1, 2});
  b = cactus_path({C("121"), {Q(1, 2), 1, Q(1, 2)}});
  CHECK(b.y == std::vector<Q>{0, Q(1, 2), Q(3, 2), 2});
  b = cactus_path({C("1213"), {Q(1, 4), 1, Q(3, 4), 1}});
  CHECK(b.y == std::vector<Q>{0, Q(1, 4), Q(5, 4), 2, 3});
  CHECK_THROWS_AS(cactus_path({C("121"), {Q(1, 2), 1, Q(1, 3)}}), Error);
}

TEST_CASE("compose_points") {
  CactusPoint x{C("12"), {1, 1}};
  auto r = compose_points(x, {{C("12"), {1, 1}}, {C("1"), {1}}});
  CHECK(r.cell.str() == "123");
  CHECK(r.t == std::vector<Q>{1, 1, 1});
  auto y = barycenter(C("12131"));
  auto id = compose_points(y, {{C("1"), {1}}, {C("1"), {1}}, {C("1"), {1}}});
  CHECK(id.cell == y.cell);
  CHECK(id.t == y.t);
  r = compose_points({C("121"), {Q(1, 2), 1, Q(1, 2)}}, {{C("1"), {1}}, {C("12"), {1, 1}}});
  CHECK(r.cell.str() == "1231");
  CHECK(r.t == std::vector<Q>{Q(1, 2), 1, 1, Q(1, 2)});
  // visit boundary exactly on a breakpoint of the inner path
  CHECK_THROWS_AS(compose_points({C("121"), {Q(1, 4), 1, Q(3, 4)}}, {{C("12"), {Q(1, 2), 1}}, {C("1"), {1}}}), Error);
}

static CactusPoint generic_point(const Cell& c, int seed) {
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  auto m = c.multidegree();
  std::vector<Q> tot(c.k + 1, Q(0));
  std::vector<Q> raw;
  for (size_t p = 0; p < c.w.size(); ++p) {
    raw.push_back(Q(primes[(p * 5 + seed) % 16]));
    tot[c.w[p]] += raw.back();
  }
  CactusPoint pt{c, {}};
  for (size_t p = 0; p < c.w.size(); ++p) pt.t.push_back(raw[p] / tot[c.w[p]]);
  return pt;
}

TEST_CASE("compose_points agrees with compose and decompose_point inverts it") {
  for (int k = 1; k <= 3; ++k)
    for (int n = 1; n <= 3; ++n)
      for (auto& gd : enumerate_cells(k))
        for (auto& g : gd)
          for (auto& hd : enumerate_cells(n))
            for (auto& h : hd)
              for (int i = 1; i <= k; ++i) {
                auto x = generic_point(g, 1);
                auto hp = generic_point(h, 4);
                std::vector<CactusPoint> in;
                for (int j = 1; j <= k; ++j) in.push_back(j == i ? hp : CactusPoint{C("1"), {1}});
                auto f = compose_points(x, in);
                auto cs = compose(g, i, h);
                CHECK(std::find(cs.begin(), cs.end(), f.cell) != cs.end());
                auto back = decompose_point(f, slot_arities(k, i, n));
                REQUIRE(back);
                CHECK(back->first.cell == g);
                CHECK(back->first.t == x.t);
                CHECK(back->second[i - 1].t == hp.t);
              }
}

TEST_CASE("basepoint shift and section") {
  CactusPoint p{C("12"), {1, 1}};
  auto s0 = basepoint_shift(p, 0);
  CHECK(s0.cell == p.cell);
  CHECK(s0.t == p.t);
  CHECK(basepoint_shift(p, 1).cell.str() == "21");
  CHECK(basepoint_shift(p, Q(1, 2)).cell.str() == "121");
  CHECK(basepoint_shift(p, Q(3, 2)).cell.str() == "212");
  auto full = basepoint_shift(p, 2);
  CHECK(full.cell == p.cell);
  CHECK(full.t == p.t);
  // the orbit of a k = 2 point meets all four cells
  std::set<std::string> orbit;
  for (int q = 0; q < 8; ++q) orbit.insert(basepoint_shift(p, Q(q, 4)).cell.str());
  CHECK(orbit == std::set<std::string>{"12", "21", "121", "212"});
  // section is constant along orbits
  auto sec = canonical_section(p);
  CHECK(sec.cell.str() == "21");
  auto y = barycenter(C("12131"));
  auto ys = canonical_section(y);
  for (int q = 0; q < 12; ++q) {
    auto z = canonical_section(basepoint_shift(y, Q(q, 4)));
    CHECK(z.cell == ys.cell);
    CHECK(z.t == ys.t);
  }
  CHECK(canonical_section(ys).t == ys.t);
  // additivity of shifts
  auto a = basepoint_shift(basepoint_shift(y, Q(1, 3)), Q(5, 7));
  auto b = basepoint_shift(y, Q(1, 3) + Q(5, 7));
  CHECK(a.cell == b.cell);
  CHECK(a.t == b.t);
}
