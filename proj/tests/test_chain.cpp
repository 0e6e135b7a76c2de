#include <catch2/catch_amalgamated.hpp>

#include "opcells/cacti.hpp"
#include "opcells/chain.hpp"

#include <random>
#include <sstream>

using namespace opcells;

static GradedComplex cacti_complex(int k) {
  return assemble(enumerate_cells(k), [](const Cell& c) { return boundary(c); }, [](const Cell& c) { return c.str(); });
}

static std::vector<BigInt> facs(std::initializer_list<long long> v) {
  std::vector<BigInt> r;
  for (auto x : v) r.emplace_back(x);
  return r;
}

TEST_CASE("smith normal form reference values") {
  CHECK(smith_normal_form(IntMatrix::dense({{2, 0}, {0, 3}})).factors == facs({1, 6}));
  CHECK(smith_normal_form(IntMatrix::dense({{0, 0}, {0, 0}})).factors.empty());
  CHECK(smith_normal_form(IntMatrix::dense({{2, 4}, {6, 8}})).factors == facs({2, 4}));
  CHECK(smith_normal_form(IntMatrix::dense({{2, 4, 4}, {-6, 6, 12}, {10, -4, -16}})).factors == facs({2, 6, 12}));
}

TEST_CASE("transforms are unimodular and reproduce the diagonal") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> d(-5, 5);
  for (int trial = 0; trial < 40; ++trial) {
    int R = 1 + trial % 4, C = 1 + (trial / 4) % 4;
    std::vector<std::vector<long long>> a(R, std::vector<long long>(C));
    for (auto& row : a)
      for (auto& v : row) v = d(rng);
    auto m = IntMatrix::dense(a);
    auto s = smith_normal_form(m, true);
    auto& U = *s.U;
    auto& V = *s.V;
    auto& D = *s.D;
    for (int i = 0; i < R; ++i)
      for (int j = 0; j < C; ++j) {
        BigInt acc = 0;
        for (int p = 0; p < R; ++p)
          for (int q = 0; q < C; ++q) acc += U[i][p] * a[p][q] * V[q][j];
        CHECK(acc == D[i][j]);
        if (i != j) CHECK(D[i][j] == 0);
      }
    // sparse path agrees with the dense path
    CHECK(smith_normal_form(m).factors == s.factors);
    for (size_t i = 1; i < s.factors.size(); ++i) CHECK(s.factors[i] % s.factors[i - 1] == 0);
  }
}

TEST_CASE("invariant factors survive unimodular conjugation") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> d(-3, 3);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 4;
    std::vector<std::vector<long long>> a(n, std::vector<long long>(n));
    for (auto& row : a)
      for (auto& v : row) v = d(rng);
    auto base = smith_normal_form(IntMatrix::dense(a)).factors;
    // random elementary row/column operations and a permutation
    for (int s = 0; s < 6; ++s) {
      int i = rng() % n, j = rng() % n;
      if (i == j) continue;
      long long q = d(rng);
      for (int c = 0; c < n; ++c) a[i][c] += q * a[j][c];
      for (int r = 0; r < n; ++r) std::swap(a[r][i], a[r][j]);
    }
    CHECK(smith_normal_form(IntMatrix::dense(a)).factors == base);
  }
}

TEST_CASE("coordinate list round trip") {
  auto m = IntMatrix::dense({{1, 0, -2}, {0, 0, 5}});
  std::ostringstream os;
  write_coo(os, m);
  CHECK(os.str().rfind("shape 2 3\n", 0) == 0);
  std::istringstream is(os.str());
  auto back = read_coo(is);
  CHECK(back.to_dense() == m.to_dense());
  std::istringstream bad("2 3\n");
  CHECK_THROWS_AS(read_coo(bad), Error);
}

TEST_CASE("verify_d2 and homology of small cacti complexes") {
  auto g2 = cacti_complex(2);
  CHECK(verify_d2(g2).ok);
  auto h2 = homology(g2);
  CHECK(h2.str() == "H0=Z H1=Z");
  auto g3 = cacti_complex(3);
  CHECK(verify_d2(g3).ok);
  auto h3 = homology(g3);
  CHECK(h3.betti == std::vector<size_t>{1, 3, 2});
  CHECK(h3.torsion_free());
  CHECK(g3.euler() == 0);
  CHECK(verify_d2(cacti_complex(4)).ok);
  CHECK(betti_mod_p(g3) == h3.betti);

  GradedComplex pt;
  pt.cells = {{"*"}};
  pt.d = {IntMatrix(0, 1)};
  CHECK(homology(pt).str() == "H0=Z");
}

TEST_CASE("verify_d2 names the offending cell on a flipped sign") {
  auto g = cacti_complex(3);
  // flip one face coefficient of the first 2-cell
  auto& col = g.d[2].col[0];
  REQUIRE(!col.empty());
  col.begin()->second = -col.begin()->second;
  auto rep = verify_d2(g);
  CHECK_FALSE(rep.ok);
  CHECK(rep.source == g.cells[2][0]);
  CHECK(rep.degree == 2);
}

TEST_CASE("torsion is reported") {
  // a 2-cell attached by degree 2 to a circle: RP^2
  GradedComplex g;
  g.cells = {{"v"}, {"e"}, {"f"}};
  g.d = {IntMatrix(0, 1), IntMatrix(1, 1), IntMatrix::dense({{2}})};
  auto h = homology(g);
  CHECK(h.str() == "H0=Z H1=Z/2 H2=0");
  CHECK(betti_mod_p(g) == std::vector<size_t>{1, 0, 0});
}
