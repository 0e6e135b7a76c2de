#include <catch2/catch_amalgamated.hpp>

#include "opcells/flow.hpp"

#include <algorithm>
#include <random>
#include <set>

using namespace opcells;

namespace {

const double s3 = std::sqrt(3.0);

Configuration symmetric2() { return parse_configuration("2; -1,0; 1,0"); }
Configuration equilateral() { return parse_configuration("3; 1,0; -0.5,0.8660254037844386; -0.5,-0.8660254037844386"); }
Configuration collinear() { return parse_configuration("3; 0,0; 1,0; 2,0"); }

Configuration random_config(int k, std::mt19937_64& rng, bool uniform = false) {
  std::normal_distribution<double> nd;
  Configuration c;
  double s = 0;
  for (int i = 0; i < k; ++i) {
    c.z.push_back({nd(rng), nd(rng)});
    c.a.push_back(uniform ? 1.0 : 0.2 + std::abs(nd(rng)));
    s += c.a.back();
  }
  for (auto& x : c.a) x /= s;
  return c;
}

double dist_to_segment(cplx p, cplx a, cplx b) {
  double t = std::clamp(std::real((p - a) * std::conj(b - a)) / std::norm(b - a), 0.0, 1.0);
  return std::abs(p - (a + t * (b - a)));
}

// labels into each white vertex in cyclic order starting from the smallest angle
std::vector<std::vector<double>> white_g(const LabelledTreeNum& t) {
  std::vector<std::vector<double>> r(t.k);
  for (int i = 0; i < t.k; ++i) {
    for (int e : t.cyc[i]) r[i].push_back(t.edges[e].g);
    std::sort(r[i].begin(), r[i].end());
  }
  return r;
}

}  // namespace

TEST_CASE("configuration parsing") {
  auto c = parse_configuration("3; 0,0; 1,0; 2,0");
  REQUIRE(c.k() == 3);
  CHECK(c.a == std::vector<double>(3, 1.0 / 3));
  auto w = parse_configuration("2; 0,0; 0,1; 0.25,0.75");
  CHECK(w.a == std::vector<double>{0.25, 0.75});
  CHECK(parse_configuration(configuration_str(w)).z == w.z);
  CHECK_THROWS_AS(parse_configuration("2; 0,0"), Error);
  CHECK_THROWS_AS(validate_configuration(parse_configuration("2; 0,0; 1,1; 0.5,0.6")), Error);
  CHECK_THROWS_AS(extract_cell(parse_configuration("2; 0,0; 1,1; 0.5,-0.5")), Error);
  try {
    extract_cell(parse_configuration("2; 1,2; 1,2"));
    FAIL("coincident points accepted");
  } catch (const Error& e) {
    CHECK(e.kind == Err::Precondition);
  }
}

TEST_CASE("critical points of the reference configurations") {
  auto a = critical_points(symmetric2());
  REQUIRE(a.pts.size() == 1);
  CHECK(std::abs(a.pts[0].z) < 1e-10);
  CHECK(a.pts[0].order == 2);

  auto b = critical_points(equilateral());
  REQUIRE(b.pts.size() == 1);
  CHECK(std::abs(b.pts[0].z) < 1e-10);
  CHECK(b.pts[0].order == 3);

  auto c = critical_points(collinear());
  REQUIRE(c.pts.size() == 2);
  CHECK(std::abs(c.pts[0].z - cplx(1 - 1 / s3, 0)) < 1e-10);
  CHECK(std::abs(c.pts[1].z - cplx(1 + 1 / s3, 0)) < 1e-10);
  for (auto* s : {&a, &b, &c}) CHECK(s->max_residual < 1e-10);

  // p(z) = z^2 - 2z + 2/3 for the collinear case
  auto p = critical_polynomial({0, 1, 2}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  REQUIRE(p.size() == 3);
  CHECK(std::abs(p[0] - 2.0 / 3) < 1e-14);
  CHECK(std::abs(p[1] + 2.0) < 1e-14);
  CHECK(std::abs(p[2] - 1.0) < 1e-14);
}

TEST_CASE("separatrices of the symmetric configurations") {
  Flow f2(symmetric2());
  std::set<int> hit;
  for (int j = 0; j < 2; ++j) {
    auto s = f2.trace_separatrix(0, j);
    CHECK(s.to_white);
    hit.insert(s.target);
    for (auto p : s.path) CHECK(std::abs(p.imag()) < 1e-9);
  }
  CHECK(hit == std::set<int>{0, 1});

  Flow f3(equilateral());
  hit.clear();
  for (int j = 0; j < 3; ++j) {
    auto s = f3.trace_separatrix(0, j);
    REQUIRE(s.to_white);
    hit.insert(s.target);
    cplx w = f3.normalized().z[s.target];
    for (auto p : s.path) CHECK(dist_to_segment(p, 0, w) < 1e-8);
    // |h| decreases along the path
    auto logabs = [&](cplx z) {
      double r = 0;
      for (auto q : f3.normalized().z) r += std::log(std::abs(z - q)) / 3;
      return r;
    };
    for (size_t i = 1; i < s.path.size(); ++i) CHECK(logabs(s.path[i]) < logabs(s.path[i - 1]));
  }
  CHECK(hit == std::set<int>{0, 1, 2});

  CHECK_THROWS_AS(f2.trace_separatrix(0, 2), Error);
  CHECK_THROWS_AS(f2.trace_separatrix(1, 0), Error);
}

TEST_CASE("labelled trees of the reference configurations") {
  auto t2 = build_labelled_tree(symmetric2()).tree;
  CHECK(check_tree(t2).empty());
  CHECK(t2.blacks() == 1);
  CHECK(t2.edges.size() == 2);
  CHECK(t2.f[0] == 1);
  for (auto& e : t2.edges) CHECK(e.g == 1);

  auto t3 = build_labelled_tree(equilateral()).tree;
  CHECK(check_tree(t3).empty());
  CHECK(t3.blacks() == 1);
  CHECK(t3.order[0] == 3);
  CHECK(t3.edges.size() == 3);
  for (auto& e : t3.edges) CHECK(e.g == 1);

  auto tc = build_labelled_tree(collinear()).tree;
  CHECK(check_tree(tc).empty());
  CHECK(tc.blacks() == 2);
  CHECK(tc.edges.size() == 4);
  CHECK(std::abs(tc.f[0] - tc.f[1]) < 1e-12);
  auto g = white_g(tc);
  CHECK(g[1][0] == Catch::Approx(0.5).margin(1e-12));
  CHECK(g[1][1] == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("cells of the reference configurations") {
  auto r2 = extract_cell(symmetric2());
  CHECK(cell_str(r2.cell, false) == "12 : root=212");
  CHECK(bar_point_str(r2.point) == "12 : root=212 | root t=(1/2,1,1/2)");

  auto r3 = extract_cell(equilateral());
  CHECK(cell_str(r3.cell, false) == "123 : root=1231");
  CHECK(bar_point_str(r3.point) == "123 : root=1231 | root t=(1/2,1,1,1/2)");

  // equal heights at both critical points: both go to the root cactus
  auto rc = extract_cell(collinear());
  CHECK(cell_str(rc.cell, false) == "123 : root=32123");
  CHECK(normalize_labelled_tree(rc.tree).blacks() == 2);
  CHECK(rc.point.lambda == std::vector<double>{1});

  // permuting the weights of the equilateral case permutes the cell
  Perm p = identity_perm(3);
  do {
    auto cfg = equilateral();
    Configuration q = cfg;
    for (int j = 0; j < 3; ++j) q.z[p[j] - 1] = cfg.z[j];
    CHECK(extract_cell(q).cell == relabel_tree_cell(r3.cell, p));
  } while (std::next_permutation(p.begin(), p.end()));
}

TEST_CASE("normalization of labelled trees") {
  auto base = build_labelled_tree(collinear()).tree;
  // generic labels are left alone
  auto gen = base;
  gen.f[1] = 0.5;
  auto same = normalize_labelled_tree(gen);
  CHECK(same.blacks() == 2);
  CHECK(same.edges.size() == 4);

  // g = 0 next to a lower black vertex: the edge moves to that vertex
  const int w = 1;
  REQUIRE(base.cyc[w].size() == 2);
  int e = base.cyc[w][0], e2 = base.next_at(w, e);
  auto tp = base;
  int b = tp.edges[e].from, b2 = tp.edges[e2].from;
  tp.f[b - 3] = 1;
  tp.f[b2 - 3] = 0.5;
  tp.edges[e].g = 0;
  tp.edges[e2].g = 1;
  auto n = normalize_labelled_tree(tp);
  CHECK(check_tree(n).empty());
  CHECK(n.blacks() == 2);
  CHECK(n.cyc[w].size() == 1);
  int bb = 0;
  for (auto& x : n.edges)
    if (!n.is_white(x.to)) {
      ++bb;
      CHECK(n.f[x.from - 3] == 1);
      CHECK(n.f[x.to - 3] == 0.5);
    }
  CHECK(bb == 1);

  // raising the lower label to the other one collapses the black-black edge
  auto eq = n;
  eq.f.assign(2, 1.0);
  auto m = normalize_labelled_tree(eq);
  CHECK(check_tree(m).empty());
  CHECK(m.blacks() == 1);
  CHECK(m.edges.size() == 3);
  CHECK(read_cactus(m).cell.w.size() == 4);

  // g = 0 with equal labels merges the two black vertices directly
  auto tz = base;
  tz.edges[e].g = 0;
  tz.edges[e2].g = 1;
  auto z = normalize_labelled_tree(tz);
  CHECK(check_tree(z).empty());
  CHECK(z.blacks() == 1);
  CHECK(z.edges.size() == 3);
}

TEST_CASE("random configurations give valid trees and top cells") {
  std::mt19937_64 rng(11);
  for (int k = 2; k <= 5; ++k) {
    std::set<TreeCell> all;
    for (auto& d : enumerate_bar_cells(k))
      for (auto& c : d) all.insert(c);
    for (int n = 0; n < 60; ++n) {
      auto cfg = random_config(k, rng);
      auto r = extract_cell(cfg);
      INFO(configuration_str(cfg));
      CHECK(check_tree(r.tree).empty());
      CHECK(r.tree.blacks() <= k - 1);
      CHECK(static_cast<int>(r.tree.edges.size()) == r.tree.blacks() + k - 1);
      CHECK(r.cell.dim() == 2 * k - 3);
      CHECK(all.count(r.cell) == 1);
    }
  }
}

TEST_CASE("equivariance and affine invariance") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ud(-3, 3);
  for (int n = 0; n < 40; ++n) {
    int k = 2 + n % 5;
    auto cfg = random_config(k, rng);
    auto r = extract_cell(cfg);

    Perm p = identity_perm(k);
    std::shuffle(p.begin(), p.end(), rng);
    Configuration q = cfg;
    for (int j = 0; j < k; ++j) {
      q.z[p[j] - 1] = cfg.z[j];
      q.a[p[j] - 1] = cfg.a[j];
    }
    CHECK(extract_cell(q).cell == relabel_tree_cell(r.cell, p));

    double lam = std::exp(ud(rng));
    cplx mu(ud(rng), ud(rng));
    Configuration s = cfg;
    for (auto& z : s.z) z = lam * z + mu;
    auto rs = extract_cell(s);
    CHECK(rs.cell == r.cell);
    REQUIRE(rs.tree.blacks() == r.tree.blacks());
    for (int b = 0; b < r.tree.blacks(); ++b) CHECK(std::abs(rs.tree.f[b] - r.tree.f[b]) < 1e-8);
    auto g0 = white_g(r.tree), g1 = white_g(rs.tree);
    for (int i = 0; i < k; ++i)
      for (size_t j = 0; j < g0[i].size(); ++j) CHECK(std::abs(g0[i][j] - g1[i][j]) < 1e-8);

    // rotation keeps f and g and turns every terminal tangent
    double phi = ud(rng);
    Configuration rot = cfg;
    for (auto& z : rot.z) z *= std::polar(1.0, phi);
    auto tr = build_labelled_tree(rot).tree, t0 = build_labelled_tree(cfg).tree;
    REQUIRE(tr.blacks() == t0.blacks());
    auto f0 = t0.f, f1 = tr.f;
    std::sort(f0.begin(), f0.end());
    std::sort(f1.begin(), f1.end());
    for (int b = 0; b < t0.blacks(); ++b) CHECK(std::abs(f1[b] - f0[b]) < 1e-8);
    g0 = white_g(t0), g1 = white_g(tr);
    for (int i = 0; i < k; ++i)
      for (size_t j = 0; j < g0[i].size(); ++j) CHECK(std::abs(g0[i][j] - g1[i][j]) < 1e-8);
    for (int i = 0; i < k; ++i) {
      std::vector<double> a0, a1;
      for (int e : t0.cyc[i]) a0.push_back(std::arg(std::polar(1.0, t0.edges[e].angle + phi)));
      for (int e : tr.cyc[i]) a1.push_back(std::arg(std::polar(1.0, tr.edges[e].angle)));
      std::sort(a0.begin(), a0.end());
      std::sort(a1.begin(), a1.end());
      REQUIRE(a0.size() == a1.size());
      for (size_t j = 0; j < a0.size(); ++j) CHECK(std::abs(std::polar(1.0, a0[j]) - std::polar(1.0, a1[j])) < 1e-8);
    }
  }
}

TEST_CASE("cells are stable under step halving and small perturbations") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  FlowTolerances fine;
  fine.eta /= 2;
  int checked = 0;
  for (int n = 0; n < 60; ++n) {
    auto cfg = random_config(2 + n % 5, rng);
    TraceResult r;
    try {
      r = extract_cell(cfg);
    } catch (const Error& e) {
      CHECK(e.kind == Err::BoundaryProximity);
      continue;
    }
    CHECK(extract_cell(cfg, fine).cell == r.cell);
    if (r.diag.min_clearance < 1e-4) continue;
    auto q = cfg;
    for (auto& z : q.z) z += 1e-6 * cplx(nd(rng), nd(rng));
    CHECK(extract_cell(q).cell == r.cell);
    ++checked;
  }
  CHECK(checked > 40);
}

TEST_CASE("first-hit angles") {
  auto c2 = symmetric2();
  cplx t1 = theta_angle(c2, 1), t2 = theta_angle(c2, 2);
  CHECK(std::abs(t1 - std::conj(t2)) < 1e-8);
  CHECK(std::abs(std::abs(t1) - 1) < 1e-12);

  std::mt19937_64 rng(9);
  for (int n = 0; n < 20; ++n) {
    int k = 2 + n % 4;
    auto cfg = random_config(k, rng);
    int i = 1 + n % k;
    for (int j = 0; j < k; ++j) cfg.a[j] = (j == i - 1) ? 1 - 1e-3 : 1e-3 / (k - 1);
    INFO(configuration_str(cfg) << " i=" << i);
    CHECK(std::abs(theta_angle(cfg, i) - 1.0) < 1e-2);
  }
}

TEST_CASE("rational read-out") {
  CHECK(rational_approx(0.5) == Q(1, 2));
  CHECK(rational_approx(1.0 / 3 + 1e-12) == Q(1, 3));
  CHECK(rational_approx(-0.25) == Q(-1, 4));
  auto pi = rational_approx(3.14159265358979);
  CHECK(boost::multiprecision::denominator(pi) <= 1000000);
  CHECK(std::abs(static_cast<double>(pi) - 3.14159265358979) < 1e-11);
}
