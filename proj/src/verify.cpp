#include "opcells/verify.hpp"

#include "opcells/series.hpp"

#include <atomic>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace opcells {

Configuration random_configuration(int k, std::uint64_t seed, bool uniform_weights) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Configuration c;
  double s = 0;
  for (int i = 0; i < k; ++i) {
    c.z.emplace_back(nd(rng), nd(rng));
    c.a.push_back(uniform_weights ? 1.0 : 0.2 + std::abs(nd(rng)));
    s += c.a.back();
  }
  for (auto& a : c.a) a /= s;
  return c;
}

FlowSampleStats flow_sample(int k, int samples, std::uint64_t seed, const FlowTolerances& tol, int jobs,
                            bool check_members) {
  std::set<TreeCell> members;
  if (check_members)
    for (auto& d : enumerate_bar_cells(k))
      for (auto& c : d) members.insert(c);
  enum Outcome { Ok, Boundary, Failure, Invalid };
  std::vector<Outcome> out(samples, Ok);
  std::vector<std::string> why(samples);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int n; (n = next++) < samples;) {
      auto cfg = random_configuration(k, seed * 1000003 + n);
      try {
        auto r = extract_cell(cfg, tol);
        auto bad = check_tree(r.tree);
        if (!bad.empty()) {
          out[n] = Invalid;
          why[n] = bad.front();
        } else if (r.tree.blacks() > k - 1 || static_cast<int>(r.tree.edges.size()) != r.tree.blacks() + k - 1) {
          out[n] = Invalid;
          why[n] = "vertex or edge count";
        } else if (check_members && !members.count(r.cell)) {
          out[n] = Invalid;
          why[n] = "cell outside the enumeration: " + cell_str(r.cell, false);
        }
      } catch (const Error& e) {
        out[n] = e.kind == Err::BoundaryProximity ? Boundary : Failure;
        why[n] = e.what();
      }
      if (out[n] != Ok) why[n] = configuration_str(cfg) + ": " + why[n];
    }
  };
  std::vector<std::thread> pool;
  for (int j = 1; j < std::max(1, jobs); ++j) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  FlowSampleStats s;
  s.k = k;
  s.samples = samples;
  for (int n = 0; n < samples; ++n) {
    switch (out[n]) {
      case Ok: ++s.traced; break;
      case Boundary: ++s.boundary; break;
      case Failure: ++s.failures; break;
      case Invalid: ++s.invalid; break;
    }
    if (out[n] != Ok && out[n] != Boundary && s.first_problems.size() < 3) s.first_problems.push_back(why[n]);
  }
  return s;
}

std::vector<std::size_t> poincare_coefficients(int k) {
  std::vector<std::size_t> p{1};
  for (int j = 1; j < k; ++j) {
    std::vector<std::size_t> q(p.size() + 1, 0);
    for (size_t i = 0; i < p.size(); ++i) {
      q[i] += p[i];
      q[i + 1] += j * p[i];
    }
    p = q;
  }
  return p;
}

namespace {

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

CheckLine d2_line(const std::string& what, int k, const GradedComplex& g) {
  auto r = verify_d2(g);
  return {"signs", what + " k=" + std::to_string(k) + " d^2", r.ok, r.str()};
}

}  // namespace

std::vector<CheckLine> suite_signs(int kmax) {
  std::vector<CheckLine> out;
  for (int k = 2; k <= std::min(kmax, 6); ++k) out.push_back(d2_line("cacti", k, cacti_complex(k)));
  for (int k = 2; k <= std::min(kmax, 5); ++k) out.push_back(d2_line("bar", k, tree_complex(k, false)));
  for (int k = 2; k <= std::min(kmax, 4); ++k) out.push_back(d2_line("fm", k, tree_complex(k, true)));

  // d(x o_i y) = dx o_i y + (-1)^|x| x o_i dy on FM(2) x FM(2)
  ComposeCache cache;
  auto d_of = [&](const SignedChain& x) {
    SignedChain r;
    for (auto& [c, v] : x)
      for (auto& [f, s] : fm_differential(c, cache)) chain_add(r, f, v * s);
    return r;
  };
  auto graft = [](const SignedChain& x, int i, const SignedChain& y) {
    SignedChain r;
    for (auto& [a, u] : x)
      for (auto& [b, v] : y) {
        auto [c, s] = fm_compose_signed(a, i, b);
        chain_add(r, c, u * v * s);
      }
    return r;
  };
  int bad = 0, total = 0;
  for (auto& da : enumerate_fm_cells(2))
    for (auto& a : da)
      for (auto& db : enumerate_fm_cells(2))
        for (auto& b : db)
          for (int i = 1; i <= 2; ++i) {
            SignedChain A{{a, 1}}, B{{b, 1}};
            auto lhs = d_of(graft(A, i, B));
            auto rhs = graft(d_of(A), i, B);
            long long sg = (a.dim() & 1) ? -1 : 1;
            for (auto& [c, v] : graft(A, i, d_of(B))) chain_add(rhs, c, sg * v);
            ++total;
            if (!(lhs == rhs)) ++bad;
          }
  out.push_back({"signs", "grafting chain map FM(2) x FM(2)", bad == 0,
                 std::to_string(total - bad) + "/" + std::to_string(total) + " pairs"});
  return out;
}

std::vector<CheckLine> suite_counts(int kmax) {
  std::vector<CheckLine> out;
  auto add = [&](const std::string& name, const BiSeries& s, const std::function<std::vector<std::uint64_t>(int)>& c,
                 int kk) {
    auto m = compare_with_counts(s, c, kk);
    std::string detail = "k <= " + std::to_string(kk);
    if (m) {
      std::ostringstream os;
      os << "first mismatch at k=" << m->k << " m=" << m->m << ": series " << m->expected << ", cells " << m->got;
      detail = os.str();
    }
    out.push_back({"counts", name, !m, detail});
  };
  const int kp = std::min(kmax, 7), ko = std::min(kmax, 5);
  add("P vs cacti", P_series(kp - 1, kp), count_cells, kp);
  add("o vs bar cells", o_series(2 * ko - 3, ko), [](int k) { return count_tree_cells(k, false); }, ko);
  add("F vs FM cells", F_series(2 * ko - 3, ko), [](int k) { return count_tree_cells(k, true); }, ko);
  return out;
}

std::vector<CheckLine> suite_homology(int kmax) {
  std::vector<CheckLine> out;
  for (int k = 2; k <= std::min(kmax, 5); ++k) {
    auto h = homology(cacti_complex(k));
    auto want = poincare_coefficients(k);
    out.push_back({"homology", "cacti k=" + std::to_string(k), h.betti == want && h.torsion_free(),
                   "betti " + join(h.betti) + (h.torsion_free() ? "; torsion none" : "; torsion present")});
  }
  for (int k = 2; k <= std::min(kmax, 4); ++k) {
    auto h = homology(tree_complex(k, true));
    auto want = poincare_coefficients(k);
    want.resize(h.betti.size(), 0);
    out.push_back({"homology", "fm k=" + std::to_string(k), h.betti == want && h.torsion_free(),
                   "betti " + join(h.betti) + (h.torsion_free() ? "; torsion none" : "; torsion present")});
  }
  return out;
}

std::vector<CheckLine> suite_flow(int kmax, int samples, std::uint64_t seed, const FlowTolerances& tol, int jobs) {
  std::vector<CheckLine> out;
  for (int k = 2; k <= kmax; ++k) {
    auto s = flow_sample(k, samples, seed + k, tol, jobs, k <= 5);
    std::ostringstream os;
    os << s.traced << "/" << s.samples << " traced, BoundaryProximity " << s.boundary << " ("
       << (100.0 * s.boundary / std::max(1, s.samples)) << "%), errors " << s.failures << ", invalid " << s.invalid;
    for (auto& p : s.first_problems) os << "; " << p;
    out.push_back({"flow", "random configurations k=" + std::to_string(k), s.failures == 0 && s.invalid == 0, os.str()});
  }
  return out;
}

}  // namespace opcells
