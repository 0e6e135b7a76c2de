// opcells: enumerate cells, compute homology and counting series, trace
// configurations, draw cells and run the invariant suites.
//
// Exit codes: 0 success, 1 validation error, 2 resource limit, 3 verification failure.

#include "opcells/catalog.hpp"
#include "opcells/draw.hpp"
#include "opcells/flow.hpp"
#include "opcells/series.hpp"
#include "opcells/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <thread>

using namespace opcells;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0, kValidation = 1, kResource = 2, kVerifyFailed = 3;

fs::path cache_dir() {
  const char* d = std::getenv("OPERAD_CELLS_CACHE");
  return d ? fs::path(d) : fs::path();
}

int exit_code_for(const Error& e) {
  switch (e.kind) {
    case Err::ResourceLimit:
    case Err::StepLimit:
      return kResource;
    default:
      return kValidation;
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Err::Precondition, "cannot write " + path);
  os << text;
}

struct Options {
  int k = 3;
  std::string kind = "cacti";
  std::string orders;
  std::string out;
  std::uint64_t seed = 1;
  double tol = FlowTolerances{}.boundary;
  int retry = 0;
  int jobs = 1;
  std::uint64_t limit = 2'000'000;
};

int cmd_enumerate(const Options& o) {
  auto kind = parse_kind(o.kind);
  bool hit = false;
  auto cat = cached_catalog(kind, o.k, cache_dir(), o.limit, &hit);
  if (!o.out.empty()) save_catalog(o.out, cat);
  std::cout << counts_str(cat.counts()) << '\n';
  std::cerr << kind_name(kind) << " k=" << o.k << ": " << cat.records.size() << " cells, sha256 " << cat.hash
            << (hit ? " (cached)" : "") << '\n';
  return kOk;
}

int cmd_homology(const Options& o) {
  auto kind = parse_kind(o.kind);
  GradedComplex g = kind == CellKind::Cacti ? cacti_complex(o.k, o.limit) : tree_complex(o.k, kind == CellKind::FM, o.limit);
  auto d2 = verify_d2(g);
  std::cout << d2.str() << '\n';
  if (!d2.ok) return kVerifyFailed;
  auto h = homology(g);
  std::cout << h.str() << '\n';
  std::cout << "betti ";
  for (size_t i = 0; i < h.betti.size(); ++i) std::cout << (i ? "," : "") << h.betti[i];
  std::cout << "; torsion " << (h.torsion_free() ? "none" : "present") << '\n';
  std::cout << "euler " << g.euler() << '\n';
  return kOk;
}

std::pair<int, int> parse_orders(const std::string& s, int k) {
  if (s.empty()) return {2 * k - 3 < 1 ? 1 : 2 * k - 3, k};
  auto c = s.find(',');
  if (c == std::string::npos) throw Error(Err::Parse, "--orders expects M,K");
  try {
    return {std::stoi(s.substr(0, c)), std::stoi(s.substr(c + 1))};
  } catch (const std::logic_error&) {
    throw Error(Err::Parse, "--orders expects two integers M,K");
  }
}

int cmd_series(const Options& o, const std::string& which) {
  auto [M, K] = parse_orders(o.orders, o.k);
  if (M < 0 || K < 1) throw Error(Err::Parse, "orders must be nonnegative");
  BiSeries s;
  CellKind kind;
  if (which == "P") {
    s = P_series(M, K);
    kind = CellKind::Cacti;
  } else if (which == "o") {
    s = o_series(M, K);
    kind = CellKind::Bar;
  } else if (which == "F") {
    s = F_series(M, K);
    kind = CellKind::FM;
  } else {
    throw Error(Err::Parse, "series must be P, o or F");
  }
  for (int k = 1; k <= K; ++k) std::cout << series_line(s, k) << '\n';
  // compare with whatever catalogs are cached
  auto dir = cache_dir();
  if (dir.empty()) return kOk;
  bool failed = false;
  for (int k = 2; k <= K; ++k) {
    auto p = cache_file(dir, kind, k);
    if (!fs::exists(p)) continue;
    auto cat = load_catalog(p);
    auto m = compare_with_counts(s, [&](int) { return cat.counts(); }, k, k);
    if (m) {
      std::cout << "k=" << k << " mismatch at t^" << m->m << ": series " << m->expected << ", catalog " << m->got << '\n';
      failed = true;
    } else {
      std::cout << "k=" << k << " agrees with " << kind_name(kind) << " catalog\n";
    }
  }
  return failed ? kVerifyFailed : kOk;
}

std::vector<std::string> read_configurations(const std::string& path, const std::string& inline_cfg) {
  std::vector<std::string> out;
  if (!inline_cfg.empty()) out.push_back(inline_cfg);
  if (!path.empty()) {
    std::ifstream f;
    std::istream* is = &std::cin;
    if (path != "-") {
      f.open(path);
      if (!f) throw Error(Err::Precondition, "cannot read " + path);
      is = &f;
    }
    for (std::string line; std::getline(*is, line);) {
      auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos || line[b] == '#') continue;
      out.push_back(line.substr(b));
    }
  }
  if (out.empty()) throw Error(Err::Parse, "no configuration given");
  return out;
}

std::string trace_report(const std::string& text, const Options& o) {
  FlowTolerances tol;
  tol.boundary = o.tol;
  auto cfg = parse_configuration(text);
  validate_configuration(cfg, tol);
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> nd;
  auto try_cfg = cfg;
  int attempt = 0;
  for (;; ++attempt) {
    try {
      auto r = extract_cell(try_cfg, tol);
      std::ostringstream os;
      os.precision(12);
      os << "config " << configuration_str(try_cfg) << '\n';
      if (attempt) os << "perturbed " << attempt << " time(s) after BoundaryProximity\n";
      for (auto& c : r.crit.pts)
        os << "critical " << c.z.real() << ',' << c.z.imag() << " multiplicity " << c.order - 1 << " f=" << c.f << '\n';
      os << tree_text(r.tree);
      os << "cell " << cell_str(r.cell, false) << '\n';
      os << "point " << bar_point_str(r.point) << '\n';
      os << "diagnostics root_residual=" << r.diag.root_residual << " level_residual=" << r.diag.level_residual
         << " steps=" << r.diag.steps << " separatrices=" << r.diag.separatrices
         << " min_clearance=" << r.diag.min_clearance << '\n';
      return os.str();
    } catch (const Error& e) {
      if (e.kind != Err::BoundaryProximity || attempt >= o.retry) throw;
      double scale = 0;
      for (auto z : cfg.z) scale = std::max(scale, std::abs(z));
      try_cfg = cfg;
      for (auto& z : try_cfg.z) z += 1e-6 * std::max(scale, 1.0) * cplx(nd(rng), nd(rng));
    }
  }
}

int cmd_trace(const Options& o, const std::string& path, const std::string& inline_cfg) {
  auto cfgs = read_configurations(path, inline_cfg);
  std::vector<std::string> out(cfgs.size());
  std::vector<int> codes(cfgs.size(), kOk);
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i; (i = next++) < cfgs.size();) {
      try {
        out[i] = trace_report(cfgs[i], o);
      } catch (const Error& e) {
        out[i] = std::string("error ") + e.what() + '\n';
        codes[i] = exit_code_for(e);
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 1; j < std::max(1, o.jobs); ++j) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  std::string all;
  for (size_t i = 0; i < out.size(); ++i) all += (i ? "\n" : "") + out[i];
  write_text(o.out, all);
  for (int c : codes)
    if (c != kOk) return c;
  return kOk;
}

int cmd_draw(const Options& o, const std::string& cell_text, double radius) {
  DrawStyle st;
  st.radius = radius;
  std::string svg;
  if (cell_text.find(':') != std::string::npos) {
    svg = draw_bar_cell(parse_tree_cell(cell_text, false), st);
  } else {
    svg = draw_cactus(parse_cell(cell_text), st);
  }
  write_text(o.out, svg);
  return kOk;
}

int cmd_verify(const Options& o, const std::string& suite, int samples) {
  const std::set<std::string> known{"all", "signs", "counts", "homology", "flow"};
  if (!known.count(suite)) throw Error(Err::Parse, "unknown suite '" + suite + "'");
  std::vector<CheckLine> lines;
  auto want = [&](const char* s) { return suite == "all" || suite == s; };
  if (want("signs")) for (auto& l : suite_signs(o.k)) lines.push_back(l);
  if (want("counts")) for (auto& l : suite_counts(o.k)) lines.push_back(l);
  if (want("homology")) for (auto& l : suite_homology(o.k)) lines.push_back(l);
  if (want("flow")) {
    FlowTolerances tol;
    tol.boundary = o.tol;
    for (auto& l : suite_flow(std::min(o.k, 8), samples, o.seed, tol, o.jobs)) lines.push_back(l);
  }
  int failed = 0;
  nlohmann::json summary{{"suite", suite}, {"k", o.k}, {"checks", nlohmann::json::array()}};
  for (auto& l : lines) {
    std::cout << (l.ok ? "PASS " : "FAIL ") << l.suite << ": " << l.name << " (" << l.detail << ")\n";
    failed += !l.ok;
    summary["checks"].push_back({{"suite", l.suite}, {"name", l.name}, {"ok", l.ok}, {"detail", l.detail}});
  }
  summary["passed"] = lines.size() - failed;
  summary["failed"] = failed;
  std::cout << summary.dump() << '\n';
  return failed ? kVerifyFailed : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell complexes of cacti, the open moduli space and its compactification"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* s) {
    s->add_option("--k", o.k, "arity")->check(CLI::Range(1, 12));
    s->add_option("--limit-cells", o.limit, "abort beyond this many cells");
  };

  auto* en = app.add_subcommand("enumerate", "enumerate cells and print counts by dimension");
  common(en);
  en->add_option("--kind", o.kind, "cacti, bar or fm");
  en->add_option("--out", o.out, "catalog file to write");

  auto* ho = app.add_subcommand("homology", "check d^2 = 0 and compute integral homology");
  common(ho);
  ho->add_option("--kind", o.kind, "cacti, bar or fm");

  std::string which = "P";
  auto* se = app.add_subcommand("series", "coefficients of the counting series");
  se->add_option("which", which, "P, o or F")->required();
  se->add_option("--orders", o.orders, "truncation orders M,K (t-degree, x-degree)");
  se->add_option("--k", o.k, "default x-degree when --orders is absent");

  std::string cfg_path, cfg_inline;
  auto* tr = app.add_subcommand("trace", "trace configurations and print their cells");
  tr->add_option("file", cfg_path, "file with one configuration per line, - for stdin");
  tr->add_option("--config", cfg_inline, "configuration \"k; x1,y1; ...; xk,yk; a1,...,ak\"");
  tr->add_option("--seed", o.seed, "seed for --retry perturbations");
  tr->add_option("--tol", o.tol, "width of the cell-wall band that raises BoundaryProximity");
  tr->add_option("--retry", o.retry, "perturb and retry this many times on BoundaryProximity");
  tr->add_option("--jobs", o.jobs, "worker threads");
  tr->add_option("--out", o.out, "output file");

  std::string cell_text;
  double radius = DrawStyle{}.radius;
  auto* dr = app.add_subcommand("draw", "SVG picture of a cacti cell or a bar cell");
  dr->add_option("cell", cell_text, "word such as 12131, or a bar cell such as \"1(23) : root=121 ; v{23}=12\"")->required();
  dr->add_option("--radius", radius, "root lobe radius");
  dr->add_option("--out", o.out, "output file (stdout when absent)");

  std::string suite = "all";
  int samples = 200;
  auto* ve = app.add_subcommand("verify", "run invariant suites");
  ve->add_option("suite", suite, "all, signs, counts, homology or flow");
  ve->add_option("--k", o.k, "largest arity")->check(CLI::Range(2, 8));
  ve->add_option("--samples", samples, "random configurations per k for the flow suite");
  ve->add_option("--seed", o.seed, "seed for the flow suite");
  ve->add_option("--tol", o.tol, "BoundaryProximity band");
  ve->add_option("--jobs", o.jobs, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }
  try {
    if (*en) return cmd_enumerate(o);
    if (*ho) return cmd_homology(o);
    if (*se) return cmd_series(o, which);
    if (*tr) return cmd_trace(o, cfg_path, cfg_inline);
    if (*dr) return cmd_draw(o, cell_text, radius);
    if (*ve) return cmd_verify(o, suite, samples);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kOk;
}
