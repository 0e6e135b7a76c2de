#include "opcells/draw.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace opcells {

namespace {

using pt = std::complex<double>;

struct Lobe {
  pt center;
  double r = 0;
  double start = 0;  // angle of the point where the lobe is attached (base point on the root)
  std::string label;
};

struct Layout {
  std::vector<Lobe> lobes;  // by letter, 1-based slot 0 unused
  pt base;
  double minx = 0, miny = 0, maxx = 0, maxy = 0;
};

// The word walks a planar tree of lobes: a new letter is a child lobe glued at
// the current point of the current lobe, a known letter is a return to it.
Layout layout_cactus(const Cell& c, const DrawStyle& st, const std::vector<double>& t, pt origin) {
  const int k = c.k;
  std::vector<double> len(c.len(), 1.0);
  if (!t.empty()) {
    if (static_cast<int>(t.size()) != c.len()) throw Error(Err::Precondition, "one arc length per letter required");
    len = t;
  }
  std::vector<double> total(k + 1, 0);
  for (int i = 0; i < c.len(); ++i) total[c.w[i]] += len[i];
  Layout L;
  L.lobes.resize(k + 1);
  std::vector<bool> placed(k + 1, false);
  std::vector<double> done(k + 1, 0);  // arc length already walked on each lobe
  auto angle_on = [&](int a) { return L.lobes[a].start + 2 * std::numbers::pi * done[a] / total[a]; };
  const int root = c.w[0];
  L.lobes[root] = {origin, st.radius, -std::numbers::pi / 2, std::to_string(root)};
  placed[root] = true;
  std::vector<int> depth(k + 1, 0);
  for (int i = 0; i < c.len(); ++i) {
    const int a = c.w[i];
    if (i > 0 && !placed[a]) {
      const int p = c.w[i - 1];
      const double phi = angle_on(p);
      const double r = L.lobes[p].r * st.shrink;
      depth[a] = depth[p] + 1;
      L.lobes[a] = {L.lobes[p].center + std::polar(L.lobes[p].r + r, phi), r, phi + std::numbers::pi, std::to_string(a)};
      placed[a] = true;
    }
    done[a] += len[i];
  }
  L.base = L.lobes[root].center + std::polar(L.lobes[root].r, L.lobes[root].start + st.base_shift);
  L.minx = L.maxx = origin.real();
  L.miny = L.maxy = origin.imag();
  for (int a = 1; a <= k; ++a) {
    auto& b = L.lobes[a];
    L.minx = std::min(L.minx, b.center.real() - b.r);
    L.maxx = std::max(L.maxx, b.center.real() + b.r);
    L.miny = std::min(L.miny, b.center.imag() - b.r);
    L.maxy = std::max(L.maxy, b.center.imag() + b.r);
  }
  return L;
}

// SVG y grows downwards; pictures use the mathematical orientation
double sy(double y) { return -y; }

void emit_cactus(std::ostringstream& os, const Layout& L, const DrawStyle& st, const std::string& cls) {
  os << "<g class=\"" << cls << "\">\n";
  for (size_t a = 1; a < L.lobes.size(); ++a) {
    auto& b = L.lobes[a];
    os << "<circle class=\"lobe\" cx=\"" << b.center.real() << "\" cy=\"" << sy(b.center.imag()) << "\" r=\"" << b.r
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << b.center.real() << "\" y=\"" << sy(b.center.imag()) + st.font / 3
       << "\" font-size=\"" << st.font << "\" text-anchor=\"middle\">" << b.label << "</text>\n";
  }
  os << "<circle class=\"base\" cx=\"" << L.base.real() << "\" cy=\"" << sy(L.base.imag()) << "\" r=\"" << st.base_dot
     << "\" fill=\"black\"/>\n";
  os << "</g>\n";
}

std::string svg_open(double minx, double miny, double maxx, double maxy) {
  const double pad = 10;
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << minx - pad << ' ' << -maxy - pad << ' '
     << maxx - minx + 2 * pad << ' ' << maxy - miny + 2 * pad << "\">\n";
  return os.str();
}

}  // namespace

std::string draw_cactus(const Cell& c, const DrawStyle& st, const std::vector<double>& t) {
  if (c.k > st.max_k) throw Error(Err::ResourceLimit, "drawing supports at most " + std::to_string(st.max_k) + " lobes");
  validate_word(c.w, c.k);
  auto L = layout_cactus(c, st, t, {0, 0});
  std::ostringstream os;
  os << svg_open(L.minx, L.miny, L.maxx, L.maxy);
  emit_cactus(os, L, st, "cactus");
  os << "</svg>\n";
  return os.str();
}

std::string draw_bar_cell(const TreeCell& c, const DrawStyle& st) {
  if (c.k() > st.max_k) throw Error(Err::ResourceLimit, "drawing supports at most " + std::to_string(st.max_k) + " leaves");
  check_cell(c);
  const auto& T = c.t;
  // clusters left to right in depth-first order, one row per depth
  std::vector<int> depth(T.size(), 0);
  for (int i = 1; i < T.size(); ++i) depth[i] = depth[T.parent[i]] + 1;
  std::vector<Layout> lay;
  double x = 0;
  for (int i = 0; i < T.size(); ++i) {
    auto probe = layout_cactus(c.lab[i], st, {}, {0, 0});
    pt origin(x - probe.minx, -depth[i] * 6 * st.radius);
    auto L = layout_cactus(c.lab[i], st, {}, origin);
    // lobes of a vertex are its inputs: leaves keep their number, subtrees show their leaf set
    for (int j = 0; j < T.valence(i); ++j) {
      const auto& in = T.inputs[i][j];
      L.lobes[j + 1].label = in.leaf ? std::to_string(in.id) : "{" + mask_str(in.mask, T.k) + "}";
    }
    x += probe.maxx - probe.minx + 2 * st.radius;
    lay.push_back(std::move(L));
  }
  double minx = lay[0].minx, miny = lay[0].miny, maxx = lay[0].maxx, maxy = lay[0].maxy;
  for (auto& L : lay) {
    minx = std::min(minx, L.minx);
    miny = std::min(miny, L.miny);
    maxx = std::max(maxx, L.maxx);
    maxy = std::max(maxy, L.maxy);
  }
  std::ostringstream os;
  os << svg_open(minx, miny, maxx, maxy);
  for (int i = 1; i < T.size(); ++i) {
    const auto& from = lay[T.parent[i]].lobes[T.slot_of(i)];
    pt a = from.center, b = lay[i].base;
    os << "<line class=\"edge\" x1=\"" << a.real() << "\" y1=\"" << sy(a.imag()) << "\" x2=\"" << b.real() << "\" y2=\""
       << sy(b.imag()) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (int i = 0; i < T.size(); ++i) emit_cactus(os, lay[i], st, "vertex");
  os << "</svg>\n";
  return os.str();
}

}  // namespace opcells
