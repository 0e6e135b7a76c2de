#include "opcells/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace opcells {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2 * std::numbers::pi;

double wrap(double x) {
  x = std::fmod(x, kTwoPi);
  return x < 0 ? x + kTwoPi : x;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n"), b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_double(const std::string& s) {
  try {
    size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw Error(Err::Parse, "bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw Error(Err::Parse, "bad number '" + s + "'");
  }
}

std::pair<cplx, cplx> horner2(const std::vector<cplx>& c, cplx z) {
  cplx p = c.back(), d = 0;
  for (size_t i = c.size() - 1; i-- > 0;) {
    d = d * z + p;
    p = p * z + c[i];
  }
  return {p, d};
}

std::vector<cplx> derivative(const std::vector<cplx>& c) {
  std::vector<cplx> d;
  for (size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * static_cast<double>(i));
  if (d.empty()) d.push_back(0);
  return d;
}

/** Unwrapped arguments of z - z_j continued from zold to znew. */
void continue_args(std::vector<double>& psi, const std::vector<cplx>& zs, cplx zold, cplx znew) {
  for (size_t j = 0; j < zs.size(); ++j) psi[j] += std::arg((znew - zs[j]) / (zold - zs[j]));
}

double dot(const std::vector<double>& a, const std::vector<double>& psi) {
  double s = 0;
  for (size_t j = 0; j < a.size(); ++j) s += a[j] * psi[j];
  return s;
}

}  // namespace

// ---------------------------------------------------------------- configurations

Configuration parse_configuration(const std::string& s) {
  auto parts = split(s, ';');
  while (!parts.empty() && parts.back().empty()) parts.pop_back();
  if (parts.empty()) throw Error(Err::Parse, "empty configuration");
  int k = 0;
  try {
    k = std::stoi(parts[0]);
  } catch (const std::logic_error&) {
    throw Error(Err::Parse, "configuration must start with k");
  }
  if (k < 2) throw Error(Err::Parse, "need k >= 2");
  if (static_cast<int>(parts.size()) != k + 1 && static_cast<int>(parts.size()) != k + 2)
    throw Error(Err::Parse, "expected " + std::to_string(k) + " points and optional weights");
  Configuration c;
  for (int i = 1; i <= k; ++i) {
    auto xy = split(parts[i], ',');
    if (xy.size() != 2) throw Error(Err::Parse, "point '" + parts[i] + "' is not x,y");
    c.z.emplace_back(parse_double(xy[0]), parse_double(xy[1]));
  }
  if (static_cast<int>(parts.size()) == k + 2) {
    for (auto& w : split(parts[k + 1], ',')) c.a.push_back(parse_double(w));
    if (static_cast<int>(c.a.size()) != k) throw Error(Err::Parse, "expected " + std::to_string(k) + " weights");
  } else {
    c.a.assign(k, 1.0 / k);
  }
  return c;
}

std::string configuration_str(const Configuration& c) {
  std::ostringstream os;
  os.precision(17);
  os << c.k();
  for (auto z : c.z) os << "; " << z.real() << ',' << z.imag();
  os << "; ";
  for (int i = 0; i < c.k(); ++i) os << (i ? "," : "") << c.a[i];
  return os.str();
}

void validate_configuration(const Configuration& c, const FlowTolerances& tol) {
  const int k = c.k();
  if (k < 2) throw Error(Err::Precondition, "need at least two points");
  if (static_cast<int>(c.a.size()) != k) throw Error(Err::Precondition, "one weight per point required");
  double sum = 0;
  for (double a : c.a) {
    if (!(a > 0) || !std::isfinite(a)) throw Error(Err::Precondition, "weights must be positive");
    sum += a;
  }
  if (std::abs(sum - 1) > 1e-9) throw Error(Err::Precondition, "weights must sum to 1");
  cplx mean = 0;
  for (auto z : c.z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw Error(Err::Precondition, "non-finite point");
    mean += z;
  }
  mean /= static_cast<double>(k);
  double norm = 0;
  for (auto z : c.z) norm += std::norm(z - mean);
  norm = std::sqrt(norm);
  if (norm == 0) throw Error(Err::Precondition, "all points coincide");
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      if (std::abs(c.z[i] - c.z[j]) / norm < tol.separation)
        throw Error(Err::Precondition,
                    "points " + std::to_string(i + 1) + " and " + std::to_string(j + 1) + " coincide");
}

// ---------------------------------------------------------------- critical points

std::vector<cplx> critical_polynomial(const std::vector<cplx>& z, const std::vector<double>& a) {
  const size_t k = z.size();
  std::vector<cplx> p(k, 0);
  for (size_t i = 0; i < k; ++i) {
    std::vector<cplx> q{cplx(a[i])};
    for (size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      std::vector<cplx> r(q.size() + 1, 0);
      for (size_t d = 0; d < q.size(); ++d) {
        r[d + 1] += q[d];
        r[d] -= q[d] * z[j];
      }
      q = std::move(r);
    }
    for (size_t d = 0; d < q.size(); ++d) p[d] += q[d];
  }
  return p;
}

std::vector<cplx> aberth_roots(const std::vector<cplx>& coef_in) {
  if (coef_in.size() < 2) return {};
  std::vector<cplx> c = coef_in;
  const cplx lead = c.back();
  if (lead == cplx(0)) throw Error(Err::Precondition, "leading coefficient vanishes");
  for (auto& x : c) x /= lead;
  const int n = static_cast<int>(c.size()) - 1;
  if (n == 1) return {-c[0]};
  double r0 = 0;
  for (int j = 0; j < n; ++j) r0 = std::max(r0, std::pow(std::abs(c[j]), 1.0 / (n - j)));
  r0 = std::max(r0, 1e-3);
  std::vector<cplx> z(n);
  for (int j = 0; j < n; ++j) z[j] = std::polar(r0, kTwoPi * j / n + 0.7);
  double best = HUGE_VAL;
  int stall = 0;
  for (int it = 0; it < 800 && stall < 40; ++it) {
    double big = 0, scale = 1;
    for (int j = 0; j < n; ++j) {
      auto [p, d] = horner2(c, z[j]);
      if (p == cplx(0)) continue;
      cplx N = p / d;
      cplx S = 0;
      for (int l = 0; l < n; ++l)
        if (l != j) S += 1.0 / (z[j] - z[l]);
      cplx w = N / (1.0 - N * S);
      if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) w = N;
      z[j] -= w;
      big = std::max(big, std::abs(w));
      scale = std::max(scale, std::abs(z[j]));
    }
    if (big <= 1e-16 * scale) break;
    if (big < best * 0.999) {
      best = big;
      stall = 0;
    } else {
      ++stall;
    }
  }
  return z;
}

CriticalSet critical_points(const Configuration& cfg, const FlowTolerances& tol) {
  return Flow(cfg, tol).critical();
}

namespace {

struct ClusteredRoot {
  cplx z;
  int size;
  double residual;
};

std::vector<ClusteredRoot> cluster_roots(const std::vector<cplx>& coef, const FlowTolerances& tol) {
  auto roots = aberth_roots(coef);
  const int n = static_cast<int>(roots.size());
  std::vector<int> par(n);
  std::iota(par.begin(), par.end(), 0);
  std::function<int(int)> find = [&](int x) { return par[x] == x ? x : par[x] = find(par[x]); };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(roots[i] - roots[j]) < tol.cluster) par[find(i)] = find(j);
  std::map<int, std::vector<cplx>> groups;
  for (int i = 0; i < n; ++i) groups[find(i)].push_back(roots[i]);
  std::vector<ClusteredRoot> out;
  for (auto& [rep, g] : groups) {
    cplx m = 0;
    for (auto x : g) m += x;
    m /= static_cast<double>(g.size());
    // Newton on the derivative of order size-1, where the cluster is a simple root
    std::vector<cplx> q = coef;
    for (size_t d = 1; d < g.size(); ++d) q = derivative(q);
    for (int it = 0; it < 6; ++it) {
      auto [p, d] = horner2(q, m);
      if (d == cplx(0)) break;
      cplx step = p / d;
      if (!(std::abs(step) < tol.cluster)) break;
      m -= step;
      if (std::abs(step) <= 1e-17 * std::max(1.0, std::abs(m))) break;
    }
    out.push_back({m, static_cast<int>(g.size()), std::abs(horner2(coef, m).first)});
  }
  std::sort(out.begin(), out.end(), [](const ClusteredRoot& x, const ClusteredRoot& y) {
    if (x.z.real() != y.z.real()) return x.z.real() < y.z.real();
    return x.z.imag() < y.z.imag();
  });
  for (size_t i = 0; i < out.size(); ++i)
    for (size_t j = i + 1; j < out.size(); ++j)
      if (std::abs(out[i].z - out[j].z) < tol.ambiguous)
        throw Error(Err::IllConditioned, "critical points closer than the ambiguity radius");
  return out;
}

}  // namespace

// ---------------------------------------------------------------- flow

Flow::Flow(const Configuration& cfg, const FlowTolerances& tol) : tol_(tol) {
  validate_configuration(cfg, tol);
  const int k = cfg.k();
  shift_ = 0;
  for (auto z : cfg.z) shift_ += z;
  shift_ /= static_cast<double>(k);
  double norm = 0;
  for (auto z : cfg.z) norm += std::norm(z - shift_);
  scale_ = std::sqrt(norm);
  double asum = std::accumulate(cfg.a.begin(), cfg.a.end(), 0.0);
  for (int i = 0; i < k; ++i) {
    n_.z.push_back((cfg.z[i] - shift_) / scale_);
    n_.a.push_back(cfg.a[i] / asum);
  }
  auto coef = critical_polynomial(n_.z, n_.a);
  for (auto& r : cluster_roots(coef, tol)) {
    CriticalPoint c;
    c.zn = r.z;
    c.z = r.z * scale_ + shift_;
    c.order = r.size + 1;
    c.residual = r.residual;
    for (int i = 0; i < k; ++i) {
      double d = std::abs(r.z - n_.z[i]);
      if (d < tol.separation) throw Error(Err::IllConditioned, "critical point on a configuration point");
      c.log_abs += n_.a[i] * std::log(d);
      c.arg += n_.a[i] * std::arg(r.z - n_.z[i]);
    }
    crit_.pts.push_back(c);
    crit_.max_residual = std::max(crit_.max_residual, r.residual);
  }
  int total = 0;
  for (auto& c : crit_.pts) total += c.order - 1;
  if (total != k - 1) throw Error(Err::IllConditioned, "critical multiplicities do not add up to k-1");
  crit_.log_M = -HUGE_VAL;
  for (auto& c : crit_.pts) crit_.log_M = std::max(crit_.log_M, c.log_abs);
  for (auto& c : crit_.pts) c.f = std::exp(c.log_abs - crit_.log_M);
  for (auto& c : crit_.pts) {
    const int m = c.order;
    cplx s = 0;
    for (int i = 0; i < k; ++i) s += n_.a[i] / std::pow(c.zn - n_.z[i], m);
    lead_.push_back(s * ((m % 2) ? 1.0 : -1.0) / static_cast<double>(m));
  }
}

cplx Flow::L(cplx z) const {
  cplx s = 0;
  for (size_t i = 0; i < n_.z.size(); ++i) s += n_.a[i] / (z - n_.z[i]);
  return s;
}

double Flow::clearance(cplx z) const {
  double c = HUGE_VAL;
  for (auto p : n_.z) c = std::min(c, std::abs(z - p));
  for (auto& p : crit_.pts) c = std::min(c, std::abs(z - p.zn));
  return c;
}

double Flow::out_angle(int b, int j) const {
  const int m = crit_.pts.at(b).order;
  return wrap((kPi - std::arg(lead_[b]) + kTwoPi * j) / m);
}

double Flow::in_angle(int b, int j) const {
  const int m = crit_.pts.at(b).order;
  return wrap((kTwoPi * j - std::arg(lead_[b])) / m);
}

Separatrix Flow::trace_separatrix(int b, int j) const {
  if (b < 0 || b >= static_cast<int>(crit_.pts.size())) throw Error(Err::Precondition, "no such critical point");
  const auto& c = crit_.pts[b];
  const int m = c.order;
  if (m < 2) throw Error(Err::Precondition, "not a critical point");
  if (j < 0 || j >= m) throw Error(Err::Precondition, "direction index out of range");
  double d = HUGE_VAL;
  for (auto p : n_.z) d = std::min(d, std::abs(c.zn - p));
  for (size_t o = 0; o < crit_.pts.size(); ++o)
    if (static_cast<int>(o) != b) d = std::min(d, std::abs(c.zn - crit_.pts[o].zn));
  const double alpha = out_angle(b, j);
  cplx z0 = c.zn + std::polar(1e-3 * d, alpha);
  std::vector<double> psi(n_.z.size());
  for (size_t i = 0; i < n_.z.size(); ++i)
    psi[i] = std::arg(c.zn - n_.z[i]) + std::arg((z0 - n_.z[i]) / (c.zn - n_.z[i]));
  auto s = descend(z0, c.arg, b, psi);
  s.dir = j;
  return s;
}

Separatrix Flow::trace_ray() const {
  cplx z0 = tol_.ray_radius;
  std::vector<double> psi(n_.z.size());
  for (size_t i = 0; i < n_.z.size(); ++i) psi[i] = std::arg(z0 - n_.z[i]);
  return descend(z0, 0.0, -1, psi);
}

Separatrix Flow::descend(cplx z, double theta, int source, std::vector<double> psi) const {
  const auto& zs = n_.z;
  const auto& a = n_.a;
  const int k = static_cast<int>(zs.size());
  Separatrix out;
  out.source = source;
  auto correct = [&](cplx& w, std::vector<double>& ps) {
    double F = 0;
    for (int it = 0; it < 8; ++it) {
      F = dot(a, ps) - theta;
      if (std::abs(F) < 1e-15) break;
      cplx Lw = L(w);
      cplx nw = w - cplx(0, 1) * F / Lw;
      continue_args(ps, zs, w, nw);
      w = nw;
    }
    return std::abs(dot(a, ps) - theta);
  };
  auto logabs = [&](cplx w) {
    double s = 0;
    for (int i = 0; i < k; ++i) s += a[i] * std::log(std::abs(w - zs[i]));
    return s;
  };
  out.residual = correct(z, psi);
  if (source >= 0) {
    // the corrected start must stay in the requested sector
    const auto& c = crit_.pts[source];
    double dev = std::abs(std::remainder(std::arg(z - c.zn) - out_angle(source, 0), kTwoPi / c.order));
    if (dev > kPi / (2 * c.order)) throw Error(Err::IllConditioned, "start of separatrix left its sector");
  }
  std::vector<double> crit_clear(crit_.pts.size(), HUGE_VAL);
  std::vector<bool> rejected(crit_.pts.size(), false);
  for (size_t b = 0; b < crit_.pts.size(); ++b) {
    for (auto p : zs) crit_clear[b] = std::min(crit_clear[b], std::abs(crit_.pts[b].zn - p));
    for (size_t o = 0; o < crit_.pts.size(); ++o)
      if (o != b) crit_clear[b] = std::min(crit_clear[b], std::abs(crit_.pts[b].zn - crit_.pts[o].zn));
  }
  if (source >= 0) rejected[source] = true;
  out.path.push_back(z);
  double s = logabs(z);
  double eta = tol_.eta;
  for (int step = 0;; ++step) {
    for (int i = 0; i < k; ++i) {
      if (std::abs(z - zs[i]) < tol_.capture) {
        double rest = 0;
        for (int j = 0; j < k; ++j)
          if (j != i) rest += a[j] * (psi[j] + std::arg((zs[i] - zs[j]) / (z - zs[j])));
        out.to_white = true;
        out.target = i;
        out.angle = (theta - rest) / a[i];
        out.tangent = std::polar(1.0, out.angle);
        out.steps = step;
        return out;
      }
    }
    for (size_t b = 0; b < crit_.pts.size(); ++b) {
      if (rejected[b]) continue;
      const cplx cb = crit_.pts[b].zn;
      if (std::abs(z - cb) >= 1e-3 * crit_clear[b]) continue;
      double at_b = 0;
      for (int i = 0; i < k; ++i) at_b += a[i] * (psi[i] + std::arg((cb - zs[i]) / (z - zs[i])));
      if (std::abs(theta - at_b) < tol_.match) {
        const int m = crit_.pts[b].order;
        double ang = std::arg(z - cb);
        int best = 0;
        double bd = HUGE_VAL;
        for (int q = 0; q < m; ++q) {
          double dd = std::abs(std::remainder(ang - in_angle(static_cast<int>(b), q), kTwoPi));
          if (dd < bd) bd = dd, best = q;
        }
        if (bd > kPi / (2 * m)) throw Error(Err::CaptureAmbiguity, "arrival at a critical point off its incoming lines");
        out.to_white = false;
        out.target = static_cast<int>(b);
        out.target_dir = best;
        out.angle = in_angle(static_cast<int>(b), best);
        out.tangent = std::polar(1.0, out.angle);
        out.steps = step;
        return out;
      }
      rejected[b] = true;
    }
    if (step >= tol_.max_steps) throw Error(Err::StepLimit, "separatrix did not terminate");
    const double c = clearance(z);
    bool ok = false;
    for (int tries = 0; tries < 40 && !ok; ++tries) {
      const cplx Lz = L(z);
      const double h = eta * c;
      const double ds = -h * std::abs(Lz);
      auto f = [&](cplx w) { return 1.0 / L(w); };
      cplx k1 = f(z), k2 = f(z + 0.5 * ds * k1), k3 = f(z + 0.5 * ds * k2), k4 = f(z + ds * k3);
      cplx zn = z + ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!std::isfinite(zn.real()) || !std::isfinite(zn.imag()) || std::abs(zn - z) > 3 * h) {
        eta *= 0.5;
        continue;
      }
      auto ps = psi;
      continue_args(ps, zs, z, zn);
      double res = correct(zn, ps);
      double sn = logabs(zn);
      // arguments lose absolute accuracy like eps / distance near a zero
      double floor = 0;
      for (int i = 0; i < k; ++i) floor += a[i] * (1 + std::abs(zs[i])) / std::abs(zn - zs[i]);
      if (res > 1e-11 + 8e-16 * floor || !(sn < s) || std::abs(zn - z) > 3 * h) {
        eta *= 0.5;
        continue;
      }
      out.residual = std::max(out.residual, res);
      z = zn;
      psi = std::move(ps);
      s = sn;
      ok = true;
    }
    if (!ok) throw Error(Err::StepLimit, "step size underflow while tracing");
    eta = std::min(tol_.eta, eta * 2);
    out.path.push_back(z);
  }
}

// ---------------------------------------------------------------- labelled trees

int LabelledTreeNum::next_at(int v, int e) const {
  const auto& c = cyc.at(v);
  auto it = std::find(c.begin(), c.end(), e);
  if (it == c.end()) throw Error(Err::Precondition, "edge not incident to vertex");
  ++it;
  return it == c.end() ? c.front() : *it;
}

TracedTree build_labelled_tree(const Configuration& cfg, const FlowTolerances& tol) {
  Flow fl(cfg, tol);
  const int k = cfg.k();
  const auto& crit = fl.critical();
  const int B = static_cast<int>(crit.pts.size());
  TracedTree out;
  out.crit = crit;
  auto& t = out.tree;
  t.k = k;
  t.cyc.assign(k + B, {});
  std::vector<std::vector<std::pair<double, int>>> around(k + B);
  std::map<std::pair<int, int>, int> edge_of;  // (black, dir) -> edge
  for (int b = 0; b < B; ++b) {
    t.f.push_back(crit.pts[b].f);
    t.order.push_back(crit.pts[b].order);
    t.pos.push_back(crit.pts[b].z);
  }
  for (int b = 0; b < B; ++b)
    for (int j = 0; j < crit.pts[b].order; ++j) {
      auto s = fl.trace_separatrix(b, j);
      TreeEdge e;
      e.from = k + b;
      e.to = s.to_white ? s.target : k + s.target;
      e.angle = s.angle;
      e.sep = static_cast<int>(out.seps.size());
      int id = static_cast<int>(t.edges.size());
      t.edges.push_back(e);
      edge_of[{b, j}] = id;
      around[k + b].emplace_back(fl.out_angle(b, j), id);
      around[e.to].emplace_back(wrap(s.angle), id);
      out.diag.level_residual = std::max(out.diag.level_residual, s.residual);
      out.diag.steps += s.steps;
      out.seps.push_back(std::move(s));
    }
  for (int v = 0; v < k + B; ++v) {
    std::sort(around[v].begin(), around[v].end());
    for (auto& [ang, id] : around[v]) t.cyc[v].push_back(id);
  }
  for (int i = 0; i < k; ++i) {
    const auto& lst = around[i];
    const size_t r = lst.size();
    for (size_t l = 0; l < r; ++l) {
      double gap = r == 1 ? kTwoPi : wrap(lst[(l + 1) % r].first - lst[l].first);
      t.edges[lst[l].second].g = gap / kTwoPi;
    }
  }
  // distinguished ray, continued through critical points along the rightmost exit
  auto ray = fl.trace_ray();
  out.diag.level_residual = std::max(out.diag.level_residual, ray.residual);
  out.diag.steps += ray.steps;
  int via = -1;
  {
    const Separatrix* cur = &ray;
    for (int guard = 0; !cur->to_white; ++guard) {
      if (guard > B) throw Error(Err::CaptureAmbiguity, "distinguished ray loops through critical points");
      via = edge_of.at({cur->target, cur->target_dir});
      cur = &out.seps[t.edges[via].sep];
    }
    t.base_lobe = cur->target;
  }
  if (via >= 0) {
    t.base_edge = via;
    t.base_offset = 0;
    t.base_angle = std::polar(1.0, t.edges[via].angle);
  } else {
    double best = HUGE_VAL;
    for (int e : t.cyc[t.base_lobe]) {
      double d = wrap(ray.angle - t.edges[e].angle);
      if (d < best) best = d, t.base_edge = e;
    }
    t.base_offset = best / kTwoPi;
    t.base_angle = ray.tangent;
  }
  out.seps.push_back(std::move(ray));
  out.diag.root_residual = crit.max_residual;
  out.diag.separatrices = static_cast<int>(out.seps.size());
  return out;
}

std::vector<std::string> check_tree(const LabelledTreeNum& t, double tol) {
  std::vector<std::string> bad;
  const int k = t.k, B = t.blacks(), V = k + B;
  const int E = static_cast<int>(t.edges.size());
  if (B > k - 1) bad.push_back("more than k-1 black vertices");
  if (E != B + k - 1) bad.push_back("|E| != |B| + k - 1");
  if (static_cast<int>(t.cyc.size()) != V) bad.push_back("cyclic orders missing");
  std::vector<int> par(V);
  std::iota(par.begin(), par.end(), 0);
  std::function<int(int)> find = [&](int x) { return par[x] == x ? x : par[x] = find(par[x]); };
  std::vector<int> outdeg(V, 0);
  std::vector<std::vector<int>> inc(V);
  for (int id = 0; id < E; ++id) {
    const auto& e = t.edges[id];
    if (e.from < 0 || e.from >= V || e.to < 0 || e.to >= V) {
      bad.push_back("edge endpoint out of range");
      return bad;
    }
    if (t.is_white(e.from)) bad.push_back("white vertex is a source");
    if (e.from == e.to) bad.push_back("loop edge");
    int a = find(e.from), b = find(e.to);
    if (a == b) bad.push_back("cycle through edge " + std::to_string(id));
    par[a] = b;
    ++outdeg[e.from];
    inc[e.from].push_back(id);
    inc[e.to].push_back(id);
    if (!t.is_white(e.to) && t.f[e.from - k] + tol < t.f[e.to - k]) bad.push_back("f increases along an edge");
  }
  for (int v = 1; v < V; ++v)
    if (find(v) != find(0)) {
      bad.push_back("tree is disconnected");
      break;
    }
  double fmax = 0;
  for (int b = 0; b < B; ++b) {
    if (!(t.f[b] > 0) || t.f[b] > 1 + tol) bad.push_back("f outside (0,1]");
    fmax = std::max(fmax, t.f[b]);
    if (outdeg[k + b] < 2) bad.push_back("black vertex with fewer than 2 outgoing edges");
  }
  if (B > 0 && std::abs(fmax - 1) > tol) bad.push_back("max f != 1");
  for (int v = 0; v < V && v < static_cast<int>(t.cyc.size()); ++v) {
    auto a = inc[v], c = t.cyc[v];
    std::sort(a.begin(), a.end());
    std::sort(c.begin(), c.end());
    if (a != c) bad.push_back("cyclic order at vertex " + std::to_string(v) + " differs from incidence");
    if (v >= k && t.cyc[v].size() > 1) {
      const auto& cv = t.cyc[v];
      for (size_t i = 0; i < cv.size(); ++i) {
        int e1 = cv[i], e2 = cv[(i + 1) % cv.size()];
        if (t.edges[e1].to == v && t.edges[e2].to == v) bad.push_back("black vertex is the target of adjacent edges");
      }
    }
  }
  for (int i = 0; i < k; ++i) {
    double sum = 0;
    for (int e : inc[i]) {
      if (t.edges[e].g < -tol || t.edges[e].g > 1 + tol) bad.push_back("g outside [0,1]");
      sum += t.edges[e].g;
    }
    if (std::abs(sum - 1) > tol) bad.push_back("g labels at white vertex " + std::to_string(i + 1) + " do not sum to 1");
  }
  if (t.base_lobe < 0 || t.base_lobe >= k) {
    bad.push_back("base point missing");
  } else if (t.base_edge < 0 || t.base_edge >= E || t.edges[t.base_edge].to != t.base_lobe) {
    bad.push_back("base edge does not enter the base lobe");
  } else if (t.base_offset < -tol || t.base_offset > t.edges[t.base_edge].g + tol) {
    bad.push_back("base offset outside its arc");
  }
  return bad;
}

std::string tree_text(const LabelledTreeNum& t) {
  std::ostringstream os;
  os.precision(12);
  os << "blacks " << t.blacks() << " edges " << t.edges.size() << '\n';
  for (int b = 0; b < t.blacks(); ++b)
    os << "black " << b + 1 << " at " << t.pos[b].real() << ',' << t.pos[b].imag() << " m=" << t.order[b]
       << " f=" << t.f[b] << '\n';
  auto name = [&](int v) { return t.is_white(v) ? "w" + std::to_string(v + 1) : "b" + std::to_string(v - t.k + 1); };
  for (size_t id = 0; id < t.edges.size(); ++id) {
    const auto& e = t.edges[id];
    os << "edge " << name(e.from) << " -> " << name(e.to);
    if (t.is_white(e.to)) os << " g=" << e.g << " angle=" << wrap(e.angle);
    os << '\n';
  }
  os << "base lobe " << t.base_lobe + 1 << " offset " << t.base_offset << " angle " << std::arg(t.base_angle) << '\n';
  return os.str();
}

// ---------------------------------------------------------------- cactus reading

namespace {

/** Rotation at each black vertex after contracting every black-black edge. */
struct Contracted {
  std::vector<int> rep;                 // black vertex -> representative
  std::vector<std::vector<int>> rot;    // by representative, out-edges to whites
};

Contracted contract_blacks(const LabelledTreeNum& t) {
  const int k = t.k, B = t.blacks();
  Contracted c;
  c.rep.resize(B);
  std::iota(c.rep.begin(), c.rep.end(), 0);
  std::function<int(int)> find = [&](int x) { return c.rep[x] == x ? x : c.rep[x] = find(c.rep[x]); };
  std::vector<std::vector<int>> rot(B);
  for (int b = 0; b < B; ++b) rot[b] = t.cyc[k + b];
  auto rotate_to = [](std::vector<int>& v, int e) {
    auto it = std::find(v.begin(), v.end(), e);
    if (it == v.end()) throw Error(Err::Precondition, "edge missing from rotation");
    std::rotate(v.begin(), it, v.end());
  };
  for (size_t id = 0; id < t.edges.size(); ++id) {
    const auto& e = t.edges[id];
    if (t.is_white(e.to)) continue;
    int u = find(e.from - k), v = find(e.to - k);
    rotate_to(rot[u], static_cast<int>(id));
    rotate_to(rot[v], static_cast<int>(id));
    std::vector<int> merged(rot[u].begin() + 1, rot[u].end());
    merged.insert(merged.end(), rot[v].begin() + 1, rot[v].end());
    rot[u] = std::move(merged);
    rot[v].clear();
    c.rep[v] = u;
  }
  for (int b = 0; b < B; ++b) c.rep[b] = find(b);
  c.rot = std::move(rot);
  return c;
}

}  // namespace

CactusReading read_cactus(const LabelledTreeNum& t) {
  const int k = t.k;
  if (t.base_edge < 0) throw Error(Err::Precondition, "tree has no base point");
  auto con = contract_blacks(t);
  auto next_black = [&](int e) {
    int b = con.rep[t.edges[e].from - k];
    const auto& r = con.rot[b];
    auto it = std::find(r.begin(), r.end(), e);
    if (it == r.end()) throw Error(Err::Precondition, "edge missing from contracted rotation");
    ++it;
    return it == r.end() ? r.front() : *it;
  };
  CactusReading rd;
  const int e0 = t.base_edge, w0 = t.base_lobe;
  const double d0 = t.base_offset;
  Word w;
  auto push = [&](int lobe, double len, int edge) {
    w.push_back(lobe + 1);
    rd.t.push_back(len);
    rd.start_edge.push_back(edge);
  };
  push(w0, t.edges[e0].g - d0, e0);
  int cur = e0, lobe = w0;
  const int E = static_cast<int>(t.edges.size());
  for (int guard = 0;; ++guard) {
    if (guard > E + 1) throw Error(Err::Precondition, "cactus walk does not close");
    int nxt = t.next_at(lobe, cur);
    int jump = next_black(nxt);
    cur = jump;
    lobe = t.edges[jump].to;
    if (cur == e0) break;
    push(lobe, t.edges[cur].g, cur);
  }
  if (d0 > 0) push(w0, d0, e0);
  rd.cell = validate_word(w, k);
  return rd;
}

cplx theta_angle(const LabelledTreeNum& t, int i, double tol) {
  if (i < 1 || i > t.k) throw Error(Err::Precondition, "lobe index out of range");
  if (t.base_lobe == i - 1) {
    double rest = t.edges[t.base_edge].g - t.base_offset;
    if (rest < tol) throw Error(Err::AmbiguousFirstHit, "base point next to a junction of its own lobe");
    return t.base_angle;
  }
  auto rd = read_cactus(t);
  for (size_t r = 1; r < rd.cell.w.size(); ++r)
    if (rd.cell.w[r] == i) return std::polar(1.0, t.edges[rd.start_edge[r]].angle);
  throw Error(Err::Precondition, "lobe never visited");
}

cplx theta_angle(const Configuration& cfg, int i, const FlowTolerances& tol) {
  auto tt = build_labelled_tree(cfg, tol);
  return theta_angle(normalize_labelled_tree(tt.tree, tol.snap), i, tol.boundary);
}

}  // namespace opcells
