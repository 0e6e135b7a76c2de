#pragma once

// Flow lines of E = conj(h'/h) for h(z) = prod (z - z_i)^{a_i}: critical
// points, separatrices, the labelled tree of a configuration and its cell in
// the open moduli space.

#include "metatree.hpp"

#include <complex>
#include <string>
#include <vector>

namespace opcells {

using cplx = std::complex<double>;

/** All lengths are in normalized coordinates (mean 0, unit norm). */
struct FlowTolerances {
  double separation = 1e-6;  // smallest allowed pairwise distance
  double cluster = 1e-7;     // roots closer than this are one critical point
  double ambiguous = 1e-4;   // distinct critical points closer than this are rejected
  double capture = 1e-8;     // a trace ends this close to a zero
  double match = 1e-9;       // arg h mismatch accepted as hitting a critical point
  double eta = 0.2;          // step length as a fraction of the clearance
  int max_steps = 20000;
  double snap = 1e-9;        // labels this close to a wall are put on it
  double boundary = 1e-6;    // labels closer than this (but not snapped) are ambiguous
  double ray_radius = 1e3;   // start of the distinguished ray
};

struct Configuration {
  std::vector<cplx> z;
  std::vector<double> a;
  int k() const { return static_cast<int>(z.size()); }
};

/** Parses "k; x1,y1; ...; xk,yk; a1,...,ak" (weights optional, default uniform). */
Configuration parse_configuration(const std::string& s);
std::string configuration_str(const Configuration& c);
/** Throws Precondition on coincident points or bad weights. */
void validate_configuration(const Configuration& c, const FlowTolerances& tol = {});

struct CriticalPoint {
  cplx z;            // original coordinates
  cplx zn;           // normalized coordinates
  int order = 2;     // m: p vanishes to order m-1
  double log_abs = 0;  // log|h| in normalized coordinates
  double arg = 0;      // sum of principal arguments
  double f = 1;        // |h| / M
  double residual = 0;
};

struct CriticalSet {
  std::vector<CriticalPoint> pts;
  double log_M = 0;
  double max_residual = 0;
};

/** Coefficients of p(z) = sum a_i prod_{j != i}(z - z_j), constant term first. */
std::vector<cplx> critical_polynomial(const std::vector<cplx>& z, const std::vector<double>& a);
/** Simultaneous (Aberth-Ehrlich) roots of a monic polynomial, unclustered. */
std::vector<cplx> aberth_roots(const std::vector<cplx>& coef);
CriticalSet critical_points(const Configuration& cfg, const FlowTolerances& tol = {});

struct Separatrix {
  int source = -1;   // critical point index, -1 for the distinguished ray
  int dir = 0;
  std::vector<cplx> path;  // normalized coordinates
  bool to_white = true;
  int target = -1;         // zero index or critical point index
  int target_dir = -1;     // incoming direction index at a critical target
  double angle = 0;        // direction from a white target towards the line
  cplx tangent;            // unit complex of angle (or of the incoming direction)
  int steps = 0;
  double residual = 0;     // worst level-set residual
};

/** Numerical flow of one configuration in normalized coordinates. */
class Flow {
 public:
  explicit Flow(const Configuration& cfg, const FlowTolerances& tol = {});
  const Configuration& normalized() const { return n_; }
  const CriticalSet& critical() const { return crit_; }
  const FlowTolerances& tolerances() const { return tol_; }
  cplx shift() const { return shift_; }
  double scale() const { return scale_; }
  /** Outgoing direction j (0 <= j < m) at critical point b. */
  double out_angle(int b, int j) const;
  double in_angle(int b, int j) const;
  Separatrix trace_separatrix(int b, int j) const;
  Separatrix trace_ray() const;

 private:
  Separatrix descend(cplx z0, double theta, int source, std::vector<double> psi) const;
  cplx L(cplx z) const;
  double clearance(cplx z) const;
  Configuration n_;
  CriticalSet crit_;
  FlowTolerances tol_;
  cplx shift_;
  double scale_ = 1;
  std::vector<cplx> lead_;  // leading Taylor coefficient of log h at each critical point
};

struct TreeEdge {
  int from = -1, to = -1;  // vertex ids: whites 0..k-1, blacks k..
  double g = 0;            // only for edges into white vertices
  double angle = 0;        // arrival angle at a white target
  int sep = -1;
};

struct LabelledTreeNum {
  int k = 0;
  std::vector<double> f;           // per black vertex
  std::vector<int> order;          // per black vertex, m
  std::vector<cplx> pos;           // per black vertex, original coordinates
  std::vector<TreeEdge> edges;
  std::vector<std::vector<int>> cyc;  // per vertex, incident edge ids anticlockwise
  int base_lobe = -1;              // 0-based white vertex hit by the distinguished ray
  int base_edge = -1;              // edge whose arc contains the base point
  double base_offset = 0;          // distance from that edge along the lobe (lobe length 1)
  cplx base_angle;

  int blacks() const { return static_cast<int>(f.size()); }
  bool is_white(int v) const { return v < k; }
  int next_at(int v, int e) const;  // successor of e in the cyclic order at v
};

/** Human-readable violations of the labelled-tree axioms; empty when valid. */
std::vector<std::string> check_tree(const LabelledTreeNum& t, double tol = 1e-9);
std::string tree_text(const LabelledTreeNum& t);

struct TraceDiagnostics {
  double root_residual = 0;
  double level_residual = 0;
  int steps = 0;
  int separatrices = 0;
  double min_clearance = 1;  // distance of the nearest label to a cell wall
};

struct TracedTree {
  LabelledTreeNum tree;
  std::vector<Separatrix> seps;  // last one is the distinguished ray
  CriticalSet crit;
  TraceDiagnostics diag;
};

TracedTree build_labelled_tree(const Configuration& cfg, const FlowTolerances& tol = {});

/** Applies the identifications of the tree space for labels within tol. */
LabelledTreeNum normalize_labelled_tree(const LabelledTreeNum& t, double tol = 1e-9);

/** Tangent at z_i of the first ray from infinity hitting z_i, scanning
 *  anticlockwise from the distinguished ray. i is 1-based. */
cplx theta_angle(const LabelledTreeNum& t, int i, double tol = 1e-6);
cplx theta_angle(const Configuration& cfg, int i, const FlowTolerances& tol = {});

/** Root cactus of a labelled tree: all black labels set to 1. */
struct CactusReading {
  Cell cell;
  std::vector<double> t;
  std::vector<int> start_edge;  // edge at which each arc starts
};
CactusReading read_cactus(const LabelledTreeNum& t);

struct BarPoint {
  BarCell cell;
  std::vector<std::vector<double>> t;  // per vertex of the nested tree, per letter position
  std::vector<double> lambda;          // per vertex; 1 at the root
};

/** Best rational approximation with bounded denominator. */
Q rational_approx(double x, long long max_den = 1000000);
std::string bar_point_str(const BarPoint& p);

struct TraceResult {
  LabelledTreeNum tree;
  BarPoint point;
  BarCell cell;
  TraceDiagnostics diag;
  CriticalSet crit;
  std::vector<Separatrix> seps;
};

/** Cell of an already traced tree. Throws BoundaryProximity near a wall. */
BarPoint extract_point(const LabelledTreeNum& t, const FlowTolerances& tol, double* clearance = nullptr);
TraceResult extract_cell(const Configuration& cfg, const FlowTolerances& tol = {});

}  // namespace opcells
