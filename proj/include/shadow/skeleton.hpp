#pragma once

// The shadow B_D for n = 1 as a graph: minima are vertices, each index-1
// saddle contributes one edge (its two descending half-paths), and each
// Morse-Bott circle is a standalone cycle. Faces are the basins of the
// zeros under ascending flow; their areas feed the Bohr-Sommerfeld check.

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "shadow/flow.hpp"

namespace shadow {

struct SkeletonEdge {
  int saddle = -1;
  int from = -1;  // vertex cluster ids (a Bott circle id when an edge lands on a circle)
  int to = -1;
  std::vector<ChartPoint> polyline;
  double length = 0.0;
};

struct Face {
  int label = -1;  // index into the zero list
  ChartPoint zero;
  int multiplicity = 0;
  double area = 0.0;
  double stderr_ = 0.0;
};

struct SkeletonGraph {
  std::vector<int> vertices;  // cluster ids of minima
  std::vector<SkeletonEdge> edges;
  std::vector<BottCircle> bott_cycles;
  std::vector<Face> faces;
  int components = 0;

  bool empty() const { return vertices.empty() && edges.empty() && bott_cycles.empty(); }
  /// V - E; every Bott cycle contributes 0.
  int euler() const { return int(vertices.size()) - int(edges.size()); }
  /// True when the graph has no 1-cells at all (no n-dimensional part for n = 1).
  bool one_skeleton_empty() const { return edges.empty() && bott_cycles.empty(); }
};

/// Cell structure: node ids of the graph (minima, then one node per Bott
/// circle) and 1-cells (edges, then one loop per circle).
struct GraphCells {
  int nodes = 0;
  std::vector<std::pair<int, int>> arcs;
};

inline GraphCells graph_cells(const SkeletonGraph& g) {
  GraphCells c;
  std::vector<int> ids = g.vertices;
  for (const auto& b : g.bott_cycles) ids.push_back(b.cluster_id);
  auto node = [&](int cluster) {
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (ids[i] == cluster) return static_cast<int>(i);
    throw DanglingEdge("edge endpoint " + std::to_string(cluster) + " is not a vertex");
  };
  c.nodes = static_cast<int>(ids.size());
  for (const auto& e : g.edges) c.arcs.emplace_back(node(e.from), node(e.to));
  for (const auto& b : g.bott_cycles) c.arcs.emplace_back(node(b.cluster_id), node(b.cluster_id));
  return c;
}

inline SkeletonGraph build_skeleton(const Section& sec, const CriticalSet& set,
                                    const std::vector<Separatrix>& separatrices,
                                    double endpoint_tolerance = 1e-4) {
  const auto& var = sec.variety();
  if (var.dim() != 1) throw NotApplicable("graph skeletons are assembled for n = 1 only");
  SkeletonGraph g;
  for (const auto& r : set.records)
    if (r.kind == CriticalKind::Isolated && r.morse_index == 0) g.vertices.push_back(r.cluster_id);
  g.bott_cycles = set.bott_circles;

  auto is_node = [&](int id) {
    for (int v : g.vertices)
      if (v == id) return true;
    return set.circle(id) != nullptr;
  };
  auto endpoint_distance = [&](int id, const ChartPoint& p) {
    if (const auto* c = set.circle(id)) {
      // Project onto the circle with a corrector step before measuring.
      SolverControls corr;
      corr.tolerance = 1e-11;
      const NewtonOutcome nc = newton_critical(sec, p, corr);
      if (!nc.converged) return 1.0;
      return chordal_distance(var, p, nc.point) +
             (distance_to_samples(var, nc.point, c->samples) < 2e-2 ? 0.0 : 1.0);
    }
    return chordal_distance(var, p, set.cluster(id)->location);
  };

  for (const auto& s : separatrices) {
    if (!s.complete)
      throw DanglingEdge("separatrix of saddle " + std::to_string(s.saddle) +
                         " is incomplete (a half-path ended with fate budget or escape)");
    for (int side = 0; side < 2; ++side) {
      const int id = s.endpoints[side];
      if (!is_node(id))
        throw DanglingEdge("separatrix of saddle " + std::to_string(s.saddle) + " ends at cluster " +
                           std::to_string(id) + ", which is not a minimum or Bott circle");
      const ChartPoint& end = side == 0 ? s.polyline.front() : s.polyline.back();
      if (endpoint_distance(id, end) > endpoint_tolerance)
        throw DanglingEdge("separatrix of saddle " + std::to_string(s.saddle) +
                           " misses its endpoint vertex");
    }
    g.edges.push_back({s.saddle, s.endpoints[0], s.endpoints[1], s.polyline, s.length});
  }

  // Connected components by union-find over graph nodes.
  const GraphCells cells = graph_cells(g);
  std::vector<int> parent(cells.nodes);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [a, b] : cells.arcs) parent[find(a)] = find(b);
  for (int i = 0; i < cells.nodes; ++i) g.components += find(i) == i;
  return g;
}

struct FaceEstimate {
  std::vector<Face> faces;
  int samples = 0;
  int budget = 0;
  int converged = 0;
  bool low_confidence = false;  // Budget fates above 1%
};

/// Stratified sample of the Riemann sphere: equal-area cells from a
/// (height, longitude) grid, `per_cell` uniform points in each.
inline std::vector<ChartPoint> stratified_sphere(int cells_per_side, int per_cell, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ChartPoint> pts;
  pts.reserve(std::size_t(cells_per_side) * cells_per_side * per_cell);
  for (int i = 0; i < cells_per_side; ++i)
    for (int j = 0; j < cells_per_side; ++j)
      for (int s = 0; s < per_cell; ++s) {
        const double h = -0.5 + (i + rng.uniform()) / cells_per_side;  // uniform height = uniform area
        const double lon = 2 * M_PI * (j + rng.uniform()) / cells_per_side;
        const double r = std::sqrt(std::max(0.0, 0.25 - h * h));
        pts.push_back(from_sphere({r * std::cos(lon), r * std::sin(lon), h}));
      }
  return pts;
}

/// FS areas of the basins of the zeros. With two points per stratum the
/// standard error is estimated from within-stratum differences.
inline FaceEstimate face_areas(const FlowContext& ctx, const DivisorDescriptor& divisor,
                               int cells_per_side = 100, std::uint64_t seed = 1) {
  if (ctx.section.variety().kind() != VarietyKind::CP1)
    throw NotApplicable("face areas are computed on CP1 only");
  const int per_cell = 2;
  FlowContext fast = ctx;
  fast.controls.atol = fast.controls.rtol = 1e-7;
  const FateField field = classify_points(fast, stratified_sphere(cells_per_side, per_cell, seed));
  const int strata = cells_per_side * cells_per_side;

  FaceEstimate est;
  est.samples = static_cast<int>(field.fates.size());
  est.budget = field.budget;
  est.converged = field.converged;
  est.low_confidence = field.budget_fraction() > 0.01;
  for (std::size_t z = 0; z < divisor.zeros.size(); ++z) {
    double mean = 0.0, var = 0.0;
    for (int s = 0; s < strata; ++s) {
      double y[2];
      for (int t = 0; t < per_cell; ++t) {
        const Fate& f = field.fates[std::size_t(s) * per_cell + t];
        y[t] = (f.kind == FateKind::EscapedToDivisor && f.target == int(z)) ? 1.0 : 0.0;
      }
      mean += 0.5 * (y[0] + y[1]);
      var += 0.25 * (y[0] - y[1]) * (y[0] - y[1]);
    }
    Face face;
    face.label = static_cast<int>(z);
    face.zero = divisor.zeros[z];
    face.multiplicity = divisor.multiplicities[z];
    face.area = mean / strata;
    face.stderr_ = std::sqrt(var) / strata;
    est.faces.push_back(face);
  }
  return est;
}

struct FaceCheck {
  int label = -1;
  double k_area = 0.0;
  double k_stderr = 0.0;
  long nearest_integer = 0;
  int zero_count = 0;
  bool pass = false;
};

struct PhaseCheck {
  std::string what;  // "edge" or "bott"
  int id = -1;       // saddle or circle cluster id
  double max_deviation = 0.0;
  double closing = 0.0;  // net transport along the whole path
  bool pass = false;
};

struct BSReport {
  int level = 0;
  std::vector<FaceCheck> faces;
  std::vector<PhaseCheck> phases;
  bool integrality_pass = true;
  bool phase_pass = true;
  bool pass() const { return integrality_pass && phase_pass; }
};

inline constexpr double kPhaseTolerance = 1e-2;

/// Bohr-Sommerfeld integrality of k * (face area) against the zero count of
/// each face, and covariant constancy of the phase of h along the shadow.
inline BSReport bs_check(const Section& sec, const SkeletonGraph& g, const std::vector<Face>& faces) {
  BSReport rep;
  rep.level = sec.variety().factors()[0].level;
  const double k = rep.level;
  long total = 0;
  for (const auto& f : faces) {
    FaceCheck c;
    c.label = f.label;
    c.k_area = k * f.area;
    c.k_stderr = k * f.stderr_;
    c.nearest_integer = std::lround(c.k_area);
    c.zero_count = f.multiplicity;
    c.pass = std::abs(c.k_area - double(c.nearest_integer)) < 3 * c.k_stderr + 1e-2 &&
             c.nearest_integer == c.zero_count;
    total += c.nearest_integer;
    rep.integrality_pass = rep.integrality_pass && c.pass;
    rep.faces.push_back(c);
  }
  if (!faces.empty() && total != rep.level) rep.integrality_pass = false;
  for (const auto& e : g.edges) {
    const auto t = connection_phase_transport(sec, e.polyline);
    PhaseCheck c{"edge", e.saddle, t.max_deviation, t.total, t.max_deviation < kPhaseTolerance};
    rep.phase_pass = rep.phase_pass && c.pass;
    rep.phases.push_back(c);
  }
  for (const auto& b : g.bott_cycles) {
    const auto t = connection_phase_transport(sec, b.samples);
    PhaseCheck c{"bott", b.cluster_id, t.max_deviation, t.total, t.max_deviation < kPhaseTolerance};
    rep.phase_pass = rep.phase_pass && c.pass;
    rep.phases.push_back(c);
  }
  return rep;
}

}  // namespace shadow
