#pragma once

// End-to-end run of one scene: divisor, critical points, flow, skeleton,
// faces, homology and verdict. Stage failures are collected, not thrown.

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shadow/scene.hpp"
#include "shadow/skeleton.hpp"
#include "shadow/topology.hpp"

namespace shadow {

inline constexpr const char* kToolVersion = "1.0.0";

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> grid;
  std::optional<int> starts_per_chart;
  std::optional<int> face_cells;
};

struct StageError {
  std::string stage;
  std::string type;
  std::string message;
};

struct RunResult {
  Scene scene;
  std::uint64_t seed = 1;
  std::string numeric_mode;
  std::optional<Section> section;
  std::optional<DivisorDescriptor> divisor;
  std::optional<CriticalSet> critical;
  std::optional<EulerCheck> euler;
  std::string euler_note;
  std::vector<Separatrix> separatrices;
  std::optional<SkeletonGraph> skeleton;
  std::optional<FaceEstimate> faces;
  std::optional<BSReport> bs;
  std::optional<ChainComplex> complex;
  std::optional<HomologyResult> skeleton_homology;
  std::optional<HomologyResult> oracle_homology;
  std::optional<ShadowVerdict> verdict;
  std::optional<CellCloud> cells;
  std::optional<bool> morse_inequalities;  // n = 2 corroboration against the oracle
  std::optional<FateField> fates;
  int grid_resolution = 0;
  std::vector<StageError> errors;
  bool inconsistent = false;
  std::vector<std::string> expectation_mismatches;
  bool expectation_checked = false;
  std::map<std::string, double> timings;  // seconds per stage

  bool expectation_met() const { return expectation_mismatches.empty(); }
  /// 0 on a clean, verdict-consistent run; 3 Inconsistent; 2 other stage
  /// failure; 4 verdict differs from the scene's declared expectation.
  int exit_code() const {
    if (inconsistent) return 3;
    if (!errors.empty()) return 2;
    if (!expectation_met()) return 4;
    return 0;
  }
};

inline std::string skeleton_shape(const SkeletonGraph& g) {
  const auto v = g.vertices.size(), e = g.edges.size(), b = g.bott_cycles.size();
  if (b > 0 && v == 0 && e == 0) return b == 1 ? "circle" : "circles";
  if (b > 0) return "graph";
  if (v == 1 && e == 0) return "point";
  if (v == 1 && e == 1) return "circle";
  if (v == 2 && e == 3) return "theta";
  if (v == 1 && e >= 2) return "bouquet";
  return "graph";
}

namespace detail {

inline std::string error_type(const std::exception& e) {
  if (dynamic_cast<const Inconsistent*>(&e)) return "Inconsistent";
  if (dynamic_cast<const DanglingEdge*>(&e)) return "DanglingEdge";
  if (dynamic_cast<const OutOfCatalog*>(&e)) return "OutOfCatalog";
  if (dynamic_cast<const NotApplicable*>(&e)) return "NotApplicable";
  if (dynamic_cast<const OnDivisor*>(&e)) return "OnDivisor";
  if (dynamic_cast<const ChartUndefined*>(&e)) return "ChartUndefined";
  if (dynamic_cast<const OverflowGuard*>(&e)) return "OverflowGuard";
  if (dynamic_cast<const InvalidInput*>(&e)) return "InvalidInput";
  return "Error";
}

}  // namespace detail

inline RunResult run_scene(const Scene& scene, const RunOptions& opt = {}) {
  RunResult r;
  r.scene = scene;
  SolverControls solver = scene.solver;
  if (opt.seed) solver.seed = *opt.seed;
  if (opt.starts_per_chart) solver.starts_per_chart = *opt.starts_per_chart;
  r.seed = solver.seed;
  r.grid_resolution = opt.grid ? *opt.grid : scene.grid_resolution();
  const int face_cells = opt.face_cells ? *opt.face_cells : scene.face_cells;
  const int n = scene.variety.dim();
  r.numeric_mode = n == 1 ? "graph" : "critical-points-only";

  auto stage = [&](const std::string& name, const std::function<void()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    try {
      body();
    } catch (const Error& e) {
      if (dynamic_cast<const Inconsistent*>(&e)) r.inconsistent = true;
      r.errors.push_back({name, detail::error_type(e), e.what()});
      ok = false;
    }
    r.timings[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return ok;
  };

  if (!stage("section", [&] { r.section.emplace(scene.section()); })) return r;
  const Section& sec = *r.section;
  if (!stage("divisor", [&] { r.divisor = analyze_divisor(sec, scene.declared_type); })) return r;
  if (!stage("critical", [&] { r.critical = find_critical_points(sec, solver); })) return r;
  try {
    r.euler = euler_check(*r.critical, *r.divisor);
  } catch (const Error& e) {
    r.euler_note = e.what();
  }

  const FlowContext ctx{sec, *r.critical, r.divisor->zeros, {}, solver};
  stage("oracle", [&] { r.oracle_homology = oracle_complement(*r.divisor); });

  if (n == 1) {
    if (stage("skeleton", [&] {
          r.separatrices = trace_separatrices(ctx);
          r.skeleton = build_skeleton(sec, *r.critical, r.separatrices);
          const GraphCells cells = graph_cells(*r.skeleton);
          r.complex = graph_complex(cells.nodes, cells.arcs);
          if (!r.complex->boundary_squared_zero()) throw Error("assembled complex has nonzero d^2");
          r.skeleton_homology = homology(*r.complex);
        })) {
      stage("faces", [&] {
        r.faces = face_areas(ctx, *r.divisor, face_cells, solver.seed);
        r.skeleton->faces = r.faces->faces;
        r.bs = bs_check(sec, *r.skeleton, r.faces->faces);
      });
    }
  } else {
    stage("cells", [&] {
      r.cells = sample_descending_cells(ctx);
      if (r.oracle_homology && !r.critical->degenerate_unresolved()) {
        const auto c = r.critical->counts_by_index(n);
        const auto& b = r.oracle_homology->betti;
        r.morse_inequalities = c[0] >= b[0] && c[1] - c[0] >= b[1] - b[0] &&
                               c[2] - c[1] + c[0] == b[2] - b[1] + b[0];
      }
    });
  }

  if (r.grid_resolution > 0) {
    stage("fates", [&] {
      GridSpec g;
      g.resolution = r.grid_resolution;
      r.fates = classify_grid(ctx, g);
    });
  }

  if (r.skeleton_homology || r.oracle_homology) {
    stage("verdict", [&] { r.verdict = verdict(n, r.skeleton_homology, r.oracle_homology); });
  } else {
    r.errors.push_back({"verdict", "NotApplicable", "no homology source available"});
  }

  // Compare against the scene's declared expectation.
  const Expectation& e = scene.expected;
  r.expectation_checked = e.nonempty || e.components || e.euler || !e.betti.empty() || !e.numeric_mode.empty();
  auto mismatch = [&](const std::string& what) { r.expectation_mismatches.push_back(what); };
  if (e.nonempty && (!r.verdict || r.verdict->nonempty != *e.nonempty)) mismatch("nonempty");
  if (e.components && (!r.verdict || r.verdict->components != *e.components)) mismatch("components");
  if (e.euler && (!r.skeleton || r.skeleton->euler() != *e.euler)) mismatch("euler");
  if (!e.betti.empty() && (!r.oracle_homology || r.oracle_homology->betti != e.betti)) mismatch("betti");
  if (!e.numeric_mode.empty() && e.numeric_mode != r.numeric_mode) mismatch("numeric_mode");
  return r;
}

}  // namespace shadow
