// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include "shadow/report.hpp"
#include "test_support.hpp"

using namespace shadow;

namespace {

struct Line {
  int id;
  std::string title;
  bool pass = true;
  std::string detail;
};

std::vector<Line> lines;

Line& criterion(int id, const std::string& title) {
  lines.push_back({id, title, true, ""});
  return lines.back();
}

void check(Line& l, bool ok, const std::string& what) {
  if (!ok) {
    l.pass = false;
    l.detail += (l.detail.empty() ? "" : "; ") + what;
  }
}

std::string scene_path(const std::string& name) { return std::string(SHADOW_SCENES_DIR) + "/" + name + ".json"; }

std::map<std::string, RunResult> runs;

const RunResult& run(const std::string& name) {
  auto it = runs.find(name);
  if (it == runs.end()) it = runs.emplace(name, run_scene(load_scene(scene_path(name)))).first;
  return it->second;
}

RunResult run_zeros(const std::string& name, const std::vector<cplx>& zeros) {
  json z = json::array();
  for (cplx a : zeros) z.push_back({a.real(), a.imag()});
  const json doc = {{"schema", kSceneSchema},
                    {"name", name},
                    {"variety", {{"kind", "cp1"}, {"levels", {int(zeros.size())}}}},
                    {"section", {{"zeros", z}}}};
  return run_scene(parse_scene(doc));
}

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

double point_segment(const Eigen::Vector3d& p, const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const Eigen::Vector3d ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / std::max(ab.squaredNorm(), 1e-300), 0.0, 1.0);
  return (a + t * ab - p).norm();
}

double polyline_distance(const Eigen::Vector3d& p, const std::vector<Eigen::Vector3d>& line) {
  double d = 1e300;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) d = std::min(d, point_segment(p, line[i], line[i + 1]));
  return d;
}

const std::vector<std::string> kCp1Scenes{"cp1_k1",          "cp1_k2_nonreduced", "cp1_k2_antipodal",
                                          "cp1_k2_offset",   "cp1_k3_symmetric",  "cp1_k3_generic",
                                          "cp1_k3_double",   "cp1_k4_generic"};
const std::vector<std::string> kSurfaceScenes{"quadric_irreducible", "quadric_reducible", "cp2_cubic_fermat",
                                              "cp2_line",            "cp2_conic",         "cp2_conic_reducible"};

void theorem_empty_cases() {
  Line& l = criterion(1, "Theorem forward direction, empty cases (CP1 k=1, CP1 z^2, reducible quadric)");
  for (const std::string name : {"cp1_k1", "cp1_k2_nonreduced", "quadric_reducible"}) {
    const RunResult& r = run(name);
    const int n = r.scene.variety.dim();
    check(l, r.errors.empty(), name + ": pipeline errors");
    check(l, r.oracle_homology && r.oracle_homology->trivial_in(n), name + ": oracle H_n != 0");
    check(l, r.verdict && !r.verdict->nonempty && r.verdict->components == 0, name + ": verdict not empty");
    if (n == 1) {
      check(l, r.skeleton && r.skeleton->one_skeleton_empty(), name + ": skeleton has 1-cells");
    } else {
      check(l, r.critical && r.critical->counts_by_index(n)[n] == 0 && r.critical->bott_circles.empty() &&
                   !r.critical->degenerate_unresolved(),
            name + ": critical points of index n present");
    }
  }
}

void antipodal_circle() {
  Line& l = criterion(2, "Theorem reverse direction, CP1 level 2: one Bott circle, b1 = 1, Hausdorff < 1e-4");
  const RunResult& r = run("cp1_k2_antipodal");
  if (!r.skeleton || !r.skeleton_homology || !r.oracle_homology || !r.verdict) {
    check(l, false, "pipeline incomplete");
    return;
  }
  check(l, r.skeleton->bott_cycles.size() == 1 && r.skeleton->edges.empty() && r.skeleton->vertices.empty(),
        "skeleton is not a single Bott circle");
  check(l, r.skeleton_homology->rank(1) == 1 && r.oracle_homology->rank(1) == 1, "b1 != 1");
  check(l, r.verdict->nonempty && r.verdict->components == 1, "verdict");
  if (r.skeleton->bott_cycles.size() != 1) return;
  const auto& var = r.scene.variety;
  // Exact circle {|h| = 1} = {Re z = 0} together with infinity.
  std::vector<Eigen::Vector3d> exact, computed;
  for (int i = 0; i <= 20000; ++i) {
    const double a = M_PI * i / 20000;
    CVec z(2);
    z << std::cos(a), cplx(0.0, std::sin(a));
    exact.push_back(to_sphere(var, from_homogeneous(var, z, best_chart(var, z))));
  }
  for (const auto& p : r.skeleton->bott_cycles[0].samples) computed.push_back(to_sphere(var, p));
  double h = 0.0;
  for (const auto& p : computed) h = std::max(h, polyline_distance(p, exact));
  for (const auto& p : exact) h = std::max(h, polyline_distance(p, computed));
  check(l, h < 1e-4, "Hausdorff distance " + fmt(h));
  l.detail += (l.detail.empty() ? "" : "; ") + std::string("Hausdorff ") + fmt(h);
}

std::vector<RunResult> level3_runs;

void level3_graphs() {
  Line& l = criterion(3, "CP1 level 3, symmetric and 5 random triples: chi = -1, b1 = 2, b0 = 1, theta or bouquet");
  level3_runs.push_back(run("cp1_k3_symmetric"));
  Rng rng(20261015);
  for (int t = 0; t < 5; ++t) {
    std::vector<cplx> z;
    for (int i = 0; i < 3; ++i) z.emplace_back(1.5 * rng.normal(), 1.5 * rng.normal());
    level3_runs.push_back(run_zeros("random_triple_" + std::to_string(t), z));
  }
  std::string shapes;
  for (const auto& r : level3_runs) {
    const std::string& name = r.scene.name;
    if (!r.skeleton || !r.skeleton_homology) {
      check(l, false, name + ": no skeleton");
      continue;
    }
    const auto& g = *r.skeleton;
    const std::string shape = skeleton_shape(g);
    shapes += (shapes.empty() ? "" : ",") + shape;
    check(l, g.euler() == -1, name + ": chi = " + std::to_string(g.euler()));
    check(l, r.skeleton_homology->rank(0) == 1 && r.skeleton_homology->rank(1) == 2, name + ": betti");
    check(l, shape == "theta" || shape == "bouquet", name + ": shape " + shape);
    check(l, g.bott_cycles.empty() && (g.vertices.size() == 2 ? g.edges.size() == 3 : g.edges.size() == 2),
          name + ": V/E counts");
  }
  l.detail += (l.detail.empty() ? "" : "; ") + std::string("shapes ") + shapes;
}

std::vector<const RunResult*> all_cp1_runs() {
  std::vector<const RunResult*> out;
  for (const auto& name : kCp1Scenes) out.push_back(&run(name));
  for (const auto& r : level3_runs)
    if (r.scene.name.rfind("random_triple_", 0) == 0) out.push_back(&r);
  return out;
}

void bohr_sommerfeld() {
  Line& l = criterion(4, "Bohr-Sommerfeld: |k*area - m_face| < 1e-2, sum m_face = k; symmetric areas within 3 sigma");
  double worst = 0.0;
  for (const RunResult* r : all_cp1_runs()) {
    const std::string& name = r->scene.name;
    if (!r->faces || !r->bs) {
      check(l, false, name + ": no face estimate");
      continue;
    }
    const int k = r->bs->level;
    check(l, !r->faces->low_confidence, name + ": low confidence");
    long sum = 0;
    for (const auto& f : r->bs->faces) {
      const double dev = std::abs(f.k_area - f.zero_count);
      worst = std::max(worst, dev);
      check(l, dev < 1e-2, name + ": face " + std::to_string(f.label) + " deviates by " + fmt(dev));
      sum += f.zero_count;
    }
    check(l, sum == k, name + ": sum of zero counts != k");
  }
  for (const auto& [name, k] : {std::pair<std::string, int>{"cp1_k2_antipodal", 2}, {"cp1_k3_symmetric", 3}}) {
    const RunResult& r = run(name);
    if (!r.faces) continue;
    for (const auto& f : r.faces->faces)
      check(l, std::abs(f.area - 1.0 / k) <= 3 * f.stderr_,
            name + ": area " + fmt(f.area) + " outside 3 sigma of 1/" + std::to_string(k));
  }
  l.detail += (l.detail.empty() ? "" : "; ") + std::string("max |k*area - m| = ") + fmt(worst);
}

void special_phase() {
  Line& l = criterion(5, "Special phase: transport deviation < 1e-2 rad along every edge and Bott cycle");
  double worst = 0.0;
  int paths = 0;
  for (const RunResult* r : all_cp1_runs()) {
    if (!r->bs) {
      check(l, false, r->scene.name + ": no phase report");
      continue;
    }
    for (const auto& p : r->bs->phases) {
      ++paths;
      worst = std::max(worst, p.max_deviation);
      check(l, p.max_deviation < 1e-2, r->scene.name + ": " + p.what + " deviation " + fmt(p.max_deviation));
    }
  }
  l.detail += (l.detail.empty() ? "" : "; ") + std::to_string(paths) + " paths, max deviation " + fmt(worst);
}

void morse_bound() {
  Line& l = criterion(6, "Morse index <= n on all scenes; Fermat cubic minimum at the chart origin with phi = 0");
  std::vector<std::string> names = kCp1Scenes;
  names.insert(names.end(), kSurfaceScenes.begin(), kSurfaceScenes.end());
  int points = 0;
  for (const auto& name : names) {
    const RunResult& r = run(name);
    if (!r.critical) {
      check(l, false, name + ": no critical set");
      continue;
    }
    for (const auto& c : r.critical->records) {
      ++points;
      check(l, c.morse_index <= r.scene.variety.dim(), name + ": index " + std::to_string(c.morse_index));
    }
  }
  const RunResult& f = run("cp2_cubic_fermat");
  bool origin = false;
  if (f.critical)
    for (const auto* c : f.critical->isolated())
      if (c->morse_index == 0 && c->location.chart == 0 && c->location.coords.norm() < 1e-8 &&
          std::abs(c->phi) < 1e-8)
        origin = true;
  check(l, origin, "Fermat origin minimum not found");
  l.detail += (l.detail.empty() ? "" : "; ") + std::to_string(points) + " critical records checked";
}

void numerical_hygiene() {
  Line& l = criterion(7, "Numerical hygiene: gradient vs finite differences, d^2 = 0, Smith normal form chain");
  Rng rng(7);
  double worst = 0.0;
  for (const auto& var : {VarietyDescriptor::cp1(3), VarietyDescriptor::cp2(3), VarietyDescriptor::quadric(1, 2)}) {
    int probes = 0;
    while (probes < 100) {
      const Section sec = test::random_section(var, rng);
      const ChartPoint p = normalize_chart(var, sample_uniform(var, rng));
      if (relative_norm(sec, p) < 1e-3) continue;
      ++probes;
      const RVec g = phi_jet(sec, p).dphi;
      const RVec fd = test::fd_gradient([&](const ChartPoint& q) { return eval_phi(sec, q); }, p);
      const double rel = (g - fd).norm() / std::max(g.norm(), 1e-300);
      worst = std::max(worst, rel);
    }
  }
  check(l, worst < 1e-6, "gradient relative error " + fmt(worst));

  int complexes = 0;
  for (const RunResult* r : all_cp1_runs())
    if (r->complex) {
      ++complexes;
      check(l, r->complex->boundary_squared_zero(), r->scene.name + ": d^2 != 0");
    }

  int snf_ok = 0;
  for (int t = 0; t < 50; ++t) {
    const int rows = 1 + int(rng.uniform() * 6), cols = 1 + int(rng.uniform() * 6);
    IntMatrix<BigInt> a(rows, cols);
    for (auto& x : a.data) x = BigInt(int(std::floor(rng.uniform() * 13)) - 6);
    const auto s = smith_normal_form(a);
    bool ok = multiply(multiply(s.U, a), s.V) == s.D;
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j)
        if (i != j && s.D(i, j) != 0) ok = false;
    const auto d = s.diagonal();
    for (std::size_t i = 0; i + 1 < d.size(); ++i)
      if (d[i] <= 0 || d[i + 1] % d[i] != 0) ok = false;
    snf_ok += ok;
  }
  check(l, snf_ok == 50, std::to_string(50 - snf_ok) + " Smith forms failed");
  l.detail += (l.detail.empty() ? "" : "; ") + std::string("max gradient rel. error ") + fmt(worst) + ", " +
              std::to_string(complexes) + " complexes, " + std::to_string(snf_ok) + "/50 Smith forms";
}

void oracle_concordance() {
  Line& l = criterion(8, "Oracle concordance: skeleton homology equals the analytic oracle on every n = 1 scene");
  for (const RunResult* r : all_cp1_runs()) {
    const std::string& name = r->scene.name;
    check(l, !r->inconsistent, name + ": Inconsistent");
    check(l, r->skeleton_homology && r->oracle_homology && r->skeleton_homology->betti == r->oracle_homology->betti &&
                 r->skeleton_homology->torsion == r->oracle_homology->torsion,
          name + ": homology differs");
  }
  for (const auto& name : kSurfaceScenes) check(l, !run(name).inconsistent, name + ": Inconsistent");
}

void clifford_cases() {
  Line& l = criterion(9, "CP2 line and smooth conic: oracle H2 = 0, verdict empty");
  for (const std::string name : {"cp2_line", "cp2_conic"}) {
    const RunResult& r = run(name);
    check(l, r.divisor && r.divisor->type == DivisorType::Smooth, name + ": divisor not smooth");
    check(l, r.oracle_homology && r.oracle_homology->rank(2) == 0 && r.oracle_homology->trivial_in(2),
          name + ": H2 != 0");
    check(l, r.verdict && !r.verdict->nonempty, name + ": verdict not empty");
  }
}

void reproducibility() {
  Line& l = criterion(10, "Reproducibility: fixed-seed reruns give identical report.json up to timings");
  for (const std::string name : {"cp1_k3_generic", "cp2_cubic_fermat", "quadric_irreducible"}) {
    const std::string a = strip_timings(make_report(run(name))).dump();
    const std::string b = strip_timings(make_report(run_scene(load_scene(scene_path(name))))).dump();
    check(l, a == b, name + ": reports differ");
  }
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  theorem_empty_cases();
  antipodal_circle();
  level3_graphs();
  bohr_sommerfeld();
  special_phase();
  morse_bound();
  numerical_hygiene();
  oracle_concordance();
  clifford_cases();
  reproducibility();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  int failed = 0;
  for (const auto& l : lines) {
    std::cout << (l.pass ? "PASS" : "FAIL") << "  " << l.id << "  " << l.title;
    if (!l.detail.empty()) std::cout << "  [" << l.detail << "]";
    std::cout << "\n";
    failed += !l.pass;
  }
  std::cout << (lines.size() - failed) << "/" << lines.size() << " criteria passed in " << fmt(secs) << " s\n";
  return failed == 0 ? 0 : 1;
}
