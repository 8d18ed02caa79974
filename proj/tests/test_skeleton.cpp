#include <gtest/gtest.h>

#include <cmath>

#include "shadow/skeleton.hpp"
#include "test_support.hpp"

using namespace shadow;

namespace {

struct Built {
  Section sec;
  DivisorDescriptor div;
  CriticalSet crit;
  std::vector<Separatrix> seps;
  SkeletonGraph graph;
  explicit Built(Section s)
      : sec(std::move(s)), div(analyze_divisor(sec)), crit(find_critical_points(sec)) {
    seps = trace_separatrices(context());
    graph = build_skeleton(sec, crit, seps);
  }
  FlowContext context() const { return {sec, crit, div.zeros, {}, {}}; }
};

constexpr int kCells = 60;

TEST(Skeleton, ThetaForCubeRoots) {
  const Built b(Section(VarietyDescriptor::cp1(3), {-1.0, 0.0, 0.0, 1.0}));
  EXPECT_EQ(b.graph.vertices.size(), 2u);
  EXPECT_EQ(b.graph.edges.size(), 3u);
  EXPECT_EQ(b.graph.euler(), -1);
  EXPECT_EQ(b.graph.components, 1);
}

TEST(Skeleton, GenericTriplesAreThetaOrBouquet) {
  Rng rng(17);
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<cplx> z;
    for (int i = 0; i < 3; ++i) z.emplace_back(1.5 * rng.normal(), 1.5 * rng.normal());
    const Built b(Section::from_zeros(3, z));
    const auto v = b.graph.vertices.size(), e = b.graph.edges.size();
    EXPECT_TRUE((v == 2 && e == 3) || (v == 1 && e == 2)) << "V=" << v << " E=" << e;
    EXPECT_EQ(b.graph.euler(), -1);
    EXPECT_EQ(b.graph.components, 1);
    EXPECT_TRUE(b.graph.bott_cycles.empty());
  }
}

TEST(Skeleton, AntipodalIsOneCycle) {
  const Built b(Section(VarietyDescriptor::cp1(2), {-1.0, 0.0, 1.0}));
  EXPECT_TRUE(b.graph.vertices.empty());
  EXPECT_TRUE(b.graph.edges.empty());
  ASSERT_EQ(b.graph.bott_cycles.size(), 1u);
  const GraphCells cells = graph_cells(b.graph);
  EXPECT_EQ(cells.nodes, 1);
  ASSERT_EQ(cells.arcs.size(), 1u);
  EXPECT_EQ(cells.arcs[0].first, cells.arcs[0].second);
  EXPECT_EQ(b.graph.components, 1);
}

TEST(Skeleton, SingleZeroGivesAPoint) {
  const Built b(Section(VarietyDescriptor::cp1(1), {0.0, 1.0}));
  EXPECT_EQ(b.graph.vertices.size(), 1u);
  EXPECT_TRUE(b.graph.one_skeleton_empty());
}

TEST(Skeleton, DanglingEdgesAreRejected) {
  const Built b(Section(VarietyDescriptor::cp1(3), {-1.0, 0.0, 0.0, 1.0}));
  auto broken = b.seps;
  broken[0].endpoints[1] = broken[0].saddle;  // a saddle is not a vertex
  EXPECT_THROW(build_skeleton(b.sec, b.crit, broken), DanglingEdge);

  broken = b.seps;
  broken[1].complete = false;
  EXPECT_THROW(build_skeleton(b.sec, b.crit, broken), DanglingEdge);

  broken = b.seps;
  broken[2].polyline.back() = make_point(0, {cplx(0.5, 0.5)});
  EXPECT_THROW(build_skeleton(b.sec, b.crit, broken), DanglingEdge);
}

TEST(Faces, StratifiedSphereIsUniform) {
  // Fraction of samples in a chart disk against quadrature of the FS density.
  const auto pts = stratified_sphere(80, 2, 3);
  for (double rho : {0.5, 1.0, 2.0}) {
    int inside = 0;
    for (const auto& p : pts) {
      const double r = p.chart == 0 ? std::abs(p.coords[0]) : 1.0 / std::abs(p.coords[0]);
      inside += r < rho;
    }
    EXPECT_NEAR(double(inside) / pts.size(), test::disk_area_quadrature(0.0, rho), 5e-3);
  }
}

TEST(Faces, SymmetricAreasAreEqual) {
  for (int k : {2, 3}) {
    std::vector<cplx> c(k + 1, 0.0);
    c[0] = -1.0;
    c[k] = 1.0;
    const Built b(Section(VarietyDescriptor::cp1(k), c));
    const FaceEstimate est = face_areas(b.context(), b.div, kCells);
    ASSERT_EQ(est.faces.size(), std::size_t(k));
    EXPECT_FALSE(est.low_confidence);
    double total = 0.0;
    for (const auto& f : est.faces) {
      EXPECT_NEAR(f.area, 1.0 / k, 3 * f.stderr_ + 1e-12) << "k=" << k;
      total += f.area;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Faces, BohrSommerfeldCountsZeros) {
  // The double zero's face carries two units of area.
  const Built b(Section(VarietyDescriptor::cp1(3), {0.0, 0.0, -1.0, 1.0}));
  const FaceEstimate est = face_areas(b.context(), b.div, kCells);
  const BSReport rep = bs_check(b.sec, b.graph, est.faces);
  EXPECT_TRUE(rep.pass());
  ASSERT_EQ(rep.faces.size(), 2u);
  for (const auto& f : rep.faces) {
    EXPECT_EQ(f.nearest_integer, f.zero_count);
    EXPECT_LT(std::abs(f.k_area - f.zero_count), 1e-2);
  }
  for (const auto& p : rep.phases) EXPECT_LT(p.max_deviation, kPhaseTolerance);
}

TEST(Faces, WrongLevelFailsIntegrality) {
  const Built b(Section::from_zeros(3, {cplx(0.3, 0.2), cplx(-1.1, 0.5), cplx(0.4, -1.7)}));
  FaceEstimate est = face_areas(b.context(), b.div, kCells);
  EXPECT_TRUE(bs_check(b.sec, b.graph, est.faces).pass());
  for (auto& f : est.faces) f.area *= 0.9;
  EXPECT_FALSE(bs_check(b.sec, b.graph, est.faces).integrality_pass);
}

}  // namespace
