#include <gtest/gtest.h>

#include <cmath>

#include "shadow/geometry.hpp"
#include "test_support.hpp"

using namespace shadow;

namespace {

const cplx I(0.0, 1.0);

TEST(Monomials, GradedLexOrder) {
  const auto cp1 = monomial_basis(VarietyDescriptor::cp1(3));
  ASSERT_EQ(cp1.size(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(cp1[i][0], i);

  const auto cp2 = monomial_basis(VarietyDescriptor::cp2(2));
  const std::vector<std::vector<int>> expect{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  EXPECT_EQ(cp2, expect);

  const auto quad = monomial_basis(VarietyDescriptor::quadric(1, 1));
  const std::vector<std::vector<int>> qexpect{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  EXPECT_EQ(quad, qexpect);
  EXPECT_EQ(monomial_basis(VarietyDescriptor::cp2(3)).size(), 10u);
}

TEST(Section, RejectsZeroAndWrongSize) {
  EXPECT_THROW(Section(VarietyDescriptor::cp1(2), {0.0, 0.0, 0.0}), InvalidInput);
  EXPECT_THROW(Section(VarietyDescriptor::cp1(2), {1.0, 0.0}), InvalidInput);
  EXPECT_THROW(VarietyDescriptor::quadric(0, 0), InvalidInput);
}

TEST(Section, FromZerosExpandsProduct) {
  const Section s = Section::from_zeros(3, {1.0, -2.0, I});
  for (cplx z : {cplx(0.3, 0.1), cplx(-1.0, 2.0)}) {
    const cplx expect = (z - 1.0) * (z + 2.0) * (z - I);
    EXPECT_NEAR(std::abs(s.value(make_point(0, {z})) - expect), 0.0, 1e-12);
  }
}

TEST(EvalPhi, WorkedValues) {
  const Section lin(VarietyDescriptor::cp1(1), {0.0, 1.0});
  EXPECT_NEAR(eval_phi(lin, make_point(0, {1.0})), 0.5 * std::log(2.0), 1e-14);

  const Section quad(VarietyDescriptor::cp1(2), {-1.0, 0.0, 1.0});
  EXPECT_NEAR(eval_phi(quad, make_point(0, {I})), 0.0, 1e-14);
  // |p(2)| = 3, 1 + |2|^2 = 5.
  EXPECT_NEAR(eval_phi(quad, make_point(0, {2.0})), -std::log(3.0 / 5.0), 1e-14);
  EXPECT_NEAR(eval_phi(quad, make_point(0, {2.0})), 0.5108256237659907, 1e-12);
}

TEST(EvalPhi, OnDivisorAndBadChart) {
  const Section quad(VarietyDescriptor::cp1(2), {-1.0, 0.0, 1.0});
  EXPECT_THROW(eval_phi(quad, make_point(0, {1.0})), OnDivisor);
  EXPECT_THROW(eval_phi(quad, make_point(0, {1.0 + 1e-14})), OnDivisor);
  EXPECT_THROW(eval_phi(quad, make_point(0, {cplx(NAN, 0.0)})), ChartUndefined);
  EXPECT_THROW(eval_phi(quad, make_point(7, {0.5})), ChartUndefined);
  // z = 0 has no image in chart 1.
  EXPECT_THROW(to_chart(quad.variety(), make_point(0, {0.0}), 1), ChartUndefined);
}

TEST(GradPhi, VanishesOnAntipodalCircle) {
  const Section quad(VarietyDescriptor::cp1(2), {-1.0, 0.0, 1.0});
  EXPECT_LT(grad_norm(quad, make_point(0, {0.5 * I})), 1e-9);
  for (double y : {-3.0, -0.7, 0.0, 0.2, 1.9})
    EXPECT_LT(grad_norm(quad, make_point(0, {y * I})), 1e-9) << y;
  // Infinity is on the circle too.
  EXPECT_LT(grad_norm(quad, make_point(1, {0.0})), 1e-9);
}

TEST(GradPhi, LinearSectionHasNoFiniteCriticalPoint) {
  const Section lin(VarietyDescriptor::cp1(1), {0.0, 1.0});
  for (cplx z : {cplx(0.1), cplx(1.0, 1.0), cplx(-5.0, 0.5)})
    EXPECT_GT(grad_norm(lin, make_point(0, {z})), 1e-3);
  // The minimum of phi sits at z = infinity, where p_1(w) = 1.
  EXPECT_LT(grad_norm(lin, make_point(1, {0.0})), 1e-15);
}

class RandomProbes : public ::testing::TestWithParam<VarietyDescriptor> {};

TEST_P(RandomProbes, DifferentialMatchesFiniteDifferences) {
  Rng rng(42);
  int probes = 0;
  while (probes < 100) {
    const Section sec = test::random_section(GetParam(), rng);
    const ChartPoint p = sample_uniform(GetParam(), rng);
    if (relative_norm(sec, p) < 1e-3) continue;
    ++probes;
    const PhiJet j = phi_jet(sec, p);
    const RVec fd = test::fd_gradient([&](const ChartPoint& q) { return eval_phi(sec, q); }, p);
    EXPECT_LT((fd - j.dphi).norm(), 1e-6 * std::max(1.0, j.dphi.norm()));

    // Riemannian gradient is G^{-1} dphi.
    const RVec v = to_real(metric_gradient(sec.variety(), p, j));
    const RVec ref = metric_matrix(sec.variety(), p).ldlt().solve(j.dphi);
    EXPECT_LT((v - ref).norm(), 1e-9 * std::max(1.0, ref.norm()));
  }
}

TEST_P(RandomProbes, HessianMatchesFiniteDifferences) {
  Rng rng(7);
  int probes = 0;
  while (probes < 100) {
    const Section sec = test::random_section(GetParam(), rng);
    const ChartPoint p = sample_uniform(GetParam(), rng);
    if (relative_norm(sec, p) < 1e-3) continue;
    ++probes;
    const RMat h = phi_jet(sec, p).hess;
    const RMat fd = test::fd_jacobian([&](const ChartPoint& q) { return phi_jet(sec, q).dphi; }, p);
    EXPECT_LT((h - fd).norm(), 1e-5 * std::max(1.0, h.norm()));
    EXPECT_LT((h - h.transpose()).norm(), 1e-9);
    const RMat on = hessian_phi(sec, p);
    EXPECT_LT((on - on.transpose()).norm(), 1e-9);
  }
}

TEST_P(RandomProbes, ChartIndependence) {
  Rng rng(11);
  const auto& var = GetParam();
  for (int probe = 0; probe < 50; ++probe) {
    const Section sec = test::random_section(var, rng);
    const ChartPoint p = sample_uniform(var, rng);
    if (relative_norm(sec, p) < 1e-3) continue;
    const double phi = eval_phi(sec, p);
    for (int c = 0; c < var.chart_count(); ++c) {
      ChartPoint q;
      try {
        q = to_chart(var, p, c);
      } catch (const ChartUndefined&) {
        continue;
      }
      if (q.coords.cwiseAbs().maxCoeff() > 50.0) continue;
      EXPECT_NEAR(eval_phi(sec, q), phi, 1e-10);
      EXPECT_NEAR(grad_norm(sec, q), grad_norm(sec, p), 1e-8 * std::max(1.0, grad_norm(sec, p)));
    }
  }
}

TEST_P(RandomProbes, ScaleEquivariance) {
  Rng rng(5);
  const cplx lambda = std::polar(3.7, 1.1);
  for (int probe = 0; probe < 30; ++probe) {
    const Section sec = test::random_section(GetParam(), rng);
    const Section big = sec.scaled(lambda);
    const ChartPoint p = sample_uniform(GetParam(), rng);
    if (relative_norm(sec, p) < 1e-3) continue;
    EXPECT_NEAR(eval_phi(big, p), eval_phi(sec, p) - std::log(std::abs(lambda)), 1e-12);
    EXPECT_LT((grad_phi(big, p) - grad_phi(sec, p)).norm(), 1e-11 * (1 + grad_phi(sec, p).norm()));
    EXPECT_LT((hessian_phi(big, p) - hessian_phi(sec, p)).norm(), 1e-10);
    EXPECT_NEAR(relative_norm(big, p) / relative_norm(sec, p), 1.0, 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Catalog, RandomProbes,
                         ::testing::Values(VarietyDescriptor::cp1(3), VarietyDescriptor::cp2(3),
                                           VarietyDescriptor::quadric(1, 2)),
                         [](const auto& info) { return info.param.name(); });

TEST(HessianPhi, FermatCubicOriginIsMinimum) {
  const Section fermat(VarietyDescriptor::cp2(3), {1, 0, 0, 0, 0, 0, 1, 0, 0, 1});
  const ChartPoint o = make_point(0, {0.0, 0.0});
  EXPECT_NEAR(eval_phi(fermat, o), 0.0, 1e-15);
  const Eigen::SelfAdjointEigenSolver<RMat> es(hessian_phi(fermat, o));
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
}

TEST(FsArea, WholeSphereAndDisks) {
  const auto var = VarietyDescriptor::cp1(1);
  const auto whole = fs_area([](const ChartPoint&) { return true; }, var, 1000);
  EXPECT_DOUBLE_EQ(whole.value, 1.0);

  auto disk = [&](double r) {
    return [&var, r](const ChartPoint& p) {
      const ChartPoint q = normalize_chart(var, p);
      if (q.chart == 0) return std::abs(q.coords[0]) <= r;
      return std::abs(q.coords[0]) > 0.0 && 1.0 / std::abs(q.coords[0]) <= r;
    };
  };
  for (double r : {1.0, 0.5, 2.0}) {
    const auto est = fs_area(disk(r), var, 200000, 3);
    EXPECT_NEAR(est.value, r * r / (1 + r * r), 4.0 * est.stderr_) << r;
    EXPECT_GT(est.stderr_, 0.0);
  }
}

TEST(ConnectionPhase, ConstantPathIsZero) {
  const Section s = Section::from_zeros(2, {1.0, -1.0});
  const ChartPoint p = make_point(0, {0.3 * I});
  EXPECT_EQ(connection_phase_increment(s, {p, p, p}), 0.0);
}

TEST(ConnectionPhase, ArgumentPrincipleOnCenteredCircles) {
  // |z| = R encloses FS area R^2 / (1 + R^2) around 0.
  const Section s = Section::from_zeros(3, {cplx(0.2, 0.1), cplx(-0.4, 0.3), cplx(3.0, 1.0)});
  for (double r : {0.1, 1.0, 2.0, 5.0}) {
    int m = 0;
    for (cplx a : {cplx(0.2, 0.1), cplx(-0.4, 0.3), cplx(3.0, 1.0)}) m += std::abs(a) < r;
    const double area = r * r / (1 + r * r);
    const double got = connection_phase_increment(s, test::circle(0.0, r, 400));
    EXPECT_NEAR(got, 2 * M_PI * (m - 3 * area), 1e-3) << r;
  }
}

TEST(ConnectionPhase, OffCenterLoopAgainstQuadratureAndMonteCarlo) {
  const Section s = Section::from_zeros(2, {cplx(0.9, -0.2), cplx(-2.0, 0.0)});
  const cplx c(0.6, 0.1);
  const double rho = 0.7;
  const double area = test::disk_area_quadrature(c, rho);
  const double got = connection_phase_increment(s, test::circle(c, rho, 800));
  EXPECT_NEAR(got, 2 * M_PI * (1 - 2 * area), 1e-3);

  const auto var = VarietyDescriptor::cp1(2);
  const auto mc = fs_area(
      [&](const ChartPoint& p) {
        const ChartPoint q = to_chart(var, p, 0);
        return std::abs(q.coords[0] - c) <= rho;
      },
      var, 400000, 9);
  EXPECT_NEAR(got, 2 * M_PI * (1 - 2 * mc.value), 2 * M_PI * 2 * 4 * mc.stderr_);
}

TEST(ConnectionPhase, CurvatureOnSmallSquares) {
  // A zero-free square of side a: phase = -2 pi k * (FS area of the square).
  const Section s = Section::from_zeros(3, {cplx(5.0, 5.0), cplx(-5.0, 4.0), cplx(0.0, -6.0)});
  for (cplx corner : {cplx(0.0, 0.0), cplx(0.7, -0.3), cplx(-1.2, 0.8)}) {
    const double a = 0.05;
    std::vector<ChartPoint> loop;
    const cplx v[] = {corner, corner + a, corner + cplx(a, a), corner + cplx(0, a), corner};
    for (int e = 0; e < 4; ++e)
      for (int t = 0; t < 50; ++t)
        loop.push_back(make_point(0, {v[e] + (v[e + 1] - v[e]) * (t / 50.0)}));
    loop.push_back(make_point(0, {corner}));
    const double area = test::square_area_quadrature(corner, a);
    EXPECT_NEAR(connection_phase_increment(s, loop) / (-2 * M_PI), 3 * area, 1e-6);
  }
}

TEST(ConnectionPhase, AntipodalCircleIsFlat) {
  // Along the imaginary axis p(iy) = -(1 + y^2) has constant phase and the
  // connection form vanishes, so transport is identically zero.
  const Section s(VarietyDescriptor::cp1(2), {-1.0, 0.0, 1.0});
  std::vector<ChartPoint> path;
  for (int i = 0; i <= 200; ++i) path.push_back(make_point(0, {cplx(0.0, -2.0 + 0.02 * i)}));
  const auto t = connection_phase_transport(s, path);
  EXPECT_LT(t.max_deviation, 1e-12);
}

TEST(Charts, ChordalDistanceMatchesSphere) {
  const auto var = VarietyDescriptor::cp1(1);
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const ChartPoint a = sample_uniform(var, rng), b = sample_uniform(var, rng);
    EXPECT_NEAR(chordal_distance(var, a, b), (to_sphere(var, a) - to_sphere(var, b)).norm(), 1e-12);
    EXPECT_LT(chordal_distance(var, a, from_sphere(to_sphere(var, a))), 1e-12);
  }
  EXPECT_NEAR(chordal_distance(var, make_point(0, {0.0}), make_point(1, {0.0})), 1.0, 1e-15);
}

}  // namespace
