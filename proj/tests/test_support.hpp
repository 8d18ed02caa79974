#pragma once

// Test-only oracles: finite differences, quadrature of the Fubini-Study
// density, random inputs. Nothing here calls into the solvers under test.

#include <cmath>
#include <functional>
#include <vector>

#include "shadow/geometry.hpp"

namespace shadow::test {

inline Section random_section(const VarietyDescriptor& var, Rng& rng) {
  std::vector<cplx> c(monomial_basis(var).size());
  for (auto& v : c) v = {rng.normal(), rng.normal()};
  return Section(var, std::move(c));
}

inline RVec fd_gradient(const std::function<double(const ChartPoint&)>& f, const ChartPoint& p,
                        double h = 1e-6) {
  const RVec u = to_real(p.coords);
  RVec g(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    RVec a = u, b = u;
    a[i] += h;
    b[i] -= h;
    g[i] = (f({p.chart, to_complex(a)}) - f({p.chart, to_complex(b)})) / (2 * h);
  }
  return g;
}

inline RMat fd_jacobian(const std::function<RVec(const ChartPoint&)>& f, const ChartPoint& p,
                        double h = 1e-6) {
  const RVec u = to_real(p.coords);
  RMat j(u.size(), u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    RVec a = u, b = u;
    a[i] += h;
    b[i] -= h;
    j.col(i) = (f({p.chart, to_complex(a)}) - f({p.chart, to_complex(b)})) / (2 * h);
  }
  return j;
}

/// Counter-clockwise closed polyline |z - c| = r in chart 0.
inline std::vector<ChartPoint> circle(cplx c, double r, int segments) {
  std::vector<ChartPoint> pts;
  for (int i = 0; i <= segments; ++i)
    pts.push_back(make_point(0, {c + std::polar(r, 2 * M_PI * (i % segments) / segments)}));
  return pts;
}

/// Gauss-Legendre nodes and weights on [0, 1].
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    x[i] = 0.5 * (t + 1);
    w[i] = 1.0 / ((1 - t * t) * dp * dp);
  }
}

inline double fs_density(cplx z) {
  const double d = 1 + std::norm(z);
  return 1.0 / (M_PI * d * d);
}

inline double disk_area_quadrature(cplx c, double rho) {
  std::vector<double> x, w;
  gauss_legendre(80, x, w);
  const int nt = 512;
  double acc = 0.0;
  for (int i = 0; i < 80; ++i) {
    const double r = rho * x[i];
    double ring = 0.0;
    for (int j = 0; j < nt; ++j) ring += fs_density(c + std::polar(r, 2 * M_PI * j / nt));
    acc += w[i] * r * ring * (2 * M_PI / nt);
  }
  return acc * rho;
}

inline double square_area_quadrature(cplx corner, double a) {
  std::vector<double> x, w;
  gauss_legendre(40, x, w);
  double acc = 0.0;
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 40; ++j) acc += w[i] * w[j] * fs_density(corner + cplx(a * x[i], a * x[j]));
  return acc * a * a;
}

}  // namespace shadow::test
