#pragma once

// Fubini-Study geometry of the catalog varieties and the potential
// phi = -ln|h|, where |h| is the hermitian norm |P(Z)| / prod |Z_f|^{k_f}.
//
// The Kahler form is (i / 2pi) ddbar ln(1 + |z|^2) per factor, so every line
// has area 1 and the Chern curvature of O(k) is k times the Kahler form
// (times 2pi i). The Riemannian metric is g = (1/pi) Re(h_jk dz_j dzbar_k)
// with h_jk = ((1+s) delta_jk - conj(z_j) z_k) / (1+s)^2, s = |z|^2.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "shadow/section.hpp"
#include "shadow/util.hpp"

namespace shadow {

/// |h| (relative to the largest coefficient) below this is on the divisor.
inline constexpr double kDivisorFloor = 1e-12;

/// Everything the solvers need at one point, computed from a single jet.
struct PhiJet {
  double phi;       // -ln|h|
  double rel_norm;  // |h| / section.scale()
  RVec dphi;        // chart differential, interleaved (x, y) layout
  RMat hess;        // Euclidean chart Hessian
  CVec dbar2;       // 2 * dbar(phi) = phi_x + i phi_y per coordinate
};

namespace detail {

inline std::vector<double> factor_s(const VarietyDescriptor& var, const CVec& c) {
  const auto owner = var.coordinate_factor();
  std::vector<double> s(var.factors().size(), 0.0);
  for (Eigen::Index q = 0; q < c.size(); ++q) s[owner[q]] += std::norm(c[q]);
  return s;
}

}  // namespace detail

inline double relative_norm(const Section& sec, const ChartPoint& p) {
  const auto& var = sec.variety();
  const auto s = detail::factor_s(var, p.coords);
  double log_den = 0.0;
  for (std::size_t f = 0; f < s.size(); ++f)
    log_den += 0.5 * var.factors()[f].level * std::log1p(s[f]);
  return std::abs(sec.value(p)) / sec.scale() * std::exp(-log_den);
}

inline double eval_phi(const Section& sec, const ChartPoint& p) {
  const auto& var = sec.variety();
  const cplx v = sec.value(p);
  const auto s = detail::factor_s(var, p.coords);
  double log_den = 0.0;
  for (std::size_t f = 0; f < s.size(); ++f)
    log_den += 0.5 * var.factors()[f].level * std::log1p(s[f]);
  const double phi = -std::log(std::abs(v)) + log_den;
  if (!(std::abs(v) > 0.0) || phi + std::log(sec.scale()) > -std::log(kDivisorFloor))
    throw OnDivisor("point is on the divisor");
  return phi;
}

inline PhiJet phi_jet(const Section& sec, const ChartPoint& p) {
  const auto& var = sec.variety();
  const int n = var.dim();
  const auto owner = var.coordinate_factor();
  const HoloJet j = sec.jet(p);
  const auto s = detail::factor_s(var, p.coords);

  PhiJet out;
  double log_den = 0.0;
  for (std::size_t f = 0; f < s.size(); ++f)
    log_den += 0.5 * var.factors()[f].level * std::log1p(s[f]);
  const double absv = std::abs(j.value);
  out.phi = -std::log(absv) + log_den;
  out.rel_norm = absv / sec.scale() * std::exp(-log_den);
  if (!(absv > 0.0) || out.rel_norm < kDivisorFloor) throw OnDivisor("point is on the divisor");

  const CVec g = j.grad / j.value;
  out.dbar2.resize(n);
  out.dphi.resize(2 * n);
  for (int q = 0; q < n; ++q) {
    const int f = owner[q];
    out.dbar2[q] = -std::conj(g[q]) + double(var.factors()[f].level) * p.coords[q] / (1.0 + s[f]);
    out.dphi[2 * q] = out.dbar2[q].real();
    out.dphi[2 * q + 1] = out.dbar2[q].imag();
  }

  const CMat c = j.hess / j.value - g * g.transpose();
  out.hess = RMat::Zero(2 * n, 2 * n);
  for (int q = 0; q < n; ++q)
    for (int r = 0; r < n; ++r) {
      out.hess(2 * q, 2 * r) = -c(q, r).real();
      out.hess(2 * q, 2 * r + 1) = c(q, r).imag();
      out.hess(2 * q + 1, 2 * r) = c(q, r).imag();
      out.hess(2 * q + 1, 2 * r + 1) = c(q, r).real();
    }
  const RVec u = to_real(p.coords);
  for (int a = 0; a < 2 * n; ++a)
    for (int b = 0; b < 2 * n; ++b) {
      const int f = owner[a / 2];
      if (owner[b / 2] != f) continue;
      const double k = var.factors()[f].level;
      const double den = 1.0 + s[f];
      out.hess(a, b) += k * ((a == b ? 1.0 / den : 0.0) - 2.0 * u[a] * u[b] / (den * den));
    }
  return out;
}

/// Real 2n x 2n Fubini-Study metric tensor in chart coordinates.
inline RMat metric_matrix(const VarietyDescriptor& var, const ChartPoint& p) {
  const int n = var.dim();
  const auto owner = var.coordinate_factor();
  const auto s = detail::factor_s(var, p.coords);
  CMat h = CMat::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      if (owner[j] != owner[k]) continue;
      const double sf = s[owner[j]];
      h(j, k) = ((j == k ? 1.0 + sf : 0.0) - std::conj(p.coords[j]) * p.coords[k]) /
                ((1.0 + sf) * (1.0 + sf));
    }
  RMat gm(2 * n, 2 * n);
  for (int a = 0; a < 2 * n; ++a)
    for (int b = 0; b < 2 * n; ++b) {
      const cplx va = (a % 2 == 0) ? cplx(1.0) : cplx(0.0, 1.0);
      const cplx vb = (b % 2 == 0) ? cplx(1.0) : cplx(0.0, 1.0);
      gm(a, b) = (va * h(a / 2, b / 2) * std::conj(vb)).real() / M_PI;
    }
  return gm;
}

/// Riemannian gradient from a jet, as a complex chart vector.
inline CVec metric_gradient(const VarietyDescriptor& var, const ChartPoint& p, const PhiJet& j) {
  const int n = var.dim();
  const auto owner = var.coordinate_factor();
  const auto s = detail::factor_s(var, p.coords);
  CVec v(n);
  for (int q = 0; q < n; ++q) {
    const int f = owner[q];
    cplx acc = j.dbar2[q];
    for (int r = 0; r < n; ++r)
      if (owner[r] == f) acc += p.coords[q] * std::conj(p.coords[r]) * j.dbar2[r];
    v[q] = M_PI * (1.0 + s[f]) * acc;
  }
  return v;
}

inline CVec grad_phi(const Section& sec, const ChartPoint& p) {
  return metric_gradient(sec.variety(), p, phi_jet(sec, p));
}

/// |grad phi| in the Fubini-Study metric.
inline double grad_norm(const VarietyDescriptor& var, const ChartPoint& p, const PhiJet& j) {
  const RVec v = to_real(metric_gradient(var, p, j));
  return std::sqrt(std::max(0.0, j.dphi.dot(v)));
}

inline double grad_norm(const Section& sec, const ChartPoint& p) {
  return grad_norm(sec.variety(), p, phi_jet(sec, p));
}

/// Hessian in a metric-orthonormal frame: L^{-1} H L^{-T} with G = L L^T.
inline RMat orthonormal_hessian(const VarietyDescriptor& var, const ChartPoint& p,
                                const RMat& chart_hess) {
  const Eigen::LLT<RMat> llt(metric_matrix(var, p));
  const RMat l = llt.matrixL();
  const RMat li = l.inverse();
  RMat h = li * chart_hess * li.transpose();
  return 0.5 * (h + h.transpose());
}

inline RMat hessian_phi(const Section& sec, const ChartPoint& p) {
  return orthonormal_hessian(sec.variety(), p, phi_jet(sec, p).hess);
}

/// Phase of h measured against parallel transport along a path.
struct PhaseTransport {
  double total = 0.0;          // radians
  double max_deviation = 0.0;  // max |partial sum| along the path
};

/// Sum of (change in arg h) plus the integral of the unitary connection
/// form alpha = -sum_f k_f Im(conj(z) dz) / (1 + |z|^2) along the path. A
/// closed loop around m zeros enclosing FS area A gives 2 pi (m - k A).
inline PhaseTransport connection_phase_transport(const Section& sec,
                                                 const std::vector<ChartPoint>& path) {
  const auto& var = sec.variety();
  const auto owner = var.coordinate_factor();
  PhaseTransport out;
  auto alpha_density = [&](const CVec& c, const CVec& d) {
    const auto s = detail::factor_s(var, c);
    double acc = 0.0;
    for (Eigen::Index q = 0; q < c.size(); ++q) {
      const int f = owner[q];
      acc -= var.factors()[f].level * (std::conj(c[q]) * d[q]).imag() / (1.0 + s[f]);
    }
    return acc;
  };
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    ChartPoint a = normalize_chart(var, path[i]);
    ChartPoint b;
    try {
      b = to_chart(var, path[i + 1], a.chart);
    } catch (const ChartUndefined&) {
      b = normalize_chart(var, path[i + 1]);
      a = to_chart(var, path[i], b.chart);
    }
    const double len = chordal_distance(var, a, b);
    const int m = std::max(1, static_cast<int>(std::ceil(len / 2e-3)));
    const CVec delta = (b.coords - a.coords) / double(m);
    ChartPoint cur = a;
    cplx prev = sec.value(cur);
    if (relative_norm(sec, cur) < kDivisorFloor) throw OnDivisor("path touches the divisor");
    for (int t = 0; t < m; ++t) {
      ChartPoint mid{a.chart, a.coords + (t + 0.5) * delta};
      ChartPoint nxt{a.chart, a.coords + double(t + 1) * delta};
      const cplx val = sec.value(nxt);
      if (relative_norm(sec, nxt) < kDivisorFloor) throw OnDivisor("path touches the divisor");
      const double darg = std::arg(val / prev);
      const double conn = (alpha_density(cur.coords, delta) +
                           4.0 * alpha_density(mid.coords, delta) +
                           alpha_density(nxt.coords, delta)) /
                          6.0;
      out.total += darg + conn;
      out.max_deviation = std::max(out.max_deviation, std::abs(out.total));
      prev = val;
      cur = nxt;
    }
  }
  return out;
}

inline double connection_phase_increment(const Section& sec, const std::vector<ChartPoint>& path) {
  return connection_phase_transport(sec, path).total;
}

/// Point distributed by the normalized Fubini-Study volume.
inline ChartPoint sample_uniform(const VarietyDescriptor& var, Rng& rng) {
  CVec z(var.homogeneous_size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = {rng.normal(), rng.normal()};
  return from_homogeneous(var, z, best_chart(var, z));
}

struct AreaEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

/// Monte-Carlo symplectic volume of {x : inside(x)}.
inline AreaEstimate fs_area(const std::function<bool(const ChartPoint&)>& inside,
                            const VarietyDescriptor& var, std::size_t samples = 200000,
                            std::uint64_t seed = 1) {
  Rng rng(seed);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples; ++i)
    if (inside(sample_uniform(var, rng))) ++hits;
  const double p = double(hits) / double(samples);
  const double total = var.total_volume();
  return {p * total, total * std::sqrt(p * (1.0 - p) / double(samples))};
}

}  // namespace shadow
