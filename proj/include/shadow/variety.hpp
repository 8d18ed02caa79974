#pragma once

// Catalog varieties as products of projective spaces, their standard affine
// atlases, and chart-aware point handling.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shadow/errors.hpp"

namespace shadow {

using cplx = std::complex<double>;

// Small fixed-capacity dense types; every catalog variety has n <= 2.
using RVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;
using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;
using CVec = Eigen::Matrix<cplx, Eigen::Dynamic, 1, 0, 4, 1>;
using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;

enum class VarietyKind { CP1, CP2, QuadricP1xP1 };

/// One projective factor P^dim carrying O(level).
struct Factor {
  int dim;
  int level;
};

class VarietyDescriptor {
 public:
  static VarietyDescriptor cp1(int k) { return {VarietyKind::CP1, {{1, k}}}; }
  static VarietyDescriptor cp2(int k) { return {VarietyKind::CP2, {{2, k}}}; }
  static VarietyDescriptor quadric(int a, int b) {
    return {VarietyKind::QuadricP1xP1, {{1, a}, {1, b}}};
  }

  VarietyKind kind() const { return kind_; }
  const std::vector<Factor>& factors() const { return factors_; }

  /// Complex dimension n.
  int dim() const {
    int n = 0;
    for (const auto& f : factors_) n += f.dim;
    return n;
  }
  int real_dim() const { return 2 * dim(); }
  int homogeneous_size() const {
    int s = 0;
    for (const auto& f : factors_) s += f.dim + 1;
    return s;
  }
  int chart_count() const {
    int c = 1;
    for (const auto& f : factors_) c *= f.dim + 1;
    return c;
  }

  /// Per-factor index of the homogeneous coordinate set to 1 in `chart`.
  std::vector<int> chart_indices(int chart) const {
    if (chart < 0 || chart >= chart_count())
      throw ChartUndefined("chart id " + std::to_string(chart) + " out of range");
    std::vector<int> idx(factors_.size());
    for (std::size_t f = 0; f < factors_.size(); ++f) {
      idx[f] = chart % (factors_[f].dim + 1);
      chart /= factors_[f].dim + 1;
    }
    return idx;
  }
  int chart_id(const std::vector<int>& idx) const {
    int id = 0, radix = 1;
    for (std::size_t f = 0; f < factors_.size(); ++f) {
      id += idx[f] * radix;
      radix *= factors_[f].dim + 1;
    }
    return id;
  }

  /// Homogeneous variable index of each chart coordinate.
  std::vector<int> chart_variables(int chart) const {
    const auto idx = chart_indices(chart);
    std::vector<int> vars;
    int offset = 0;
    for (std::size_t f = 0; f < factors_.size(); ++f) {
      for (int m = 0; m <= factors_[f].dim; ++m)
        if (m != idx[f]) vars.push_back(offset + m);
      offset += factors_[f].dim + 1;
    }
    return vars;
  }

  /// Factor owning each chart coordinate (same for every chart).
  std::vector<int> coordinate_factor() const {
    std::vector<int> owner;
    for (std::size_t f = 0; f < factors_.size(); ++f)
      for (int m = 0; m < factors_[f].dim; ++m) owner.push_back(static_cast<int>(f));
    return owner;
  }

  /// Total symplectic volume with each line of area 1.
  double total_volume() const {
    double v = 1.0;
    for (const auto& f : factors_) v /= std::tgamma(f.dim + 1.0);
    return v;
  }

  std::string name() const {
    switch (kind_) {
      case VarietyKind::CP1: return "CP1";
      case VarietyKind::CP2: return "CP2";
      case VarietyKind::QuadricP1xP1: return "QuadricP1xP1";
    }
    return "?";
  }

  std::vector<int> levels() const {
    std::vector<int> l;
    for (const auto& f : factors_) l.push_back(f.level);
    return l;
  }

  bool operator==(const VarietyDescriptor& o) const {
    if (kind_ != o.kind_ || factors_.size() != o.factors_.size()) return false;
    for (std::size_t i = 0; i < factors_.size(); ++i)
      if (factors_[i].dim != o.factors_[i].dim || factors_[i].level != o.factors_[i].level)
        return false;
    return true;
  }

 private:
  VarietyDescriptor(VarietyKind kind, std::vector<Factor> factors)
      : kind_(kind), factors_(std::move(factors)) {
    int total = 0;
    for (const auto& f : factors_) {
      if (f.level < 0) throw InvalidInput("bundle level must be non-negative");
      total += f.level;
    }
    if (total == 0) throw InvalidInput("bundle level must be positive");
  }

  VarietyKind kind_;
  std::vector<Factor> factors_;
};

struct ChartPoint {
  int chart = 0;
  CVec coords;
};

inline ChartPoint make_point(int chart, std::initializer_list<cplx> c) {
  ChartPoint p;
  p.chart = chart;
  p.coords.resize(static_cast<Eigen::Index>(c.size()));
  Eigen::Index i = 0;
  for (const auto& v : c) p.coords[i++] = v;
  return p;
}

/// Interleaved real layout (Re c0, Im c0, Re c1, ...).
inline RVec to_real(const CVec& c) {
  RVec r(2 * c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    r[2 * i] = c[i].real();
    r[2 * i + 1] = c[i].imag();
  }
  return r;
}

inline CVec to_complex(const RVec& r) {
  CVec c(r.size() / 2);
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = {r[2 * i], r[2 * i + 1]};
  return c;
}

inline bool finite(const CVec& c) {
  for (Eigen::Index i = 0; i < c.size(); ++i)
    if (!std::isfinite(c[i].real()) || !std::isfinite(c[i].imag())) return false;
  return true;
}

inline CVec to_homogeneous(const VarietyDescriptor& var, const ChartPoint& p) {
  if (p.coords.size() != var.dim()) throw InvalidInput("chart point has wrong dimension");
  if (!finite(p.coords)) throw ChartUndefined("non-finite chart coordinates");
  const auto idx = var.chart_indices(p.chart);
  CVec z(var.homogeneous_size());
  int offset = 0, q = 0;
  for (std::size_t f = 0; f < var.factors().size(); ++f) {
    const int d = var.factors()[f].dim;
    for (int m = 0; m <= d; ++m) z[offset + m] = (m == idx[f]) ? cplx(1.0) : p.coords[q++];
    offset += d + 1;
  }
  return z;
}

/// Express a homogeneous point in the given chart.
inline ChartPoint from_homogeneous(const VarietyDescriptor& var, const CVec& z, int chart) {
  const auto idx = var.chart_indices(chart);
  ChartPoint p;
  p.chart = chart;
  p.coords.resize(var.dim());
  int offset = 0, q = 0;
  for (std::size_t f = 0; f < var.factors().size(); ++f) {
    const int d = var.factors()[f].dim;
    double scale = 0.0;
    for (int m = 0; m <= d; ++m) scale = std::max(scale, std::abs(z[offset + m]));
    const cplx pivot = z[offset + idx[f]];
    if (std::abs(pivot) <= 1e-300 * std::max(scale, 1e-300) || std::abs(pivot) == 0.0)
      throw ChartUndefined("point lies outside chart " + std::to_string(chart));
    for (int m = 0; m <= d; ++m)
      if (m != idx[f]) p.coords[q++] = z[offset + m] / pivot;
    offset += d + 1;
  }
  if (!finite(p.coords)) throw ChartUndefined("point lies outside chart " + std::to_string(chart));
  return p;
}

/// Chart in which every factor's largest homogeneous coordinate is the pivot.
inline int best_chart(const VarietyDescriptor& var, const CVec& z) {
  std::vector<int> idx(var.factors().size());
  int offset = 0;
  for (std::size_t f = 0; f < var.factors().size(); ++f) {
    const int d = var.factors()[f].dim;
    int arg = 0;
    for (int m = 1; m <= d; ++m)
      if (std::abs(z[offset + m]) > std::abs(z[offset + arg])) arg = m;
    idx[f] = arg;
    offset += d + 1;
  }
  return var.chart_id(idx);
}

inline ChartPoint to_chart(const VarietyDescriptor& var, const ChartPoint& p, int chart) {
  if (chart == p.chart) return p;
  return from_homogeneous(var, to_homogeneous(var, p), chart);
}

/// Re-express in the max-modulus chart, so all coordinates have modulus <= 1.
inline ChartPoint normalize_chart(const VarietyDescriptor& var, const ChartPoint& p) {
  const CVec z = to_homogeneous(var, p);
  return from_homogeneous(var, z, best_chart(var, z));
}

/// Chordal distance, combined over factors in quadrature. For CP1 it is the
/// chord length on the Riemann sphere of diameter 1.
inline double chordal_distance(const VarietyDescriptor& var, const ChartPoint& a,
                               const ChartPoint& b) {
  const CVec za = to_homogeneous(var, a);
  const CVec zb = to_homogeneous(var, b);
  double sum = 0.0;
  int offset = 0;
  for (const auto& f : var.factors()) {
    const int len = f.dim + 1;
    const auto va = za.segment(offset, len);
    const auto vb = zb.segment(offset, len);
    const double na = va.squaredNorm(), nb = vb.squaredNorm();
    // |a x b|^2 via Lagrange identity keeps precision for nearby points.
    double cross = 0.0;
    for (int i = 0; i < len; ++i)
      for (int j = i + 1; j < len; ++j) cross += std::norm(va[i] * vb[j] - va[j] * vb[i]);
    sum += cross / (na * nb);
    offset += len;
  }
  return std::sqrt(sum);
}

/// Point of the unit-diameter Riemann sphere for a CP1 point.
inline Eigen::Vector3d to_sphere(const VarietyDescriptor& var, const ChartPoint& p) {
  if (var.kind() != VarietyKind::CP1) throw InvalidInput("to_sphere requires CP1");
  const CVec z = to_homogeneous(var, p);
  const double n = z.squaredNorm();
  const cplx w = z[1] * std::conj(z[0]);
  return {w.real() / n, w.imag() / n, 0.5 * (std::norm(z[1]) - std::norm(z[0])) / n};
}

inline ChartPoint from_sphere(const Eigen::Vector3d& x) {
  // Inverse of to_sphere for CP1, up to the sphere radius 1/2.
  const Eigen::Vector3d u = x.normalized() * 0.5;
  CVec z(2);
  if (u.z() <= 0) {
    z[0] = 0.5 - u.z();
    z[1] = {u.x(), u.y()};
  } else {
    z[0] = {u.x(), -u.y()};
    z[1] = 0.5 + u.z();
  }
  const auto var = VarietyDescriptor::cp1(1);
  return from_homogeneous(var, z, best_chart(var, z));
}

}  // namespace shadow
