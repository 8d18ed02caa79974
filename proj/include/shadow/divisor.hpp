#pragma once

// Classification of the divisor D = (h)_0 into the catalog cases, and the
// Euler characteristic of the complement.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shadow/section.hpp"

namespace shadow {

enum class DivisorType { Smooth, Reducible, NonReduced };

inline std::string to_string(DivisorType t) {
  switch (t) {
    case DivisorType::Smooth: return "smooth";
    case DivisorType::Reducible: return "reducible";
    case DivisorType::NonReduced: return "non-reduced";
  }
  return "?";
}

inline DivisorType divisor_type_from_string(const std::string& s) {
  if (s == "smooth") return DivisorType::Smooth;
  if (s == "reducible") return DivisorType::Reducible;
  if (s == "non-reduced") return DivisorType::NonReduced;
  throw InvalidInput("unknown divisor type '" + s + "'");
}

struct DivisorDescriptor {
  VarietyDescriptor variety;
  DivisorType type = DivisorType::Smooth;
  // CP1 only: distinct zeros (max-modulus chart) with multiplicities.
  std::vector<ChartPoint> zeros;
  std::vector<int> multiplicities;
  // false when the type was taken from a declaration without a numeric check.
  bool verified = true;

  int distinct_points() const { return static_cast<int>(zeros.size()); }
};

/// Zeros of a CP1 section, clustered into distinct points. Clusters are
/// averaged, which cancels the eps^(1/m) spread of an m-fold root.
inline DivisorDescriptor cp1_zeros(const Section& sec, double cluster_radius = 1e-5) {
  const auto& var = sec.variety();
  const int k = var.factors()[0].level;
  const auto& c = sec.coefficients();
  int deg = k;
  while (deg > 0 && c[deg] == cplx(0.0)) --deg;

  std::vector<ChartPoint> raw;
  if (deg > 0) {
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -c[i] / c[deg];
    const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion, false);
    for (int i = 0; i < deg; ++i) raw.push_back(make_point(0, {es.eigenvalues()[i]}));
  }
  for (int i = deg; i < k; ++i) raw.push_back(make_point(1, {0.0}));

  DivisorDescriptor d{var};
  std::vector<Eigen::Vector3d> sums;
  for (const auto& r : raw) {
    const Eigen::Vector3d x = to_sphere(var, r);
    bool merged = false;
    for (std::size_t j = 0; j < d.zeros.size(); ++j) {
      if (chordal_distance(var, r, d.zeros[j]) < cluster_radius) {
        sums[j] += x;
        d.multiplicities[j] += 1;
        d.zeros[j] = from_sphere(sums[j] / d.multiplicities[j]);
        merged = true;
        break;
      }
    }
    if (!merged) {
      d.zeros.push_back(normalize_chart(var, r));
      d.multiplicities.push_back(1);
      sums.push_back(x);
    }
  }
  for (auto& z : d.zeros) z = normalize_chart(var, z);
  const bool reduced = std::all_of(d.multiplicities.begin(), d.multiplicities.end(),
                                   [](int m) { return m == 1; });
  d.type = reduced ? DivisorType::Smooth : DivisorType::NonReduced;
  return d;
}

namespace detail {

/// Singular points of a plane curve: common zeros of its partials. Square
/// systems dP/dz1 = dP/dz2 = 0 are solved by multistart Newton in each chart
/// and the hits are tested for P = 0.
inline bool plane_curve_has_singular_point(const Section& sec) {
  const auto& var = sec.variety();
  for (int chart = 0; chart < 3; ++chart) {
    for (int i = 0; i < 24; ++i)
      for (int j = 0; j < 24; ++j) {
        const double r1 = 1.05 * std::sqrt((i + 0.5) / 24.0), r2 = 1.05 * std::sqrt((j + 0.5) / 24.0);
        CVec z(2);
        z << std::polar(r1, 2 * M_PI * (0.37 + 7 * i + 3 * j) / 24.0),
            std::polar(r2, 2 * M_PI * (0.11 + 5 * j + 11 * i) / 24.0);
        bool ok = false;
        for (int it = 0; it < 60; ++it) {
          const HoloJet jt = sec.jet({chart, z});
          const CVec step = jt.hess.fullPivLu().solve(-jt.grad);
          if (!finite(step)) break;
          z += step;
          if (z.cwiseAbs().maxCoeff() > 4.0) break;
          if (step.norm() < 1e-14 * (1 + z.norm())) {
            ok = true;
            break;
          }
        }
        if (!ok) continue;
        const HoloJet jt = sec.jet({chart, z});
        const double scale = sec.scale() * std::pow(1 + z.squaredNorm(), 0.5 * var.factors()[0].level);
        if (std::abs(jt.value) < 1e-9 * scale && jt.grad.norm() < 1e-9 * scale) return true;
      }
  }
  return false;
}

}  // namespace detail

/// Classify the divisor of `sec`. `declared` is used only where no numeric
/// classifier exists (quadric bidegrees other than (1,1)).
inline DivisorDescriptor analyze_divisor(const Section& sec,
                                         std::optional<DivisorType> declared = std::nullopt) {
  const auto& var = sec.variety();
  const auto& c = sec.coefficients();
  switch (var.kind()) {
    case VarietyKind::CP1:
      return cp1_zeros(sec);
    case VarietyKind::CP2: {
      DivisorDescriptor d{var};
      const int k = var.factors()[0].level;
      if (k == 1) {
        d.type = DivisorType::Smooth;
      } else if (k == 2) {
        // Basis 1, z1, z2, z1^2, z1 z2, z2^2 -> symmetric form in (Z0, Z1, Z2).
        Eigen::Matrix3cd q;
        q << c[0], c[1] / 2.0, c[2] / 2.0, c[1] / 2.0, c[3], c[4] / 2.0, c[2] / 2.0, c[4] / 2.0, c[5];
        const Eigen::JacobiSVD<Eigen::Matrix3cd> svd(q);
        const auto sv = svd.singularValues();
        const int rank = int(sv[0] > 0) + int(sv[1] > 1e-10 * sv[0]) + int(sv[2] > 1e-10 * sv[0]);
        d.type = rank == 3 ? DivisorType::Smooth
                           : (rank == 2 ? DivisorType::Reducible : DivisorType::NonReduced);
      } else {
        if (detail::plane_curve_has_singular_point(sec)) {
          if (!declared || *declared == DivisorType::Smooth)
            throw OutOfCatalog("degree-" + std::to_string(k) +
                               " plane curve is singular; declare its type");
          d.type = *declared;
          d.verified = false;
        } else {
          d.type = DivisorType::Smooth;
        }
      }
      return d;
    }
    case VarietyKind::QuadricP1xP1: {
      DivisorDescriptor d{var};
      const int a = var.factors()[0].level, b = var.factors()[1].level;
      if (a == 1 && b == 1) {
        // Basis 1, x, y, xy.
        const cplx det = c[0] * c[3] - c[1] * c[2];
        d.type = std::abs(det) > 1e-12 * sec.scale() * sec.scale() ? DivisorType::Smooth
                                                                   : DivisorType::Reducible;
      } else {
        d.type = declared.value_or(DivisorType::Smooth);
        d.verified = false;
      }
      return d;
    }
  }
  throw OutOfCatalog("unknown variety");
}

/// chi(X \ D) = chi(X) - chi(D) for the catalog cases.
inline int complement_euler(const DivisorDescriptor& d) {
  const auto& var = d.variety;
  switch (var.kind()) {
    case VarietyKind::CP1:
      return 2 - d.distinct_points();
    case VarietyKind::CP2: {
      const int k = var.factors()[0].level;
      if (d.type == DivisorType::Smooth) return 1 + (k - 1) * (k - 2);
      if (d.type == DivisorType::Reducible && k == 2) return 0;  // two lines through a point
      if (d.type == DivisorType::NonReduced && k == 2) return 1;  // double line
      throw OutOfCatalog("plane curve of degree " + std::to_string(k) + " of type " +
                         to_string(d.type));
    }
    case VarietyKind::QuadricP1xP1: {
      const int a = var.factors()[0].level, b = var.factors()[1].level;
      if (a < 1 || b < 1) throw OutOfCatalog("divisor on the quadric is not ample");
      if (d.type == DivisorType::Smooth) return 2 + 2 * (a - 1) * (b - 1);
      if (d.type == DivisorType::Reducible && a == 1 && b == 1) return 1;
      throw OutOfCatalog("quadric divisor of bidegree (" + std::to_string(a) + "," +
                         std::to_string(b) + ") of type " + to_string(d.type));
    }
  }
  throw OutOfCatalog("unknown variety");
}

}  // namespace shadow
