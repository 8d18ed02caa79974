#pragma once

// Holomorphic sections of O(k) (or O(a,b)) stored as multihomogeneous
// polynomials, with value/gradient/Hessian jets in any affine chart.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "shadow/variety.hpp"

namespace shadow {

/// Exponent tuples over the chart-0 affine coordinates, in graded-lex order:
/// total degree ascending, then lexicographically descending (the earlier
/// coordinate carries the larger exponent first). For CP1 this is
/// 1, z, z^2, ...; for CP2 degree 2 it is 1, z1, z2, z1^2, z1 z2, z2^2; for
/// the quadric bidegree (1,1) it is 1, x, y, xy.
inline std::vector<std::vector<int>> monomial_basis(const VarietyDescriptor& var) {
  const auto owner = var.coordinate_factor();
  const int n = var.dim();
  std::vector<std::vector<int>> out;
  std::vector<int> e(n, 0);
  // Odometer over all exponent tuples bounded by the levels.
  int max_level = 0;
  for (const auto& f : var.factors()) max_level = std::max(max_level, f.level);
  while (true) {
    std::vector<int> per_factor(var.factors().size(), 0);
    for (int q = 0; q < n; ++q) per_factor[owner[q]] += e[q];
    bool ok = true;
    for (std::size_t f = 0; f < per_factor.size(); ++f)
      ok = ok && per_factor[f] <= var.factors()[f].level;
    if (ok) out.push_back(e);
    int q = 0;
    while (q < n && ++e[q] > max_level) e[q++] = 0;
    if (q == n) break;
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    int da = 0, db = 0;
    for (int v : a) da += v;
    for (int v : b) db += v;
    if (da != db) return da < db;
    return a > b;
  });
  return out;
}

/// Value, chart gradient and chart Hessian of a holomorphic function.
struct HoloJet {
  cplx value;
  CVec grad;
  CMat hess;
};

class Section {
 public:
  Section(VarietyDescriptor var, std::vector<cplx> coefficients)
      : var_(std::move(var)), coeffs_(std::move(coefficients)) {
    const auto basis = monomial_basis(var_);
    if (basis.size() != coeffs_.size())
      throw InvalidInput("expected " + std::to_string(basis.size()) + " coefficients, got " +
                         std::to_string(coeffs_.size()));
    scale_ = 0.0;
    for (const auto& c : coeffs_) {
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
        throw InvalidInput("non-finite coefficient");
      scale_ = std::max(scale_, std::abs(c));
    }
    if (scale_ == 0.0) throw InvalidInput("section has no non-zero coefficient");

    const auto owner = var_.coordinate_factor();
    for (std::size_t t = 0; t < basis.size(); ++t) {
      if (coeffs_[t] == cplx(0.0)) continue;
      std::vector<int> h(var_.homogeneous_size(), 0);
      std::vector<int> used(var_.factors().size(), 0);
      int offset = 0, q = 0;
      for (std::size_t f = 0; f < var_.factors().size(); ++f) {
        const int d = var_.factors()[f].dim;
        for (int m = 1; m <= d; ++m) {
          h[offset + m] = basis[t][q];
          used[f] += basis[t][q];
          ++q;
        }
        h[offset] = var_.factors()[f].level - used[f];
        offset += d + 1;
      }
      terms_.push_back({std::move(h), coeffs_[t]});
    }
  }

  /// CP1 section vanishing at the given finite points: lead * prod (z - a).
  /// Fewer zeros than k places the remainder at infinity.
  static Section from_zeros(int k, const std::vector<cplx>& zeros, cplx lead = 1.0) {
    if (static_cast<int>(zeros.size()) > k) throw InvalidInput("more zeros than the level");
    std::vector<cplx> c(k + 1, 0.0);
    c[0] = lead;
    int deg = 0;
    for (const auto& a : zeros) {
      for (int i = deg + 1; i >= 1; --i) c[i] = c[i - 1] - a * c[i];
      c[0] = -a * c[0];
      ++deg;
    }
    return Section(VarietyDescriptor::cp1(k), std::move(c));
  }

  const VarietyDescriptor& variety() const { return var_; }
  const std::vector<cplx>& coefficients() const { return coeffs_; }
  /// Largest coefficient modulus; thresholds on |h| are taken relative to it.
  double scale() const { return scale_; }

  Section scaled(cplx lambda) const {
    auto c = coeffs_;
    for (auto& v : c) v *= lambda;
    return Section(var_, std::move(c));
  }

  /// Jet in the chart coordinates of `p` (derivatives up to second order).
  HoloJet jet(const ChartPoint& p) const {
    const int n = var_.dim();
    const CVec z = to_homogeneous(var_, p);
    const auto vars = var_.chart_variables(p.chart);
    const int nh = var_.homogeneous_size();

    int max_level = 0;
    for (const auto& f : var_.factors()) max_level = std::max(max_level, f.level);
    std::vector<std::vector<cplx>> pw(nh, std::vector<cplx>(max_level + 1, 1.0));
    for (int i = 0; i < nh; ++i)
      for (int e = 1; e <= max_level; ++e) pw[i][e] = pw[i][e - 1] * z[i];

    HoloJet j{0.0, CVec::Zero(n), CMat::Zero(n, n)};
    for (const auto& term : terms_) {
      const auto& e = term.exps;
      cplx rest = term.coeff;
      for (int i = 0; i < nh; ++i) rest *= pw[i][e[i]];
      j.value += rest;
      for (int a = 0; a < n; ++a) {
        const int va = vars[a];
        if (e[va] == 0) continue;
        cplx da = term.coeff * static_cast<double>(e[va]);
        for (int i = 0; i < nh; ++i) da *= (i == va) ? pw[i][e[i] - 1] : pw[i][e[i]];
        j.grad[a] += da;
        for (int b = 0; b < n; ++b) {
          const int vb = vars[b];
          if (vb == va) {
            if (e[va] < 2) continue;
            cplx d2 = term.coeff * static_cast<double>(e[va] * (e[va] - 1));
            for (int i = 0; i < nh; ++i) d2 *= (i == va) ? pw[i][e[i] - 2] : pw[i][e[i]];
            j.hess(a, b) += d2;
          } else {
            if (e[vb] == 0) continue;
            cplx d2 = term.coeff * static_cast<double>(e[va] * e[vb]);
            for (int i = 0; i < nh; ++i) {
              if (i == va || i == vb)
                d2 *= pw[i][e[i] - 1];
              else
                d2 *= pw[i][e[i]];
            }
            j.hess(a, b) += d2;
          }
        }
      }
    }
    return j;
  }

  cplx value(const ChartPoint& p) const {
    const CVec z = to_homogeneous(var_, p);
    cplx v = 0.0;
    for (const auto& term : terms_) {
      cplx t = term.coeff;
      for (int i = 0; i < z.size(); ++i)
        for (int k = 0; k < term.exps[i]; ++k) t *= z[i];
      v += t;
    }
    return v;
  }

 private:
  struct Term {
    std::vector<int> exps;  // homogeneous exponents
    cplx coeff;
  };

  VarietyDescriptor var_;
  std::vector<cplx> coeffs_;
  std::vector<Term> terms_;
  double scale_ = 1.0;
};

}  // namespace shadow
