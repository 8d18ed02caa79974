#pragma once

// Critical points of phi on M \ D: multistart damped Newton on d(phi) = 0,
// Hessian classification, and predictor-corrector continuation of
// Morse-Bott critical circles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shadow/divisor.hpp"
#include "shadow/geometry.hpp"
#include "shadow/util.hpp"

namespace shadow {

enum class CriticalKind { Isolated, BottCircleMember };

struct CriticalRecord {
  ChartPoint location;
  double phi = 0.0;
  std::vector<double> spectrum;  // orthonormal-frame Hessian, ascending
  int morse_index = 0;
  int null_dim = 0;
  CriticalKind kind = CriticalKind::Isolated;
  int cluster_id = -1;
  double residual = 0.0;  // |grad phi| at location
};

struct BottCircle {
  int cluster_id = -1;
  double phi = 0.0;
  std::vector<ChartPoint> samples;  // closed: front() repeated at back()
};

struct SolverControls {
  int starts_per_chart = 0;  // 0 -> 512 * 3^n
  std::uint64_t seed = 1;
  double merge_radius = 1e-6;
  double tolerance = 1e-9;  // |grad phi| acceptance
  double tau = 1e-6;        // null eigenvalue threshold
  double continuation_step = 1e-2;
  double closing_radius = 1e-4;
  int max_newton_iterations = 80;
  int max_continuation_steps = 20000;

  int starts(int n) const {
    if (starts_per_chart > 0) return starts_per_chart;
    int s = 512;
    for (int i = 0; i < n; ++i) s *= 3;
    return s;
  }
};

struct CriticalSet {
  std::vector<CriticalRecord> records;  // isolated points, then one representative per circle
  std::vector<BottCircle> bott_circles;
  int starts = 0;
  int non_converged = 0;
  // Degenerate critical points that are not circles (DegenerateUnresolved):
  // a capped set of representatives plus the number of converged starts.
  std::vector<CriticalRecord> unresolved;
  int unresolved_hits = 0;
  std::vector<std::string> diagnostics;

  bool degenerate_unresolved() const { return !unresolved.empty(); }

  std::vector<const CriticalRecord*> isolated() const {
    std::vector<const CriticalRecord*> out;
    for (const auto& r : records)
      if (r.kind == CriticalKind::Isolated) out.push_back(&r);
    return out;
  }

  std::vector<int> counts_by_index(int n) const {
    std::vector<int> c(2 * n + 1, 0);
    for (const auto& r : records)
      if (r.kind == CriticalKind::Isolated) ++c[r.morse_index];
    return c;
  }

  const CriticalRecord* cluster(int id) const {
    for (const auto& r : records)
      if (r.cluster_id == id) return &r;
    return nullptr;
  }

  const BottCircle* circle(int id) const {
    for (const auto& c : bott_circles)
      if (c.cluster_id == id) return &c;
    return nullptr;
  }
};

namespace detail {

/// Minimal-norm solution of H x = b, dropping eigenvalues below rel * max.
inline RVec pseudo_solve(const RMat& h, const RVec& b, double rel = 1e-10) {
  const Eigen::SelfAdjointEigenSolver<RMat> es(h);
  const RVec& lam = es.eigenvalues();
  const double cut = rel * lam.cwiseAbs().maxCoeff();
  RVec y = es.eigenvectors().transpose() * b;
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = std::abs(lam[i]) > cut ? y[i] / lam[i] : 0.0;
  return es.eigenvectors() * y;
}

inline ChartPoint shifted(const ChartPoint& p, const RVec& du) {
  return {p.chart, to_complex(to_real(p.coords) + du)};
}

inline ChartPoint rechart_if_far(const VarietyDescriptor& var, const ChartPoint& p,
                                 double limit = 1.5) {
  return p.coords.cwiseAbs().maxCoeff() > limit ? normalize_chart(var, p) : p;
}

}  // namespace detail

struct NewtonOutcome {
  bool converged = false;
  ChartPoint point;
  double residual = 0.0;
};

/// Damped Newton on d(phi) = 0 with merit |grad phi|; steps use the
/// pseudo-inverse so degenerate (Bott) critical sets are approached along
/// their normal directions.
inline NewtonOutcome newton_critical(const Section& sec, const ChartPoint& start,
                                     const SolverControls& ctl) {
  const auto& var = sec.variety();
  NewtonOutcome out;
  ChartPoint p = normalize_chart(var, start);
  PhiJet j;
  double merit;
  try {
    j = phi_jet(sec, p);
    merit = grad_norm(var, p, j);
  } catch (const Error&) {
    return out;
  }
  int polish = 0;
  for (int it = 0; it < ctl.max_newton_iterations; ++it) {
    if (merit < ctl.tolerance) {
      // A couple of extra steps drive the residual to rounding level.
      if (polish++ >= 2 || merit < 1e-14) {
        out = {true, p, merit};
        return out;
      }
    }
    RVec step = detail::pseudo_solve(j.hess, -j.dphi);
    const double len = step.norm();
    if (len > 0.5) step *= 0.5 / len;
    bool accepted = false;
    for (double t = 1.0; t > 1e-6; t *= 0.5) {
      try {
        const ChartPoint q = detail::shifted(p, t * step);
        const PhiJet jq = phi_jet(sec, q);
        const double mq = grad_norm(var, q, jq);
        if (mq < (1.0 - 1e-4 * t) * merit || (merit < ctl.tolerance && mq <= merit * 1.01)) {
          p = detail::rechart_if_far(var, q);
          j = (p.chart == q.chart) ? jq : phi_jet(sec, p);
          merit = grad_norm(var, p, j);
          accepted = true;
          break;
        }
      } catch (const Error&) {
      }
    }
    if (!accepted) break;
  }
  out.point = p;
  out.residual = merit;
  out.converged = merit < ctl.tolerance;
  return out;
}

/// Fill spectrum / index / null dimension / phi for a converged point.
inline CriticalRecord classify_critical(const Section& sec, const ChartPoint& p, double residual,
                                        double tau) {
  const auto& var = sec.variety();
  CriticalRecord r;
  r.location = normalize_chart(var, p);
  const PhiJet j = phi_jet(sec, r.location);
  r.phi = j.phi;
  r.residual = residual;
  const Eigen::SelfAdjointEigenSolver<RMat> es(orthonormal_hessian(var, r.location, j.hess));
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()[i];
    r.spectrum.push_back(lam);
    if (lam < -tau) ++r.morse_index;
    if (std::abs(lam) <= tau) ++r.null_dim;
  }
  return r;
}

/// Unit chart direction spanning the Hessian's eigenvalue of smallest
/// modulus (the circle tangent at a Bott point), or the most negative one.
inline RVec hessian_direction(const Section& sec, const ChartPoint& p, bool most_negative) {
  const auto& var = sec.variety();
  const PhiJet j = phi_jet(sec, p);
  const Eigen::LLT<RMat> llt(metric_matrix(var, p));
  const RMat l = llt.matrixL();
  const RMat li = l.inverse();
  RMat h = li * j.hess * li.transpose();
  h = 0.5 * (h + h.transpose());
  const Eigen::SelfAdjointEigenSolver<RMat> es(h);
  Eigen::Index pick = 0;
  if (!most_negative) es.eigenvalues().cwiseAbs().minCoeff(&pick);
  // Orthonormal-frame vector v maps to chart vector L^{-T} v.
  RVec d = li.transpose() * es.eigenvectors().col(pick);
  return d / d.norm();
}

/// Trace the critical circle through `start` by predictor-corrector.
inline std::optional<BottCircle> continue_circle(const Section& sec, const ChartPoint& start,
                                                 const SolverControls& ctl) {
  const auto& var = sec.variety();
  const double h = ctl.continuation_step;
  SolverControls corr = ctl;
  corr.tolerance = 1e-11;
  BottCircle c;
  const ChartPoint origin = normalize_chart(var, start);
  c.samples.push_back(origin);
  c.phi = eval_phi(sec, origin);
  ChartPoint cur = origin;
  std::optional<ChartPoint> prev;
  for (int step = 0; step < ctl.max_continuation_steps; ++step) {
    RVec t = hessian_direction(sec, cur, false);
    if (prev) {
      const ChartPoint pv = to_chart(var, *prev, cur.chart);
      if (t.dot(to_real(cur.coords) - to_real(pv.coords)) < 0) t = -t;
    }
    ChartPoint pred = detail::shifted(cur, h * t);
    bool closing = false;
    if (step >= 3) {
      try {
        const ChartPoint o = to_chart(var, origin, cur.chart);
        const RVec gap = to_real(o.coords) - to_real(cur.coords);
        if (gap.norm() < 1.5 * h && gap.dot(t) > 0) {
          pred = o;
          closing = true;
        }
      } catch (const ChartUndefined&) {
      }
    }
    const NewtonOutcome nc = newton_critical(sec, pred, corr);
    if (!nc.converged) return std::nullopt;
    if (closing) {
      if (chordal_distance(var, nc.point, origin) < ctl.closing_radius) {
        c.samples.push_back(origin);
        return c;
      }
      return std::nullopt;
    }
    prev = cur;
    cur = detail::rechart_if_far(var, nc.point);
    c.samples.push_back(cur);
  }
  return std::nullopt;
}

/// Chordal distance from a point to the closest circle sample.
inline double distance_to_samples(const VarietyDescriptor& var, const ChartPoint& p,
                                  const std::vector<ChartPoint>& samples) {
  double best = 1e300;
  for (const auto& s : samples) best = std::min(best, chordal_distance(var, p, s));
  return best;
}

inline std::vector<ChartPoint> multistart_points(const VarietyDescriptor& var, int per_chart,
                                                 std::uint64_t seed) {
  const int n = var.dim();
  Rng rng(seed);
  std::vector<double> shift(2 * n);
  for (auto& s : shift) s = rng.uniform();
  std::vector<ChartPoint> pts;
  pts.reserve(std::size_t(per_chart) * var.chart_count());
  for (int chart = 0; chart < var.chart_count(); ++chart)
    for (int i = 0; i < per_chart; ++i) {
      const auto u = halton(std::uint64_t(i), 2 * n, shift);
      ChartPoint p;
      p.chart = chart;
      p.coords.resize(n);
      for (int q = 0; q < n; ++q) p.coords[q] = std::polar(std::sqrt(u[2 * q]), 2 * M_PI * u[2 * q + 1]);
      pts.push_back(p);
    }
  return pts;
}

inline constexpr std::size_t kMaxUnresolvedKept = 32;

inline CriticalSet find_critical_points(const Section& sec, const SolverControls& ctl = {}) {
  const auto& var = sec.variety();
  const int n = var.dim();
  const auto starts = multistart_points(var, ctl.starts(n), ctl.seed);

  std::vector<NewtonOutcome> runs(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) { runs[i] = newton_critical(sec, starts[i], ctl); });

  CriticalSet set;
  set.starts = static_cast<int>(starts.size());
  std::vector<CriticalRecord> isolated, bott, degenerate;
  auto merge_into = [&](std::vector<CriticalRecord>& pool, CriticalRecord&& r) {
    for (auto& q : pool)
      if (chordal_distance(var, q.location, r.location) < ctl.merge_radius) {
        if (r.residual < q.residual) q = std::move(r);
        return;
      }
    pool.push_back(std::move(r));
  };
  for (const auto& run : runs) {
    if (!run.converged) {
      ++set.non_converged;
      continue;
    }
    CriticalRecord r = classify_critical(sec, run.point, run.residual, ctl.tau);
    if (r.null_dim == 0)
      merge_into(isolated, std::move(r));
    else if (r.null_dim == 1)
      merge_into(bott, std::move(r));
    else {
      ++set.unresolved_hits;
      if (degenerate.size() < kMaxUnresolvedKept) merge_into(degenerate, std::move(r));
    }
  }

  std::stable_sort(isolated.begin(), isolated.end(), [](const auto& a, const auto& b) {
    if (a.morse_index != b.morse_index) return a.morse_index < b.morse_index;
    return a.phi < b.phi;
  });
  int next_id = 0;
  for (auto& r : isolated) {
    r.cluster_id = next_id++;
    set.records.push_back(r);
  }

  // Group Bott points into circles; each circle keeps its best-residual member.
  std::vector<bool> assigned(bott.size(), false);
  for (std::size_t i = 0; i < bott.size(); ++i) {
    if (assigned[i]) continue;
    auto circle = continue_circle(sec, bott[i].location, ctl);
    if (!circle) {
      set.diagnostics.push_back("DegenerateUnresolved: circle continuation failed from a point with phi=" +
                                std::to_string(bott[i].phi));
      set.unresolved.push_back(bott[i]);
      ++set.unresolved_hits;
      assigned[i] = true;
      continue;
    }
    circle->cluster_id = next_id++;
    CriticalRecord rep = bott[i];
    for (std::size_t j = i; j < bott.size(); ++j) {
      if (assigned[j]) continue;
      if (distance_to_samples(var, bott[j].location, circle->samples) < 2 * ctl.continuation_step) {
        assigned[j] = true;
        if (bott[j].residual < rep.residual) rep = bott[j];
      }
    }
    rep.kind = CriticalKind::BottCircleMember;
    rep.cluster_id = circle->cluster_id;
    set.records.push_back(rep);
    set.bott_circles.push_back(std::move(*circle));
  }
  if (!degenerate.empty()) {
    set.diagnostics.push_back("DegenerateUnresolved: " + std::to_string(set.unresolved_hits) +
                              " starts converged to critical points with null dimension >= 2 (phi=" +
                              std::to_string(degenerate.front().phi) + ")");
    for (auto& r : degenerate) set.unresolved.push_back(std::move(r));
  }
  return set;
}

struct EulerCheck {
  bool pass = false;
  int alternating_sum = 0;
  int expected = 0;
  std::string report;
};

/// Compare sum (-1)^index over isolated points (circles contribute 0) with
/// chi(M \ D).
inline EulerCheck euler_check(const CriticalSet& set, const DivisorDescriptor& divisor) {
  if (set.degenerate_unresolved())
    throw NotApplicable("critical set has unresolved degenerate components");
  EulerCheck e;
  for (const auto& r : set.records)
    if (r.kind == CriticalKind::Isolated) e.alternating_sum += (r.morse_index % 2 == 0) ? 1 : -1;
  e.expected = complement_euler(divisor);
  e.pass = e.alternating_sum == e.expected;
  e.report = "sum(-1)^index = " + std::to_string(e.alternating_sum) +
             ", chi(M\\D) = " + std::to_string(e.expected);
  return e;
}

}  // namespace shadow
