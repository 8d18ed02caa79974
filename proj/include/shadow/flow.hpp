#pragma once

// Gradient flow of phi. Ascending flow (+grad phi) carries every point off
// the shadow into the divisor; points whose ascending flow stays bounded
// make up B_D. Descending flow from the saddles traces the shadow's edges.
//
// The flow is integrated for the speed-capped field V / max(1, |V|), a
// positive reparametrization of the gradient flow with the same orbits.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "shadow/critical.hpp"

namespace shadow {

enum class Direction { Ascending, Descending };

enum class FateKind { ConvergedTo, EscapedToDivisor, Budget };

struct Fate {
  FateKind kind = FateKind::Budget;
  // Cluster id for ConvergedTo, zero label for EscapedToDivisor (-1 when
  // the divisor has no labelled points), -1 for Budget.
  int target = -1;

  bool operator==(const Fate&) const = default;
};

inline std::string to_string(FateKind k) {
  switch (k) {
    case FateKind::ConvergedTo: return "converged";
    case FateKind::EscapedToDivisor: return "escaped";
    case FateKind::Budget: return "budget";
  }
  return "?";
}

struct Trajectory {
  std::vector<ChartPoint> samples;
  std::vector<double> phi_profile;
  Fate fate;
  int steps = 0;
};

struct FlowControls {
  double atol = 1e-9;
  double rtol = 1e-9;
  int max_steps = 100000;
  double escape_floor = 1e-10;   // |h| (relative) declaring divisor escape
  double converge_grad = 1e-9;   // isolated critical point capture
  double capture_radius = 1e-5;
  double bott_grad = 1e-7;       // Bott circle capture
  double bott_radius = 1e-5;
  double chart_limit = 1.5;
  double max_displacement = 0.05;  // per step, chart units
  bool keep_samples = true;
};

/// Everything the integrator needs to name a trajectory's fate.
struct FlowContext {
  const Section& section;
  const CriticalSet& critical;
  std::vector<ChartPoint> zeros;  // labelled divisor points (CP1)
  FlowControls controls;
  SolverControls solver;
};

namespace detail {

inline RVec flow_field(const Section& sec, const ChartPoint& p, double sign) {
  const PhiJet j = phi_jet(sec, p);
  RVec v = to_real(metric_gradient(sec.variety(), p, j));
  const double speed = v.norm();
  if (speed > 1.0) v /= speed;
  return sign * v;
}

inline int nearest_zero(const VarietyDescriptor& var, const ChartPoint& p,
                        const std::vector<ChartPoint>& zeros) {
  int best = -1;
  double d = 1e300;
  for (std::size_t i = 0; i < zeros.size(); ++i) {
    const double di = chordal_distance(var, p, zeros[i]);
    if (di < d) {
      d = di;
      best = static_cast<int>(i);
    }
  }
  return best;
}

/// ConvergedTo test at a point; returns cluster id or -1.
inline int captured_by(const FlowContext& ctx, const ChartPoint& p, double gnorm) {
  const auto& var = ctx.section.variety();
  const auto& fc = ctx.controls;
  if (gnorm < fc.converge_grad) {
    for (const auto& r : ctx.critical.records)
      if (r.kind == CriticalKind::Isolated &&
          chordal_distance(var, p, r.location) < fc.capture_radius)
        return r.cluster_id;
  }
  if (gnorm < fc.bott_grad && !ctx.critical.bott_circles.empty()) {
    SolverControls corr = ctx.solver;
    corr.tolerance = 1e-11;
    const NewtonOutcome nc = newton_critical(ctx.section, p, corr);
    if (nc.converged && chordal_distance(var, p, nc.point) < fc.bott_radius)
      for (const auto& c : ctx.critical.bott_circles)
        if (distance_to_samples(var, nc.point, c.samples) < 2 * ctx.solver.continuation_step)
          return c.cluster_id;
  }
  return -1;
}

// Dormand-Prince 5(4) tableau.
inline constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
inline constexpr double kB5[7] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784,
                                  11.0 / 84, 0.0};
inline constexpr double kB4[7] = {5179.0 / 57600, 0.0, 7571.0 / 16695, 393.0 / 640,
                                  -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

}  // namespace detail

/// Integrate from `start` until the fate is decided or the step budget runs out.
inline Trajectory integrate(const FlowContext& ctx, const ChartPoint& start, Direction dir) {
  const Section& sec = ctx.section;
  const auto& var = sec.variety();
  const auto& fc = ctx.controls;
  const double sign = dir == Direction::Ascending ? 1.0 : -1.0;

  Trajectory tr;
  ChartPoint p = normalize_chart(var, start);
  PhiJet jet = phi_jet(sec, p);
  auto record = [&](const ChartPoint& q, double phi) {
    if (fc.keep_samples || tr.samples.empty()) {
      tr.samples.push_back(q);
      tr.phi_profile.push_back(phi);
    }
  };
  record(p, jet.phi);

  auto decide = [&](const ChartPoint& q, const PhiJet& j) -> bool {
    if (j.rel_norm < fc.escape_floor) {
      tr.fate = {FateKind::EscapedToDivisor, detail::nearest_zero(var, q, ctx.zeros)};
      return true;
    }
    const double g = grad_norm(var, q, j);
    const int id = detail::captured_by(ctx, q, g);
    if (id >= 0) {
      tr.fate = {FateKind::ConvergedTo, id};
      return true;
    }
    if (g < 1e-13) {  // stalled at a critical point missing from the set
      tr.fate = {FateKind::Budget, -1};
      return true;
    }
    return false;
  };
  if (decide(p, jet)) return tr;

  std::array<RVec, 7> k;
  double h = 1e-3;
  k[0] = detail::flow_field(sec, p, sign);
  while (tr.steps < fc.max_steps) {
    const RVec u = to_real(p.coords);
    const double speed = std::max(k[0].norm(), 1e-300);
    h = std::min(h, fc.max_displacement / speed);
    bool ok = true;
    RVec u5, u4;
    double lipschitz = 0.0;
    try {
      for (int s = 1; s < 7; ++s) {
        RVec acc = u;
        for (int m = 0; m < s; ++m) acc += h * detail::kA[s][m] * k[m];
        k[s] = detail::flow_field(sec, {p.chart, to_complex(acc)}, sign);
        const double du = (acc - u).norm();
        if (du > 0) lipschitz = std::max(lipschitz, (k[s] - k[0]).norm() / du);
      }
      u5 = u;
      u4 = u;
      for (int s = 0; s < 7; ++s) {
        u5 += h * detail::kB5[s] * k[s];
        u4 += h * detail::kB4[s] * k[s];
      }
    } catch (const Error&) {
      ok = false;  // a stage landed on the divisor
    }
    double err = 0.0;
    if (ok) {
      for (Eigen::Index i = 0; i < u.size(); ++i)
        err = std::max(err, std::abs(u5[i] - u4[i]) / (fc.atol + fc.rtol * std::abs(u5[i])));
    }
    ChartPoint q;
    PhiJet jq;
    if (ok && err <= 1.0) {
      q = {p.chart, to_complex(u5)};
      try {
        jq = phi_jet(sec, q);
        // Monotonicity of phi is part of step acceptance.
        if (sign * (jq.phi - jet.phi) < -1e-12 * (1.0 + std::abs(jet.phi))) ok = false;
      } catch (const Error&) {
        ok = false;
      }
    } else {
      ok = false;
    }
    if (!ok) {
      h *= (err > 1.0 && std::isfinite(err)) ? std::max(0.1, 0.9 * std::pow(err, -0.2)) : 0.25;
      if (h < 1e-300) break;
      continue;
    }
    ++tr.steps;
    const ChartPoint moved = q.coords.cwiseAbs().maxCoeff() > fc.chart_limit ? normalize_chart(var, q) : q;
    if (moved.chart != q.chart) jq = phi_jet(sec, moved);
    p = moved;
    jet = jq;
    record(p, jet.phi);
    if (decide(p, jet)) {
      if (!fc.keep_samples) {
        tr.samples.push_back(p);
        tr.phi_profile.push_back(jet.phi);
      }
      return tr;
    }
    h *= (err > 0) ? std::min(5.0, 0.9 * std::pow(err, -0.2)) : 5.0;
    // Stay well inside the stability region near attracting critical points,
    // where the error estimate alone lets the iteration stagnate.
    if (lipschitz > 0) h = std::min(h, 1.5 / lipschitz);
    k[0] = detail::flow_field(sec, p, sign);
  }
  tr.fate = {FateKind::Budget, -1};
  if (!fc.keep_samples) {
    tr.samples.push_back(p);
    tr.phi_profile.push_back(jet.phi);
  }
  return tr;
}

struct Separatrix {
  int saddle = -1;
  std::array<Trajectory, 2> halves;
  std::array<int, 2> endpoints{-1, -1};  // cluster ids
  std::vector<ChartPoint> polyline;     // endpoint 0 -> saddle -> endpoint 1
  double length = 0.0;                  // chordal
  bool complete = false;                // both halves ConvergedTo (else IncompleteSeparatrix)
};

/// Descending flow from both sides of every index-1 saddle, started at
/// `offset` along the negative Hessian eigendirection.
inline std::vector<Separatrix> trace_separatrices(const FlowContext& ctx, double offset = 1e-5) {
  const auto& var = ctx.section.variety();
  std::vector<const CriticalRecord*> saddles;
  for (const auto& r : ctx.critical.records)
    if (r.kind == CriticalKind::Isolated && r.morse_index == 1) saddles.push_back(&r);

  std::vector<Separatrix> out(saddles.size());
  parallel_for(saddles.size(), [&](std::size_t i) {
    const CriticalRecord& s = *saddles[i];
    const RVec d = hessian_direction(ctx.section, s.location, true);
    Separatrix sep;
    sep.saddle = s.cluster_id;
    for (int side = 0; side < 2; ++side) {
      const ChartPoint st = detail::shifted(s.location, (side == 0 ? offset : -offset) * d);
      sep.halves[side] = integrate(ctx, st, Direction::Descending);
      sep.endpoints[side] = sep.halves[side].fate.kind == FateKind::ConvergedTo
                                ? sep.halves[side].fate.target
                                : -1;
    }
    sep.complete = sep.endpoints[0] >= 0 && sep.endpoints[1] >= 0;
    const auto& h0 = sep.halves[0].samples;
    sep.polyline.assign(h0.rbegin(), h0.rend());
    sep.polyline.push_back(s.location);
    sep.polyline.insert(sep.polyline.end(), sep.halves[1].samples.begin(), sep.halves[1].samples.end());
    for (std::size_t t = 0; t + 1 < sep.polyline.size(); ++t)
      sep.length += chordal_distance(var, sep.polyline[t], sep.polyline[t + 1]);
    out[i] = std::move(sep);
  });
  return out;
}

struct GridSpec {
  int resolution = 64;
  double half_width = 2.0;  // n = 1: square [-w, w]^2 in chart 0
};

struct FateField {
  std::vector<ChartPoint> points;
  std::vector<Fate> fates;
  int converged = 0;
  int escaped = 0;
  int budget = 0;

  double budget_fraction() const {
    return fates.empty() ? 0.0 : double(budget) / double(fates.size());
  }
};

/// Grid points: a regular chart-0 square for n = 1; for n >= 2,
/// resolution^2 shifted-Halton points spread over all charts' unit polydisks.
inline std::vector<ChartPoint> grid_points(const VarietyDescriptor& var, const GridSpec& g) {
  std::vector<ChartPoint> pts;
  const int n = var.dim();
  if (n == 1) {
    for (int i = 0; i < g.resolution; ++i)
      for (int j = 0; j < g.resolution; ++j) {
        const double x = -g.half_width + 2 * g.half_width * (j + 0.5) / g.resolution;
        const double y = g.half_width - 2 * g.half_width * (i + 0.5) / g.resolution;
        pts.push_back(make_point(0, {cplx(x, y)}));
      }
    return pts;
  }
  const int total = g.resolution * g.resolution;
  const std::vector<double> shift(2 * n, 0.5);
  for (int i = 0; i < total; ++i) {
    const int chart = i % var.chart_count();
    const auto u = halton(std::uint64_t(i / var.chart_count()), 2 * n, shift);
    ChartPoint p;
    p.chart = chart;
    p.coords.resize(n);
    for (int q = 0; q < n; ++q) p.coords[q] = std::polar(std::sqrt(u[2 * q]), 2 * M_PI * u[2 * q + 1]);
    pts.push_back(p);
  }
  return pts;
}

/// Ascending fate of each point; bounded fates approximate B_D and escape
/// labels give the basin of each zero.
inline FateField classify_points(const FlowContext& ctx, std::vector<ChartPoint> points) {
  FlowContext quiet = ctx;
  quiet.controls.keep_samples = false;
  FateField f;
  f.points = std::move(points);
  f.fates.resize(f.points.size());
  parallel_for(f.points.size(), [&](std::size_t i) {
    try {
      f.fates[i] = integrate(quiet, f.points[i], Direction::Ascending).fate;
    } catch (const OnDivisor&) {
      f.fates[i] = {FateKind::EscapedToDivisor,
                    detail::nearest_zero(ctx.section.variety(), f.points[i], ctx.zeros)};
    }
  });
  for (const auto& fate : f.fates) {
    if (fate.kind == FateKind::ConvergedTo) ++f.converged;
    if (fate.kind == FateKind::EscapedToDivisor) ++f.escaped;
    if (fate.kind == FateKind::Budget) ++f.budget;
  }
  return f;
}

inline FateField classify_grid(const FlowContext& ctx, const GridSpec& grid) {
  return classify_points(ctx, grid_points(ctx.section.variety(), grid));
}

struct CellCloud {
  std::vector<ChartPoint> points;
  int trajectories = 0;
  int converged = 0;
};

/// Samples of the descending cells of all isolated critical points of
/// positive index: the shadow as a point cloud, used when n = 2.
inline CellCloud sample_descending_cells(const FlowContext& ctx, int rays = 16,
                                         double offset = 1e-4) {
  const auto& var = ctx.section.variety();
  CellCloud cloud;
  std::vector<std::pair<const CriticalRecord*, RVec>> launches;
  for (const auto& r : ctx.critical.records) {
    if (r.kind != CriticalKind::Isolated || r.morse_index == 0) continue;
    const PhiJet j = phi_jet(ctx.section, r.location);
    const Eigen::LLT<RMat> llt(metric_matrix(var, r.location));
    const RMat l = llt.matrixL();
    const RMat li = l.inverse();
    RMat h = li * j.hess * li.transpose();
    const Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (h + h.transpose()));
    const int idx = r.morse_index;
    const int count = idx == 1 ? 2 : rays;
    for (int t = 0; t < count; ++t) {
      RVec v = RVec::Zero(h.rows());
      if (idx == 1) {
        v = (t == 0 ? 1.0 : -1.0) * es.eigenvectors().col(0);
      } else {
        // Directions on a great circle of the negative eigenspace.
        const double a = 2 * M_PI * t / count;
        v = std::cos(a) * es.eigenvectors().col(0) + std::sin(a) * es.eigenvectors().col(1);
      }
      RVec d = li.transpose() * v;
      launches.emplace_back(&r, d / d.norm());
    }
  }
  std::vector<Trajectory> runs(launches.size());
  parallel_for(launches.size(), [&](std::size_t i) {
    runs[i] = integrate(ctx, detail::shifted(launches[i].first->location, offset * launches[i].second),
                        Direction::Descending);
  });
  for (const auto& t : runs) {
    ++cloud.trajectories;
    if (t.fate.kind == FateKind::ConvergedTo) ++cloud.converged;
    cloud.points.insert(cloud.points.end(), t.samples.begin(), t.samples.end());
  }
  return cloud;
}

}  // namespace shadow
