#pragma once

// Serialization of a run: report.json (schema "shadow-report/1"),
// fates.json and the skeleton SVG.

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "shadow/pipeline.hpp"

namespace shadow {

inline constexpr const char* kReportSchema = "shadow-report/1";
inline constexpr const char* kFatesSchema = "shadow-fates/1";

namespace detail {

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json point_json(const ChartPoint& p) {
  json c = json::array();
  for (Eigen::Index i = 0; i < p.coords.size(); ++i) c.push_back(complex_json(p.coords[i]));
  return {{"chart", p.chart}, {"coords", c}};
}

inline json polyline_json(const std::vector<ChartPoint>& pts) {
  json xy = json::array(), charts = json::array();
  for (const auto& p : pts) {
    xy.push_back(complex_json(p.coords[0]));
    charts.push_back(p.chart);
  }
  return {{"points", xy}, {"charts", charts}};
}

inline json homology_json(const std::optional<HomologyResult>& h) {
  if (!h) return nullptr;
  return {{"betti", h->betti}, {"torsion", h->torsion}};
}

inline std::string kind_name(CriticalKind k) {
  return k == CriticalKind::Isolated ? "isolated" : "bott-circle";
}

}  // namespace detail

inline json critical_json(const CriticalSet& s, int n) {
  json recs = json::array();
  for (const auto& r : s.records)
    recs.push_back({{"cluster", r.cluster_id},
                    {"kind", detail::kind_name(r.kind)},
                    {"location", detail::point_json(r.location)},
                    {"phi", r.phi},
                    {"index", r.morse_index},
                    {"null_dim", r.null_dim},
                    {"spectrum", r.spectrum},
                    {"residual", r.residual}});
  json circles = json::array();
  for (const auto& c : s.bott_circles) {
    circles.push_back({{"cluster", c.cluster_id},
                       {"phi", c.phi},
                       {"samples", c.samples.size()},
                       {"polyline", detail::polyline_json(c.samples)}});
  }
  json unresolved = json::array();
  for (const auto& r : s.unresolved)
    unresolved.push_back({{"location", detail::point_json(r.location)}, {"phi", r.phi}, {"null_dim", r.null_dim}});
  return {{"starts", s.starts},
          {"non_converged", s.non_converged},
          {"records", recs},
          {"bott_circles", circles},
          {"counts_by_index", s.counts_by_index(n)},
          {"degenerate_unresolved", s.degenerate_unresolved()},
          {"unresolved_hits", s.unresolved_hits},
          {"unresolved", unresolved},
          {"diagnostics", s.diagnostics}};
}

inline json make_report(const RunResult& r) {
  json rep;
  rep["schema"] = kReportSchema;
  rep["tool_version"] = kToolVersion;
  rep["seed"] = r.seed;
  rep["scene"] = r.scene.source;
  rep["numeric_mode"] = r.numeric_mode;
  const int n = r.scene.variety.dim();

  if (r.divisor) {
    json zeros = json::array();
    for (std::size_t i = 0; i < r.divisor->zeros.size(); ++i)
      zeros.push_back({{"label", i},
                       {"point", detail::point_json(r.divisor->zeros[i])},
                       {"multiplicity", r.divisor->multiplicities[i]}});
    json d = {{"type", to_string(r.divisor->type)}, {"verified", r.divisor->verified}, {"zeros", zeros}};
    try {
      d["complement_euler"] = complement_euler(*r.divisor);
    } catch (const Error&) {
      d["complement_euler"] = nullptr;
    }
    rep["divisor"] = d;
  }
  if (r.critical) {
    rep["critical"] = critical_json(*r.critical, n);
    if (r.euler)
      rep["critical"]["euler_check"] = {{"pass", r.euler->pass},
                                        {"alternating_sum", r.euler->alternating_sum},
                                        {"expected", r.euler->expected}};
    else
      rep["critical"]["euler_check"] = {{"pass", nullptr}, {"note", r.euler_note}};
  }
  if (r.skeleton) {
    const auto& g = *r.skeleton;
    json edges = json::array();
    for (const auto& e : g.edges)
      edges.push_back({{"saddle", e.saddle},
                       {"from", e.from},
                       {"to", e.to},
                       {"length", e.length},
                       {"polyline", detail::polyline_json(e.polyline)}});
    json bott = json::array();
    for (const auto& b : g.bott_cycles) bott.push_back(b.cluster_id);
    rep["skeleton"] = {{"vertices", g.vertices},
                       {"edges", edges},
                       {"bott_cycles", bott},
                       {"components", g.components},
                       {"euler", g.euler()},
                       {"shape", skeleton_shape(g)},
                       {"empty_one_skeleton", g.one_skeleton_empty()}};
  }
  if (r.faces) {
    json faces = json::array();
    for (const auto& f : r.faces->faces)
      faces.push_back({{"label", f.label},
                       {"zero", detail::point_json(f.zero)},
                       {"multiplicity", f.multiplicity},
                       {"area", f.area},
                       {"stderr", f.stderr_}});
    rep["faces"] = {{"samples", r.faces->samples},
                    {"budget", r.faces->budget},
                    {"low_confidence", r.faces->low_confidence},
                    {"faces", faces}};
  }
  if (r.bs) {
    json faces = json::array(), phases = json::array();
    for (const auto& f : r.bs->faces)
      faces.push_back({{"label", f.label},
                       {"k_area", f.k_area},
                       {"k_stderr", f.k_stderr},
                       {"nearest_integer", f.nearest_integer},
                       {"zero_count", f.zero_count},
                       {"pass", f.pass}});
    for (const auto& p : r.bs->phases)
      phases.push_back({{"kind", p.what},
                        {"cluster", p.id},
                        {"max_deviation", p.max_deviation},
                        {"net", p.closing},
                        {"pass", p.pass}});
    rep["bohr_sommerfeld"] = {{"level", r.bs->level},
                              {"faces", faces},
                              {"phases", phases},
                              {"integrality_pass", r.bs->integrality_pass},
                              {"phase_pass", r.bs->phase_pass},
                              {"pass", r.bs->pass()}};
  }
  if (r.cells) {
    rep["cells"] = {{"trajectories", r.cells->trajectories},
                    {"converged", r.cells->converged},
                    {"points", r.cells->points.size()}};
    rep["cells"]["morse_inequalities"] = r.morse_inequalities ? json(*r.morse_inequalities) : json(nullptr);
  }
  if (r.fates)
    rep["fate_field"] = {{"resolution", r.grid_resolution},
                         {"points", r.fates->fates.size()},
                         {"converged", r.fates->converged},
                         {"escaped", r.fates->escaped},
                         {"budget", r.fates->budget}};
  rep["homology"] = {{"skeleton", detail::homology_json(r.skeleton_homology)},
                     {"oracle", detail::homology_json(r.oracle_homology)}};
  if (r.verdict)
    rep["verdict"] = {{"nonempty", r.verdict->nonempty},
                      {"components", r.verdict->components},
                      {"source", to_string(r.verdict->source)},
                      {"agreement", r.verdict->agreement}};
  else
    rep["verdict"] = nullptr;
  rep["inconsistent"] = r.inconsistent;
  json errors = json::array();
  for (const auto& e : r.errors) errors.push_back({{"stage", e.stage}, {"type", e.type}, {"message", e.message}});
  rep["errors"] = errors;
  rep["expectation"] = {{"checked", r.expectation_checked},
                        {"met", r.expectation_met()},
                        {"mismatches", r.expectation_mismatches}};
  rep["exit_code"] = r.exit_code();
  json t;
  double total = 0.0;
  for (const auto& [k, v] : r.timings) {
    t[k] = v;
    total += v;
  }
  t["total"] = total;
  rep["timings"] = t;
  return rep;
}

/// The report without wall-clock fields, for reproducibility comparisons.
inline json strip_timings(json rep) {
  rep.erase("timings");
  return rep;
}

inline json fates_json(const RunResult& r) {
  json pts = json::array();
  if (r.fates)
    for (std::size_t i = 0; i < r.fates->points.size(); ++i) {
      const Fate& f = r.fates->fates[i];
      pts.push_back({{"point", detail::point_json(r.fates->points[i])},
                     {"fate", to_string(f.kind)},
                     {"target", f.target}});
    }
  return {{"schema", kFatesSchema},
          {"scene", r.scene.name},
          {"seed", r.seed},
          {"resolution", r.grid_resolution},
          {"fates", pts}};
}

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace detail

/// Skeleton in the chart-0 plane (stereographic view from the north pole).
/// Fixed 800x800 viewport covering |Re z|, |Im z| <= half_width.
inline std::string render_svg(const RunResult& r, double half_width = 3.0) {
  const double size = 800.0, scale = size / (2 * half_width);
  auto affine = [](const ChartPoint& p, bool& finite_point) {
    finite_point = true;
    if (p.chart == 0) return p.coords[0];
    const cplx w = p.coords[0];
    if (std::abs(w) < 1e-6) {  // clamp points at infinity to a far-away radius
      finite_point = false;
      return std::polar(1e6, std::arg(std::conj(w)));
    }
    return 1.0 / w;
  };
  auto xy = [&](cplx z) {
    const double lim = 50 * half_width;  // keep far points outward without huge numbers
    if (std::abs(z) > lim) z *= lim / std::abs(z);
    return std::make_pair(size / 2 + scale * z.real(), size / 2 - scale * z.imag());
  };
  auto path = [&](const std::vector<ChartPoint>& pts, bool closed) {
    std::string d, last;
    for (const auto& p : pts) {
      bool fin = true;
      const auto [x, y] = xy(affine(p, fin));
      const std::string xy_text = detail::fmt(x) + " " + detail::fmt(y);
      if (xy_text == last) continue;  // samples crowd near the ends of each edge
      d += (d.empty() ? "M" : " L") + xy_text;
      last = xy_text;
    }
    if (closed) d += " Z";
    return d;
  };

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" height=\"800\" "
       "viewBox=\"0 0 800 800\">\n"
    << "<title>" << r.scene.name << "</title>\n"
    << "<rect width=\"800\" height=\"800\" fill=\"white\"/>\n";
  // Unit circle and axes.
  s << "<circle cx=\"400\" cy=\"400\" r=\"" << detail::fmt(scale) << "\" fill=\"none\" stroke=\"#ccc\"/>\n"
    << "<line x1=\"0\" y1=\"400\" x2=\"800\" y2=\"400\" stroke=\"#eee\"/>\n"
    << "<line x1=\"400\" y1=\"0\" x2=\"400\" y2=\"800\" stroke=\"#eee\"/>\n";
  if (r.skeleton) {
    s << "<g fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"2\">\n";
    for (const auto& e : r.skeleton->edges)
      s << "<path class=\"edge\" d=\"" << path(e.polyline, false) << "\"/>\n";
    for (const auto& b : r.skeleton->bott_cycles)
      s << "<path class=\"bott\" stroke=\"#2a8a3e\" d=\"" << path(b.samples, true) << "\"/>\n";
    s << "</g>\n";
  }
  if (r.critical) {
    for (const auto* c : r.critical->isolated()) {
      bool fin = true;
      const cplx z = affine(c->location, fin);
      if (!fin) continue;
      const auto [x, y] = xy(z);
      if (c->morse_index == 0)
        s << "<circle class=\"minimum\" cx=\"" << detail::fmt(x) << "\" cy=\"" << detail::fmt(y)
          << "\" r=\"4\" fill=\"#1f4e9c\"/>\n";
      else
        s << "<rect class=\"saddle\" x=\"" << detail::fmt(x - 3) << "\" y=\"" << detail::fmt(y - 3)
          << "\" width=\"6\" height=\"6\" fill=\"black\"/>\n";
    }
  }
  std::string at_infinity;
  if (r.divisor) {
    for (std::size_t i = 0; i < r.divisor->zeros.size(); ++i) {
      bool fin = true;
      const cplx z = affine(r.divisor->zeros[i], fin);
      const int m = r.divisor->multiplicities[i];
      if (!fin) {
        at_infinity += (at_infinity.empty() ? "" : ", ") + std::string("zero of multiplicity ") + std::to_string(m);
        continue;
      }
      const auto [x, y] = xy(z);
      s << "<circle class=\"zero\" cx=\"" << detail::fmt(x) << "\" cy=\"" << detail::fmt(y)
        << "\" r=\"5\" fill=\"#c0392b\"/>\n";
      if (m > 1)
        s << "<text x=\"" << detail::fmt(x + 7) << "\" y=\"" << detail::fmt(y - 7)
          << "\" font-size=\"12\" fill=\"#c0392b\">" << m << "</text>\n";
    }
  }
  s << "<text x=\"10\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << r.scene.name;
  if (r.verdict)
    s << ": " << (r.verdict->nonempty ? "non-empty" : "empty") << ", components " << r.verdict->components;
  s << "</text>\n";
  if (!at_infinity.empty())
    s << "<text x=\"10\" y=\"40\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#c0392b\">at infinity: "
      << at_infinity << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace shadow
