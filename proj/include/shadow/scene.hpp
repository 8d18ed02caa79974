#pragma once

// Scene files: a variety, a section (coefficients, or zeros for CP1), solver
// controls and the expected verdict. Schema "shadow-scene/1".

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "shadow/critical.hpp"
#include "shadow/divisor.hpp"

namespace shadow {

using json = nlohmann::json;

inline constexpr const char* kSceneSchema = "shadow-scene/1";

/// Schema violation with the offending field path (and line when known).
class SchemaError : public InvalidInput {
 public:
  SchemaError(const std::string& where, const std::string& what)
      : InvalidInput(where + ": " + what), where_(where) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

struct Expectation {
  std::optional<bool> nonempty;
  std::optional<int> components;
  std::optional<int> euler;  // of the n = 1 skeleton graph
  std::vector<int> betti;    // of X \ D up to degree n
  std::string numeric_mode;  // "graph" or "critical-points-only"
};

struct Scene {
  std::string name;
  std::string description;
  VarietyDescriptor variety = VarietyDescriptor::cp1(1);
  std::vector<cplx> coefficients;
  std::optional<DivisorType> declared_type;
  SolverControls solver;
  int face_cells = 100;  // per side of the stratified sphere grid (n = 1)
  int grid = -1;         // fate grid resolution; -1 picks a default by dimension, 0 disables
  Expectation expected;
  json source;  // the parsed document, echoed into reports

  Section section() const { return Section(variety, coefficients); }
  int grid_resolution() const { return grid >= 0 ? grid : (variety.dim() == 1 ? 32 : 16); }
};

namespace detail {

inline std::string field(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

inline cplx parse_complex(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw SchemaError(where, "expected a number or a [re, im] pair");
}

inline const json& require(const json& obj, const std::string& key, const std::string& parent) {
  if (!obj.is_object()) throw SchemaError(parent.empty() ? "<root>" : parent, "expected an object");
  if (!obj.contains(key)) throw SchemaError(field(parent, key), "missing required field");
  return obj.at(key);
}

template <typename T>
T get_as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw SchemaError(where, "has the wrong type");
  }
}

inline std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

inline Scene parse_scene(const json& doc) {
  using detail::field;
  using detail::get_as;
  using detail::require;
  Scene s;
  s.source = doc;
  const std::string schema = get_as<std::string>(require(doc, "schema", ""), "schema");
  if (schema != kSceneSchema) throw SchemaError("schema", "unsupported schema '" + schema + "'");
  s.name = get_as<std::string>(require(doc, "name", ""), "name");
  if (doc.contains("description")) s.description = get_as<std::string>(doc["description"], "description");

  const json& v = require(doc, "variety", "");
  const std::string kind = get_as<std::string>(require(v, "kind", "variety"), "variety.kind");
  const auto levels = get_as<std::vector<int>>(require(v, "levels", "variety"), "variety.levels");
  try {
    if (kind == "cp1" && levels.size() == 1) {
      s.variety = VarietyDescriptor::cp1(levels[0]);
    } else if (kind == "cp2" && levels.size() == 1) {
      s.variety = VarietyDescriptor::cp2(levels[0]);
    } else if (kind == "quadric" && levels.size() == 2) {
      s.variety = VarietyDescriptor::quadric(levels[0], levels[1]);
    } else {
      throw SchemaError("variety", "kind must be cp1 or cp2 with one level, or quadric with two");
    }
  } catch (const SchemaError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw SchemaError("variety.levels", e.what());
  }

  const json& sec = require(doc, "section", "");
  const bool has_coeffs = sec.contains("coefficients"), has_zeros = sec.contains("zeros");
  if (has_coeffs == has_zeros) throw SchemaError("section", "give exactly one of coefficients or zeros");
  if (has_coeffs) {
    const json& c = sec["coefficients"];
    if (!c.is_array()) throw SchemaError("section.coefficients", "expected an array");
    for (std::size_t i = 0; i < c.size(); ++i)
      s.coefficients.push_back(detail::parse_complex(c[i], "section.coefficients[" + std::to_string(i) + "]"));
  } else {
    if (s.variety.kind() != VarietyKind::CP1) throw SchemaError("section.zeros", "zero sets are accepted for cp1 only");
    const json& z = sec["zeros"];
    if (!z.is_array()) throw SchemaError("section.zeros", "expected an array");
    std::vector<cplx> finite_zeros;
    int at_infinity = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (z[i].is_string() && z[i].get<std::string>() == "inf")
        ++at_infinity;
      else
        finite_zeros.push_back(detail::parse_complex(z[i], "section.zeros[" + std::to_string(i) + "]"));
    }
    const int k = s.variety.factors()[0].level;
    if (int(finite_zeros.size()) + at_infinity != k)
      throw SchemaError("section.zeros", "expected " + std::to_string(k) + " zeros counted with multiplicity");
    const cplx lead = sec.contains("lead") ? detail::parse_complex(sec["lead"], "section.lead") : cplx(1.0);
    s.coefficients = Section::from_zeros(k, finite_zeros, lead).coefficients();
  }
  try {
    (void)s.section();
  } catch (const InvalidInput& e) {
    throw SchemaError("section", e.what());
  }
  if (doc.contains("divisor_type")) {
    try {
      s.declared_type = divisor_type_from_string(get_as<std::string>(doc["divisor_type"], "divisor_type"));
    } catch (const SchemaError&) {
      throw;
    } catch (const InvalidInput& e) {
      throw SchemaError("divisor_type", e.what());
    }
  }

  if (doc.contains("controls")) {
    const json& c = doc["controls"];
    if (!c.is_object()) throw SchemaError("controls", "expected an object");
    if (c.contains("seed")) s.solver.seed = get_as<std::uint64_t>(c["seed"], "controls.seed");
    if (c.contains("starts_per_chart"))
      s.solver.starts_per_chart = get_as<int>(c["starts_per_chart"], "controls.starts_per_chart");
    if (c.contains("face_cells")) s.face_cells = get_as<int>(c["face_cells"], "controls.face_cells");
    if (c.contains("grid")) s.grid = get_as<int>(c["grid"], "controls.grid");
    if (s.solver.starts_per_chart < 0 || s.face_cells < 1 || s.grid < -1)
      throw SchemaError("controls", "counts must be non-negative");
  }

  if (doc.contains("expected")) {
    const json& e = doc["expected"];
    if (!e.is_object()) throw SchemaError("expected", "expected an object");
    if (e.contains("nonempty")) s.expected.nonempty = get_as<bool>(e["nonempty"], "expected.nonempty");
    if (e.contains("components")) s.expected.components = get_as<int>(e["components"], "expected.components");
    if (e.contains("euler")) s.expected.euler = get_as<int>(e["euler"], "expected.euler");
    if (e.contains("betti")) s.expected.betti = get_as<std::vector<int>>(e["betti"], "expected.betti");
    if (e.contains("numeric_mode"))
      s.expected.numeric_mode = get_as<std::string>(e["numeric_mode"], "expected.numeric_mode");
  }
  return s;
}

/// Parse scene text; syntax errors carry line and column.
inline Scene parse_scene_text(const std::string& text, const std::string& origin = "<scene>") {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw SchemaError(origin + ":" + std::to_string(line) + ":" + std::to_string(col), "invalid JSON");
  }
  try {
    return parse_scene(doc);
  } catch (const SchemaError& e) {
    throw SchemaError(origin + ": " + e.where(), std::string(e.what()).substr(e.where().size() + 2));
  }
}

inline Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open scene file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scene_text(ss.str(), path);
}

}  // namespace shadow
