#pragma once

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "errors.hpp"
#include "exact_spectra.hpp"
#include "trace_coeffs.hpp"

namespace heattrace {

using json = nlohmann::json;

// Domain specification files:
//
//   { "area": 1.0,
//     "euler_characteristic": 1,            (or "gauss_curvature_integral", not both)
//     "loops": [ { "edges": [ { "length": 1, "bc": "D", "kg_integral": 0 }, ... ],
//                  "angles": [ 1.5707963267948966, ... ] } ],
//     "cone_points": [ ... ] }
//
// "bc" is "D", "N", {"R": kappa} for constant kappa, or {"R": {"integral": I}}.
// "kg_integral" defaults to 0; "angles" may be omitted for a loop with one
// smooth closed edge. Unknown keys are rejected.

namespace detail {

inline void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ValidationError(where, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ValidationError(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
  }
}

inline double get_number(const json& obj, const char* key, const std::string& where) {
  const std::string f = where.empty() ? key : where + "." + key;
  if (!obj.contains(key)) throw ValidationError(f, "missing");
  const json& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(f, "expected a number");
  return v.get<double>();
}

inline EdgeSpec parse_edge(const json& e, const std::string& where) {
  reject_unknown(e, where, {"length", "bc", "kg_integral"});
  EdgeSpec out;
  out.length = get_number(e, "length", where);
  if (e.contains("kg_integral")) out.kg_integral = get_number(e, "kg_integral", where);
  if (!e.contains("bc")) throw ValidationError(where + ".bc", "missing");
  const json& bc = e.at("bc");
  const std::string bw = where + ".bc";
  if (bc.is_string()) {
    const std::string s = bc.get<std::string>();
    if (s == "D")
      out.bc = BoundaryCondition::dirichlet();
    else if (s == "N")
      out.bc = BoundaryCondition::neumann();
    else
      throw ValidationError(bw, "expected \"D\", \"N\" or {\"R\": ...}");
    return out;
  }
  reject_unknown(bc, bw, {"R"});
  if (!bc.contains("R")) throw ValidationError(bw, "expected \"D\", \"N\" or {\"R\": ...}");
  const json& r = bc.at("R");
  double integral;
  if (r.is_number()) {
    const double kappa = r.get<double>();
    if (!std::isfinite(kappa) || !(kappa > 0.0)) throw ValidationError(bw + ".R", "kappa must be finite and > 0");
    integral = kappa * out.length;
  } else {
    reject_unknown(r, bw + ".R", {"integral"});
    integral = get_number(r, "integral", bw + ".R");
  }
  if (!std::isfinite(integral) || !(integral > 0.0)) throw ValidationError(bw + ".R", "Robin integral must be finite and > 0");
  // the corner and edge terms only need the classification; kappa is the mean
  out.bc = BoundaryCondition::robin(std::isfinite(out.length) && out.length > 0.0 ? integral / out.length : 1.0);
  out.robin_integral = integral;
  return out;
}

}  // namespace detail

inline PolygonSpec parse_polygon_spec(const json& j) {
  detail::reject_unknown(j, "", {"area", "gauss_curvature_integral", "euler_characteristic", "loops", "cone_points"});
  PolygonSpec s;
  s.area = detail::get_number(j, "area", "");
  const bool has_k = j.contains("gauss_curvature_integral"), has_chi = j.contains("euler_characteristic");
  if (has_k == has_chi)
    throw ValidationError("euler_characteristic", "give exactly one of gauss_curvature_integral and euler_characteristic");
  if (has_k) s.gauss_curvature_integral = detail::get_number(j, "gauss_curvature_integral", "");
  if (has_chi) {
    const json& c = j.at("euler_characteristic");
    if (!c.is_number_integer()) throw ValidationError("euler_characteristic", "expected an integer");
    s.euler_characteristic = c.get<int>();
  }
  if (j.contains("loops")) {
    const json& loops = j.at("loops");
    if (!loops.is_array()) throw ValidationError("loops", "expected an array");
    for (std::size_t l = 0; l < loops.size(); ++l) {
      const std::string where = "loops[" + std::to_string(l) + "]";
      const json& lj = loops[l];
      detail::reject_unknown(lj, where, {"edges", "angles"});
      if (!lj.contains("edges") || !lj.at("edges").is_array()) throw ValidationError(where + ".edges", "expected an array");
      BoundaryLoop loop;
      const json& edges = lj.at("edges");
      for (std::size_t e = 0; e < edges.size(); ++e)
        loop.edges.push_back(detail::parse_edge(edges[e], where + ".edges[" + std::to_string(e) + "]"));
      if (lj.contains("angles")) {
        const json& a = lj.at("angles");
        if (!a.is_array()) throw ValidationError(where + ".angles", "expected an array");
        for (std::size_t k = 0; k < a.size(); ++k) {
          if (!a[k].is_number()) throw ValidationError(where + ".angles[" + std::to_string(k) + "]", "expected a number");
          loop.angles.push_back(a[k].get<double>());
        }
      }
      s.loops.push_back(std::move(loop));
    }
  }
  if (j.contains("cone_points")) {
    const json& c = j.at("cone_points");
    if (!c.is_array()) throw ValidationError("cone_points", "expected an array");
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (!c[k].is_number()) throw ValidationError("cone_points[" + std::to_string(k) + "]", "expected a number");
      s.cone_points.push_back(c[k].get<double>());
    }
  }
  s.validate();
  return s;
}

// Parse errors are reported as ValidationError on the field "json" with the
// line and column of the failure.
inline PolygonSpec parse_polygon_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ValidationError("json", "line " + std::to_string(line) + ", column " + std::to_string(col) + ": malformed JSON");
  }
  return parse_polygon_spec(j);
}

inline PolygonSpec load_polygon_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("spec", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_polygon_spec(ss.str());
}

inline json spec_to_json(const PolygonSpec& s) {
  json j;
  j["area"] = s.area;
  if (s.euler_characteristic)
    j["euler_characteristic"] = *s.euler_characteristic;
  else if (s.gauss_curvature_integral)
    j["gauss_curvature_integral"] = *s.gauss_curvature_integral;
  j["loops"] = json::array();
  for (const auto& l : s.loops) {
    json lj;
    lj["edges"] = json::array();
    for (const auto& e : l.edges) {
      json ej{{"length", e.length}, {"kg_integral", e.kg_integral}};
      switch (e.bc.kind) {
        case BoundaryCondition::Kind::Dirichlet: ej["bc"] = "D"; break;
        case BoundaryCondition::Kind::Neumann: ej["bc"] = "N"; break;
        case BoundaryCondition::Kind::Robin: ej["bc"] = {{"R", {{"integral", e.robin_integral}}}}; break;
      }
      lj["edges"].push_back(ej);
    }
    if (!l.angles.empty()) lj["angles"] = l.angles;
    j["loops"].push_back(lj);
  }
  if (!s.cone_points.empty()) j["cone_points"] = s.cone_points;
  return j;
}

// ---------------------------------------------------------------------------
// Reports

inline json coefficients_to_json(const TraceCoefficients& c) {
  json j{{"a_minus1", c.a_minus1}, {"a_minus_half", c.a_minus_half}, {"a_0", c.a_0}, {"remainder_order", c.remainder_order}};
  j["breakdown"] = json::array();
  for (const auto& b : c.breakdown)
    j["breakdown"].push_back({{"coefficient", b.coefficient}, {"source", b.source}, {"label", b.label}, {"value", b.value}});
  return j;
}

// Inverse of coefficients_to_json, with the same unknown-key policy as specs.
inline TraceCoefficients coefficients_from_json(const json& j) {
  detail::reject_unknown(j, "", {"a_minus1", "a_minus_half", "a_0", "remainder_order", "breakdown"});
  TraceCoefficients c;
  c.a_minus1 = detail::get_number(j, "a_minus1", "");
  c.a_minus_half = detail::get_number(j, "a_minus_half", "");
  c.a_0 = detail::get_number(j, "a_0", "");
  if (!j.contains("remainder_order") || !j.at("remainder_order").is_string())
    throw ValidationError("remainder_order", "expected a string");
  c.remainder_order = j.at("remainder_order").get<std::string>();
  if (!j.contains("breakdown") || !j.at("breakdown").is_array()) throw ValidationError("breakdown", "expected an array");
  const json& b = j.at("breakdown");
  for (std::size_t k = 0; k < b.size(); ++k) {
    const std::string where = "breakdown[" + std::to_string(k) + "]";
    detail::reject_unknown(b[k], where, {"coefficient", "source", "label", "value"});
    BreakdownEntry e;
    for (auto [key, dst] : {std::pair{"coefficient", &e.coefficient}, std::pair{"source", &e.source}, std::pair{"label", &e.label}}) {
      if (!b[k].contains(key) || !b[k].at(key).is_string()) throw ValidationError(where + "." + key, "expected a string");
      *dst = b[k].at(key).get<std::string>();
    }
    e.value = detail::get_number(b[k], "value", where);
    c.breakdown.push_back(std::move(e));
  }
  return c;
}

inline json verdict_to_json(const Verdict& v) {
  json j{{"verdict", v.not_isospectral ? "not_isospectral" : "inconclusive"}};
  if (v.not_isospectral) {
    j["witness"] = v.witness;
    j["value1"] = v.value1;
    j["value2"] = v.value2;
  }
  return j;
}

inline json fit_to_json(const FitReport& f) {
  return json{{"a_minus1", f.a_minus1},
              {"a_minus_half", f.a_minus_half},
              {"a_0", f.a_0},
              {"nuisance_half", f.nuisance_half},
              {"nuisance_one", f.nuisance_one},
              {"residual_norm", f.residual_norm},
              {"t_min", f.t_min},
              {"t_max", f.t_max},
              {"condition_number", f.condition_number}};
}

}  // namespace heattrace
