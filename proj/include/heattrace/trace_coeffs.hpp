#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "corner_lab.hpp"
#include "errors.hpp"
#include "sector_models.hpp"

namespace heattrace {

struct EdgeSpec {
  double length = 1.0;
  BoundaryCondition bc = BoundaryCondition::dirichlet();
  double kg_integral = 0.0;     // integral of the geodesic curvature along the edge
  double robin_integral = 0.0;  // integral of kappa along the edge; Robin edges only
};

// angles[j] is the interior angle between edges[j] and edges[(j+1) % n]. A loop
// made of a single smooth closed edge may leave `angles` empty.
struct BoundaryLoop {
  std::vector<EdgeSpec> edges;
  std::vector<double> angles;
};

struct PolygonSpec {
  double area = 1.0;
  std::optional<double> gauss_curvature_integral;
  std::optional<int> euler_characteristic;
  std::vector<BoundaryLoop> loops;
  std::vector<double> cone_points;  // total opening angles

  void validate() const {
    if (!std::isfinite(area) || !(area > 0.0)) throw ValidationError("area", "must be finite and > 0");
    if (!gauss_curvature_integral && !euler_characteristic)
      throw ValidationError("gauss_curvature_integral", "either the curvature integral or the Euler characteristic is required");
    if (gauss_curvature_integral && !std::isfinite(*gauss_curvature_integral))
      throw ValidationError("gauss_curvature_integral", "must be finite");
    for (std::size_t l = 0; l < loops.size(); ++l) {
      const auto& loop = loops[l];
      const std::string where = "loops[" + std::to_string(l) + "]";
      if (loop.edges.empty()) throw ValidationError(where, "loop has no edges");
      const bool smooth = loop.angles.empty() && loop.edges.size() == 1;
      if (!smooth && loop.angles.size() != loop.edges.size())
        throw ValidationError(where + ".angles", "need one angle per edge");
      for (std::size_t j = 0; j < loop.edges.size(); ++j) {
        const auto& e = loop.edges[j];
        const std::string ew = where + ".edges[" + std::to_string(j) + "]";
        if (!std::isfinite(e.length) || !(e.length > 0.0)) throw ValidationError(ew + ".length", "must be finite and > 0");
        if (!std::isfinite(e.kg_integral)) throw ValidationError(ew + ".kg_integral", "must be finite");
        if (e.bc.kind == BoundaryCondition::Kind::Robin) {
          if (!std::isfinite(e.robin_integral) || !(e.robin_integral > 0.0))
            throw ValidationError(ew + ".bc", "Robin integral must be finite and > 0");
        } else if (e.robin_integral != 0.0) {
          throw ValidationError(ew + ".bc", "Robin integral given for a non-Robin edge");
        }
      }
      for (std::size_t j = 0; j < loop.angles.size(); ++j) {
        const double a = loop.angles[j];
        if (!std::isfinite(a) || !(a > 0.0 && a < 2.0 * detail::kPi))
          throw ValidationError(where + ".angles[" + std::to_string(j) + "]", "must lie in (0, 2*pi)");
      }
    }
    for (std::size_t c = 0; c < cone_points.size(); ++c) {
      const double o = cone_points[c];
      if (!std::isfinite(o) || !(o > 0.0 && o < 4.0 * detail::kPi))
        throw ValidationError("cone_points[" + std::to_string(c) + "]", "opening must lie in (0, 4*pi)");
    }
  }
};

struct BreakdownEntry {
  std::string coefficient;  // "a_minus1", "a_minus_half" or "a_0"
  std::string source;       // area, edge, curvature, geodesic_curvature, robin, corner, cone, euler, angle_sum
  std::string label;
  double value = 0.0;
};

struct TraceCoefficients {
  double a_minus1 = 0.0;
  double a_minus_half = 0.0;
  double a_0 = 0.0;
  std::vector<BreakdownEntry> breakdown;
  std::string remainder_order = "O(t^{1/2} log t)";
};

namespace detail {

inline double sum_kg(const PolygonSpec& s) {
  double k = 0.0;
  for (const auto& l : s.loops)
    for (const auto& e : l.edges) k += e.kg_integral;
  return k;
}

inline double sum_turning(const PolygonSpec& s) {
  double k = 0.0;
  for (const auto& l : s.loops)
    for (double a : l.angles) k += kPi - a;
  return k;
}

inline double sum_cone_deficit(const PolygonSpec& s) {
  double k = 0.0;
  for (double o : s.cone_points) k += 2.0 * kPi - o;
  return k;
}

// 2 pi chi = int K + int k_g + sum (pi - alpha_j) + sum (2 pi - cone opening)
inline double gauss_bonnet_curvature(const PolygonSpec& s) {
  return 2.0 * kPi * (*s.euler_characteristic) - sum_kg(s) - sum_turning(s) - sum_cone_deficit(s);
}

inline void check_gauss_bonnet(const PolygonSpec& s) {
  if (s.gauss_curvature_integral && s.euler_characteristic) {
    const double gap = *s.gauss_curvature_integral - gauss_bonnet_curvature(s);
    if (std::abs(gap) > 1e-9)
      throw ValidationError("euler_characteristic", "inconsistent with gauss_curvature_integral by " + std::to_string(gap));
  }
}

// Terms shared by both forms: leading coefficients, Robin, corners, cones.
inline TraceCoefficients common_terms(const PolygonSpec& s) {
  TraceCoefficients c;
  c.a_minus1 = s.area / (4.0 * kPi);
  c.breakdown.push_back({"a_minus1", "area", "area", c.a_minus1});
  Accumulator half;
  for (std::size_t l = 0; l < s.loops.size(); ++l)
    for (std::size_t j = 0; j < s.loops[l].edges.size(); ++j) {
      const auto& e = s.loops[l].edges[j];
      const double v = (e.bc.is_dirichlet() ? -e.length : e.length) / (8.0 * std::sqrt(kPi));
      half.add(v);
      c.breakdown.push_back({"a_minus_half", "edge", "loop " + std::to_string(l) + " edge " + std::to_string(j), v});
    }
  c.a_minus_half = half.value();
  return c;
}

inline void add_a0_local_terms(const PolygonSpec& s, TraceCoefficients& c) {
  for (std::size_t l = 0; l < s.loops.size(); ++l) {
    const auto& loop = s.loops[l];
    for (std::size_t j = 0; j < loop.edges.size(); ++j) {
      const auto& e = loop.edges[j];
      if (e.bc.kind == BoundaryCondition::Kind::Robin)
        c.breakdown.push_back({"a_0", "robin", "loop " + std::to_string(l) + " edge " + std::to_string(j),
                               e.robin_integral / (2.0 * kPi)});
    }
    const std::size_t n = loop.edges.size();
    for (std::size_t j = 0; j < loop.angles.size(); ++j) {
      const auto& a = loop.edges[j].bc;
      const auto& b = loop.edges[(j + 1) % n].bc;
      const CornerKind k{pair_from_bcs(a, b), loop.angles[j]};
      c.breakdown.push_back({"a_0", "corner",
                             "loop " + std::to_string(l) + " vertex " + std::to_string(j) + " " + pair_name(k.pair),
                             corner_coeff(k)});
    }
  }
  for (std::size_t i = 0; i < s.cone_points.size(); ++i)
    c.breakdown.push_back({"a_0", "cone", "cone " + std::to_string(i), cone_point_coeff(s.cone_points[i])});
}

inline void total_a0(TraceCoefficients& c) {
  Accumulator a;
  for (const auto& e : c.breakdown)
    if (e.coefficient == "a_0") a.add(e.value);
  c.a_0 = a.value();
}

}  // namespace detail

// Heat-trace coefficients from area, curvature integrals and boundary data.
inline TraceCoefficients coefficients(const PolygonSpec& spec) {
  spec.validate();
  detail::check_gauss_bonnet(spec);
  TraceCoefficients c = detail::common_terms(spec);
  const double K = spec.gauss_curvature_integral ? *spec.gauss_curvature_integral : detail::gauss_bonnet_curvature(spec);
  c.breakdown.push_back({"a_0", "curvature", "gauss curvature", K / (12.0 * detail::kPi)});
  for (std::size_t l = 0; l < spec.loops.size(); ++l)
    for (std::size_t j = 0; j < spec.loops[l].edges.size(); ++j)
      c.breakdown.push_back({"a_0", "geodesic_curvature", "loop " + std::to_string(l) + " edge " + std::to_string(j),
                             spec.loops[l].edges[j].kg_integral / (12.0 * detail::kPi)});
  detail::add_a0_local_terms(spec, c);
  detail::total_a0(c);
  return c;
}

// Same coefficients with the curvature integrals traded for the Euler
// characteristic through Gauss-Bonnet.
inline TraceCoefficients coefficients_gb(const PolygonSpec& spec) {
  spec.validate();
  if (!spec.euler_characteristic) throw ValidationError("euler_characteristic", "required for the Gauss-Bonnet form");
  detail::check_gauss_bonnet(spec);
  TraceCoefficients c = detail::common_terms(spec);
  c.breakdown.push_back({"a_0", "euler", "chi/6", *spec.euler_characteristic / 6.0});
  for (std::size_t l = 0; l < spec.loops.size(); ++l)
    for (std::size_t j = 0; j < spec.loops[l].angles.size(); ++j)
      c.breakdown.push_back({"a_0", "angle_sum", "loop " + std::to_string(l) + " vertex " + std::to_string(j),
                             -(detail::kPi - spec.loops[l].angles[j]) / (12.0 * detail::kPi)});
  for (std::size_t i = 0; i < spec.cone_points.size(); ++i)
    c.breakdown.push_back({"a_0", "angle_sum", "cone " + std::to_string(i),
                           -(2.0 * detail::kPi - spec.cone_points[i]) / (12.0 * detail::kPi)});
  detail::add_a0_local_terms(spec, c);
  detail::total_a0(c);
  return c;
}

struct Verdict {
  bool not_isospectral = false;
  std::string witness;  // first differing coefficient, empty when inconclusive
  double value1 = 0.0, value2 = 0.0;
};

// Compares (a_-1, a_-1/2, a_0) in that order.
inline Verdict distinguish(const PolygonSpec& s1, const PolygonSpec& s2, double tol = 1e-12) {
  const TraceCoefficients c1 = coefficients(s1), c2 = coefficients(s2);
  const std::pair<const char*, std::pair<double, double>> items[] = {
      {"a_minus1", {c1.a_minus1, c2.a_minus1}},
      {"a_minus_half", {c1.a_minus_half, c2.a_minus_half}},
      {"a_0", {c1.a_0, c2.a_0}}};
  Verdict v;
  for (const auto& [name, vals] : items) {
    if (std::abs(vals.first - vals.second) > tol * std::max({1.0, std::abs(vals.first), std::abs(vals.second)})) {
      v.not_isospectral = true;
      v.witness = name;
      v.value1 = vals.first;
      v.value2 = vals.second;
      return v;
    }
  }
  return v;
}

}  // namespace heattrace
