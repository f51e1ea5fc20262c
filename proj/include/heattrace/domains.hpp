#pragma once

#include <string>

#include "exact_spectra.hpp"
#include "trace_coeffs.hpp"

namespace heattrace {

// PolygonSpecs of the domains with exact spectra, so that fitted and predicted
// coefficients can be compared side by side.

inline EdgeSpec straight_edge(double length, const BoundaryCondition& bc) {
  EdgeSpec e;
  e.length = length;
  e.bc = bc;
  if (bc.kind == BoundaryCondition::Kind::Robin) e.robin_integral = bc.robin_kappa * length;
  return e;
}

// Counterclockwise from the origin: bottom, right, top, left.
inline PolygonSpec rectangle_polygon(double a, double b, const RectangleBcs& bcs) {
  PolygonSpec s;
  s.area = a * b;
  s.euler_characteristic = 1;
  BoundaryLoop l;
  l.edges = {straight_edge(a, bcs.bottom), straight_edge(b, bcs.right), straight_edge(a, bcs.top), straight_edge(b, bcs.left)};
  l.angles.assign(4, 0.5 * detail::kPi);
  s.loops = {l};
  return s;
}

// Edge at theta = 0, the arc, then the edge at theta = gamma.
inline PolygonSpec sector_polygon(const SectorSpec& edges, double radius, ArcBc arc) {
  edges.validate();
  const double g = edges.gamma;
  PolygonSpec s;
  s.area = 0.5 * g * radius * radius;
  s.euler_characteristic = 1;
  BoundaryLoop l;
  EdgeSpec curved = straight_edge(g * radius, arc == ArcBc::Dirichlet ? BoundaryCondition::dirichlet() : BoundaryCondition::neumann());
  curved.kg_integral = g;
  l.edges = {straight_edge(radius, edges.bc_at_0), curved, straight_edge(radius, edges.bc_at_gamma)};
  l.angles = {0.5 * detail::kPi, 0.5 * detail::kPi, g};
  s.loops = {l};
  return s;
}

inline PolygonSpec disk_polygon(double radius, ArcBc arc) {
  PolygonSpec s;
  s.area = detail::kPi * radius * radius;
  s.euler_characteristic = 1;
  EdgeSpec e = straight_edge(2.0 * detail::kPi * radius, arc == ArcBc::Dirichlet ? BoundaryCondition::dirichlet() : BoundaryCondition::neumann());
  e.kg_integral = 2.0 * detail::kPi;
  s.loops = {BoundaryLoop{{e}, {}}};
  return s;
}

inline BoundaryCondition parse_bc_letter(char c, double kappa) {
  switch (c) {
    case 'D': return BoundaryCondition::dirichlet();
    case 'N': return BoundaryCondition::neumann();
    case 'R': return BoundaryCondition::robin(kappa);
  }
  throw ValidationError("bc", std::string("unknown boundary condition letter '") + c + "'");
}

// Two letters for (theta = 0, theta = gamma); Robin is rejected by SectorSpec.
inline SectorSpec parse_sector_bcs(const std::string& s, double gamma) {
  if (s.size() != 2) throw ValidationError("bc", "expected two letters such as DD, NN, DN");
  SectorSpec spec{gamma, parse_bc_letter(s[0], 1.0), parse_bc_letter(s[1], 1.0)};
  spec.validate();
  return spec;
}

// Four letters in the order left, right, bottom, top.
inline RectangleBcs parse_rectangle_bcs(const std::string& s, double kappa) {
  if (s.size() != 4) throw ValidationError("bcs", "expected four letters (left, right, bottom, top) such as DDNN");
  return {parse_bc_letter(s[0], kappa), parse_bc_letter(s[1], kappa), parse_bc_letter(s[2], kappa), parse_bc_letter(s[3], kappa)};
}

}  // namespace heattrace
