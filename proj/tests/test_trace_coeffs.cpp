#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "heattrace/domains.hpp"
#include "heattrace/spec_io.hpp"
#include "heattrace/trace_coeffs.hpp"
#include "support/expect.hpp"

namespace ht = heattrace;
using BC = ht::BoundaryCondition;

namespace {

std::string data(const char* name) { return std::string(HEATTRACE_TEST_DATA) + "/" + name; }

ht::PolygonSpec unit_square(BC bc) { return ht::rectangle_polygon(1.0, 1.0, {bc, bc, bc, bc}); }

std::string field_of(const ht::PolygonSpec& s) {
  try {
    ht::coefficients(s);
  } catch (const ht::ValidationError& e) {
    return e.field;
  }
  return "";
}

}  // namespace

TEST(Coefficients, DirichletSquare) {
  const auto c = ht::coefficients(unit_square(BC::dirichlet()));
  EXPECT_NEAR(c.a_minus1, 1.0 / (4.0 * M_PI), 1e-16);
  EXPECT_NEAR(c.a_minus_half, -4.0 / (8.0 * std::sqrt(M_PI)), 1e-15);
  EXPECT_NEAR(c.a_0, 0.25, 1e-15);
}

TEST(Coefficients, NeumannSquareFlipsOnlyTheBoundaryTerm) {
  const auto d = ht::coefficients(unit_square(BC::dirichlet())), n = ht::coefficients(unit_square(BC::neumann()));
  EXPECT_DOUBLE_EQ(n.a_minus_half, -d.a_minus_half);
  EXPECT_DOUBLE_EQ(n.a_0, d.a_0);
}

TEST(Coefficients, SmoothDisks) {
  for (auto arc : {ht::ArcBc::Dirichlet, ht::ArcBc::Neumann}) {
    const auto c = ht::coefficients(ht::disk_polygon(1.0, arc));
    EXPECT_NEAR(c.a_0, 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(c.a_minus1, 0.25, 1e-16);
  }
}

TEST(Coefficients, MixedRectangle) {
  // Dirichlet sides of length 1, Neumann top and bottom of length 2: four mixed right angles
  const auto c = ht::coefficients(ht::rectangle_polygon(2.0, 1.0, ht::parse_rectangle_bcs("DDNN", 0.0)));
  EXPECT_NEAR(c.a_0, 4.0 * ht::mixed_corner(M_PI / 2.0), 1e-15);
  EXPECT_NEAR(c.a_0, -0.25, 1e-15);
  EXPECT_NEAR(c.a_minus_half, (4.0 - 2.0) / (8.0 * std::sqrt(M_PI)), 1e-15);
}

TEST(Coefficients, ConePointsAndGaussBonnetFormAgree) {
  ht::PolygonSpec s;
  s.area = 2.0;
  s.euler_characteristic = 2;
  s.cone_points = {M_PI, 3.0 * M_PI};
  const auto a = ht::coefficients(s), b = ht::coefficients_gb(s);
  EXPECT_NEAR(a.a_0, b.a_0, 1e-15);
  // the two deficits cancel, so the curvature integral is 4 pi
  EXPECT_NEAR(a.a_0, 1.0 / 3.0 + ht::cone_point_coeff(M_PI) + ht::cone_point_coeff(3.0 * M_PI), 1e-15);
  EXPECT_EQ(a.a_minus_half, 0.0);
}

TEST(Coefficients, BreakdownLabelsSources) {
  const auto c = ht::coefficients(ht::parse_polygon_spec(std::string(R"({
    "area": 1, "euler_characteristic": 1,
    "loops": [{"edges": [{"length": 1, "bc": {"R": 2.0}}, {"length": 1, "bc": "N"},
                         {"length": 1, "bc": "N"}, {"length": 1, "bc": "N"}],
               "angles": [1.5707963267948966, 1.5707963267948966, 1.5707963267948966, 1.5707963267948966]}]})")));
  int robin = 0, corner = 0;
  for (const auto& e : c.breakdown) {
    robin += e.source == "robin";
    corner += e.source == "corner";
  }
  EXPECT_EQ(robin, 1);
  EXPECT_EQ(corner, 4);
  EXPECT_EQ(c.remainder_order, "O(t^{1/2} log t)");
}

TEST(Validation, NamesTheOffendingField) {
  auto s = unit_square(BC::dirichlet());
  s.area = -1.0;
  EXPECT_EQ(field_of(s), "area");
  s = unit_square(BC::dirichlet());
  s.loops[0].angles[2] = 0.0;
  EXPECT_EQ(field_of(s), "loops[0].angles[2]");
  s = unit_square(BC::dirichlet());
  s.loops[0].edges[1].length = 0.0;
  EXPECT_EQ(field_of(s), "loops[0].edges[1].length");
  s = unit_square(BC::dirichlet());
  s.loops[0].angles.pop_back();
  EXPECT_EQ(field_of(s), "loops[0].angles");
  s = unit_square(BC::dirichlet());
  s.euler_characteristic.reset();
  EXPECT_EQ(field_of(s), "gauss_curvature_integral");
  s = unit_square(BC::dirichlet());
  s.gauss_curvature_integral = 1.0;
  EXPECT_EQ(field_of(s), "euler_characteristic");
  s = unit_square(BC::dirichlet());
  s.cone_points = {4.0 * M_PI};
  EXPECT_EQ(field_of(s), "cone_points[0]");
  s = unit_square(BC::dirichlet());
  s.loops[0].edges[0].robin_integral = 1.0;
  EXPECT_EQ(field_of(s), "loops[0].edges[0].bc");
}

TEST(Validation, GaussBonnetFormNeedsEuler) {
  ht::PolygonSpec s = ht::disk_polygon(1.0, ht::ArcBc::Dirichlet);
  s.euler_characteristic.reset();
  s.gauss_curvature_integral = 0.0;
  EXPECT_NO_THROW(ht::coefficients(s));
  EXPECT_THROW(ht::coefficients_gb(s), ht::ValidationError);
}

TEST(SpecFiles, LoadAndReject) {
  EXPECT_NEAR(ht::coefficients(ht::load_polygon_spec(data("square.json"))).a_0, 0.25, 1e-15);
  try {
    ht::load_polygon_spec(data("unknown-key.json"));
    FAIL() << "unknown key accepted";
  } catch (const ht::ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("perimeter"), std::string::npos);
  }
  try {
    ht::load_polygon_spec(data("bad-angle.json"));
    FAIL() << "bad angle accepted";
  } catch (const ht::ValidationError& e) {
    EXPECT_EQ(e.field, "loops[0].angles[1]");
  }
  EXPECT_THROW(ht::parse_polygon_spec(std::string("{\"area\": 1,")), ht::ValidationError);
  EXPECT_THROW(ht::load_polygon_spec(data("missing.json")), ht::ValidationError);
}

TEST(SpecFiles, RoundTrip) {
  const auto s = ht::load_polygon_spec(data("robin-square.json"));
  const auto again = ht::parse_polygon_spec(ht::spec_to_json(s));
  EXPECT_EQ(ht::coefficients(s).a_0, ht::coefficients(again).a_0);
  const auto c = ht::coefficients(s);
  EXPECT_EQ(ht::coefficients_to_json(ht::coefficients_from_json(ht::coefficients_to_json(c))).dump(),
            ht::coefficients_to_json(c).dump());
}

TEST(Distinguish, Examples) {
  const auto square = ht::load_polygon_spec(data("square.json"));
  const auto disk = ht::load_polygon_spec(data("disk-dirichlet-unit-area.json"));
  const auto v = ht::distinguish(square, disk);
  EXPECT_TRUE(v.not_isospectral);
  EXPECT_EQ(v.witness, "a_minus_half");

  const auto jumps = ht::distinguish(ht::load_polygon_spec(data("two-jumps.json")),
                                     ht::load_polygon_spec(data("neumann-perimeter-8.json")));
  EXPECT_TRUE(jumps.not_isospectral);
  EXPECT_EQ(jumps.witness, "a_0");
  EXPECT_NEAR(jumps.value1, 1.0 / 24.0, 1e-12);
  EXPECT_NEAR(jumps.value2, 1.0 / 6.0, 1e-12);

  const auto same = ht::distinguish(square, square);
  EXPECT_FALSE(same.not_isospectral);
  EXPECT_TRUE(same.witness.empty());
}

TEST(TraceProperties, GaussBonnetAgreement) { EXPECT_PROPERTY(props::gb_agreement()); }
TEST(TraceProperties, PhantomVertexAdditivity) { EXPECT_PROPERTY(props::phantom_vertex_additivity()); }
TEST(TraceProperties, StrictInequality) { EXPECT_PROPERTY(props::strict_inequality()); }
TEST(TraceProperties, RobinLinearity) { EXPECT_PROPERTY(props::robin_linearity()); }
TEST(TraceProperties, BreakdownSums) { EXPECT_PROPERTY(props::breakdown_sums()); }
