#include <gtest/gtest.h>

#include <cmath>

#include "heattrace/corner_lab.hpp"
#include "support/expect.hpp"

namespace ht = heattrace;
using ht::CornerPair;

TEST(CornerClosedForm, KnownAngles) {
  EXPECT_NEAR(ht::corner_coeff({CornerPair::DD, M_PI / 2.0}), 1.0 / 16.0, 1e-15);
  EXPECT_NEAR(ht::corner_coeff({CornerPair::NN, M_PI / 2.0}), 1.0 / 16.0, 1e-15);
  EXPECT_NEAR(ht::corner_coeff({CornerPair::DN, M_PI / 2.0}), -1.0 / 16.0, 1e-15);
  EXPECT_NEAR(ht::corner_coeff({CornerPair::DD, M_PI}), 0.0, 1e-16);
  EXPECT_NEAR(ht::corner_coeff({CornerPair::DD, M_PI / 3.0}), 1.0 / 9.0, 1e-15);
  EXPECT_NEAR(ht::corner_coeff({CornerPair::ND, M_PI}), -1.0 / 16.0, 1e-15);
}

TEST(CornerClosedForm, RobinFollowsTheDirichletPattern) {
  for (double a : {0.4, 1.7, 4.0}) {
    EXPECT_EQ(ht::corner_coeff({CornerPair::RR, a}), ht::corner_coeff({CornerPair::NN, a}));
    EXPECT_EQ(ht::corner_coeff({CornerPair::NR, a}), ht::corner_coeff({CornerPair::DD, a}));
    EXPECT_EQ(ht::corner_coeff({CornerPair::RD, a}), ht::corner_coeff({CornerPair::DN, a}));
  }
}

TEST(CornerClosedForm, ConePoints) {
  EXPECT_NEAR(ht::cone_point_coeff(2.0 * M_PI), 0.0, 1e-16);
  EXPECT_NEAR(ht::cone_point_coeff(M_PI), 1.0 / 8.0, 1e-15);
  EXPECT_THROW(ht::cone_point_coeff(0.0), ht::DomainError);
  EXPECT_THROW(ht::cone_point_coeff(4.0 * M_PI), ht::DomainError);
}

TEST(CornerClosedForm, Validation) {
  EXPECT_THROW(ht::corner_coeff({CornerPair::DD, 0.0}), ht::DomainError);
  EXPECT_THROW(ht::corner_coeff({CornerPair::DD, 2.0 * M_PI}), ht::DomainError);
  EXPECT_THROW(ht::parse_pair("DX"), ht::DomainError);
  EXPECT_EQ(ht::parse_pair("RN"), CornerPair::RN);
  EXPECT_STREQ(ht::pair_name(CornerPair::ND), "ND");
  EXPECT_TRUE(ht::is_mixed(CornerPair::RD));
  EXPECT_FALSE(ht::is_mixed(CornerPair::NR));
}

TEST(CornerNumeric, RightAngleDirichlet) {
  const auto r = ht::corner_coeff_numeric(CornerPair::DD, M_PI / 2.0);
  EXPECT_NEAR(r.value, 1.0 / 16.0, 1e-4);
  EXPECT_NEAR(r.difference, r.value - r.closed_form, 0.0);
  EXPECT_LE(r.fit.condition_number, 1e8);
  EXPECT_GT(r.max_modes, 4);
}

TEST(CornerNumeric, MixedCornerMatchesClosedForm) {
  const auto r = ht::corner_coeff_numeric(CornerPair::DN, M_PI / 3.0);
  EXPECT_NEAR(r.difference, 0.0, 1e-4);
}

TEST(CornerNumeric, RobinIsUnsupported) {
  EXPECT_THROW(ht::corner_coeff_numeric(CornerPair::RR, 1.0), ht::UnsupportedError);
}

TEST(CornerNumeric, I0Primitive) {
  EXPECT_EQ(ht::i0_primitive(0.0), 0.0);
  EXPECT_THROW(ht::i0_primitive(-1.0), ht::DomainError);
}

TEST(TermContributions, RightAngle) {
  const double g = M_PI / 2.0;
  EXPECT_NEAR(ht::term_contributions(ht::GreensTerm::C, g, 8.0, 0.05).t0_coefficient, 1.0 / 16.0, 1e-3);
  EXPECT_NEAR(ht::term_contributions(ht::GreensTerm::E, g, 8.0, 0.05).t0_coefficient, -1.0 / 16.0, 1e-3);
  EXPECT_NEAR(ht::term_contributions(ht::GreensTerm::F, g, 8.0, 0.05).t0_coefficient, 0.0, 1e-12);
}

TEST(TermContributions, LimitsAgreeWithCornerFormulas) {
  // C carries the same-type corner, E the mixed one
  for (double g : {M_PI / 3.0, M_PI / 2.0, 2.0 * M_PI / 3.0, M_PI, 1.3 * M_PI}) {
    EXPECT_NEAR(ht::term_t0_limit(ht::GreensTerm::C, g), ht::same_type_corner(g), 1e-10);
    EXPECT_NEAR(ht::term_t0_limit(ht::GreensTerm::E, g), ht::mixed_corner(g), 1e-10);
  }
}

TEST(TermContributions, DivergentTermsAreUnsupported) {
  EXPECT_THROW(ht::term_contributions(ht::GreensTerm::A, 1.0, 8.0, 0.05), ht::UnsupportedError);
  EXPECT_THROW(ht::term_contributions(ht::GreensTerm::B, 1.0, 8.0, 0.05), ht::UnsupportedError);
  EXPECT_THROW(ht::term_t0_limit(ht::GreensTerm::A, 1.0), ht::UnsupportedError);
  EXPECT_THROW(ht::term_contributions(ht::GreensTerm::C, 1.0, 8.0, 0.05, 3), ht::DomainError);
  EXPECT_THROW(ht::parse_term("G"), ht::DomainError);
}

TEST(CornerProperties, SignPattern) { EXPECT_PROPERTY(props::corner_signs()); }
TEST(CornerProperties, SplitIdentity) { EXPECT_PROPERTY(props::dn_split_identity()); }
