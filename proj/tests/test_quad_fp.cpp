#include <gtest/gtest.h>

#include <cmath>

#include "heattrace/corner_lab.hpp"
#include "heattrace/quad.hpp"
#include "support/expect.hpp"

namespace ht = heattrace;

TEST(Integrate, Elementary) {
  EXPECT_NEAR(ht::integrate([](double x) { return x * x; }, 0.0, 1.0).value, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(ht::integrate([](double x) { return std::sin(x); }, 0.0, M_PI).value, 2.0, 1e-13);
  const auto r = ht::integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
  EXPECT_NEAR(r.value, 2.0, 1e-10);
  EXPECT_GT(r.nodes_used, 0u);
}

TEST(Integrate, ReversedLimitsFlipSign) {
  auto f = [](double x) { return std::exp(x); };
  EXPECT_DOUBLE_EQ(ht::integrate(f, 1.0, 0.0).value, -ht::integrate(f, 0.0, 1.0).value);
  EXPECT_EQ(ht::integrate(f, 2.0, 2.0).value, 0.0);
}

TEST(Integrate, RejectsInfiniteLimits) {
  EXPECT_THROW(ht::integrate([](double) { return 1.0; }, 0.0, INFINITY), ht::DomainError);
}

TEST(Integrate, BudgetExceededCarriesBestEstimate) {
  ht::QuadOptions o;
  o.max_nodes = 60;
  try {
    ht::integrate([](double x) { return std::sin(200.0 * x) * std::exp(-x); }, 0.0, 10.0, o);
    FAIL() << "expected BudgetExceededError";
  } catch (const ht::BudgetExceededError& e) {
    EXPECT_TRUE(std::isfinite(e.best_estimate));
    EXPECT_GT(e.abs_err_estimate, 0.0);
  }
}

TEST(IntegrateDecaying, ExponentialAndBessel) {
  auto r = ht::integrate_decaying([](double x) { return std::exp(-x); }, 0.0, {1.0, 1.0});
  EXPECT_NEAR(r.value, 1.0, 1e-12);
  EXPECT_FALSE(r.envelope_violated);
  // int_0^inf e^{-cosh u} du = K_0(1)
  auto k = ht::integrate_decaying([](double u) { return std::exp(-std::cosh(u)); }, 0.0, {std::exp(-1.0), 1.0});
  EXPECT_NEAR(k.value, 0.421024438240708333336, 1e-12);
}

TEST(IntegrateDecaying, FlagsEnvelopeViolation) {
  auto r = ht::integrate_decaying([](double x) { return std::exp(-0.5 * x); }, 0.0, {1.0, 1.0}, {});
  EXPECT_TRUE(r.envelope_violated);
}

TEST(IntegrateDecaying, RejectsBadEnvelope) {
  EXPECT_THROW(ht::integrate_decaying([](double x) { return x; }, 0.0, {1.0, 0.0}), ht::DomainError);
}

TEST(FinitePart, SyntheticExpansions) {
  auto f = [](double cut) {
    const double e = 1.0 / cut;
    return 3.0 / (e * e) + 7.0 + 2.0 * e;
  };
  const auto r = ht::finite_part(f);
  EXPECT_NEAR(r.finite_part, 7.0, 1e-10);
  EXPECT_NEAR(r.divergent_coeffs.at(-2), 3.0, 1e-10);
  EXPECT_NEAR(r.divergent_coeffs.at(1), 2.0, 1e-8);
  EXPECT_NEAR(ht::finite_part([](double cut) { return cut; }).finite_part, 0.0, 1e-10);
  ASSERT_EQ(r.epsilons_used.size(), 12u);
  for (std::size_t k = 1; k < r.epsilons_used.size(); ++k) EXPECT_LT(r.epsilons_used[k], r.epsilons_used[k - 1]);
}

TEST(FinitePart, QuadResultErrorsEnterTheBudget) {
  auto f = [](double cut) {
    ht::QuadResult q;
    q.value = 5.0 * cut + 1.0 + 1e-9 * std::sin(cut);
    q.abs_err_estimate = 1e-9;
    return q;
  };
  const auto r = ht::finite_part(f);
  EXPECT_NEAR(r.finite_part, 1.0, 1e-8);
}

TEST(FinitePart, ZeroForI0Integral) {
  const auto r = ht::i0_finite_part();
  EXPECT_LT(std::abs(r.finite_part), 1e-6);
}

TEST(FinitePart, MissingTermRaisesResidualError) {
  // an eps^{-3} term outside the basis cannot be fitted
  auto f = [](double cut) { return cut * cut * cut + 1.0; };
  EXPECT_THROW(ht::finite_part(f), ht::FitResidualError);
  ht::FinitePartOptions o;
  o.check_residual = false;
  EXPECT_NO_THROW(ht::finite_part(f, o));
}

TEST(FinitePart, IllConditionedBasisIsRejected) {
  ht::FinitePartOptions o;
  o.basis = {-2, -1, 0, 1, 2, 3, 4, 5, 6, 7, 8};
  o.eps_schedule = ht::geometric_schedule(0.1, 0.09, 16);
  EXPECT_THROW(ht::finite_part([](double c) { return c; }, o), ht::IllConditionedError);
}

TEST(FinitePart, ScheduleValidation) {
  ht::FinitePartOptions o;
  o.eps_schedule = {0.1, 0.2, 0.05, 0.01, 0.005, 0.001};
  EXPECT_THROW(ht::finite_part([](double c) { return c; }, o), ht::DomainError);
  o.eps_schedule = {0.1, 0.05};
  EXPECT_THROW(ht::finite_part([](double c) { return c; }, o), ht::DomainError);
  o = {};
  o.basis = {-1, 1};
  EXPECT_THROW(ht::finite_part([](double c) { return c; }, o), ht::DomainError);
}

TEST(FinitePart, GeometricSchedule) {
  const auto s = ht::geometric_schedule(0.1, 0.015, 12);
  ASSERT_EQ(s.size(), 12u);
  EXPECT_DOUBLE_EQ(s.front(), 0.1);
  EXPECT_DOUBLE_EQ(s.back(), 0.015);
  EXPECT_THROW(ht::geometric_schedule(0.01, 0.1, 5), ht::DomainError);
}

TEST(QuadProperties, FinitePartSynthetic) { EXPECT_PROPERTY(props::finite_part_synthetic()); }
TEST(QuadProperties, FinitePartRescaling) { EXPECT_PROPERTY(props::finite_part_rescaling()); }
TEST(QuadProperties, Linearity) { EXPECT_PROPERTY(props::integrate_linearity()); }
