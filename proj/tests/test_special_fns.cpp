#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <thread>

#include "heattrace/special_fns.hpp"
#include "support/expect.hpp"
#include "support/oracles.hpp"

namespace ht = heattrace;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

// Reference values below were computed once at 30 digits and frozen.

TEST(BesselI, FrozenValues) {
  EXPECT_LT(rel(ht::bessel_i(0.5, 1.0), 0.937674888245487646717), 1e-12);
  EXPECT_LT(rel(ht::bessel_i_scaled(3.0, 2.0), 0.0287912226394708984087), 1e-12);
  EXPECT_LT(rel(ht::bessel_i_scaled(0.0, 100.0), 0.0399443792990966826476), 1e-12);
}

TEST(BesselI, HalfOrderClosedForm) {
  for (double x : {0.01, 0.5, 3.0, 19.0, 21.0, 60.0, 300.0}) {
    const double exact = std::sqrt(2.0 / (M_PI * x)) * 0.5 * -std::expm1(-2.0 * x);
    EXPECT_LT(rel(ht::bessel_i_scaled(0.5, x), exact), 1e-12) << "x = " << x;
  }
}

TEST(BesselI, AgreesWithLongDoubleSeries) {
  double worst = 0.0;
  for (double nu = 0.0; nu <= 30.0; nu += 0.75)
    for (double x = 0.05; x <= 40.0; x *= 1.37) {
      const double o = oracle::bessel_i_scaled_series(nu, x);
      if (o < 1e-250) continue;
      worst = std::max(worst, rel(ht::bessel_i_scaled(nu, x), o));
    }
  EXPECT_LT(worst, 1e-11);
}

TEST(BesselI, BranchesAgreeAtCrossover) {
  const ht::SpecialFnConfig cfg;
  for (double nu : {0.0, 0.5, 2.0, 7.3, 10.0, 15.0, 25.0}) {
    const double x = ht::detail::series_crossover(nu);
    for (double xx : {0.98 * x, x, 1.02 * x}) {
      const double s = ht::detail::bessel_i_scaled_series(nu, xx, cfg);
      const double u = ht::detail::bessel_i_scaled_uniform(nu, xx);
      EXPECT_LT(rel(u, s), 1e-10) << "nu = " << nu << ", x = " << xx;
    }
  }
}

TEST(BesselI, ZeroArgument) {
  EXPECT_EQ(ht::bessel_i_scaled(0.0, 0.0), 1.0);
  EXPECT_EQ(ht::bessel_i_scaled(2.5, 0.0), 0.0);
}

TEST(BesselI, RejectsBadInput) {
  EXPECT_THROW(ht::bessel_i_scaled(-1.0, 1.0), ht::DomainError);
  EXPECT_THROW(ht::bessel_i_scaled(1.0, -1.0), ht::DomainError);
  EXPECT_THROW(ht::bessel_i_scaled(std::nan(""), 1.0), ht::DomainError);
  EXPECT_THROW(ht::bessel_i_scaled(0.0, std::numeric_limits<double>::infinity()), ht::DomainError);
}

TEST(BesselI, UnscaledOverflowIsReported) {
  EXPECT_THROW(ht::bessel_i(0.0, 800.0), ht::OverflowError);
  EXPECT_TRUE(std::isfinite(ht::bessel_i_scaled(0.0, 800.0)));
}

TEST(BesselI, RatioBoundHolds) {
  for (double nu : {0.0, 0.5, 3.0, 12.0})
    for (double x : {0.1, 1.0, 10.0, 50.0}) {
      const double q = ht::bessel_i_scaled(nu + 1.0, x) / ht::bessel_i_scaled(nu, x);
      EXPECT_LE(q, ht::bessel_i_ratio_bound(nu, x) * (1.0 + 1e-12));
    }
}

TEST(BesselI, OrderTailBoundCoversTail) {
  for (double step : {1.0, 1.5, 2.0, 3.0})
    for (double x : {0.5, 5.0, 30.0}) {
      const double nu0 = 4.0;
      double tail = 0.0;
      for (int j = 1; j < 400; ++j) tail += ht::bessel_i_scaled(nu0 + j * step, x);
      const double bound = ht::scaled_i_order_tail_bound(nu0, step, x, ht::bessel_i_scaled(nu0, x));
      EXPECT_GE(bound, tail) << "step " << step << ", x " << x;
    }
}

TEST(BesselKImag, FrozenValues) {
  EXPECT_LT(rel(ht::bessel_k_imag(0.0, 1.0), 0.421024438240708333336), 1e-11);
  EXPECT_LT(rel(ht::bessel_k_imag(1.0, 2.0), 0.0923854598903911815369), 1e-10);
  EXPECT_LT(rel(ht::bessel_k_imag(5.0, 1.0), 0.000380461827997563728), 1e-9);
}

TEST(BesselKImag, RealOrderZeroMatchesStandardLibrary) {
  for (double x : {0.05, 0.5, 2.0, 9.0}) EXPECT_LT(rel(ht::bessel_k_imag(0.0, x), ht::bessel_k(0.0, x)), 1e-11);
}

TEST(BesselKImag, EvenInOrder) {
  for (double mu : {0.3, 2.0, 7.5}) EXPECT_EQ(ht::bessel_k_imag_scaled(mu, 1.3), ht::bessel_k_imag_scaled(-mu, 1.3));
}

TEST(BesselKImag, LargeOrderStaysBounded) {
  // the scaled function oscillates with amplitude ~ sqrt(2 pi) / (mu^2 - x^2)^{1/4}
  for (double mu : {20.0, 40.0}) {
    const ht::KImagResult r = ht::bessel_k_imag_scaled_result(mu, 1.0);
    EXPECT_LT(std::abs(r.scaled), 2.0 * std::sqrt(2.0 * M_PI / mu));
    EXPECT_LT(r.abs_err, 1e-9);
  }
}

TEST(BesselKImag, TinyBudgetRaisesAccuracyLoss) {
  ht::SpecialFnConfig cfg;
  cfg.max_nodes = 50;
  EXPECT_THROW(ht::bessel_k_imag_scaled(30.0, 1.0, cfg), ht::AccuracyLossError);
}

TEST(BesselKImag, RejectsBadInput) {
  EXPECT_THROW(ht::bessel_k_imag(1.0, 0.0), ht::DomainError);
  EXPECT_THROW(ht::bessel_k_imag(std::nan(""), 1.0), ht::DomainError);
}

TEST(BesselZeros, FrozenValues) {
  EXPECT_NEAR(ht::bessel_j_zero(0.0, 1), 2.40482555769577276862, 1e-13);
  EXPECT_NEAR(ht::bessel_j_zero(2.0, 1), 5.13562230184068255630, 1e-13);
  EXPECT_NEAR(ht::bessel_j_zero(0.0, 5), 14.9309177084877859478, 1e-13);
  EXPECT_NEAR(ht::bessel_j_prime_zero(1.0, 1), 1.84118378134065930264, 1e-13);
  EXPECT_NEAR(ht::bessel_j_prime_zero(0.0, 2), 3.83170597020751231561, 1e-13);
  EXPECT_EQ(ht::bessel_j_prime_zero(0.0, 1), 0.0);
}

TEST(BesselZeros, MatchGridBracketing) {
  for (double nu : {0.0, 0.75, 2.0, 4.5}) {
    const auto grid = oracle::grid_roots([nu](double x) { return std::cyl_bessel_j(nu, x); }, 0.05, 40.0, 0.01);
    const auto lib = ht::bessel_j_zeros_below(nu, 40.0);
    ASSERT_EQ(lib.size(), grid.size()) << "nu = " << nu;
    for (std::size_t k = 0; k < lib.size(); ++k) EXPECT_NEAR(lib[k], grid[k], 1e-10);
  }
}

TEST(BesselZeros, CacheIsConsistentUnderConcurrency) {
  ht::BesselZeroCache cache;
  std::vector<double> got(8);
  std::vector<std::thread> pool;
  for (int w = 0; w < 8; ++w)
    pool.emplace_back([&, w] { got[static_cast<std::size_t>(w)] = ht::bessel_j_zero(1.0 + (w % 2), 3 + w % 3, &cache); });
  for (auto& th : pool) th.join();
  for (int w = 0; w < 8; ++w)
    EXPECT_EQ(got[static_cast<std::size_t>(w)], ht::bessel_j_zero(1.0 + (w % 2), 3 + w % 3));
  EXPECT_EQ(cache.size(), 2u);
}

TEST(BesselZeros, RejectsBadIndex) {
  EXPECT_THROW(ht::bessel_j_zero(0.0, 0), ht::DomainError);
  EXPECT_THROW(ht::bessel_j_prime_zero(-1.0, 1), ht::DomainError);
}

TEST(Erfc, FrozenValues) {
  EXPECT_LT(rel(ht::erfc(1.0), 0.157299207050285130659), 1e-14);
  EXPECT_LT(rel(ht::erfc(3.0), 2.20904969985854413728e-5), 1e-13);
  EXPECT_LT(rel(ht::erfc(-0.5), 1.52049987781304653768), 1e-14);
  EXPECT_LT(rel(ht::erfc(10.0), 2.08848758376254475700e-45), 1e-12);
  EXPECT_THROW(ht::erfc(std::nan("")), ht::DomainError);
}

TEST(Erfc, MatchesSimpsonOracle) {
  for (double x : {-2.0, -0.3, 0.0, 0.7, 2.5, 5.0}) EXPECT_LT(rel(ht::erfc(x), oracle::erfc_simpson(x)), 1e-12);
}

TEST(Erfc, ScaledFormIsContinuousAcrossBranches) {
  for (double x : {25.9, 26.0, 26.1}) {
    const double u = 1.0 / (x * x);
    EXPECT_LT(rel(ht::erfcx(x), (1.0 - 0.5 * u + 0.75 * u * u) / (x * std::sqrt(M_PI))), 1e-8);
  }
  EXPECT_LT(rel(ht::erfcx(25.999), ht::erfcx(26.001)), 1e-4);
  EXPECT_LT(rel(ht::erfcx(-1.0), std::exp(1.0) * ht::erfc(-1.0)), 1e-14);
}

TEST(SpecialFnConfig, Validation) {
  ht::SpecialFnConfig c;
  EXPECT_NO_THROW(c.validate());
  c.rel_tol = 1e-3;
  EXPECT_THROW(c.validate(), ht::DomainError);
  c = {};
  c.max_terms = 10;
  EXPECT_THROW(c.validate(), ht::DomainError);
}

TEST(SpecialFnProperties, Recurrence) { EXPECT_PROPERTY(props::bessel_recurrence()); }
TEST(SpecialFnProperties, PrimitiveDerivative) { EXPECT_PROPERTY(props::primitive_derivative()); }
TEST(SpecialFnProperties, ImaginaryOrderVsTrapezoid) { EXPECT_PROPERTY(props::k_imag_vs_oracle()); }
TEST(SpecialFnProperties, ZeroInterlacing) { EXPECT_PROPERTY(props::zero_interlacing()); }
