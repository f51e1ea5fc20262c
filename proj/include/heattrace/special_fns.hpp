#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "errors.hpp"
#include "quad.hpp"

namespace heattrace {

struct SpecialFnConfig {
  double rel_tol = 1e-12;
  int max_terms = 100000;
  std::size_t max_nodes = 4'000'000;

  void validate() const {
    if (!(rel_tol > 0.0 && rel_tol <= 1e-6)) throw DomainError("SpecialFnConfig: rel_tol must lie in (0, 1e-6]");
    if (max_terms < 50) throw DomainError("SpecialFnConfig: max_terms must be >= 50");
  }
};

namespace detail {

constexpr double kPi = 3.141592653589793238462643383279502884;

inline void require_finite_nonneg(const char* fn, double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) throw DomainError(std::string(fn) + ": " + name + " must be finite and >= 0");
}

// Coefficients of the polynomials U_k(p) of the uniform expansion of I_nu:
// U_0 = 1, U_{k+1} = p^2 (1-p^2) U_k'/2 + (1/8) int_0^p (1 - 5t^2) U_k(t) dt.
// u[k][m] is the coefficient of p^m.
inline const std::vector<std::vector<double>>& olver_u_table() {
  static const std::vector<std::vector<double>> table = [] {
    constexpr int kMax = 30;
    std::vector<std::vector<double>> u(kMax + 1);
    u[0] = {1.0};
    for (int k = 0; k < kMax; ++k) {
      const auto& c = u[static_cast<std::size_t>(k)];
      std::vector<double> next(c.size() + 3, 0.0);
      for (std::size_t m = 1; m < c.size(); ++m) {
        const double d = c[m] * static_cast<double>(m);  // coefficient of p^(m-1) in U_k'
        next[m + 1] += 0.5 * d;
        next[m + 3] -= 0.5 * d;
      }
      for (std::size_t m = 0; m < c.size(); ++m) {
        next[m + 1] += 0.125 * c[m] / static_cast<double>(m + 1);
        next[m + 3] -= 0.125 * 5.0 * c[m] / static_cast<double>(m + 3);
      }
      u[static_cast<std::size_t>(k + 1)] = std::move(next);
    }
    return u;
  }();
  return table;
}

// e^{-x} I_nu(x) from the power series, with running rescaling so that large
// orders do not overflow the partial sum.
inline double bessel_i_scaled_series(double nu, double x, const SpecialFnConfig& cfg) {
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  const double q = 0.25 * x * x;
  double term = 1.0, sum = 1.0, log_scale = 0.0;
  constexpr double kBig = 1e280;
  const double eps = 0.25 * std::numeric_limits<double>::epsilon();
  int k = 1;
  for (; k <= cfg.max_terms; ++k) {
    term *= q / (static_cast<double>(k) * (static_cast<double>(k) + nu));
    sum += term;
    if (sum > kBig) {
      sum /= kBig;
      term /= kBig;
      log_scale += std::log(kBig);
    }
    // stop once terms are decreasing and negligible
    if (q < static_cast<double>(k + 1) * (static_cast<double>(k + 1) + nu) && term < eps * sum) break;
  }
  if (k > cfg.max_terms) throw NonConvergenceError("bessel_i: power series did not converge within max_terms", 0.0, x);
  const double log_pre = nu * std::log(0.5 * x) - std::lgamma(nu + 1.0) - x + log_scale;
  return std::exp(log_pre + std::log(sum));
}

// e^{-x} I_nu(x) from the uniform asymptotic expansion, written in terms of
// rho = sqrt(nu^2 + x^2) so that nu -> 0 reduces to the large-x expansion.
inline double bessel_i_scaled_uniform(double nu, double x) {
  const auto& U = olver_u_table();
  const double rho = std::hypot(nu, x);
  const double p = nu / rho;
  const double w = 1.0 / rho;
  // nu*eta - x = nu^2/(rho + x) + nu*log(x/(nu + rho))
  const double expo = nu * nu / (rho + x) + (nu > 0.0 ? nu * std::log(x / (nu + rho)) : 0.0);
  // Both stopping tests look at two consecutive terms: a U_k(p) passing near
  // zero must neither end the sum nor look like divergence.
  double sum = 1.0, wk = 1.0, prev = std::numeric_limits<double>::infinity(), prev2 = prev;
  for (std::size_t k = 1; k < U.size(); ++k) {
    wk *= w;
    // U_k(p)/nu^k = sum_m c_{k,m} p^(m-k) w^k
    double poly = 0.0, pm = 1.0;
    for (std::size_t m = k; m < U[k].size(); ++m) {
      poly += U[k][m] * pm;
      pm *= p;
    }
    const double t = poly * wk;
    const double mag = std::max(std::abs(t), prev);
    if (k > 2 && mag > std::max(prev, prev2)) break;  // asymptotic series started to diverge
    sum += t;
    if (mag < 0.25 * std::numeric_limits<double>::epsilon() * std::abs(sum)) break;
    prev2 = prev;
    prev = std::abs(t);
  }
  return std::exp(expo) / std::sqrt(2.0 * kPi * rho) * sum;
}

inline double series_crossover(double nu) { return std::max(20.0, 2.0 * nu); }

}  // namespace detail

// e^{-x} I_nu(x) for real nu >= 0, x >= 0.
inline double bessel_i_scaled(double nu, double x, const SpecialFnConfig& cfg = {}) {
  detail::require_finite_nonneg("bessel_i_scaled", nu, "nu");
  detail::require_finite_nonneg("bessel_i_scaled", x, "x");
  if (x <= detail::series_crossover(nu)) return detail::bessel_i_scaled_series(nu, x, cfg);
  return detail::bessel_i_scaled_uniform(nu, x);
}

// I_nu(x); throws OverflowError when the value exceeds the double range.
inline double bessel_i(double nu, double x, const SpecialFnConfig& cfg = {}) {
  const double s = bessel_i_scaled(nu, x, cfg);
  if (s == 0.0) return 0.0;
  const double lg = std::log(s) + x;
  if (lg >= std::log(std::numeric_limits<double>::max()))
    throw OverflowError("bessel_i: I_nu(x) overflows; use bessel_i_scaled");
  return s * std::exp(x);
}

// Upper bound on I_{nu+1}(x)/I_nu(x); it decreases in nu.
inline double bessel_i_ratio_bound(double nu, double x) {
  if (x == 0.0) return 0.0;
  return x / (nu + std::hypot(x, nu));
}

// Rigorous bound on sum_{j>=1} e^{-x} I_{nu0 + j*step}(x), given the scaled
// value at nu0. Orders inside each unit window [nu0+m, nu0+m+1) are at most
// 1/step + 1 in number and each is bounded by I_{nu0+m} <= q^m I_{nu0}.
inline double scaled_i_order_tail_bound(double nu0, double step, double x, double scaled_at_nu0) {
  const double q = bessel_i_ratio_bound(nu0, x);
  const double per_window = 1.0 / step + 1.0;
  double bound = std::numeric_limits<double>::infinity();
  if (q < 1.0) bound = per_window * scaled_at_nu0 / (1.0 - q);
  // e^{-x} I_nu(x) <= (x/2)^nu / Gamma(nu+1); summed over the remaining orders
  // with the same window argument this is a second, cruder bound.
  const double nu1 = nu0 + step;
  const double lead = std::exp(nu1 * std::log(std::max(0.5 * x, 1e-300)) - std::lgamma(nu1 + 1.0));
  const double r1 = 0.5 * x / (nu1 + 1.0);
  if (r1 < 1.0) bound = std::min(bound, per_window * lead / (1.0 - r1));
  return bound;
}

// ---------------------------------------------------------------------------
// K_{i mu}(x), real for real mu, x > 0.
//
// Writing K_{i mu}(x) = (1/2) int exp(-x cosh w - i mu w) dw and shifting to the
// path w = u - i v(u) with x sinh(u) sin(v) = mu u keeps the integrand real and
// positive, so no e^{pi mu/2} cancellation occurs. For mu > x the path runs
// along Im w = -pi/2 up to u*, where sinh(u*)/u* = mu/x, contributing the
// oscillatory piece e^{-pi mu/2} int_0^{u*} cos(mu u - x sinh u) du.

struct KImagResult {
  double scaled = 0.0;  // e^{pi mu/2} K_{i mu}(x)
  double abs_err = 0.0;
  double l1 = 0.0;
  std::size_t nodes = 0;
};

namespace detail {

inline double u_over_sinh(double u) {
  if (std::abs(u) < 1e-4) return 1.0 - u * u / 6.0;
  return u / std::sinh(u);
}

// Exponent of the path integrand, shifted by pi mu/2.
inline double kimag_path_exponent(double mu, double x, double u) {
  double s = (mu / x) * u_over_sinh(u);
  s = std::min(s, 1.0);
  const double v = std::asin(s);
  const double c = std::sqrt((1.0 - s) * (1.0 + s));
  return -x * std::cosh(u) * c - mu * v + 0.5 * kPi * mu;
}

// Solves g(u) = level for g monotone on [lo, hi].
template <class G>
double monotone_solve(G&& g, double level, double lo, double hi) {
  double glo = g(lo) - level, ghi = g(hi) - level;
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  if ((glo > 0) == (ghi > 0)) return std::abs(glo) < std::abs(ghi) ? lo : hi;
  auto fn = [&](double u) { return g(u) - level; };
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(fn, lo, hi, glo, ghi, boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace detail

inline KImagResult bessel_k_imag_scaled_result(double mu, double x, const SpecialFnConfig& cfg = {}) {
  if (!std::isfinite(mu)) throw DomainError("bessel_k_imag: mu must be finite");
  if (!std::isfinite(x) || !(x > 0.0)) throw DomainError("bessel_k_imag: x must be finite and > 0");
  mu = std::abs(mu);  // K_{i mu} is even in mu
  QuadOptions qo;
  qo.abs_tol = 0.0;
  qo.rel_tol = 0.05 * cfg.rel_tol;
  qo.max_nodes = cfg.max_nodes;
  KImagResult out;
  bool ok = true;

  auto steep_end = [&](auto&& expo, double start, double e_ref) {
    double step = 0.5, u = start + step;
    while (expo(u) - e_ref > -60.0 && u < 60.0) {
      step *= 2.0;
      u = start + step;
    }
    return u;
  };

  if (mu < x) {
    const double e0 = detail::kimag_path_exponent(mu, x, 0.0);
    auto expo = [&](double u) { return detail::kimag_path_exponent(mu, x, u); };
    const double uend = steep_end(expo, 0.0, e0);
    auto f = [&](double u) { return std::exp(expo(u) - e0); };
    bool c = false;
    QuadResult r = detail::adaptive(f, detail::linspace_breaks(0.0, uend, 8), qo, &c);
    ok = c;
    const double scale = std::exp(e0);
    out.scaled = r.value * scale;
    out.abs_err = r.abs_err_estimate * scale;
    out.l1 = r.l1_norm * scale;
    out.nodes = r.nodes_used;
  } else {
    const double ratio = mu / x;
    double ustar = 0.0;
    if (ratio > 1.0) {
      double hi = 1.0;
      while (std::sinh(hi) / hi < ratio) hi *= 2.0;
      ustar = detail::monotone_solve([](double u) { return u > 0 ? std::sinh(u) / u : 1.0; }, ratio, 0.0, hi);
    }
    // K_{i mu}(x) e^{pi mu/2} oscillates with amplitude about
    // sqrt(2 pi)/(mu^2 - x^2)^{1/4}; asking for more than the rounding error of
    // the phase mu*u only exhausts the node budget.
    const double amp_tol = 0.05 * cfg.rel_tol * std::sqrt(2.0 * detail::kPi) /
                           std::pow(std::max(mu * mu - x * x, 1.0), 0.25);
    const double phase_floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(mu * ustar, 1.0);
    // oscillatory piece on [0, u*], cut at every 3*pi of phase variation
    QuadResult osc;
    if (ustar > 0.0) {
      auto psi = [&](double u) { return mu * u - x * std::sinh(u); };
      const double us = std::acosh(ratio);
      const double peak = psi(us);
      const double dphi = 3.0 * detail::kPi;
      std::vector<double> br{0.0};
      for (double lev = dphi; lev < peak; lev += dphi) br.push_back(detail::monotone_solve(psi, lev, 0.0, us));
      br.push_back(us);
      std::vector<double> down;
      for (double lev = dphi; lev < peak; lev += dphi)
        down.push_back(detail::monotone_solve([&](double u) { return -psi(u); }, -lev, us, ustar));
      std::reverse(down.begin(), down.end());
      br.insert(br.end(), down.begin(), down.end());
      br.push_back(ustar);
      std::sort(br.begin(), br.end());
      br.erase(std::unique(br.begin(), br.end()), br.end());
      auto f = [&](double u) { return std::cos(psi(u)); };
      QuadOptions oo = qo;
      oo.rel_tol = 0.0;
      oo.abs_tol = std::max(amp_tol, phase_floor * ustar);
      bool c = false;
      osc = detail::adaptive(f, br, oo, &c);
      ok = ok && c;
    }
    // steep piece from u*, with u = u* + w^2 to remove the square-root
    // behaviour of the path angle at u*
    auto expo = [&](double w) { return detail::kimag_path_exponent(mu, x, ustar + w * w); };
    const double wend = std::sqrt(steep_end([&](double u) { return detail::kimag_path_exponent(mu, x, ustar + u); }, 0.0, 0.0));
    auto g = [&](double w) { return 2.0 * w * std::exp(expo(w)); };
    bool c = false;
    QuadOptions so = qo;
    so.rel_tol = 0.0;
    so.abs_tol = amp_tol;
    QuadResult st = detail::adaptive(g, detail::linspace_breaks(0.0, std::max(wend, 1e-3), 8), so, &c);
    ok = ok && c;
    out.scaled = osc.value + st.value;
    out.abs_err = osc.abs_err_estimate + st.abs_err_estimate;
    out.l1 = osc.l1_norm + st.l1_norm;
    out.nodes = osc.nodes_used + st.nodes_used;
  }
  const double floor_scale = 1e-4 * out.l1;
  if (!ok && out.abs_err > cfg.rel_tol * std::max(std::abs(out.scaled), floor_scale)) {
    const double achieved = out.abs_err / std::max(std::abs(out.scaled), std::numeric_limits<double>::min());
    throw AccuracyLossError("bessel_k_imag: quadrature budget exhausted before reaching rel_tol", achieved);
  }
  return out;
}

// e^{pi mu/2} K_{i mu}(x).
inline double bessel_k_imag_scaled(double mu, double x, const SpecialFnConfig& cfg = {}) {
  return bessel_k_imag_scaled_result(mu, x, cfg).scaled;
}

// K_{i mu}(x).
inline double bessel_k_imag(double mu, double x, const SpecialFnConfig& cfg = {}) {
  const double s = bessel_k_imag_scaled(mu, x, cfg);
  return s * std::exp(-0.5 * detail::kPi * std::abs(mu));
}

// K_nu(x) of real order, from the standard library.
inline double bessel_k(double nu, double x) {
  detail::require_finite_nonneg("bessel_k", nu, "nu");
  if (!std::isfinite(x) || !(x > 0.0)) throw DomainError("bessel_k: x must be finite and > 0");
  return std::cyl_bessel_k(nu, x);
}

// ---------------------------------------------------------------------------
// J_nu and zeros

inline double bessel_j(double nu, double x) {
  detail::require_finite_nonneg("bessel_j", nu, "nu");
  detail::require_finite_nonneg("bessel_j", x, "x");
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  return std::cyl_bessel_j(nu, x);
}

// J_nu'(x) = (nu/x) J_nu(x) - J_{nu+1}(x).
inline double bessel_j_prime(double nu, double x) {
  detail::require_finite_nonneg("bessel_j_prime", nu, "nu");
  if (!(x > 0.0)) throw DomainError("bessel_j_prime: x must be > 0");
  return (nu / x) * std::cyl_bessel_j(nu, x) - std::cyl_bessel_j(nu + 1.0, x);
}

namespace detail {

inline double refine_root(const std::function<double(double)>& f, double lo, double hi, double flo, double fhi) {
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw NonConvergenceError("bessel zero: bracket has no sign change", lo, hi);
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), iters);
  if (iters >= 200) throw NonConvergenceError("bessel zero: refinement did not converge", r.first, r.second);
  return 0.5 * (r.first + r.second);
}

// Zeros of J_nu in (0, xmax] (or the first `count` zeros if count > 0).
// Consecutive zeros are more than 2.4 apart for every nu >= 0 and the first
// exceeds nu, so a unit-step sign scan starting at nu cannot skip one.
inline std::vector<double> j_zeros(double nu, double xmax, int count) {
  std::vector<double> z;
  auto f = [nu](double x) { return x == 0.0 ? (nu == 0.0 ? 1.0 : 0.0) : std::cyl_bessel_j(nu, x); };
  double a = nu, fa = nu == 0.0 ? 1.0 : f(nu);
  if (nu > 0.0 && fa <= 0.0) throw NonConvergenceError("bessel zero: unexpected sign at x = nu", nu, nu);
  while (true) {
    if (count > 0 && static_cast<int>(z.size()) >= count) break;
    if (count <= 0 && a >= xmax) break;
    const double b = a + 1.0;
    const double fb = f(b);
    if (fb == 0.0 || (fa > 0) != (fb > 0)) {
      const double root = refine_root(f, a, b, fa, fb);
      if (count <= 0 && root > xmax) break;
      z.push_back(root);
      if (fb == 0.0) {  // step past an exact grid zero
        a = b + 1e-9;
        fa = f(a);
        continue;
      }
    }
    a = b;
    fa = fb;
  }
  return z;
}

// Zeros of J_nu' interlace with those of J_nu: one in (0, j_1) for nu > 0 and
// one in each (j_k, j_{k+1}). For nu = 0 the root x = 0 (constant mode) is
// listed first.
inline std::vector<double> jp_zeros(double nu, double xmax, int count) {
  std::vector<double> z;
  if (nu == 0.0) z.push_back(0.0);
  auto fp = [nu](double x) { return (nu / x) * std::cyl_bessel_j(nu, x) - std::cyl_bessel_j(nu + 1.0, x); };
  const double limit = count > 0 ? std::numeric_limits<double>::infinity() : xmax;
  // enough J zeros to bracket every requested derivative zero
  std::vector<double> jz;
  int need = count > 0 ? count + 1 : 0;
  jz = count > 0 ? j_zeros(nu, 0.0, need) : j_zeros(nu, xmax + 4.0, 0);
  if (count <= 0) {
    // make sure one J zero beyond xmax is known so the last bracket closes
    std::vector<double> more = j_zeros(nu, 0.0, static_cast<int>(jz.size()) + 1);
    jz = std::move(more);
  }
  std::vector<std::pair<double, double>> brackets;
  if (nu > 0.0) brackets.emplace_back(nu, jz.front());
  for (std::size_t k = 0; k + 1 < jz.size(); ++k) brackets.emplace_back(jz[k], jz[k + 1]);
  for (auto [lo, hi] : brackets) {
    if (count > 0 && static_cast<int>(z.size()) >= count) break;
    const double root = refine_root(fp, lo, hi, fp(lo), fp(hi));
    if (root > limit) break;
    z.push_back(root);
  }
  if (count > 0 && static_cast<int>(z.size()) < count) throw NonConvergenceError("bessel derivative zero: ran out of brackets", 0.0, jz.back());
  return z;
}

}  // namespace detail

// Memo of zero lists keyed by (order, kind). Concurrent readers, serialized
// writers.
class BesselZeroCache {
 public:
  enum class Kind { J, JPrime };

  double get(double nu, int k, Kind kind) {
    if (k < 1) throw DomainError("bessel zero: index k must be >= 1");
    const Key key{nu, kind == Kind::J ? 0 : 1};
    {
      std::shared_lock lock(mutex_);
      auto it = zeros_.find(key);
      if (it != zeros_.end() && static_cast<int>(it->second.size()) >= k) return it->second[static_cast<std::size_t>(k - 1)];
    }
    const int want = std::max(k, 16);
    std::vector<double> z = kind == Kind::J ? detail::j_zeros(nu, 0.0, want) : detail::jp_zeros(nu, 0.0, want);
    const double v = z[static_cast<std::size_t>(k - 1)];
    std::unique_lock lock(mutex_);
    auto& slot = zeros_[key];
    if (slot.size() < z.size()) slot = std::move(z);
    return v;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return zeros_.size();
  }

 private:
  using Key = std::pair<double, int>;
  mutable std::shared_mutex mutex_;
  std::map<Key, std::vector<double>> zeros_;
};

// k-th positive zero of J_nu (k >= 1).
inline double bessel_j_zero(double nu, int k, BesselZeroCache* cache = nullptr) {
  detail::require_finite_nonneg("bessel_j_zero", nu, "nu");
  if (k < 1) throw DomainError("bessel_j_zero: k must be >= 1");
  if (cache) return cache->get(nu, k, BesselZeroCache::Kind::J);
  return detail::j_zeros(nu, 0.0, k)[static_cast<std::size_t>(k - 1)];
}

// k-th zero of J_nu' counting x = 0 as the first one when nu = 0.
inline double bessel_j_prime_zero(double nu, int k, BesselZeroCache* cache = nullptr) {
  detail::require_finite_nonneg("bessel_j_prime_zero", nu, "nu");
  if (k < 1) throw DomainError("bessel_j_prime_zero: k must be >= 1");
  if (cache) return cache->get(nu, k, BesselZeroCache::Kind::JPrime);
  return detail::jp_zeros(nu, 0.0, k)[static_cast<std::size_t>(k - 1)];
}

inline std::vector<double> bessel_j_zeros_below(double nu, double xmax) { return detail::j_zeros(nu, xmax, 0); }
inline std::vector<double> bessel_j_prime_zeros_below(double nu, double xmax) { return detail::jp_zeros(nu, xmax, 0); }

// ---------------------------------------------------------------------------
// Error functions

inline double erfc(double x) {
  if (std::isnan(x)) throw DomainError("erfc: x is NaN");
  return std::erfc(x);
}

// exp(x^2) erfc(x) without overflow.
inline double erfcx(double x) {
  if (std::isnan(x)) throw DomainError("erfcx: x is NaN");
  if (x < 0.0) {
    const double p = x * x;
    const double e = std::fma(x, x, -p);
    return 2.0 * std::exp(p) * (1.0 + e) - erfcx(-x);
  }
  if (x < 26.0) {
    // exp(x^2) with the rounding error of x*x restored through fma
    const double p = x * x;
    const double e = std::fma(x, x, -p);
    return std::erfc(x) * std::exp(p) * (1.0 + e);
  }
  // asymptotic series 1/(x sqrt(pi)) * sum (-1)^k (2k-1)!! / (2x^2)^k
  const double inv = 1.0 / (2.0 * x * x);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 40; ++k) {
    const double next = -term * (2.0 * k - 1.0) * inv;
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum / (x * std::sqrt(detail::kPi));
}

}  // namespace heattrace
