#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "quad.hpp"
#include "special_fns.hpp"

namespace heattrace {

struct BoundaryCondition {
  enum class Kind { Dirichlet, Neumann, Robin };
  Kind kind = Kind::Dirichlet;
  double robin_kappa = 0.0;  // used only for Robin, with du/dn = kappa u along the inward normal

  static BoundaryCondition dirichlet() { return {Kind::Dirichlet, 0.0}; }
  static BoundaryCondition neumann() { return {Kind::Neumann, 0.0}; }
  static BoundaryCondition robin(double kappa) {
    if (!std::isfinite(kappa) || !(kappa > 0.0)) throw DomainError("BoundaryCondition: Robin kappa must be finite and > 0");
    return {Kind::Robin, kappa};
  }

  bool is_dirichlet() const { return kind == Kind::Dirichlet; }
  char tag() const { return kind == Kind::Dirichlet ? 'D' : kind == Kind::Neumann ? 'N' : 'R'; }
};

struct SectorSpec {
  double gamma = detail::kPi;
  BoundaryCondition bc_at_0 = BoundaryCondition::dirichlet();
  BoundaryCondition bc_at_gamma = BoundaryCondition::dirichlet();

  void validate() const {
    if (!std::isfinite(gamma) || !(gamma > 0.0 && gamma < 2.0 * detail::kPi))
      throw DomainError("SectorSpec: gamma must lie in (0, 2*pi)");
    if (bc_at_0.kind == BoundaryCondition::Kind::Robin || bc_at_gamma.kind == BoundaryCondition::Kind::Robin)
      throw UnsupportedError("SectorSpec: Robin edges have no sector model");
  }
};

// Angular eigenfunction on [0, gamma] with unit L2 norm. `order` is the Bessel
// order sqrt(angular eigenvalue).
struct AngularMode {
  int j = 1;
  double order = 0.0;
  double amplitude = 0.0;  // sqrt(2/gamma), or sqrt(1/gamma) for the constant mode
  double freq = 0.0;       // phi_j(theta) = amplitude * trig(freq * theta)
  bool cosine = false;

  double operator()(double theta) const {
    return amplitude * (cosine ? std::cos(freq * theta) : std::sin(freq * theta));
  }
};

inline AngularMode angular_mode(const SectorSpec& spec, int j) {
  spec.validate();
  if (j < 1) throw DomainError("angular_mode: j must be >= 1");
  const double g = spec.gamma;
  const bool d0 = spec.bc_at_0.is_dirichlet(), dg = spec.bc_at_gamma.is_dirichlet();
  AngularMode m;
  m.j = j;
  m.amplitude = std::sqrt(2.0 / g);
  if (d0 && dg) {
    m.freq = j * detail::kPi / g;
  } else if (!d0 && !dg) {
    m.freq = (j - 1) * detail::kPi / g;
    m.cosine = true;
    if (j == 1) m.amplitude = std::sqrt(1.0 / g);
  } else {
    m.freq = (j - 0.5) * detail::kPi / g;
    m.cosine = !d0;  // Neumann at 0, Dirichlet at gamma
  }
  m.order = m.freq;
  return m;
}

// Spacing of consecutive Bessel orders.
inline double mode_step(const SectorSpec& spec) { return detail::kPi / spec.gamma; }

// ---------------------------------------------------------------------------
// Series heat kernel on the infinite sector

struct KernelResult {
  double value = 0.0;
  double tail_bound = 0.0;
  int terms = 0;
};

inline KernelResult sector_heat_kernel_result(const SectorSpec& spec, double t, double r, double theta, double r0,
                                              double theta0, double tol = 1e-12, const SpecialFnConfig& cfg = {}) {
  spec.validate();
  if (!std::isfinite(t) || !(t > 0.0)) throw DomainError("sector_heat_kernel: t must be > 0");
  if (!(r >= 0.0) || !(r0 >= 0.0) || !std::isfinite(r) || !std::isfinite(r0)) throw DomainError("sector_heat_kernel: radii must be finite and >= 0");
  const double g = spec.gamma;
  auto in_range = [g](double a) { return a >= 0.0 && a <= g; };
  if (!in_range(theta) || !in_range(theta0)) throw DomainError("sector_heat_kernel: angles must lie in [0, gamma]");
  if (!(tol > 0.0)) throw DomainError("sector_heat_kernel: tol must be > 0");

  const double z = r * r0 / (2.0 * t);
  const double dr = r - r0;
  const double pref = std::exp(-dr * dr / (4.0 * t)) / (2.0 * t);
  const double step = mode_step(spec);
  const double sup2 = 2.0 / g;  // bound on |phi_j|^2
  KernelResult out;
  if (z == 0.0) {
    const AngularMode m = angular_mode(spec, 1);
    out.value = m.order == 0.0 ? pref * m(theta) * m(theta0) : 0.0;
    out.terms = 1;
    return out;
  }
  // whole-sum bound: sum_j e^{-z} I_{mu_j}(z) <= 1 + 1/step, since the integer
  // orders satisfy sum_{m>=0} e^{-z} I_m(z) <= 1
  const double total_bound = pref * sup2 * (1.0 + 1.0 / step);
  if (total_bound <= 0.5 * tol) {
    out.tail_bound = total_bound;
    return out;
  }
  detail::Accumulator acc;
  for (int j = 1;; ++j) {
    if (j > cfg.max_terms)
      throw ToleranceError("sector_heat_kernel: mode budget exhausted before reaching tol", out.tail_bound);
    const AngularMode m = angular_mode(spec, j);
    const double s = bessel_i_scaled(m.order, z, cfg);
    acc.add(pref * s * m(theta) * m(theta0));
    out.terms = j;
    out.tail_bound = pref * sup2 * scaled_i_order_tail_bound(m.order, step, z, s);
    if (j >= 5 && out.tail_bound <= tol) break;
  }
  out.value = acc.value();
  return out;
}

inline double sector_heat_kernel(const SectorSpec& spec, double t, double r, double theta, double r0, double theta0,
                                 double tol = 1e-12) {
  return sector_heat_kernel_result(spec, t, r, theta, r0, theta0, tol).value;
}

// ---------------------------------------------------------------------------
// Kontorovich-Lebedev Green's functions of s + Laplacian on the sector

struct GreensResult {
  double value = 0.0;
  double abs_err = 0.0;
  double mu_max = 0.0;
  std::size_t nodes = 0;
};

namespace detail {

// -expm1(-a)/-expm1(-b) with its limit a/b at 0.
inline double expm1_ratio(double a, double b) {
  if (b == 0.0) return 1.0;
  if (a == 0.0 && b == 0.0) return 1.0;
  const double den = -std::expm1(-b);
  if (den == 0.0) return a / b;
  return -std::expm1(-a) / den;
}

// Bracket terms times e^{-pi mu}, written with decaying exponentials only.
// Each term has a gap delta with |term| <= c e^{-delta mu}.
struct KlTerms {
  double gamma, delta_abs, sigma, sum;  // sum = phi + phi0

  double a(double mu) const {
    return 0.5 * (std::exp(-delta_abs * mu) + std::exp(-(2.0 * kPi - delta_abs) * mu));
  }
  // sinh(pi mu)/sinh(gamma mu) cosh(sigma mu)
  double b(double mu) const {
    const double ratio = mu == 0.0 ? kPi / gamma : expm1_ratio(2.0 * kPi * mu, 2.0 * gamma * mu);
    return ratio * 0.5 * (std::exp(-(2.0 * gamma - sum) * mu) + std::exp(-sum * mu));
  }
  // sinh((pi-gamma) mu)/sinh(gamma mu) cosh(Delta mu)
  double c(double mu) const {
    const double a_ = std::abs(kPi - gamma);
    const double sign = kPi >= gamma ? 1.0 : -1.0;
    const double ratio = mu == 0.0 ? a_ / gamma : expm1_ratio(2.0 * a_ * mu, 2.0 * gamma * mu);
    const double m = 2.0 * std::min(kPi, gamma);
    return sign * ratio * 0.5 * (std::exp(-(m - delta_abs) * mu) + std::exp(-(m + delta_abs) * mu));
  }
  // sinh(pi mu)/cosh(gamma mu) sinh(sigma mu)
  double f(double mu) const {
    const double ratio = -std::expm1(-2.0 * kPi * mu) / (1.0 + std::exp(-2.0 * gamma * mu));
    return ratio * 0.5 * (std::exp(-(2.0 * gamma - sum) * mu) - std::exp(-sum * mu));
  }
  // -cosh((pi-gamma) mu)/cosh(gamma mu) cosh(Delta mu)
  double e(double mu) const {
    const double a_ = std::abs(kPi - gamma);
    const double ratio = (1.0 + std::exp(-2.0 * a_ * mu)) / (1.0 + std::exp(-2.0 * gamma * mu));
    const double m = 2.0 * std::min(kPi, gamma);
    return -ratio * 0.5 * (std::exp(-(m - delta_abs) * mu) + std::exp(-(m + delta_abs) * mu));
  }
};

}  // namespace detail

inline GreensResult greens_kl_result(const SectorSpec& spec, double s, double r, double phi, double r0, double phi0,
                                     double tol = 1e-10, const SpecialFnConfig& cfg = {}) {
  spec.validate();
  if (!std::isfinite(s) || !(s > 0.0)) throw DomainError("greens_kl: s must be > 0");
  if (!(r > 0.0) || !(r0 > 0.0) || !std::isfinite(r) || !std::isfinite(r0)) throw DomainError("greens_kl: radii must be finite and > 0");
  const double g = spec.gamma;
  if (!(phi >= 0.0 && phi <= g && phi0 >= 0.0 && phi0 <= g)) throw DomainError("greens_kl: angles must lie in [0, gamma]");
  if (phi == phi0) throw DomainError("greens_kl: on-diagonal angle (phi == phi0) is not supported");
  if (!(tol > 0.0)) throw DomainError("greens_kl: tol must be > 0");

  const bool d0 = spec.bc_at_0.is_dirichlet(), dg = spec.bc_at_gamma.is_dirichlet();
  const bool mixed = d0 != dg;
  if (mixed && !d0) {  // reflect so that the Dirichlet edge sits at angle 0
    phi = g - phi;
    phi0 = g - phi0;
  }
  detail::KlTerms terms{g, std::abs(phi - phi0), phi + phi0 - g, phi + phi0};
  const double gap_a = terms.delta_abs;
  const double gap_b = std::min(terms.sum, 2.0 * g - terms.sum);
  const double gap_c = 2.0 * std::min(detail::kPi, g) - terms.delta_abs;
  const double gap = std::min({gap_a, gap_b, gap_c});
  if (gap < 1e-3) throw DomainError("greens_kl: decay gap below 1e-3 (point too close to the diagonal or an edge)");
  const double mu_max = (-std::log(tol) + 10.0) / gap;

  const double x1 = r * std::sqrt(s), x2 = r0 * std::sqrt(s);
  const double inv_pi2 = 1.0 / (detail::kPi * detail::kPi);
  auto integrand = [&](double mu) {
    double br;
    if (!mixed)
      br = terms.a(mu) + (d0 ? -terms.b(mu) : terms.b(mu)) + terms.c(mu);
    else
      br = terms.a(mu) + terms.f(mu) + terms.e(mu);
    if (br == 0.0) return 0.0;
    const double p = bessel_k_imag_scaled(mu, x1, cfg) * bessel_k_imag_scaled(mu, x2, cfg);
    return inv_pi2 * p * br;
  };
  // K_{i mu}(x) oscillates in mu with phase about mu*log(2 mu/x); start with
  // roughly one panel per half period
  const double xmin = std::min(x1, x2);
  const double phase = mu_max * std::max(1.0, std::log(2.0 * mu_max / xmin));
  const int panels = static_cast<int>(std::clamp(phase / detail::kPi, 16.0, 4000.0));
  QuadOptions qo;
  qo.abs_tol = 0.5 * tol;
  qo.rel_tol = 0.0;
  qo.max_nodes = 400'000;
  bool ok = false;
  QuadResult q = detail::adaptive(integrand, detail::linspace_breaks(0.0, mu_max, panels), qo, &ok);
  if (!ok) throw BudgetExceededError("greens_kl: mu-integral did not reach tol", q.value, q.abs_err_estimate);
  GreensResult out;
  out.value = q.value;
  out.abs_err = q.abs_err_estimate;
  out.mu_max = mu_max;
  out.nodes = q.nodes_used;
  return out;
}

inline double greens_kl(const SectorSpec& spec, double s, double r, double phi, double r0, double phi0,
                        double tol = 1e-10) {
  return greens_kl_result(spec, s, r, phi, r0, phi0, tol).value;
}

// ---------------------------------------------------------------------------
// Half-plane {y >= 0}

inline double half_plane_kernel(const BoundaryCondition& bc, double t, double x, double y, double x0, double y0) {
  if (!std::isfinite(t) || !(t > 0.0)) throw DomainError("half_plane_kernel: t must be > 0");
  if (!(y >= 0.0) || !(y0 >= 0.0) || !std::isfinite(x) || !std::isfinite(x0) || !std::isfinite(y) || !std::isfinite(y0))
    throw DomainError("half_plane_kernel: need finite x, x0 and y, y0 >= 0");
  const double dx = x - x0, dy = y - y0, sy = y + y0;
  const double gx = std::exp(-dx * dx / (4.0 * t)) / std::sqrt(4.0 * detail::kPi * t);
  const double g1 = std::exp(-dy * dy / (4.0 * t)) / std::sqrt(4.0 * detail::kPi * t);
  const double g2 = std::exp(-sy * sy / (4.0 * t)) / std::sqrt(4.0 * detail::kPi * t);
  switch (bc.kind) {
    case BoundaryCondition::Kind::Dirichlet:
      return gx * (g1 - g2);
    case BoundaryCondition::Kind::Neumann:
      return gx * (g1 + g2);
    case BoundaryCondition::Kind::Robin: {
      // Neumann images plus -2 kappa int_0^inf e^{-kappa w} g(y + y0 + w) dw
      const double k = bc.robin_kappa;
      const double st = std::sqrt(t);
      const double corr = -k * std::exp(-sy * sy / (4.0 * t)) * erfcx(sy / (2.0 * st) + k * st);
      return gx * (g1 + g2 + corr);
    }
  }
  return 0.0;
}

// Resolvent kernel of the half-plane from the method of images.
inline double half_plane_greens(const BoundaryCondition& bc, double s, double x, double y, double x0, double y0) {
  if (bc.kind == BoundaryCondition::Kind::Robin) throw UnsupportedError("half_plane_greens: no closed form for Robin");
  if (!(s > 0.0)) throw DomainError("half_plane_greens: s must be > 0");
  const double d = std::hypot(x - x0, y - y0), ds = std::hypot(x - x0, y + y0);
  if (!(d > 0.0)) throw DomainError("half_plane_greens: coincident points");
  const double sign = bc.is_dirichlet() ? -1.0 : 1.0;
  const double rs = std::sqrt(s);
  return (bessel_k(0.0, rs * d) + sign * bessel_k(0.0, rs * ds)) / (2.0 * detail::kPi);
}

// ---------------------------------------------------------------------------
// Laplace transform in t of a kernel against the matching resolvent kernel

struct LaplaceCheck {
  double transform = 0.0;
  double greens = 0.0;
  double residual = 0.0;
  double quad_err = 0.0;
};

namespace detail {

// int_0^inf e^{-s t} h(t) dt, split at t = 1; on [1, inf) |h| <= bound.
template <class H>
QuadResult laplace_transform(H&& h, double s, double bound, double tol) {
  QuadOptions qo;
  qo.abs_tol = 0.25 * tol;
  qo.rel_tol = 0.0;
  qo.max_nodes = 200'000;
  auto f = [&](double t) { return t == 0.0 ? 0.0 : std::exp(-s * t) * h(t); };
  QuadResult a = integrate(f, 0.0, 1.0, qo);
  QuadResult b = integrate_decaying(f, 1.0, DecayEnvelope{bound, s}, qo);
  QuadResult out;
  out.value = a.value + b.value;
  out.abs_err_estimate = a.abs_err_estimate + b.abs_err_estimate;
  out.nodes_used = a.nodes_used + b.nodes_used;
  out.envelope_violated = b.envelope_violated;
  return out;
}

}  // namespace detail

inline LaplaceCheck laplace_consistency_sector(const SectorSpec& spec, double s, double r, double phi, double r0,
                                               double phi0, double tol = 1e-7) {
  spec.validate();
  LaplaceCheck out;
  out.greens = greens_kl(spec, s, r, phi, r0, phi0, 0.1 * tol);
  // for t >= 1: |H| <= (1/2t)(2/gamma)(1 + gamma/pi)
  const double bound = (1.0 + spec.gamma / detail::kPi) / spec.gamma;
  auto h = [&](double t) { return sector_heat_kernel(spec, t, r, phi, r0, phi0, 0.01 * tol); };
  QuadResult q = detail::laplace_transform(h, s, bound, tol);
  out.transform = q.value;
  out.quad_err = q.abs_err_estimate;
  out.residual = std::abs(out.transform - out.greens);
  return out;
}

inline LaplaceCheck laplace_consistency_half_plane(const BoundaryCondition& bc, double s, double x, double y, double x0,
                                                   double y0, double tol = 1e-7) {
  LaplaceCheck out;
  out.greens = half_plane_greens(bc, s, x, y, x0, y0);
  const double bound = 1.0 / (2.0 * detail::kPi);
  auto h = [&](double t) { return half_plane_kernel(bc, t, x, y, x0, y0); };
  QuadResult q = detail::laplace_transform(h, s, bound, tol);
  out.transform = q.value;
  out.quad_err = q.abs_err_estimate;
  out.residual = std::abs(out.transform - out.greens);
  return out;
}

// ---------------------------------------------------------------------------
// Model kernels in rescaled coordinates and their model-problem residuals.
//
// With X = (x-x')/sqrt(t), xi = y/sqrt(t), xi' = y'/sqrt(t) (or Y = (y-y')/sqrt(t)
// in the interior), a kernel t^{-k/2} M(...) satisfies t L H = 0 exactly when
// D M = (k/2) M, where
//   D = -d_XX - X/2 d_X - d_xixi - xi/2 d_xi - xi'/2 d_xi'.

enum class Model { TdInterior, SfNeumann, SfDirichlet, SfRobin };

inline const char* model_name(Model m) {
  switch (m) {
    case Model::TdInterior: return "td";
    case Model::SfNeumann: return "sf-N";
    case Model::SfDirichlet: return "sf-D";
    case Model::SfRobin: return "sf-R";
  }
  return "?";
}

inline double model_kernel(Model m, double X, double a, double b, double kappa = 1.0) {
  const double fx = std::exp(-X * X / 4.0);
  switch (m) {
    case Model::TdInterior:  // a = Y
      return fx * std::exp(-a * a / 4.0) / (4.0 * detail::kPi);
    case Model::SfNeumann:
      return fx * (std::exp(-(a - b) * (a - b) / 4.0) + std::exp(-(a + b) * (a + b) / 4.0)) / (4.0 * detail::kPi);
    case Model::SfDirichlet:
      return fx * (std::exp(-(a - b) * (a - b) / 4.0) - std::exp(-(a + b) * (a + b) / 4.0)) / (4.0 * detail::kPi);
    case Model::SfRobin:
      return -kappa / (2.0 * std::sqrt(detail::kPi)) * fx * std::erfc(0.5 * (a + b));
  }
  return 0.0;
}

// Multiple of the identity that D must reproduce.
inline double model_eigenvalue(Model m) { return m == Model::SfRobin ? 0.5 : 1.0; }

struct GridAxis {
  double lo = -2.0, hi = 2.0;
  int n = 20;

  double at(int i) const { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); }
};

struct ModelGrid {
  GridAxis X{-2.0, 2.0, 20};
  GridAxis a{0.2, 2.0, 20};  // Y for td, xi for sf
  GridAxis b{0.2, 2.0, 8};   // xi' (sf only)
};

struct ResidualOptions {
  double h = 1e-3;
  double kappa = 1.0;
  double step_tol = 1e-6;  // allowed Richardson discretization estimate
};

struct ResidualReport {
  double max_residual = 0.0;
  double discretization_estimate = 0.0;
  std::size_t points = 0;
};

namespace detail {

inline double model_residual_at(Model m, double X, double a, double b, double h, double kappa) {
  auto M = [&](double X_, double a_, double b_) { return model_kernel(m, X_, a_, b_, kappa); };
  const double c = M(X, a, b);
  const double mxp = M(X + h, a, b), mxm = M(X - h, a, b);
  const double map = M(X, a + h, b), mam = M(X, a - h, b);
  const double h2 = h * h;
  double d = -(mxp - 2.0 * c + mxm) / h2 - 0.5 * X * (mxp - mxm) / (2.0 * h);
  d += -(map - 2.0 * c + mam) / h2 - 0.5 * a * (map - mam) / (2.0 * h);
  if (m != Model::TdInterior) {
    const double mbp = M(X, a, b + h), mbm = M(X, a, b - h);
    d += -0.5 * b * (mbp - mbm) / (2.0 * h);
  }
  return d - model_eigenvalue(m) * c;
}

}  // namespace detail

inline ResidualReport model_residual(Model m, const ModelGrid& grid = {}, const ResidualOptions& opt = {}) {
  if (!(opt.h > 0.0)) throw DomainError("model_residual: h must be > 0");
  if (grid.X.n < 1 || grid.a.n < 1 || grid.b.n < 1) throw DomainError("model_residual: grid sizes must be >= 1");
  if (m != Model::TdInterior && (grid.a.lo - opt.h <= 0.0 || grid.b.lo - opt.h <= 0.0))
    throw DomainError("model_residual: sf grid must stay away from xi = 0 and xi' = 0");
  const int nb = m == Model::TdInterior ? 1 : grid.b.n;
  ResidualReport rep;
  for (int i = 0; i < grid.X.n; ++i)
    for (int j = 0; j < grid.a.n; ++j)
      for (int k = 0; k < nb; ++k) {
        const double X = grid.X.at(i), a = grid.a.at(j), b = m == Model::TdInterior ? 0.0 : grid.b.at(k);
        const double r1 = detail::model_residual_at(m, X, a, b, opt.h, opt.kappa);
        const double r2 = detail::model_residual_at(m, X, a, b, 0.5 * opt.h, opt.kappa);
        rep.max_residual = std::max(rep.max_residual, std::abs(r1));
        // second-order differences: r(h) - r(h/2) ~ (3/4) C h^2
        rep.discretization_estimate = std::max(rep.discretization_estimate, std::abs(r1 - r2) * 4.0 / 3.0);
        ++rep.points;
      }
  if (rep.discretization_estimate > opt.step_tol)
    throw StepSizeError("model_residual: residual dominated by discretization; reduce h", rep.discretization_estimate);
  return rep;
}

}  // namespace heattrace
