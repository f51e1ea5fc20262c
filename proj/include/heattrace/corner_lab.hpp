#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "parallel.hpp"
#include "quad.hpp"
#include "sector_models.hpp"
#include "special_fns.hpp"

namespace heattrace {

enum class CornerPair { DD, NN, RR, NR, RN, DN, ND, DR, RD };

inline const char* pair_name(CornerPair p) {
  switch (p) {
    case CornerPair::DD: return "DD";
    case CornerPair::NN: return "NN";
    case CornerPair::RR: return "RR";
    case CornerPair::NR: return "NR";
    case CornerPair::RN: return "RN";
    case CornerPair::DN: return "DN";
    case CornerPair::ND: return "ND";
    case CornerPair::DR: return "DR";
    case CornerPair::RD: return "RD";
  }
  return "?";
}

inline CornerPair parse_pair(const std::string& s) {
  static const std::pair<const char*, CornerPair> table[] = {
      {"DD", CornerPair::DD}, {"NN", CornerPair::NN}, {"RR", CornerPair::RR}, {"NR", CornerPair::NR}, {"RN", CornerPair::RN},
      {"DN", CornerPair::DN}, {"ND", CornerPair::ND}, {"DR", CornerPair::DR}, {"RD", CornerPair::RD}};
  for (const auto& [name, p] : table)
    if (s == name) return p;
  throw DomainError("unknown corner pair '" + s + "'");
}

// A vertex is mixed when exactly one adjacent edge is Dirichlet.
inline bool is_mixed(CornerPair p) {
  return p == CornerPair::DN || p == CornerPair::ND || p == CornerPair::DR || p == CornerPair::RD;
}

inline CornerPair pair_from_bcs(const BoundaryCondition& a, const BoundaryCondition& b) {
  return parse_pair(std::string{a.tag(), b.tag()});
}

struct CornerKind {
  CornerPair pair = CornerPair::DD;
  double alpha = detail::kPi / 2.0;

  void validate() const {
    if (!std::isfinite(alpha) || !(alpha > 0.0 && alpha < 2.0 * detail::kPi))
      throw DomainError("CornerKind: angle must lie in (0, 2*pi)");
  }
};

inline double same_type_corner(double a) { return (detail::kPi * detail::kPi - a * a) / (24.0 * detail::kPi * a); }
inline double mixed_corner(double a) { return -(detail::kPi * detail::kPi + 2.0 * a * a) / (48.0 * detail::kPi * a); }

inline double corner_coeff(const CornerKind& k) {
  k.validate();
  return is_mixed(k.pair) ? mixed_corner(k.alpha) : same_type_corner(k.alpha);
}

// Isolated cone point of total opening angle 2*alpha; opening 2*pi is a smooth
// point and gives 0.
inline double cone_point_coeff(double opening) {
  if (!std::isfinite(opening) || !(opening > 0.0 && opening < 4.0 * detail::kPi))
    throw DomainError("cone_point_coeff: opening must lie in (0, 4*pi)");
  const double a = 0.5 * opening;
  return (detail::kPi * detail::kPi - a * a) / (12.0 * detail::kPi * a);
}

// ---------------------------------------------------------------------------
// Renormalized radial integral of the sector kernel on the diagonal.
//
// Integrating the series kernel at t = 1 over the angle leaves
//   F(1/eps) = int_0^{1/eps} R/2 e^{-R^2/2} sum_j I_{mu_j}(R^2/2) dR
//            = 1/2 int_0^U sum_j e^{-u} I_{mu_j}(u) du,   U = 1/(2 eps^2),
// whose finite part is the corner coefficient.

struct CornerNumericOptions {
  double quad_tol = 1e-11;  // absolute, per cutoff segment
  double mode_tol = 1e-16;  // absolute tail of the mode sum at each node
  std::vector<int> basis{-2, -1, 0, 1, 3, 5, 7};
  double eps_max = 0.1;
  double eps_min = 0.015;
  int n_eps = 12;
  double weight_power = 1.0;
  double max_condition = 1e8;
  bool check_residual = true;
};

struct CornerNumericResult {
  double value = 0.0;        // finite part
  double closed_form = 0.0;
  double difference = 0.0;   // value - closed_form
  FinitePartResult fit;
  int max_modes = 0;
};

// sum_{j>=1} e^{-u} I_{nu1 + (j-1) step}(u), truncated by the ratio tail bound.
inline double scaled_mode_sum(double nu1, double step, double u, double tol, int* used = nullptr) {
  if (u == 0.0) {
    if (used) *used = 1;
    return nu1 == 0.0 ? 1.0 : 0.0;
  }
  detail::Accumulator acc;
  for (int j = 0;; ++j) {
    const double nu = nu1 + j * step;
    const double v = bessel_i_scaled(nu, u);
    acc.add(v);
    if (j >= 4 && scaled_i_order_tail_bound(nu, step, u, v) <= tol) {
      if (used) *used = j + 1;
      break;
    }
    if (j > 1'000'000) throw ToleranceError("scaled_mode_sum: mode budget exhausted", scaled_i_order_tail_bound(nu, step, u, v));
  }
  return acc.value();
}

// First order and spacing of the Bessel orders for a non-Robin corner.
inline std::pair<double, double> corner_orders(CornerPair p, double alpha) {
  const double step = detail::kPi / alpha;
  switch (p) {
    case CornerPair::DD: return {step, step};
    case CornerPair::NN: return {0.0, step};
    case CornerPair::DN:
    case CornerPair::ND: return {0.5 * step, step};
    default: throw UnsupportedError("corner_coeff_numeric: Robin corners have no sector series model");
  }
}

// Samples F(1/eps_k) for a decreasing eps schedule, integrating segment-wise
// between consecutive cutoffs and accumulating in order.
template <class Integrand>
void cutoff_samples(Integrand&& f, const std::vector<double>& eps, double quad_tol, std::vector<double>& values,
                    std::vector<double>& errs) {
  const std::size_t n = eps.size();
  std::vector<double> cut(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) cut[k + 1] = 0.5 / (eps[k] * eps[k]);
  std::vector<QuadResult> seg(n);
  QuadOptions qo;
  qo.abs_tol = quad_tol;
  qo.rel_tol = 0.0;
  qo.max_nodes = 400'000;
  parallel_for(n, [&](std::size_t k) {
    const double a = cut[k], b = cut[k + 1];
    const int panels = static_cast<int>(std::clamp((b - a) / 8.0, 1.0, 256.0));
    bool ok = false;
    seg[k] = detail::adaptive(f, detail::linspace_breaks(a, b, panels), qo, &ok);
    if (!ok) throw BudgetExceededError("cutoff_samples: segment integral did not converge", seg[k].value, seg[k].abs_err_estimate);
  });
  values.assign(n, 0.0);
  errs.assign(n, 0.0);
  detail::Accumulator v, e;
  for (std::size_t k = 0; k < n; ++k) {
    v.add(seg[k].value);
    e.add(seg[k].abs_err_estimate);
    values[k] = v.value();
    errs[k] = e.value();
  }
}

inline FinitePartOptions corner_fit_options(const CornerNumericOptions& opt) {
  FinitePartOptions fo;
  fo.basis = opt.basis;
  fo.eps_schedule = geometric_schedule(opt.eps_max, opt.eps_min, opt.n_eps);
  fo.weight_power = opt.weight_power;
  fo.max_condition = opt.max_condition;
  fo.check_residual = opt.check_residual;
  return fo;
}

inline CornerNumericResult corner_coeff_numeric(CornerPair pair, double alpha, const CornerNumericOptions& opt = {}) {
  CornerKind{pair, alpha}.validate();
  const auto [nu1, step] = corner_orders(pair, alpha);
  FinitePartOptions fo = corner_fit_options(opt);
  std::vector<double> vals, errs;
  auto f = [&, nu1 = nu1, step = step](double u) { return 0.5 * scaled_mode_sum(nu1, step, u, opt.mode_tol); };
  cutoff_samples(f, fo.eps_schedule, opt.quad_tol, vals, errs);
  CornerNumericResult out;
  out.fit = finite_part_from_samples(fo.eps_schedule, vals, errs, fo);
  out.value = out.fit.finite_part;
  out.closed_form = corner_coeff({pair, alpha});
  out.difference = out.value - out.closed_form;
  int used = 0;
  scaled_mode_sum(nu1, step, 0.5 / (opt.eps_min * opt.eps_min), opt.mode_tol, &used);
  out.max_modes = used;
  return out;
}

// The I_0 piece separating the N-N and D-D sums:
// 1/2 int_0^U e^{-u} I_0(u) du, whose finite part vanishes.
inline FinitePartResult i0_finite_part(const CornerNumericOptions& opt = {}) {
  FinitePartOptions fo = corner_fit_options(opt);
  std::vector<double> vals, errs;
  auto f = [](double u) { return 0.5 * bessel_i_scaled(0.0, u); };
  cutoff_samples(f, fo.eps_schedule, opt.quad_tol, vals, errs);
  return finite_part_from_samples(fo.eps_schedule, vals, errs, fo);
}

// Primitive of e^{-u} I_0(u): g(u) = e^{-u} u (I_0(u) + I_1(u)).
inline double i0_primitive(double u) {
  if (!(u >= 0.0)) throw DomainError("i0_primitive: u must be >= 0");
  return u * (bessel_i_scaled(0.0, u) + bessel_i_scaled(1.0, u));
}

// ---------------------------------------------------------------------------
// Trace contributions of the individual Green's-function terms.
//
// On the diagonal the angular integral of each bracket is explicit, a(mu).
// Integrating the term over r in [0, R] in the Laplace domain gives
//   s L(s) = (1/pi^2) int_0^inf a(mu) Q(mu, R sqrt(s)) dmu,
//   Q(mu, X) = int_0^X x K_{i mu}(x)^2 dx,
// and s L(s) at s = 1/t carries the same t^0 coefficient as the trace term.
// The A and B brackets grow like e^{pi mu} and the mu-integral diverges, so
// only the corner-carrying terms C, E and F are integrated numerically.

enum class GreensTerm { A, B, C, E, F };

inline GreensTerm parse_term(const std::string& s) {
  if (s == "A") return GreensTerm::A;
  if (s == "B") return GreensTerm::B;
  if (s == "C") return GreensTerm::C;
  if (s == "E") return GreensTerm::E;
  if (s == "F") return GreensTerm::F;
  throw DomainError("unknown Green's function term '" + s + "'");
}

// a(mu) e^{-pi mu}: angular integral of the bracket on phi = phi0 over [0, gamma].
inline double term_angular_scaled(GreensTerm term, double gamma, double mu) {
  const double pi = detail::kPi;
  switch (term) {
    case GreensTerm::A:  // gamma cosh(pi mu)
      return gamma * 0.5 * (1.0 + std::exp(-2.0 * pi * mu));
    case GreensTerm::B:  // sinh(pi mu)/mu
      return mu == 0.0 ? pi : -std::expm1(-2.0 * pi * mu) / (2.0 * mu);
    case GreensTerm::C: {  // gamma sinh((pi-gamma) mu)/sinh(gamma mu)
      const double a = std::abs(pi - gamma), sign = pi >= gamma ? 1.0 : -1.0;
      const double ratio = mu == 0.0 ? a / gamma : detail::expm1_ratio(2.0 * a * mu, 2.0 * gamma * mu);
      return gamma * sign * ratio * std::exp(-2.0 * std::min(pi, gamma) * mu);
    }
    case GreensTerm::E: {  // -gamma cosh((pi-gamma) mu)/cosh(gamma mu)
      const double a = std::abs(pi - gamma);
      const double ratio = (1.0 + std::exp(-2.0 * a * mu)) / (1.0 + std::exp(-2.0 * gamma * mu));
      return -gamma * ratio * std::exp(-2.0 * std::min(pi, gamma) * mu);
    }
    case GreensTerm::F:  // odd in phi - gamma/2
      return 0.0;
  }
  return 0.0;
}

// e^{pi mu} Q(mu, X) via x = X e^{-w}.
inline double q_scaled(double mu, double X, double tol = 1e-12) {
  SpecialFnConfig cfg;
  cfg.rel_tol = 1e-10;
  auto f = [&](double w) {
    const double x = X * std::exp(-w);
    const double s = bessel_k_imag_scaled(mu, x, cfg);
    return x * x * s * s;
  };
  QuadOptions qo;
  qo.abs_tol = tol;
  qo.rel_tol = 1e-10;
  qo.max_nodes = 200'000;
  // x^2 K^2 with K ~ log x near 0: w up to 40 is far below the tolerance
  return integrate(f, 0.0, 40.0 + std::log(std::max(1.0, X * X)), qo).value;
}

struct TermSample {
  double t = 0.0;
  double value = 0.0;  // s L(s) at s = 1/t
  double abs_err = 0.0;
};

inline TermSample term_trace_laplace(GreensTerm term, double gamma, double R, double t, double tol = 1e-7) {
  if (!(gamma > 0.0 && gamma < 2.0 * detail::kPi)) throw DomainError("term_contributions: gamma must lie in (0, 2*pi)");
  if (!(R > 0.0) || !(t > 0.0)) throw DomainError("term_contributions: need R > 0 and t > 0");
  if (term == GreensTerm::A || term == GreensTerm::B)
    throw UnsupportedError("term_contributions: the A and B terms have divergent diagonal mu-integrals");
  TermSample out;
  out.t = t;
  if (term == GreensTerm::F) return out;
  const double X = R / std::sqrt(t);
  const double decay = 2.0 * std::min(detail::kPi, gamma);
  const double mu_max = (-std::log(tol) + 10.0) / decay;
  auto f = [&](double mu) { return term_angular_scaled(term, gamma, mu) * q_scaled(mu, X) / (detail::kPi * detail::kPi); };
  QuadOptions qo;
  qo.abs_tol = 0.5 * tol;
  qo.rel_tol = 0.0;
  qo.max_nodes = 100'000;
  QuadResult q = integrate(f, 0.0, mu_max, qo);
  out.value = q.value;
  out.abs_err = q.abs_err_estimate;
  return out;
}

// The R -> infinity limit of the t^0 coefficient:
// (1/2pi) int a(mu) mu / sinh(pi mu) dmu, from Q(mu, inf) = pi mu / (2 sinh pi mu).
inline double term_t0_limit(GreensTerm term, double gamma) {
  if (term == GreensTerm::A || term == GreensTerm::B)
    throw UnsupportedError("term_t0_limit: divergent for the A and B terms");
  auto f = [&](double mu) {
    const double w = mu == 0.0 ? 1.0 / detail::kPi : 2.0 * mu / -std::expm1(-2.0 * detail::kPi * mu);
    return term_angular_scaled(term, gamma, mu) * w / (2.0 * detail::kPi);
  };
  const double decay = 2.0 * std::min(detail::kPi, gamma);
  QuadOptions qo;
  qo.abs_tol = 1e-14;
  qo.rel_tol = 1e-13;
  return integrate(f, 0.0, 50.0 / decay, qo).value;
}

struct TermContribution {
  double t0_coefficient = 0.0;
  std::vector<TermSample> samples;
  double condition_number = 1.0;
};

// Fits s L(s) at s = 1/t_k, t_k log-spaced in [t/10, t], on {1, t^{1/2}, t}.
inline TermContribution term_contributions(GreensTerm term, double gamma, double R, double t, int n_samples = 6) {
  if (n_samples < 4) throw DomainError("term_contributions: need at least 4 samples");
  TermContribution out;
  out.samples.resize(static_cast<std::size_t>(n_samples));
  std::vector<double> ts(static_cast<std::size_t>(n_samples));
  for (int k = 0; k < n_samples; ++k) ts[static_cast<std::size_t>(k)] = t * std::pow(0.1, static_cast<double>(k) / (n_samples - 1));
  parallel_for(ts.size(), [&](std::size_t k) { out.samples[k] = term_trace_laplace(term, gamma, R, ts[k]); });
  Eigen::MatrixXd A(n_samples, 3);
  Eigen::VectorXd y(n_samples);
  for (int k = 0; k < n_samples; ++k) {
    const double tk = ts[static_cast<std::size_t>(k)];
    A(k, 0) = 1.0;
    A(k, 1) = std::sqrt(tk);
    A(k, 2) = tk;
    y(k) = out.samples[static_cast<std::size_t>(k)].value;
  }
  Eigen::VectorXd colnorm = A.colwise().norm();
  Eigen::MatrixXd An = A * colnorm.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(An, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.condition_number = svd.singularValues()(0) / svd.singularValues()(2);
  if (out.condition_number > 1e8) throw IllConditionedError("term_contributions: fit is ill-conditioned", out.condition_number);
  Eigen::VectorXd c = svd.solve(y).cwiseQuotient(colnorm);
  out.t0_coefficient = c(0);
  return out;
}

}  // namespace heattrace
