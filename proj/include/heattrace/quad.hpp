#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <queue>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace heattrace {

struct QuadResult {
  double value = 0.0;
  double abs_err_estimate = 0.0;
  std::size_t nodes_used = 0;
  double l1_norm = 0.0;  // integral of |f|, the scale against which cancellation is judged
  bool envelope_violated = false;
};

struct QuadOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  std::size_t max_nodes = 2'000'000;
};

// Exponential decay envelope |f(x)| <= scale * exp(-rate * x) declared by the
// caller of the semi-infinite integrator.
struct DecayEnvelope {
  double scale = 1.0;
  double rate = 1.0;
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
inline constexpr double kXgk[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr double kWgk[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208932559143, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr double kWg[5] = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
  double a, b, value, err, l1;
};

template <class F>
Panel gk21(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv1[10], fv2[10];
  const double fc = f(c);
  double resk = fc * kWgk[10];
  double resabs = std::abs(resk);
  double resg = 0.0;
  for (int j = 0; j < 10; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    fv1[j] = f1;
    fv2[j] = f2;
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[10] * std::abs(fc - reskh);
  for (int j = 0; j < 10; ++j)
    resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  const double ah = std::abs(h);
  double err = std::abs((resk - resg) * h);
  resasc *= ah;
  resabs *= ah;
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps))
    err = std::max(50.0 * eps * resabs, err);
  return {a, b, resk * h, err, resabs};
}

// Neumaier compensated summation.
struct Accumulator {
  double sum = 0.0, comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

// Globally adaptive bisection starting from the given breakpoints. The result
// is summed in left-to-right panel order, so it is deterministic. Returns the
// best estimate even when the budget runs out; `converged` reports whether the
// tolerance was met.
template <class F>
QuadResult adaptive(F&& f, const std::vector<double>& breaks, const QuadOptions& opt,
                    bool* converged) {
  auto cmp = [](const Panel& x, const Panel& y) { return x.err < y.err; };
  std::priority_queue<Panel, std::vector<Panel>, decltype(cmp)> heap(cmp);
  std::size_t nodes = 0;
  double total = 0.0, total_err = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    Panel p = gk21(f, breaks[i], breaks[i + 1]);
    nodes += 21;
    total += p.value;
    total_err += p.err;
    heap.push(p);
  }
  std::vector<Panel> done;
  bool ok = true;
  while (!heap.empty()) {
    const double target = std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
    if (total_err <= target) break;
    if (nodes + 42 > opt.max_nodes) {
      ok = false;
      break;
    }
    Panel p = heap.top();
    heap.pop();
    const double mid = 0.5 * (p.a + p.b);
    if (!(mid > p.a && mid < p.b)) {  // panel exhausted floating-point resolution
      done.push_back(p);
      if (heap.empty()) ok = total_err <= target;
      continue;
    }
    Panel l = gk21(f, p.a, mid);
    Panel r = gk21(f, mid, p.b);
    nodes += 42;
    total += l.value + r.value - p.value;
    total_err += l.err + r.err - p.err;
    heap.push(l);
    heap.push(r);
  }
  while (!heap.empty()) {
    done.push_back(heap.top());
    heap.pop();
  }
  std::sort(done.begin(), done.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  Accumulator val, err, l1;
  for (const auto& p : done) {
    val.add(p.value);
    err.add(p.err);
    l1.add(p.l1);
  }
  QuadResult res;
  res.value = val.value();
  res.abs_err_estimate = err.value();
  res.nodes_used = nodes;
  res.l1_norm = l1.value();
  if (converged) *converged = ok && res.abs_err_estimate <= std::max(opt.abs_tol, opt.rel_tol * std::abs(res.value));
  return res;
}

inline std::vector<double> linspace_breaks(double a, double b, int panels) {
  std::vector<double> br(static_cast<std::size_t>(panels) + 1);
  for (int i = 0; i <= panels; ++i) br[static_cast<std::size_t>(i)] = a + (b - a) * i / panels;
  br.back() = b;
  return br;
}

}  // namespace detail

// Adaptive Gauss-Kronrod quadrature on a finite interval. Throws
// BudgetExceededError (carrying the best estimate) if the node budget is spent
// before max(abs_tol, rel_tol*|value|) is reached.
template <class F>
QuadResult integrate(F&& f, double a, double b, const QuadOptions& opt = {}) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("integrate: use integrate_decaying for infinite limits");
  if (a == b) return {};
  if (b < a) {
    QuadResult r = integrate(f, b, a, opt);
    r.value = -r.value;
    return r;
  }
  bool ok = false;
  QuadResult r = detail::adaptive(f, {a, b}, opt, &ok);
  if (!ok) throw BudgetExceededError("integrate: node budget exceeded", r.value, r.abs_err_estimate);
  return r;
}

// Integral over [a, +inf) of a function obeying the declared envelope. The
// range is cut where the envelope tail falls below half the tolerance; sampled
// values above the envelope set envelope_violated.
template <class F>
QuadResult integrate_decaying(F&& f, double a, DecayEnvelope env, const QuadOptions& opt = {}) {
  if (!(env.rate > 0.0) || !(env.scale > 0.0)) throw DomainError("integrate_decaying: envelope must have positive scale and rate");
  const double tail_tol = 0.5 * std::max(opt.abs_tol, std::numeric_limits<double>::min());
  // tail beyond b: scale * exp(-rate*b) / rate <= tail_tol
  double b = std::log(env.scale / (env.rate * tail_tol)) / env.rate;
  b = std::max(b, a + 1.0 / env.rate);
  bool violated = false;
  auto g = [&](double x) {
    const double v = f(x);
    if (std::abs(v) > env.scale * std::exp(-env.rate * x) * (1.0 + 1e-9) + 1e-300) violated = true;
    return v;
  };
  QuadOptions inner = opt;
  inner.abs_tol = 0.5 * opt.abs_tol;
  bool ok = false;
  // a few initial panels so that the decay scale is resolved from the start
  int panels = static_cast<int>(std::clamp((b - a) * env.rate / 4.0, 1.0, 64.0));
  QuadResult r = detail::adaptive(g, detail::linspace_breaks(a, b, panels), inner, &ok);
  r.abs_err_estimate += tail_tol;
  r.envelope_violated = violated;
  if (!ok) throw BudgetExceededError("integrate_decaying: node budget exceeded", r.value, r.abs_err_estimate);
  return r;
}

// ---------------------------------------------------------------------------
// Finite-part extraction

struct FinitePartResult {
  double finite_part = 0.0;
  std::map<int, double> divergent_coeffs;  // exponent p of eps^p -> coefficient, p != 0
  double condition_number = 1.0;
  std::vector<double> epsilons_used;       // strictly decreasing
  double residual_max = 0.0;               // max |data - fit| over the samples
  double residual_allowed = 0.0;
};

struct FinitePartOptions {
  std::vector<int> basis{-2, -1, 0, 1};
  std::vector<double> eps_schedule;  // empty: 0.5 * 0.8^k, k = 0..11
  double weight_power = 1.0;         // sample weight eps^-weight_power
  double max_condition = 1e8;
  double residual_factor = 10.0;
  bool check_residual = true;
};

inline std::vector<double> default_eps_schedule() {
  std::vector<double> e(12);
  for (int k = 0; k < 12; ++k) e[static_cast<std::size_t>(k)] = 0.5 * std::pow(0.8, k);
  return e;
}

inline std::vector<double> geometric_schedule(double eps_max, double eps_min, int n) {
  if (n < 2 || !(eps_max > eps_min) || !(eps_min > 0.0)) throw DomainError("geometric_schedule: need eps_max > eps_min > 0 and n >= 2");
  std::vector<double> e(static_cast<std::size_t>(n));
  const double r = std::pow(eps_min / eps_max, 1.0 / (n - 1));
  for (int k = 0; k < n; ++k) e[static_cast<std::size_t>(k)] = eps_max * std::pow(r, k);
  e.back() = eps_min;
  return e;
}

// Weighted least squares of samples F(1/eps_k) on {eps^p : p in basis}. The
// eps^0 coefficient is the finite part.
inline FinitePartResult finite_part_from_samples(const std::vector<double>& eps,
                                                 const std::vector<double>& values,
                                                 const std::vector<double>& abs_errs,
                                                 const FinitePartOptions& opt) {
  const std::size_t n = eps.size(), m = opt.basis.size();
  if (values.size() != n || abs_errs.size() != n) throw DomainError("finite_part: sample arrays differ in length");
  if (std::find(opt.basis.begin(), opt.basis.end(), 0) == opt.basis.end()) throw DomainError("finite_part: basis must contain the exponent 0");
  if (n < m + 2) throw DomainError("finite_part: need at least |basis|+2 cutoffs");
  for (std::size_t k = 0; k < n; ++k) {
    if (!(eps[k] > 0.0)) throw DomainError("finite_part: cutoff parameters must be positive");
    if (k > 0 && !(eps[k] < eps[k - 1])) throw DomainError("finite_part: eps schedule must be strictly decreasing");
  }
  Eigen::MatrixXd A(n, m);
  Eigen::VectorXd y(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = std::pow(eps[k], -opt.weight_power);
    for (std::size_t j = 0; j < m; ++j) A(k, j) = w * std::pow(eps[k], opt.basis[j]);
    y(k) = w * values[k];
  }
  Eigen::VectorXd colnorm = A.colwise().norm();
  Eigen::MatrixXd An = A * colnorm.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(An, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  FinitePartResult res;
  res.condition_number = sv(0) / sv(sv.size() - 1);
  res.epsilons_used = eps;
  if (!(res.condition_number <= opt.max_condition))
    throw IllConditionedError("finite_part: design matrix condition number exceeds limit", res.condition_number);
  Eigen::VectorXd c = svd.solve(y).cwiseQuotient(colnorm);
  for (std::size_t j = 0; j < m; ++j) {
    if (opt.basis[j] == 0)
      res.finite_part = c(static_cast<Eigen::Index>(j));
    else
      res.divergent_coeffs[opt.basis[j]] = c(static_cast<Eigen::Index>(j));
  }
  // Rounding in the solve itself grows with the conditioning and the largest
  // sample; exact data must not trip the check.
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, std::abs(v));
  const double solve_floor = 4.0 * std::numeric_limits<double>::epsilon() * res.condition_number * vmax;
  double worst_ratio = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double fit = 0.0;
    for (std::size_t j = 0; j < m; ++j) fit += c(static_cast<Eigen::Index>(j)) * std::pow(eps[k], opt.basis[j]);
    const double r = std::abs(values[k] - fit);
    const double allowed = opt.residual_factor *
                           std::max({abs_errs[k], 4.0 * std::numeric_limits<double>::epsilon() * std::abs(values[k]), solve_floor});
    res.residual_max = std::max(res.residual_max, r);
    if (r / allowed > worst_ratio) {
      worst_ratio = r / allowed;
      res.residual_allowed = allowed;
    }
  }
  if (opt.check_residual && worst_ratio > 1.0)
    throw FitResidualError("finite_part: fit residual exceeds the sample error budget", res.residual_max, res.residual_allowed);
  return res;
}

// F is evaluated at the cutoffs 1/eps_k. It may return a double (treated as
// exact) or a QuadResult whose error estimate feeds the residual check.
template <class F>
FinitePartResult finite_part(F&& F_of_cutoff, const FinitePartOptions& opt = {}) {
  std::vector<double> eps = opt.eps_schedule.empty() ? default_eps_schedule() : opt.eps_schedule;
  std::vector<double> vals(eps.size()), errs(eps.size());
  for (std::size_t k = 0; k < eps.size(); ++k) {
    if constexpr (std::is_same_v<std::decay_t<decltype(F_of_cutoff(1.0))>, QuadResult>) {
      QuadResult q = F_of_cutoff(1.0 / eps[k]);
      vals[k] = q.value;
      errs[k] = q.abs_err_estimate;
    } else {
      vals[k] = F_of_cutoff(1.0 / eps[k]);
      errs[k] = 0.0;
    }
  }
  return finite_part_from_samples(eps, vals, errs, opt);
}

}  // namespace heattrace
