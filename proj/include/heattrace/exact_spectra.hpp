#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <queue>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "errors.hpp"
#include "parallel.hpp"
#include "quad.hpp"
#include "sector_models.hpp"
#include "special_fns.hpp"

namespace heattrace {

// Counting-function envelope N(lambda) <= c1 lambda + c2 sqrt(lambda) + c3.
struct CountingBound {
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;

  double count(double lambda) const { return c1 * lambda + c2 * std::sqrt(lambda) + c3; }

  // sum_{lambda > L} e^{-lambda t} <= int_L^inf t e^{-lambda t} N(lambda) dlambda
  double tail(double t, double L) const {
    const double e = std::exp(-L * t);
    const double lin = e * (L + 1.0 / t);
    const double root = L > 0.0 ? e * (std::sqrt(L) + 1.0 / (t * std::sqrt(L))) : std::sqrt(detail::kPi / t) / 2.0;
    return c1 * lin + c2 * root + c3 * e;
  }
};

// Eigenvalues of the Laplacian, produced in nondecreasing order up to a cutoff.
class Spectrum {
 public:
  virtual ~Spectrum() = default;
  // All eigenvalues <= cutoff, sorted, with multiplicity.
  virtual std::vector<double> eigenvalues_below(double cutoff) const = 0;
  virtual CountingBound counting_bound() const = 0;
  virtual double weyl_area() const = 0;
  double tail_bound(double t, double cutoff) const { return counting_bound().tail(t, cutoff); }
};

// ---------------------------------------------------------------------------
// Interval [0, L]: eigenvalues k^2 with u'' = -k^2 u.
//
// Writing theta = 0 (Neumann), pi/2 (Dirichlet) or atan(kappa/k) (Robin,
// u' = kappa u along the inward normal), the m-th root solves
//   k L = m pi + theta_left(k) + theta_right(k),
// and lies in [m pi/L, (m+1) pi/L] because each theta is in [0, pi/2].

class IntervalSpectrum : public Spectrum {
 public:
  IntervalSpectrum(double length, BoundaryCondition left, BoundaryCondition right)
      : L_(length), left_(left), right_(right) {
    if (!std::isfinite(L_) || !(L_ > 0.0)) throw DomainError("IntervalSpectrum: length must be > 0");
  }

  double length() const { return L_; }

  // m-th wavenumber, m = 0, 1, ...
  double wavenumber(int m) const {
    if (m < 0) throw DomainError("IntervalSpectrum: index must be >= 0");
    const double pi = detail::kPi;
    const bool rl = left_.kind == BoundaryCondition::Kind::Robin, rr = right_.kind == BoundaryCondition::Kind::Robin;
    if (!rl && !rr) {
      double shift = (left_.is_dirichlet() ? 0.5 : 0.0) + (right_.is_dirichlet() ? 0.5 : 0.0);
      return (m + shift) * pi / L_;
    }
    auto theta = [](const BoundaryCondition& bc, double k) {
      switch (bc.kind) {
        case BoundaryCondition::Kind::Dirichlet: return 0.5 * detail::kPi;
        case BoundaryCondition::Kind::Neumann: return 0.0;
        case BoundaryCondition::Kind::Robin: return k == 0.0 ? 0.5 * detail::kPi : std::atan(bc.robin_kappa / k);
      }
      return 0.0;
    };
    auto g = [&](double k) { return k * L_ - m * pi - theta(left_, k) - theta(right_, k); };
    const double lo = m * pi / L_, hi = (m + 1) * pi / L_;
    const double glo = g(lo), ghi = g(hi);
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    if (!(glo < 0.0 && ghi > 0.0)) throw NonConvergenceError("IntervalSpectrum: root bracket lost its sign change", lo, hi);
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, boost::math::tools::eps_tolerance<double>(52), iters);
    if (iters >= 200) throw NonConvergenceError("IntervalSpectrum: Robin root did not converge", r.first, r.second);
    return 0.5 * (r.first + r.second);
  }

  double eigenvalue(int m) const {
    const double k = wavenumber(m);
    return k * k;
  }

  std::vector<double> eigenvalues_below(double cutoff) const override {
    std::vector<double> out;
    for (int m = 0;; ++m) {
      // k_m >= m pi / L, so no later root can fall below the cutoff
      const double lower = m * detail::kPi / L_;
      if (lower * lower > cutoff) break;
      const double lam = eigenvalue(m);
      if (lam <= cutoff) out.push_back(lam);
    }
    return out;
  }

  CountingBound counting_bound() const override { return {0.0, L_ / detail::kPi, 1.0}; }
  double weyl_area() const override { return 0.0; }

 private:
  double L_;
  BoundaryCondition left_, right_;
};

// ---------------------------------------------------------------------------
// Rectangle [0,a] x [0,b] by separation of variables.

struct RectangleBcs {
  BoundaryCondition left = BoundaryCondition::dirichlet();    // x = 0
  BoundaryCondition right = BoundaryCondition::dirichlet();   // x = a
  BoundaryCondition bottom = BoundaryCondition::dirichlet();  // y = 0
  BoundaryCondition top = BoundaryCondition::dirichlet();     // y = b
};

class RectangleSpectrum : public Spectrum {
 public:
  RectangleSpectrum(double a, double b, RectangleBcs bcs)
      : a_(a), b_(b), x_(a, bcs.left, bcs.right), y_(b, bcs.bottom, bcs.top) {}

  const IntervalSpectrum& x_factor() const { return x_; }
  const IntervalSpectrum& y_factor() const { return y_; }

  // Lazy k-way merge over the index lattice: rows i carry mu_x(i) + mu_y(j).
  class Stream {
   public:
    explicit Stream(const RectangleSpectrum& r) : r_(r) { push(0, 0); }
    double next() {
      Node n = heap_.top();
      heap_.pop();
      push(n.i, n.j + 1);
      if (n.j == 0) push(n.i + 1, 0);
      return n.value;
    }
    double peek() const { return heap_.top().value; }

   private:
    struct Node {
      double value;
      int i, j;
      bool operator>(const Node& o) const { return value > o.value || (value == o.value && (i > o.i || (i == o.i && j > o.j))); }
    };
    double mx(int i) {
      while (static_cast<int>(xs_.size()) <= i) xs_.push_back(r_.x_.eigenvalue(static_cast<int>(xs_.size())));
      return xs_[static_cast<std::size_t>(i)];
    }
    double my(int j) {
      while (static_cast<int>(ys_.size()) <= j) ys_.push_back(r_.y_.eigenvalue(static_cast<int>(ys_.size())));
      return ys_[static_cast<std::size_t>(j)];
    }
    void push(int i, int j) { heap_.push({mx(i) + my(j), i, j}); }
    const RectangleSpectrum& r_;
    std::vector<double> xs_, ys_;
    std::priority_queue<Node, std::vector<Node>, std::greater<>> heap_;
  };

  Stream stream() const { return Stream(*this); }

  std::vector<double> eigenvalues_below(double cutoff) const override {
    std::vector<double> out;
    Stream s(*this);
    while (s.peek() <= cutoff) out.push_back(s.next());
    return out;
  }

  // Robin roots satisfy k_m >= m pi / L, so lattice points of the Neumann
  // problem bound the count: area of the quarter ellipse plus both axes.
  CountingBound counting_bound() const override {
    return {a_ * b_ / (4.0 * detail::kPi), (a_ + b_) / detail::kPi, 1.0};
  }
  double weyl_area() const override { return a_ * b_; }

 private:
  double a_, b_;
  IntervalSpectrum x_, y_;
};

// ---------------------------------------------------------------------------
// Circular sectors and disks: eigenvalues (z/rho)^2 with z a zero of J_nu
// (Dirichlet arc) or of J_nu' (Neumann arc).

enum class ArcBc { Dirichlet, Neumann };

class SectorDiskSpectrum : public Spectrum {
 public:
  // Sector of opening gamma with the straight-edge conditions of `edges`.
  SectorDiskSpectrum(const SectorSpec& edges, double radius, ArcBc arc)
      : full_disk_(false), gamma_(edges.gamma), radius_(radius), arc_(arc), edges_(edges) {
    edges.validate();
    if (!std::isfinite(radius) || !(radius > 0.0)) throw DomainError("SectorDiskSpectrum: radius must be > 0");
  }

  // Full disk: integer orders, twice degenerate above zero.
  static SectorDiskSpectrum disk(double radius, ArcBc arc) {
    SectorDiskSpectrum s(SectorSpec{}, radius, arc);
    s.full_disk_ = true;
    s.gamma_ = 2.0 * detail::kPi;
    return s;
  }

  std::vector<double> eigenvalues_below(double cutoff) const override {
    const double X = radius_ * std::sqrt(std::max(cutoff, 0.0));
    std::vector<std::pair<double, int>> orders;  // (order, multiplicity)
    for (int j = 1;; ++j) {
      double nu;
      int mult = 1;
      if (full_disk_) {
        nu = j - 1;
        mult = j == 1 ? 1 : 2;
      } else {
        nu = angular_mode(edges_, j).order;
      }
      // every zero of J_nu and of J_nu' is at least nu
      if (nu > X) break;
      orders.emplace_back(nu, mult);
    }
    std::vector<std::vector<double>> per(orders.size());
    parallel_for(orders.size(), [&](std::size_t i) {
      const double nu = orders[i].first;
      per[i] = arc_ == ArcBc::Dirichlet ? bessel_j_zeros_below(nu, X) : bessel_j_prime_zeros_below(nu, X);
    });
    std::vector<double> out;
    for (std::size_t i = 0; i < orders.size(); ++i)
      for (double z : per[i]) {
        const double lam = (z / radius_) * (z / radius_);
        if (lam <= cutoff)
          for (int m = 0; m < orders[i].second; ++m) out.push_back(lam);
      }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Zeros of J_nu below X number at most (X - nu)/pi + 5/4 (spacing exceeds pi
  // once nu > 1/2, and j_{nu,k} >= (k - 1/4) pi otherwise); orders are spaced
  // pi/gamma. The Neumann count exceeds the Dirichlet one by at most one per
  // order through interlacing.
  CountingBound counting_bound() const override {
    const double pi = detail::kPi, r = radius_;
    if (full_disk_) {
      CountingBound b{r * r / pi, (1.0 / pi + 2.5) * r, 2.5};
      if (arc_ == ArcBc::Neumann) {
        b.c2 += 2.0 * r;
        b.c3 += 2.0;
      }
      return b;
    }
    const double g = gamma_;
    CountingBound b{g * r * r / (2.0 * pi * pi), (1.0 + g) * r / pi, 2.0};
    if (arc_ == ArcBc::Neumann) {
      b.c2 += g * r / pi;
      b.c3 += 1.0;
    }
    return b;
  }

  double weyl_area() const override { return 0.5 * gamma_ * radius_ * radius_; }

 private:
  bool full_disk_;
  double gamma_, radius_;
  ArcBc arc_;
  SectorSpec edges_;
};

// ---------------------------------------------------------------------------
// Partial heat traces and coefficient fits

struct TraceValue {
  double value = 0.0;
  double tail_bound = 0.0;
};

// sum over sorted eigenvalues <= cutoff of e^{-lambda t}, smallest terms first.
inline double sum_exp(const std::vector<double>& sorted, double t, double cutoff) {
  detail::Accumulator acc;
  for (auto it = sorted.rbegin(); it != sorted.rend(); ++it)
    if (*it <= cutoff) acc.add(std::exp(-*it * t));
  return acc.value();
}

inline TraceValue partial_trace(const Spectrum& spec, double t, double cutoff,
                                double tol = std::numeric_limits<double>::infinity()) {
  if (!std::isfinite(t) || !(t > 0.0)) throw DomainError("partial_trace: t must be > 0");
  TraceValue out;
  out.value = sum_exp(spec.eigenvalues_below(cutoff), t, cutoff);
  out.tail_bound = spec.tail_bound(t, cutoff);
  if (out.tail_bound > tol) throw ToleranceError("partial_trace: tail bound exceeds tolerance; raise the cutoff", out.tail_bound);
  return out;
}

struct TraceSample {
  double t = 0.0;
  double value = 0.0;
  double tail = 0.0;
};

inline std::vector<double> log_spaced(double lo, double hi, int n) {
  if (n < 2 || !(lo > 0.0) || !(hi > lo)) throw DomainError("log_spaced: need 0 < lo < hi and n >= 2");
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) t[static_cast<std::size_t>(k)] = lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
  t.back() = hi;
  return t;
}

// One eigenvalue list serves every t.
inline std::vector<TraceSample> trace_samples(const Spectrum& spec, const std::vector<double>& ts, double cutoff) {
  const std::vector<double> ev = spec.eigenvalues_below(cutoff);
  std::vector<TraceSample> out(ts.size());
  parallel_for(ts.size(), [&](std::size_t k) {
    out[k].t = ts[k];
    out[k].value = sum_exp(ev, ts[k], cutoff);
    out[k].tail = spec.tail_bound(ts[k], cutoff);
  });
  return out;
}

inline void write_trace_csv(std::ostream& os, const std::vector<TraceSample>& samples) {
  os << "t,partial_trace,tail_bound\n";
  char buf[96];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%.17e,%.17e,%.17e\n", s.t, s.value, s.tail);
    os << buf;
  }
}

struct FitReport {
  double a_minus1 = 0.0, a_minus_half = 0.0, a_0 = 0.0;
  double nuisance_half = 0.0, nuisance_one = 0.0;  // t^{1/2} and t coefficients
  double residual_norm = 0.0;                       // weighted RMS residual
  double t_min = 0.0, t_max = 0.0;
  double condition_number = 1.0;
};

struct FitOptions {
  double max_condition = 1e10;
};

// Weighted least squares on {t^-1, t^-1/2, 1, t^1/2, t}; each sample is weighted
// by the inverse of its tail bound plus rounding.
inline FitReport fit_asymptotics(const std::vector<TraceSample>& samples, const FitOptions& opt = {}) {
  const int n = static_cast<int>(samples.size());
  if (n < 8) throw DomainError("fit_asymptotics: need at least 8 samples");
  FitReport rep;
  rep.t_min = samples.front().t;
  rep.t_max = samples.front().t;
  for (const auto& s : samples) {
    if (!(s.t > 0.0 && s.t <= 0.2)) throw DomainError("fit_asymptotics: sample times must lie in (0, 0.2]");
    rep.t_min = std::min(rep.t_min, s.t);
    rep.t_max = std::max(rep.t_max, s.t);
  }
  Eigen::MatrixXd A(n, 5);
  Eigen::VectorXd y(n);
  for (int k = 0; k < n; ++k) {
    const auto& s = samples[static_cast<std::size_t>(k)];
    const double sigma = s.tail + 1e-15 * std::abs(s.value) + std::numeric_limits<double>::min();
    const double w = 1.0 / sigma;
    const double rt = std::sqrt(s.t);
    A(k, 0) = w / s.t;
    A(k, 1) = w / rt;
    A(k, 2) = w;
    A(k, 3) = w * rt;
    A(k, 4) = w * s.t;
    y(k) = w * s.value;
  }
  Eigen::VectorXd colnorm = A.colwise().norm();
  Eigen::MatrixXd An = A * colnorm.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(An, Eigen::ComputeThinU | Eigen::ComputeThinV);
  rep.condition_number = svd.singularValues()(0) / svd.singularValues()(4);
  if (!(rep.condition_number <= opt.max_condition))
    throw IllConditionedError("fit_asymptotics: basis is too collinear on this window", rep.condition_number);
  Eigen::VectorXd c = svd.solve(y).cwiseQuotient(colnorm);
  rep.a_minus1 = c(0);
  rep.a_minus_half = c(1);
  rep.a_0 = c(2);
  rep.nuisance_half = c(3);
  rep.nuisance_one = c(4);
  rep.residual_norm = std::sqrt((A * c - y).squaredNorm() / n);
  return rep;
}

struct TraceFitOptions {
  double t_min = 0.002, t_max = 0.05;
  int n_samples = 16;
  double cutoff = 0.0;  // 0: chosen so that the tail at t_min is below 1e-14
};

// Smallest cutoff whose tail bound at t is below tol.
inline double cutoff_for(const Spectrum& spec, double t, double tol) {
  double L = 100.0;
  while (spec.tail_bound(t, L) > tol) L *= 1.25;
  return L;
}

inline FitReport trace_fit(const Spectrum& spec, const TraceFitOptions& opt = {}) {
  const double cutoff = opt.cutoff > 0.0 ? opt.cutoff : cutoff_for(spec, opt.t_min, 1e-14);
  return fit_asymptotics(trace_samples(spec, log_spaced(opt.t_min, opt.t_max, opt.n_samples), cutoff));
}

// Number of eigenvalues <= lambda.
inline std::size_t counting_function(const Spectrum& spec, double lambda) { return spec.eigenvalues_below(lambda).size(); }

}  // namespace heattrace
