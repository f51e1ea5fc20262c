#pragma once

#include <stdexcept>
#include <string>

namespace heattrace {

// Every failure raised by the library derives from Error so callers can catch
// one type; the subclasses carry the diagnostics of the individual operation.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : Error {
  using Error::Error;
};

struct OverflowError : Error {
  using Error::Error;
};

struct AccuracyLossError : Error {
  AccuracyLossError(const std::string& what, double achieved_tol)
      : Error(what), achieved_tol(achieved_tol) {}
  double achieved_tol;
};

struct NonConvergenceError : Error {
  NonConvergenceError(const std::string& what, double lo, double hi)
      : Error(what), bracket_lo(lo), bracket_hi(hi) {}
  double bracket_lo;
  double bracket_hi;
};

struct BudgetExceededError : Error {
  BudgetExceededError(const std::string& what, double best, double err)
      : Error(what), best_estimate(best), abs_err_estimate(err) {}
  double best_estimate;
  double abs_err_estimate;
};

struct IllConditionedError : Error {
  IllConditionedError(const std::string& what, double cond)
      : Error(what), condition_number(cond) {}
  double condition_number;
};

struct FitResidualError : Error {
  FitResidualError(const std::string& what, double residual, double allowed)
      : Error(what), residual(residual), allowed(allowed) {}
  double residual;
  double allowed;
};

struct ToleranceError : Error {
  ToleranceError(const std::string& what, double achieved)
      : Error(what), achieved_bound(achieved) {}
  double achieved_bound;
};

struct UnsupportedError : Error {
  using Error::Error;
};

struct StepSizeError : Error {
  StepSizeError(const std::string& what, double discretization)
      : Error(what), discretization_estimate(discretization) {}
  double discretization_estimate;
};

// Input validation; `field` names the offending key for CLI diagnostics.
struct ValidationError : Error {
  ValidationError(const std::string& field, const std::string& msg)
      : Error(field + ": " + msg), field(field) {}
  std::string field;
};

}  // namespace heattrace
