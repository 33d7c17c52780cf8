#pragma once

#include <stdexcept>
#include <string>

namespace photodur {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid construction parameters (violated type invariant).
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// The dispersion relation has no sign change in the guided band.
class NoGuidedMode : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature did not reach its target tolerance.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : Error(what + " (achieved error estimate " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// The k grid cannot resolve the phase kz - omega t at the requested point.
class PhaseResolutionError : public Error {
 public:
  using Error::Error;
};

/// Probability mass near the edge of the time window exceeds the bound.
class TailTruncationError : public Error {
 public:
  TailTruncationError(const std::string& what, int moment_order)
      : Error(what), moment_order_(moment_order) {}
  int moment_order() const noexcept { return moment_order_; }

 private:
  int moment_order_;
};

/// Variance radicand below -tolerance.
class NegativeVarianceError : public Error {
 public:
  NegativeVarianceError(const std::string& what, double radicand)
      : Error(what), radicand_(radicand) {}
  double radicand() const noexcept { return radicand_; }

 private:
  double radicand_;
};

/// Integrand not integrable at k = 0.
class IntegrabilityError : public Error {
 public:
  using Error::Error;
};

/// Two independent evaluations of the same quantity disagree.
class CrossCheckMismatch : public Error {
 public:
  CrossCheckMismatch(const std::string& what, double first, double second)
      : Error(what), first_(first), second_(second) {}
  double first() const noexcept { return first_; }
  double second() const noexcept { return second_; }

 private:
  double first_;
  double second_;
};

/// Calibration data not yet in the linear-growth regime.
class NotAsymptotic : public Error {
 public:
  using Error::Error;
};

}  // namespace photodur
