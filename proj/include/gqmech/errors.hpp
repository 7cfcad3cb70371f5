#ifndef GQMECH_ERRORS_HPP
#define GQMECH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gqm {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NonFiniteValue : public Error {
 public:
  using Error::Error;
};

// Transition denominator vanished: the point leaves the chart overlap.
class DenominatorVanishes : public Error {
 public:
  using Error::Error;
};

// A map hit the coordinate singularity of the current chart.
class ChartSingularity : public Error {
 public:
  using Error::Error;
};

class SuperluminalInput : public Error {
 public:
  using Error::Error;
};

class MetricInversionFailure : public Error {
 public:
  using Error::Error;
};

class ImplicitSolveDiverged : public Error {
 public:
  using Error::Error;
};

class NonFiniteState : public Error {
 public:
  using Error::Error;
};

class LinearSolveDiverged : public Error {
 public:
  using Error::Error;
};

class NonSymmetricHamiltonian : public Error {
 public:
  using Error::Error;
};

class CFLViolation : public Error {
 public:
  using Error::Error;
};

// Affine-only entry point received a non-affine observable.
class QuadraticRequired : public Error {
 public:
  using Error::Error;
};

class AnalyticGradientRequired : public Error {
 public:
  using Error::Error;
};

class InsufficientRunLength : public Error {
 public:
  using Error::Error;
};

// Configuration error; carries the offending field path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gqm

#endif  // GQMECH_ERRORS_HPP
