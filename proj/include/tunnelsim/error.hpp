#pragma once

#include <stdexcept>
#include <string>

namespace tunnelsim {

/// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  kSuccess = 0,
  kConfiguration = 2,
  kDivergence = 3,
  kUnconverged = 4,
  kInternal = 1,
};

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, ExitCode code = ExitCode::kInternal)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Invalid physical or run configuration, malformed config files and schemas.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what, ExitCode::kConfiguration) {}
};

/// A closed-form derivation evaluated outside its domain (e.g. Thomas-Fermi with g <= 0).
class DerivationDomainError : public Error {
 public:
  explicit DerivationDomainError(const std::string& what) : Error(what, ExitCode::kConfiguration) {}
};

/// Iterative solver failed to reach its tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what, ExitCode::kUnconverged), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Non-finite field or force encountered during time stepping.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long step)
      : Error(what, ExitCode::kDivergence), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// Norm drift or stability bound exceeded.
class StepSizeError : public Error {
 public:
  explicit StepSizeError(const std::string& what) : Error(what, ExitCode::kDivergence) {}
};

/// Density or samples reached the edge of the simulation domain.
class DomainError : public Error {
 public:
  /// side: -1 lower edge, +1 upper edge, 0 unspecified.
  explicit DomainError(const std::string& what, int side = 0)
      : Error(what, ExitCode::kDivergence), side_(side) {}
  int side() const noexcept { return side_; }

 private:
  int side_;
};

class SamplingError : public Error {
 public:
  explicit SamplingError(const std::string& what) : Error(what, ExitCode::kConfiguration) {}
};

/// Transmission requested before the stop criterion held.
class PrematureMeasurementError : public Error {
 public:
  explicit PrematureMeasurementError(const std::string& what) : Error(what, ExitCode::kUnconverged) {}
};

class AggregationError : public Error {
 public:
  explicit AggregationError(const std::string& what) : Error(what, ExitCode::kConfiguration) {}
};

class PairingError : public Error {
 public:
  explicit PairingError(const std::string& what) : Error(what, ExitCode::kConfiguration) {}
};

class FitError : public Error {
 public:
  explicit FitError(const std::string& what) : Error(what, ExitCode::kUnconverged) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what, ExitCode::kUnconverged) {}
};

/// Missing columns or empty result tables.
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error(what, ExitCode::kConfiguration) {}
};

}  // namespace tunnelsim
