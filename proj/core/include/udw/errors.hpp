#pragma once

#include <stdexcept>
#include <string>

namespace udw {

/// Base for runtime numerical failures (CLI maps these to exit code 3).
class NumericsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonConvergence : public NumericsError {
 public:
  using NumericsError::NumericsError;
};

class SingularInterior : public NumericsError {
 public:
  using NumericsError::NumericsError;
};

class NullSeparation : public NumericsError {
 public:
  using NumericsError::NumericsError;
};

class NonConstantAcceleration : public NumericsError {
 public:
  using NumericsError::NumericsError;
};

class InvalidState : public NumericsError {
 public:
  using NumericsError::NumericsError;
};

class DegenerateMeasurement : public NumericsError {
 public:
  using NumericsError::NumericsError;
};

class UncertaintyViolation : public NumericsError {
 public:
  using NumericsError::NumericsError;
};

class PoorFit : public NumericsError {
 public:
  using NumericsError::NumericsError;
};

class UnderSampled : public NumericsError {
 public:
  using NumericsError::NumericsError;
};

// Argument/contract violations (CLI maps these to exit code 2 at parse time).
class UnsupportedDimension : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidScenario : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace udw
