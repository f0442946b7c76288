#pragma once

#include <stdexcept>
#include <string>

namespace gpspectra {

/// Precondition or parameter violation (bad kernel, xi outside (0,1), ...).
class DomainError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Base for failures of a numerical procedure on otherwise valid input.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class PoleProximity : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class QuadratureFailure : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class NoSignChange : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class ResidualFailure : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class NonContraction : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class MaxIterations : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class NewtonDivergence : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class ContourFailure : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class OverflowRisk : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class EnvelopeFitFailure : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

} // namespace gpspectra
