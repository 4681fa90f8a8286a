#pragma once

#include <stdexcept>
#include <string>

namespace qfuel {

// Root of every error the library throws.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Subsystem dimensions disagree, or a vector/matrix has the wrong size.
class DimensionError : public Error {
  public:
    using Error::Error;
};

// tensor() called on a state and an operator.
class KindMismatchError : public Error {
  public:
    using Error::Error;
};

// A caller broke a documented precondition (e.g. a non-Hermitian generator).
class ContractViolation : public Error {
  public:
    using Error::Error;
};

// An expectation value came back with a non-negligible imaginary part.
class HermiticityError : public Error {
  public:
    using Error::Error;
};

class ArgumentError : public Error {
  public:
    using Error::Error;
};

// A state or density matrix violates its normalization/positivity invariant.
class NormError : public Error {
  public:
    using Error::Error;
};

// Projectors do not resolve the identity or are not mutually orthogonal.
class CompletenessError : public Error {
  public:
    using Error::Error;
};

// State has weight outside the single-excitation subspace {|01>, |10>}.
class SubspaceError : public Error {
  public:
    using Error::Error;
};

// Physical parameters outside the domain of the model.
class ParameterError : public Error {
  public:
    using Error::Error;
};

class DivergentRatioError : public ParameterError {
  public:
    using ParameterError::ParameterError;
};

}  // namespace qfuel
