#pragma once

#include <stdexcept>
#include <string>

namespace rnnfc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input problems: unreadable or malformed files.
class ParseError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Data-contract violations: the input is well-formed but unusable.
class ValidationError : public Error {
public:
    using Error::Error;
};

class ImputationError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class SplitError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class SizingError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ScalingError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ContractError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ShapeError : public ContractError {
public:
    using ContractError::ContractError;
};

/// A metric is mathematically undefined for the given inputs.
class UndefinedMetricError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class AggregationError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Numeric failures: NaN/Inf, singular systems, divergence.
class NumericError : public Error {
public:
    using Error::Error;
};

class DeterminismError : public NumericError {
public:
    using NumericError::NumericError;
};

class TrainingError : public NumericError {
public:
    using NumericError::NumericError;
};

class TuningError : public NumericError {
public:
    using NumericError::NumericError;
};

} // namespace rnnfc
