#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dcload {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Problems with the input data itself: malformed files, too few samples,
// degenerate series. The CLI maps this family to exit code 3.
class DataError : public Error {
public:
    using Error::Error;
};

// Bad CSV header or unrecognised file layout.
class FormatError : public DataError {
public:
    using DataError::DataError;
};

// A malformed data row; carries the 1-based line number.
class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class InsufficientDataError : public DataError {
public:
    using DataError::DataError;
};

class DegenerateScalerError : public DataError {
public:
    using DataError::DataError;
};

// Metric undefined for the given input (e.g. R^2 of a constant series).
class UndefinedMetricError : public DataError {
public:
    using DataError::DataError;
};

// Unreadable, inconsistent or unsupported checkpoint file.
class CheckpointError : public DataError {
public:
    using DataError::DataError;
};

// Invalid configuration or hyperparameters. CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Tensor or vector dimensions that do not line up.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    using Error::Error;
};

} // namespace dcload
