#pragma once

#include <stdexcept>
#include <string>

namespace rumble {

/// Base class for everything this library throws.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Signal carries the wrong unit for the requested operation.
class UnitError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value (band edges, gains, bit depths, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input has the wrong size or shape.
class SizeError : public Error {
public:
    using Error::Error;
};

/// Value outside the documented operating range.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Object is in the wrong state (e.g. spectrogram scale tag mismatch).
class StateError : public Error {
public:
    using Error::Error;
};

/// Dataset-level problems: empty sets, missing classes, label trouble.
class DataError : public Error {
public:
    using Error::Error;
};

/// Signal too degenerate for the requested statistic (zero variance).
class DegenerateSignalError : public DataError {
public:
    using DataError::DataError;
};

/// Numerical failure: singular system, non-finite intermediate.
class NumericError : public Error {
public:
    using Error::Error;
};

/// File / stream problems.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace rumble
