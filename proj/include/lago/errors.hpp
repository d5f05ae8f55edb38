#pragma once

#include <stdexcept>
#include <string>

namespace lago {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent input data (files, matrices, labels).
class DataError : public Error {
public:
    using Error::Error;
};

/// Incompatible matrix shapes between operands or across nodes.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Invalid solver or experiment configuration values.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Numerical failure inside a solver (divergence, non-finite state).
class SolverError : public Error {
public:
    using Error::Error;
};

/// Singular normal equations at lambda = 0; regularization required.
class RankDeficiencyError : public SolverError {
public:
    using SolverError::SolverError;
};

} // namespace lago
