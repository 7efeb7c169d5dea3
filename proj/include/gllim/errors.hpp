#pragma once

#include <stdexcept>
#include <string>

namespace gllim {

// Shape / dimension mismatch between inputs and model.
class DimensionError : public std::invalid_argument {
public:
    explicit DimensionError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A covariance or Gram matrix is singular beyond the conditioning floor.
class IllConditionedError : public std::runtime_error {
public:
    explicit IllConditionedError(const std::string& msg) : std::runtime_error(msg) {}
};

// Parameters violate a structural invariant (non-SPD blocks, bad weights, ...).
class InvalidParametersError : public std::runtime_error {
public:
    explicit InvalidParametersError(const std::string& msg) : std::runtime_error(msg) {}
};

// EM could not produce a usable model (all components removed, non-finite likelihood).
class FitError : public std::runtime_error {
public:
    explicit FitError(const std::string& msg) : std::runtime_error(msg) {}
};

// Input files could not be parsed.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace gllim
