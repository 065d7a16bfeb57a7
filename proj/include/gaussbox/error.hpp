#pragma once

#include <stdexcept>
#include <string>

namespace gaussbox {

/// Arguments violate an operation's contract (wrong sizes, non-finite values,
/// out-of-order thresholds, malformed payloads).
class InvalidInputError : public std::invalid_argument {
public:
    explicit InvalidInputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Structurally valid input that is numerically unusable: rank-deficient point
/// sets, non-positive-definite covariances, empty datasets. Subtype of
/// InvalidInputError so callers may treat it uniformly or specially.
class DegenerateInputError : public InvalidInputError {
public:
    explicit DegenerateInputError(const std::string& what) : InvalidInputError(what) {}
};

/// File could not be read or written.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gaussbox
