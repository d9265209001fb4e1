#pragma once

#include <stdexcept>
#include <string>

namespace jscc {

// Domain violations use std::domain_error, out-of-table lookups use
// std::range_error, malformed parameter sets use std::invalid_argument.
// The types below cover the failure modes that have no standard analogue.

/// The sign conditions that guarantee a bracketed root do not hold.
class NoRootError : public std::runtime_error {
 public:
  explicit NoRootError(const std::string& what) : std::runtime_error(what) {}
};

/// A quantization-error covariance with a zero eigenvalue: the rate it
/// implies is unbounded.
class DegenerateQuantizerError : public std::domain_error {
 public:
  explicit DegenerateQuantizerError(const std::string& what) : std::domain_error(what) {}
};

/// An internal cross-check failed, e.g. an optimizer incumbent that does not
/// comply with the profile it was optimized for.
class ConsistencyError : public std::logic_error {
 public:
  explicit ConsistencyError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace jscc
