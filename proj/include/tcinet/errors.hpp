#pragma once

#include <stdexcept>
#include <string>

namespace tcinet {

/// Malformed input: wrong lengths, non-symmetric matrices, bad file contents.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A problem is too large for the requested code path.
class CapacityError : public std::length_error {
 public:
  explicit CapacityError(const std::string& what) : std::length_error(what) {}
};

/// Broken internal invariant (e.g. a singular intersection matrix).
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

/// Thrown by an objective to stop an optimizer run cleanly; the optimizer
/// returns its partial results instead of propagating.
class ObjectiveAbort : public std::runtime_error {
 public:
  explicit ObjectiveAbort(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tcinet
