#pragma once

#include <stdexcept>
#include <string>

namespace rspace {

/// Raised when an input violates a documented invariant (bad probability,
/// malformed support, parameter out of range).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Conditioning on an event of probability zero.
class NullEventError : public std::domain_error {
 public:
  explicit NullEventError(const std::string& what)
      : std::domain_error("conditioning on null event: " + what) {}
};

/// Exact enumeration would exceed the configured state cap.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

}  // namespace rspace
