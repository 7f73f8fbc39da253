#pragma once

#include <stdexcept>
#include <string>

namespace sffnn {

// Error taxonomy mirrored by the CLI exit codes: config/usage problems
// exit 1, malformed or inconsistent data exits 2, internal invariant
// violations exit 3.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class InternalError : public std::runtime_error {
 public:
  explicit InternalError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a transition is applied in a state that does not admit it.
class IllegalTransitionError : public InternalError {
 public:
  explicit IllegalTransitionError(const std::string& what)
      : InternalError(what) {}
};

}  // namespace sffnn
