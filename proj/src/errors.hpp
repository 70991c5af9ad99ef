#pragma once

#include <stdexcept>
#include <string>

namespace risauction {

// Exception taxonomy. The C API maps each type onto a status code.

/// Invalid argument to an operation (negative distance, non-positive price, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation not permitted in the current state (e.g. stepping a finished auction).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Shape or dimension mismatch.
class StructureError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Non-finite values produced during optimization.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace risauction
