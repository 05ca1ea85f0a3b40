#pragma once

#include <stdexcept>
#include <string>

namespace fnls {

/// Parameters fall outside the regime an operation requires.
class RegimeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A grid, step count or term budget would be exceeded.
class ResourceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Energy reached the truncation edge of a spectral state.
class TruncationError : public std::runtime_error {
public:
  TruncationError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

private:
  double time_;
};

/// Malformed configuration input (JSON or CLI).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace fnls
