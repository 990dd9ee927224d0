#pragma once

#include <stdexcept>
#include <string>

namespace tnet {

/// Raised when numerical input or output is unusable (non-finite data,
/// failed factorization, non-Hermitian effective operator).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for malformed run configurations. `field` names the offending key
/// using dotted paths, e.g. "model.beta".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Checkpoint file could not be parsed or failed its checksum.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tnet
