#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace bvm {

// A probability or density left its admissible range.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Requested accuracy could not be met at the available grid resolution.
class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid sizes, indices or arguments passed to a numerical routine.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Scenario configuration problems; `field()` names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace bvm
