#pragma once

#include <stdexcept>
#include <string>

namespace dmed {

/// Argument outside the mathematical domain of an operation (e.g. mu >= 1).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative solver hit its iteration cap. For valid inputs this is a defect.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive quadrature could not meet its absolute tolerance.
class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Regret-bound parameters violate a hypothesis of the bound.
class InfeasibleParameters : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Bad policy construction parameters or out-of-order policy usage.
class PolicyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed configuration document; the message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error("config key '" + key + "': " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace dmed
