#pragma once

#include <stdexcept>
#include <string>

namespace thermoform {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid construction arguments (bad shapes, broken invariants).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numeric quantity is undefined for the given input, e.g. an empty
/// cylinder sum or a negative multiple of a -inf potential value.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Enumeration would exceed the configured word budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace thermoform
