#pragma once

#include <stdexcept>
#include <string>

namespace metasched {

/// Precondition on an argument was violated (bad count, out-of-range index,
/// empty trajectory, mismatched lengths).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A non-finite value reached a computation that requires finite inputs.
class NumericError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A baseline loss that is zero or negative was used as a divisor.
class InvalidBaseline : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An environment returned something that breaks the interface contract.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Configuration document is malformed; key() names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(message), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace metasched
