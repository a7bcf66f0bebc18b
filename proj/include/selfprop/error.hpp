#pragma once

#include <stdexcept>
#include <string>

namespace selfprop {

// Bad arguments: dimension or width mismatches, out-of-range parameters,
// non-bijective tables where a bijection is required.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An operation was called in a state its contract forbids.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Configuration rejected; key() names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace selfprop
