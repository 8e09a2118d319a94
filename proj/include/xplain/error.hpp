#pragma once

#include <stdexcept>
#include <string>

namespace xplain {

/// Malformed or inconsistent arguments to a library call.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid experiment configuration. `key()` names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Failure while reading an external data file.
class IngestionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical invariant broken (e.g. a non-PSD Gram matrix reaching the solver).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace xplain
