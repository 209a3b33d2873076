#pragma once

#include <stdexcept>
#include <string>

namespace reisim {

/// Argument outside the mathematical domain of a closed-form model.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid simulation configuration; `key()` names the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class ParseError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class ValidationError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class UnknownParameter : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NeverInBeam : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownVariant : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateSeries : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace reisim
