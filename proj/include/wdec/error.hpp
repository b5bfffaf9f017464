#pragma once

#include <stdexcept>
#include <string>

namespace wdec {

// Base for every recoverable failure raised by the library. `field` names the
// offending input (config key, manifest field, tensor) when there is one.
class Error : public std::runtime_error {
public:
  Error(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

class ConfigError : public Error {
  using Error::Error;
};

class FormatError : public Error {
  using Error::Error;
};

class ShapeError : public Error {
  using Error::Error;
};

class NumericError : public Error {
  using Error::Error;
};

}  // namespace wdec
