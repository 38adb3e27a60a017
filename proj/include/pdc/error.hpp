#pragma once

#include <stdexcept>
#include <string>

namespace pdc {

/// Base for all toolkit errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Wavelength outside a dispersion model's validity interval, or unknown axis.
class RangeError : public Error {
public:
  using Error::Error;
};

/// Invalid parameters handed to a constructor or operation.
class ConfigError : public Error {
public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

/// Malformed or inconsistent input data (files, streams, measurements).
class DataError : public Error {
public:
  using Error::Error;
};

} // namespace pdc
