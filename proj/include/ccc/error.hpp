#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace ccc {

/// Base class for every error raised by the library. `kind()` is a short
/// machine-readable tag used by the CLI when it reports failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
  virtual const char* kind() const noexcept { return "error"; }
};

/// Tensor shapes that do not fit an operation. `dimension()` names the axis.
class ShapeError : public Error {
 public:
  ShapeError(std::string dimension, const std::string& message)
      : Error(message), dimension_(std::move(dimension)) {}
  const char* kind() const noexcept override { return "shape"; }
  const std::string& dimension() const noexcept { return dimension_; }

 private:
  std::string dimension_;
};

/// Invalid configuration value; `field()` is the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(message), field_(std::move(field)) {}
  const char* kind() const noexcept override { return "config"; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A record in an input file failed validation.
class ValidationError : public Error {
 public:
  ValidationError(std::optional<std::size_t> record, std::string field, const std::string& message)
      : Error(message), record_(record), field_(std::move(field)) {}
  const char* kind() const noexcept override { return "validation"; }
  std::optional<std::size_t> record() const noexcept { return record_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::optional<std::size_t> record_;
  std::string field_;
};

/// A metric whose denominator is zero.
class UndefinedMetricError : public Error {
 public:
  UndefinedMetricError(std::string metric, const std::string& message)
      : Error(message), metric_(std::move(metric)) {}
  const char* kind() const noexcept override { return "undefined-metric"; }
  const std::string& metric() const noexcept { return metric_; }

 private:
  std::string metric_;
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

}  // namespace ccc
