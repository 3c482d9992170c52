#pragma once

#include <stdexcept>
#include <string>

namespace monoscale {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rotation angle too close to pi for the logarithm map to be unique.
class CutLocusError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class IndexMismatch : public Error {
 public:
  using Error::Error;
};

class SingularNormalEquations : public Error {
 public:
  using Error::Error;
};

class InvalidGraph : public Error {
 public:
  using Error::Error;
};

class AlreadyScaled : public Error {
 public:
  using Error::Error;
};

class EmptyCloud : public Error {
 public:
  using Error::Error;
};

class DegenerateMask : public Error {
 public:
  using Error::Error;
};

class UnreachableTerrain : public Error {
 public:
  using Error::Error;
};

class NoVisibleTerrain : public Error {
 public:
  using Error::Error;
};

/// Optimizer stopped before meeting a convergence criterion.
class NotConverged : public Error {
 public:
  using Error::Error;
};

/// A stage finished without producing anything usable (e.g. no graspable point).
class EmptyResult : public Error {
 public:
  using Error::Error;
};

/// Bad configuration value. `field()` names the offending key (empty for
/// syntax errors), `line()` is 1-based or 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what, int line = 0)
      : Error("config error" + (line > 0 ? " at line " + std::to_string(line) : std::string()) +
              (field.empty() ? std::string() : " in '" + field + "'") + ": " + what),
        field_(std::move(field)),
        reason_(what),
        line_(line) {}

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string field_;
  std::string reason_;
  int line_;
};

/// Missing, unreadable or corrupt file.
class IoError : public Error {
 public:
  IoError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace monoscale
