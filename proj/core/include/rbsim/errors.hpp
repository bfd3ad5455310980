#pragma once

#include <stdexcept>
#include <string>

namespace rbsim {

/// Base class for all library errors. `kind()` returns a stable
/// machine-readable class name, also used as the CLI exit label.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

struct ParseError : Error {
  explicit ParseError(const std::string& w) : Error("ParseError", w) {}
};

struct KinematicsError : Error {
  explicit KinematicsError(const std::string& w) : Error("KinematicsError", w) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& w) : Error("ValidationError", w) {}
};

struct DimensionError : Error {
  explicit DimensionError(const std::string& w) : Error("DimensionError", w) {}
};

struct UnknownFrameError : Error {
  explicit UnknownFrameError(const std::string& w) : Error("UnknownFrameError", w) {}
};

struct SingularMassMatrix : Error {
  explicit SingularMassMatrix(const std::string& w) : Error("SingularMassMatrix", w) {}
};

struct BadProblem : Error {
  explicit BadProblem(const std::string& w) : Error("BadProblem", w) {}
};

struct QpInfeasible : Error {
  explicit QpInfeasible(const std::string& w) : Error("QpInfeasible", w) {}
};

struct NonFiniteState : Error {
  explicit NonFiniteState(const std::string& w) : Error("NonFiniteState", w) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error("ConfigError", w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error("IoError", w) {}
};

}  // namespace rbsim
