#pragma once

#include <stdexcept>
#include <utility>
#include <string>

namespace csl {

/// Base class for all library errors. `kind` names the concrete error
/// for machine-readable records.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what, std::string kind = "Error")
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

private:
  std::string kind_;
};

class DomainMismatch : public Error {
public:
  explicit DomainMismatch(const std::string& what) : Error(what, "DomainMismatch") {}
};

class InvalidExponent : public Error {
public:
  explicit InvalidExponent(const std::string& what) : Error(what, "InvalidExponent") {}
};

class NonCoercive : public Error {
public:
  explicit NonCoercive(const std::string& what) : Error(what, "NonCoercive") {}
};

class ShootingFailure : public Error {
public:
  explicit ShootingFailure(const std::string& what) : Error(what, "ShootingFailure") {}
};

class LinearSolveFailure : public Error {
public:
  explicit LinearSolveFailure(const std::string& what) : Error(what, "LinearSolveFailure") {}
};

class PoleMismatch : public Error {
public:
  explicit PoleMismatch(const std::string& what) : Error(what, "PoleMismatch") {}
};

class IllConditionedGram : public Error {
public:
  explicit IllConditionedGram(const std::string& what) : Error(what, "IllConditionedGram") {}
};

class EigenSolveFailure : public Error {
public:
  explicit EigenSolveFailure(const std::string& what) : Error(what, "EigenSolveFailure") {}
};

class ZeroField : public Error {
public:
  explicit ZeroField(const std::string& what) : Error(what, "ZeroField") {}
};

class FitDegenerate : public Error {
public:
  explicit FitDegenerate(const std::string& what) : Error(what, "FitDegenerate") {}
};

class SingularDesign : public Error {
public:
  explicit SingularDesign(const std::string& what) : Error(what, "SingularDesign") {}
};

class InsufficientSweep : public Error {
public:
  explicit InsufficientSweep(const std::string& what) : Error(what, "InsufficientSweep") {}
};

class EmptyZeroSet : public Error {
public:
  explicit EmptyZeroSet(const std::string& what) : Error(what, "EmptyZeroSet") {}
};

class DivisionUnstable : public Error {
public:
  explicit DivisionUnstable(const std::string& what) : Error(what, "DivisionUnstable") {}
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error(what, "ConfigError") {}
};

}  // namespace csl
