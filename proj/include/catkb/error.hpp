#pragma once

#include <stdexcept>
#include <string>

namespace catkb {

enum class ErrorKind {
  parse,
  integrity,
  lookup,
  contract,
  capability,
  transport,
  protocol,
  undefined_metric,
  config,
  io,
  stage,
};

/// Base of every error the library raises. `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorKind::parse, what) {}
};

class IntegrityError : public Error {
 public:
  explicit IntegrityError(const std::string& what) : Error(ErrorKind::integrity, what) {}
};

class LookupError : public Error {
 public:
  explicit LookupError(const std::string& what) : Error(ErrorKind::lookup, what) {}
};

class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error(ErrorKind::contract, what) {}
};

class CapabilityError : public Error {
 public:
  explicit CapabilityError(const std::string& what) : Error(ErrorKind::capability, what) {}
};

class TransportError : public Error {
 public:
  explicit TransportError(const std::string& what) : Error(ErrorKind::transport, what) {}
};

class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& what) : Error(ErrorKind::protocol, what) {}
};

class UndefinedMetricError : public Error {
 public:
  explicit UndefinedMetricError(const std::string& what)
      : Error(ErrorKind::undefined_metric, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

/// A pipeline stage failed. Carries the stage name and the kind of the underlying error.
class StageError : public Error {
 public:
  StageError(std::string stage, ErrorKind cause, const std::string& what)
      : Error(ErrorKind::stage, "stage '" + stage + "' failed: " + what),
        stage_(std::move(stage)),
        cause_(cause) {}
  const std::string& stage() const noexcept { return stage_; }
  ErrorKind cause() const noexcept { return cause_; }

 private:
  std::string stage_;
  ErrorKind cause_;
};

}  // namespace catkb
