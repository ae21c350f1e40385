#pragma once

#include <stdexcept>
#include <string>

namespace msforge {

/// Process exit codes used by the command-line front end.
enum class ExitCode : int {
  ok = 0,
  config = 1,
  synthesis = 2,
  convergence = 3,
  io = 4,
};

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept = 0;
};

/// Invalid configuration, schema violation or violated precondition.
class ConfigError : public Error {
public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::config; }
};

class PreconditionError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

/// Transverse mode with a non-positive squared frequency.
class StabilityError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

/// No waveform can satisfy the constraints (sizing or sign infeasibility).
class SynthesisError : public Error {
public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::synthesis; }
};

class ConvergenceError : public Error {
public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::convergence; }
};

class IoError : public Error {
public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::io; }
};

} // namespace msforge
