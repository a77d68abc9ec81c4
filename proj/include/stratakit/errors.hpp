#pragma once

#include <stdexcept>
#include <string>

namespace stratakit {

/// Process exit codes used by the command-line tool. Stable contract.
enum class ExitCode : int {
  kOk = 0,
  kDisagreement = 1,
  kSchema = 2,
  kResource = 3,
  kUnsupported = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::kSchema; }
};

/// Malformed or inconsistent input (dimension mismatch, schema violation).
class InputError : public Error {
 public:
  explicit InputError(const std::string& what, std::string path = {})
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Mathematically undefined request (slope of the zero vector, ray of 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A configured bound would be exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kResource; }
};

/// Operation not available for this instance (exact path on d_v >= 2).
class UnsupportedError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kUnsupported; }
};

/// NaN, overflow or a step size collapse inside a numerical routine.
class NumericError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kDisagreement; }
};

/// No certified semistable block for a requested dimension vector.
class GenerationError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kUnsupported; }
};

}  // namespace stratakit
