#pragma once

#include <stdexcept>
#include <string>

namespace voe {

/// Process exit codes shared by the library error types and the CLI.
enum class ExitCode : int {
  kSuccess = 0,
  kConfig = 2,
  kData = 3,
  kInfeasible = 4,
  kInvariant = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Bad or inconsistent configuration: unknown preset, malformed grid, mismatched artifacts.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ExitCode::kConfig, what) {}
};

/// Input data that does not satisfy its schema. `field()` names the offending field or column.
class DataError : public Error {
 public:
  DataError(const std::string& field, const std::string& what)
      : Error(ExitCode::kData, what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what) : Error(ExitCode::kInfeasible, what) {}
};

class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what) : Error(ExitCode::kInvariant, what) {}
};

}  // namespace voe
