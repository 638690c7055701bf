#pragma once

#include <stdexcept>
#include <string>

namespace nsksp {

enum class ErrorCode {
  IndexOutOfRange,
  NonFiniteValue,
  DimensionMismatch,
  ParseError,
  UnsupportedFormat,
  IoError,
  ZeroDiagonal,
  ZeroPivot,
  SingularCoarse,
  InvalidArgument,
  InvalidSpec,
  UnknownSolver,
  ConfigError,
};

const char* to_string(ErrorCode code) noexcept;

/// Single exception type for the library; `code()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Pivot/diagonal failures carry the offending row.
class RowError : public Error {
 public:
  RowError(ErrorCode code, std::size_t row, const std::string& what)
      : Error(code, what + " (row " + std::to_string(row) + ")"), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace nsksp
