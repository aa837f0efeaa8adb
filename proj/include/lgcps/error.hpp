#pragma once

#include <stdexcept>
#include <string>

namespace lgcps {

enum class ErrorCode {
  InvalidArgument = 1,
  Io = 2,
  Numerical = 3,
  ScreenFailure = 4,
  BudgetExhausted = 5,
  Internal = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& what) : Error(ErrorCode::InvalidArgument, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorCode::Io, what) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(ErrorCode::Numerical, what) {}
};

// Raised when too many prior draws produce patterns that fail the n > m screen.
struct ScreenFailure : Error {
  explicit ScreenFailure(const std::string& what) : Error(ErrorCode::ScreenFailure, what) {}
};

}  // namespace lgcps
