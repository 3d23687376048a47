#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wachlab {

enum class ErrorKind {
  NotAUnit,
  PrecisionLoss,
  ExactDivisionFailure,
  CongruenceFailure,
  NonConvergence,
  WindowOverflow,
  Degenerate,
  NotExact,
  NotIntegral,
  ParseError,
  ValidationError,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotAUnit: return "NotAUnit";
    case ErrorKind::PrecisionLoss: return "PrecisionLoss";
    case ErrorKind::ExactDivisionFailure: return "ExactDivisionFailure";
    case ErrorKind::CongruenceFailure: return "CongruenceFailure";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::WindowOverflow: return "WindowOverflow";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::NotExact: return "NotExact";
    case ErrorKind::NotIntegral: return "NotIntegral";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind so
/// the batch front-end can embed it in a report instead of aborting.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace wachlab
