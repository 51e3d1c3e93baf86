#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stoilow {

// Machine-readable failure codes. Every operation reports failures through
// stoilow::Error carrying one of these; reports serialize the code by name.
enum class ErrorCode {
  InvalidArgument,
  OutOfDomain,
  SeedNotInSet,
  EmptyInput,
  NoRadiusFound,
  VerificationFailed,
  ModulusNotFound,
  ChainBroken,
  ToleranceNotMet,
  PreconditionFailed,
  InfiniteLiftSuspect,
  DegenerateLoop,
  Unresolved,
  NonIsolatedBranch,
  MonodromyMismatch,
  ResidualExceeded,
  ParseError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::SeedNotInSet: return "SeedNotInSet";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NoRadiusFound: return "NoRadiusFound";
    case ErrorCode::VerificationFailed: return "VerificationFailed";
    case ErrorCode::ModulusNotFound: return "ModulusNotFound";
    case ErrorCode::ChainBroken: return "ChainBroken";
    case ErrorCode::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::InfiniteLiftSuspect: return "InfiniteLiftSuspect";
    case ErrorCode::DegenerateLoop: return "DegenerateLoop";
    case ErrorCode::Unresolved: return "Unresolved";
    case ErrorCode::NonIsolatedBranch: return "NonIsolatedBranch";
    case ErrorCode::MonodromyMismatch: return "MonodromyMismatch";
    case ErrorCode::ResidualExceeded: return "ResidualExceeded";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace stoilow
