#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ittm {

enum class ErrorKind {
  MissingRule,
  HaltedMachineStepped,
  NoCycleFound,
  UnboundedTape,
  LimitUndetectedWithinBudget,
  MixedProvenance,
  WrongGraphKind,
  EmptyInput,
  AmbiguousReplay,
  UnknownNode,
  NotABijection,
  NotSquare,
  NegativeEntry,
  NonIntegralCount,
  NormalizationError,
  DomainError,
  ParseFailure,
  BadFormat,
};

constexpr std::string_view error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingRule: return "MissingRule";
    case ErrorKind::HaltedMachineStepped: return "HaltedMachineStepped";
    case ErrorKind::NoCycleFound: return "NoCycleFound";
    case ErrorKind::UnboundedTape: return "UnboundedTape";
    case ErrorKind::LimitUndetectedWithinBudget: return "LimitUndetectedWithinBudget";
    case ErrorKind::MixedProvenance: return "MixedProvenance";
    case ErrorKind::WrongGraphKind: return "WrongGraphKind";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::AmbiguousReplay: return "AmbiguousReplay";
    case ErrorKind::UnknownNode: return "UnknownNode";
    case ErrorKind::NotABijection: return "NotABijection";
    case ErrorKind::NotSquare: return "NotSquare";
    case ErrorKind::NegativeEntry: return "NegativeEntry";
    case ErrorKind::NonIntegralCount: return "NonIntegralCount";
    case ErrorKind::NormalizationError: return "NormalizationError";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::ParseFailure: return "ParseFailure";
    case ErrorKind::BadFormat: return "BadFormat";
  }
  return "Unknown";
}

/// Domain error raised by every module. The CLI maps these to exit code 1
/// and prints `name()` on standard error.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_name(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return error_name(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace ittm
