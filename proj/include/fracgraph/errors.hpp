#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fracgraph {

enum class ErrorKind {
  NonPositiveMeasure,
  NonPositiveWeight,
  AsymmetricWeight,
  SelfLoop,
  Disconnected,
  DuplicateEdge,
  LengthMismatch,
  NoConvergence,
  NegativeTime,
  ExponentOutOfRange,
  PositivityViolation,
  QuadratureNotConverged,
  DomainError,
  NonPositiveState,
  StepSizeUnderflow,
  BoundViolation,
  PicardNotConverged,
  InvalidConfig,
  ParseError,
  IoError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPositiveMeasure: return "NonPositiveMeasure";
    case ErrorKind::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorKind::AsymmetricWeight: return "AsymmetricWeight";
    case ErrorKind::SelfLoop: return "SelfLoop";
    case ErrorKind::Disconnected: return "Disconnected";
    case ErrorKind::DuplicateEdge: return "DuplicateEdge";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NegativeTime: return "NegativeTime";
    case ErrorKind::ExponentOutOfRange: return "ExponentOutOfRange";
    case ErrorKind::PositivityViolation: return "PositivityViolation";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::NonPositiveState: return "NonPositiveState";
    case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorKind::BoundViolation: return "BoundViolation";
    case ErrorKind::PicardNotConverged: return "PicardNotConverged";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Input and usage problems, as opposed to failures of a numerical check.
constexpr bool is_input_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPositiveMeasure:
    case ErrorKind::NonPositiveWeight:
    case ErrorKind::AsymmetricWeight:
    case ErrorKind::SelfLoop:
    case ErrorKind::Disconnected:
    case ErrorKind::DuplicateEdge:
    case ErrorKind::LengthMismatch:
    case ErrorKind::NegativeTime:
    case ErrorKind::ExponentOutOfRange:
    case ErrorKind::DomainError:
    case ErrorKind::InvalidConfig:
    case ErrorKind::ParseError:
    case ErrorKind::IoError:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

namespace detail {

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

inline void require_length(std::size_t got, std::size_t expected, std::string_view name) {
  if (got != expected) {
    throw Error(ErrorKind::LengthMismatch, std::string(name) + " has length " + std::to_string(got) +
                                               ", expected " + std::to_string(expected));
  }
}

}  // namespace detail
}  // namespace fracgraph
