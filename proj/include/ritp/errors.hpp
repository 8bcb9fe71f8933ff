#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ritp {

enum class ErrorCode {
  InvalidInput,
  InvalidScenario,
  InvalidConfig,
  NoPathFound,
  DegenerateSegment,
  SingularVelocity,
  SingularKKT,
  Infeasible,
  MaxIterations,
  IterationLimit,
  BoundaryMismatch,
  PlanningFailed,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::NoPathFound: return "NoPathFound";
    case ErrorCode::DegenerateSegment: return "DegenerateSegment";
    case ErrorCode::SingularVelocity: return "SingularVelocity";
    case ErrorCode::SingularKKT: return "SingularKKT";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::IterationLimit: return "IterationLimit";
    case ErrorCode::BoundaryMismatch: return "BoundaryMismatch";
    case ErrorCode::PlanningFailed: return "PlanningFailed";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by the pipeline; wraps the first segment failure.
class PlanningFailed : public Error {
 public:
  PlanningFailed(ErrorCode cause, int segment, const std::string& what)
      : Error(ErrorCode::PlanningFailed,
              std::string(to_string(cause)) +
                  (segment >= 0 ? " in segment " + std::to_string(segment) : std::string()) + ": " +
                  what),
        cause_(cause),
        segment_(segment) {}

  ErrorCode cause() const noexcept { return cause_; }
  /// -1 when the failure happened before segmentation (e.g. in the search).
  int segment() const noexcept { return segment_; }

 private:
  ErrorCode cause_;
  int segment_;
};

}  // namespace ritp
