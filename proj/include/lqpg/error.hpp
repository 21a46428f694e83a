#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lqpg {

enum class ErrorCode {
  NonSquare,
  DimensionMismatch,
  NoConvergence,
  AllZero,
  Overflow,
  Singular,
  ThetaNotPD,
  IndexOutOfRange,
  AssumptionViolated,
  ReductionMismatch,
  NotStabilizable,
  WrongStructure,
  ZeroNashCost,
  InconsistentTrajectory,
  InvalidConfig,
  EmptyAggregate,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. `stage` is the 1-based stage (or
/// online step) the failure is attributed to, when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail,
        std::optional<int> stage = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  const std::optional<int>& stage() const noexcept { return stage_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::optional<int> stage_;
  std::string detail_;
};

}  // namespace lqpg
