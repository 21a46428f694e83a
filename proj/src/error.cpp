#include "lqpg/error.hpp"

namespace lqpg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::ThetaNotPD: return "ThetaNotPD";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::ReductionMismatch: return "ReductionMismatch";
    case ErrorCode::NotStabilizable: return "NotStabilizable";
    case ErrorCode::WrongStructure: return "WrongStructure";
    case ErrorCode::ZeroNashCost: return "ZeroNashCost";
    case ErrorCode::InconsistentTrajectory: return "InconsistentTrajectory";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptyAggregate: return "EmptyAggregate";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {
std::string format_message(ErrorCode code, const std::string& detail,
                           const std::optional<int>& stage) {
  std::string msg(to_string(code));
  if (stage) msg += " at stage " + std::to_string(*stage);
  if (!detail.empty()) msg += ": " + detail;
  return msg;
}
}  // namespace

Error::Error(ErrorCode code, const std::string& detail,
             std::optional<int> stage)
    : std::runtime_error(format_message(code, detail, stage)),
      code_(code),
      stage_(stage),
      detail_(detail) {}

}  // namespace lqpg
