#include "radcal/error.hpp"

namespace radcal {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::NegativeRadius: return "NegativeRadius";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::InsufficientViews: return "InsufficientViews";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::OptimizerDiverged: return "OptimizerDiverged";
    case ErrorCode::JacobianNaN: return "JacobianNaN";
    case ErrorCode::SingularNormalEquations: return "SingularNormalEquations";
    case ErrorCode::RadiusOutOfRange: return "RadiusOutOfRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& message, const std::string& stage) {
  std::string out;
  if (!stage.empty()) out += "[" + stage + "] ";
  out += std::string(to_string(code));
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::string stage)
    : std::runtime_error(compose(code, message, stage)),
      code_(code),
      stage_(std::move(stage)),
      detail_(message) {}

Error Error::with_stage(std::string stage) const { return Error(code_, detail_, std::move(stage)); }

}  // namespace radcal
