#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace radcal {

enum class ErrorCode {
  NonPositiveDepth,
  NegativeRadius,
  OutOfRange,
  NoConvergence,
  DegenerateConfiguration,
  IllConditioned,
  InsufficientViews,
  BehindCamera,
  RankDeficient,
  OptimizerDiverged,
  JacobianNaN,
  SingularNormalEquations,
  RadiusOutOfRange,
  InvalidArgument,
  ParseError,
  SchemaError,
  CountMismatch,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure in the library is reported through this type. The optional
// stage names the pipeline step that raised it ("homography", "intrinsics", ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string stage = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }
  const std::string& detail() const noexcept { return detail_; }

  // Same error, tagged with a pipeline stage.
  Error with_stage(std::string stage) const;

 private:
  ErrorCode code_;
  std::string stage_;
  std::string detail_;
};

}  // namespace radcal
