#pragma once

#include <stdexcept>
#include <string>

namespace hc {

enum class ErrorCode {
  DimensionMismatch,
  InvalidArgument,
  Infeasible,
  EmptyFeasibleSet,
  NonSmoothProblem,
  PreconditionViolated,
  InfeasibleStart,
  MissingMuH,
  FeasibilityNotReached,
  QpInfeasible,
  NoFeasibleGridPoint,
  InnerSolverFailed,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hc
