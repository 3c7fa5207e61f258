#pragma once

#include <stdexcept>
#include <string>

namespace nanorod {

enum class ErrorCode {
  EmptyCrossSection,
  DisconnectedCrossSection,
  MissingMidpoint,
  DegenerateRod,
  UnknownCell,
  NonpositiveSeparation,
  InvalidParameters,
  NonFinitePosition,
  ModelNotPairwise,
  OutOfDomain,
  NotTwiceDifferentiable,
  KernelViolation,
  NonSkewInput,
  InadmissibleFrame,
  Interpenetration,
  NoContactFound,
  ModelNotMassSpring,
  ModelNotApplicable,
  NonConvergent,
  NonRotation,
  JumpTooClose,
  ProfileBoundaryMismatch,
  ConfigError,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nanorod
