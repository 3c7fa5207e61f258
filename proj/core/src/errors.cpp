#include "nanorod/errors.hpp"

namespace nanorod {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyCrossSection: return "EmptyCrossSection";
    case ErrorCode::DisconnectedCrossSection: return "DisconnectedCrossSection";
    case ErrorCode::MissingMidpoint: return "MissingMidpoint";
    case ErrorCode::DegenerateRod: return "DegenerateRod";
    case ErrorCode::UnknownCell: return "UnknownCell";
    case ErrorCode::NonpositiveSeparation: return "NonpositiveSeparation";
    case ErrorCode::InvalidParameters: return "InvalidParameters";
    case ErrorCode::NonFinitePosition: return "NonFinitePosition";
    case ErrorCode::ModelNotPairwise: return "ModelNotPairwise";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::NotTwiceDifferentiable: return "NotTwiceDifferentiable";
    case ErrorCode::KernelViolation: return "KernelViolation";
    case ErrorCode::NonSkewInput: return "NonSkewInput";
    case ErrorCode::InadmissibleFrame: return "InadmissibleFrame";
    case ErrorCode::Interpenetration: return "Interpenetration";
    case ErrorCode::NoContactFound: return "NoContactFound";
    case ErrorCode::ModelNotMassSpring: return "ModelNotMassSpring";
    case ErrorCode::ModelNotApplicable: return "ModelNotApplicable";
    case ErrorCode::NonConvergent: return "NonConvergent";
    case ErrorCode::NonRotation: return "NonRotation";
    case ErrorCode::JumpTooClose: return "JumpTooClose";
    case ErrorCode::ProfileBoundaryMismatch: return "ProfileBoundaryMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace nanorod
