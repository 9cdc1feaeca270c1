#include "adinav/common.hpp"

namespace adinav {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::LatitudeNearPole: return "LatitudeNearPole";
    case ErrorCode::GimbalLock: return "GimbalLock";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::CovarianceNotPSD: return "CovarianceNotPSD";
    case ErrorCode::NoValidPixels: return "NoValidPixels";
    case ErrorCode::PoseGap: return "PoseGap";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::InfeasibleTrajectory: return "InfeasibleTrajectory";
    case ErrorCode::EmptyStream: return "EmptyStream";
    case ErrorCode::FrameMismatch: return "FrameMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyTaskSet: return "EmptyTaskSet";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::MalformedNumber: return "MalformedNumber";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace adinav
