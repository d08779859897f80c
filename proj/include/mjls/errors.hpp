#pragma once

#include <stdexcept>
#include <string>

namespace mjls {

// Failure categories surfaced by the library. Input-class codes mean the
// caller handed us something malformed; numeric-class codes mean a
// computation could not finish.
enum class ErrorCode {
  // input / validation
  kDimensionMismatch,
  kNotStochastic,
  kWeightNotPD,
  kWeightNotPSD,
  kNotSymmetric,
  kNotErgodic,
  kParseError,
  // numeric / convergence
  kSingularMatrix,
  kSingularBlock,
  kRankDeficient,
  kInsufficientSamples,
  kModeStarvation,
  kNonFiniteState,
  kNoConvergence,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNotStochastic: return "NotStochastic";
    case ErrorCode::kWeightNotPD: return "WeightNotPD";
    case ErrorCode::kWeightNotPSD: return "WeightNotPSD";
    case ErrorCode::kNotSymmetric: return "NotSymmetric";
    case ErrorCode::kNotErgodic: return "NotErgodic";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSingularMatrix: return "SingularMatrix";
    case ErrorCode::kSingularBlock: return "SingularBlock";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kModeStarvation: return "ModeStarvation";
    case ErrorCode::kNonFiniteState: return "NonFiniteState";
    case ErrorCode::kNoConvergence: return "NoConvergence";
  }
  return "UnknownError";
}

// True for codes that indicate bad input rather than a numerical failure.
// The CLI maps input errors to exit code 1 and numeric ones to 2.
inline bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kNotStochastic:
    case ErrorCode::kWeightNotPD:
    case ErrorCode::kWeightNotPSD:
    case ErrorCode::kNotSymmetric:
    case ErrorCode::kNotErgodic:
    case ErrorCode::kParseError:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const { return code_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace mjls
