#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace actgen {

enum class ErrorCode {
  // data
  MissingColumn,
  TypeMismatch,
  NotHomeAnchored,
  UnknownPurpose,
  NoPrimaryCandidate,
  InvalidPattern,
  OutOfRangeTime,
  Io,
  // encoding / models
  UnseenCategory,
  MissingValue,
  SchemaMismatch,
  DimensionMismatch,
  DivergenceDetected,
  ModelMissing,
  // evaluation
  EmptyEvaluation,
  UndefinedF1,
  LengthMismatch,
  BinningMismatch,
  // orchestration
  ConfigError,
  InvalidArgument,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::NotHomeAnchored: return "NotHomeAnchored";
    case ErrorCode::UnknownPurpose: return "UnknownPurpose";
    case ErrorCode::NoPrimaryCandidate: return "NoPrimaryCandidate";
    case ErrorCode::InvalidPattern: return "InvalidPattern";
    case ErrorCode::OutOfRangeTime: return "OutOfRangeTime";
    case ErrorCode::Io: return "Io";
    case ErrorCode::UnseenCategory: return "UnseenCategory";
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::ModelMissing: return "ModelMissing";
    case ErrorCode::EmptyEvaluation: return "EmptyEvaluation";
    case ErrorCode::UndefinedF1: return "UndefinedF1";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::BinningMismatch: return "BinningMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library. `module` names the component that
/// raised it so the CLI can surface it with context.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + " [" + module + "]: " + message),
        code_(code),
        module_(std::move(module)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorCode code_;
  std::string module_;
};

/// CLI exit status: 2 config, 3 data, 4 model.
inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
      return 2;
    case ErrorCode::MissingColumn:
    case ErrorCode::TypeMismatch:
    case ErrorCode::NotHomeAnchored:
    case ErrorCode::UnknownPurpose:
    case ErrorCode::NoPrimaryCandidate:
    case ErrorCode::InvalidPattern:
    case ErrorCode::OutOfRangeTime:
    case ErrorCode::Io:
    case ErrorCode::InvalidArgument:
      return 3;
    default:
      return 4;
  }
}

}  // namespace actgen
