#include "flexsim/error.hpp"

namespace flexsim {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyFeatures: return "EmptyFeatures";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NoLabels: return "NoLabels";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConflictingOptions: return "ConflictingOptions";
    case ErrorCode::ClassCountMismatch: return "ClassCountMismatch";
    case ErrorCode::FeatureBudgetExceeded: return "FeatureBudgetExceeded";
    case ErrorCode::LabelsRequired: return "LabelsRequired";
    case ErrorCode::BadLength: return "BadLength";
    case ErrorCode::InvalidWeights: return "InvalidWeights";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::EmptyArchitecture: return "EmptyArchitecture";
    case ErrorCode::UnknownActor: return "UnknownActor";
    case ErrorCode::SelectionTooLarge: return "SelectionTooLarge";
    case ErrorCode::PermissionDenied: return "PermissionDenied";
    case ErrorCode::MissingKey: return "MissingKey";
    case ErrorCode::WrongPayloadType: return "WrongPayloadType";
    case ErrorCode::ActorFailure: return "ActorFailure";
    case ErrorCode::BadLabels: return "BadLabels";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::MultipleServers: return "MultipleServers";
    case ErrorCode::EmptyCollection: return "EmptyCollection";
    case ErrorCode::AllTrimmed: return "AllTrimmed";
    case ErrorCode::UnknownAttacker: return "UnknownAttacker";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError:
    case ErrorCode::PermissionDenied:
    case ErrorCode::MissingKey:
    case ErrorCode::WrongPayloadType:
    case ErrorCode::ActorFailure:
    case ErrorCode::EmptyDataset:
    case ErrorCode::EmptyCollection:
      return false;
    default:
      return true;
  }
}

namespace {
std::string format(ErrorCode code, const std::string& detail) {
  std::string out = "[";
  out += to_string(code);
  out += "] ";
  out += detail;
  return out;
}
}  // namespace

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(format(code, message)), code_(code), detail_(message) {}

Error Error::with_context(std::string_view context) const {
  std::string detail(context);
  detail += ": ";
  detail += detail_;
  return Error(code_, detail);
}

}  // namespace flexsim
