#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flexsim {

enum class ErrorCode {
  // dataset
  ShapeMismatch,
  EmptyFeatures,
  IoError,
  ParseError,
  MissingColumn,
  NoLabels,
  InvalidArgument,
  // partition
  ConflictingOptions,
  ClassCountMismatch,
  FeatureBudgetExceeded,
  LabelsRequired,
  BadLength,
  InvalidWeights,
  // actors / pool
  DuplicateId,
  EmptyArchitecture,
  UnknownActor,
  SelectionTooLarge,
  PermissionDenied,
  MissingKey,
  WrongPayloadType,
  ActorFailure,
  // learners
  BadLabels,
  EmptyDataset,
  // flows
  MultipleServers,
  EmptyCollection,
  AllTrimmed,
  // adversary
  UnknownAttacker,
  // experiment config
  ConfigError,
};

std::string_view to_string(ErrorCode code);

/// True for errors caused by the caller's inputs rather than by the run itself.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  /// Message without the "[Code] " prefix.
  const std::string& detail() const noexcept { return detail_; }

  /// Same error with `context` prepended to the detail, e.g. an actor id or round index.
  Error with_context(std::string_view context) const;

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace flexsim
