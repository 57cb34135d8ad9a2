#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace biasaudit {

enum class ErrorKind {
  // embedding store
  MissingFile,
  MalformedRecord,
  DimensionMismatch,
  ZeroVector,
  UnknownEncoder,
  DuplicateId,
  MissingConcept,
  UnexpectedConcept,
  AmbiguousTargetText,
  MissingAttributeSide,
  InvalidManifest,
  // metrics
  EmptyAttributeSet,
  EmptyTargetSet,
  // analysis
  EmptyInput,
  DuplicateEncoder,
  MissingSuite,
  EmptyGroup,
  InsufficientPoints,
  DegenerateNeighborhood,
  InvalidArgument,
  // synthetic
  InvalidConfig,
  NoiseNotZero,
  // output
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so that callers (the
/// CLI in particular) can map it to an exit status and itemized finding.
/// `subject` names the offending record id, concept, or path; `line` is the
/// 1-based line in embeddings.jsonl when known, 0 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, std::string subject = {},
        std::size_t line = 0);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& subject() const noexcept { return subject_; }
  std::size_t line() const noexcept { return line_; }
  /// The message without the kind prefix that what() carries.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string subject_;
  std::size_t line_;
  std::string message_;
};

}  // namespace biasaudit
