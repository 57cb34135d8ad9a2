#include "biasaudit/errors.hpp"

namespace biasaudit {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::UnknownEncoder: return "UnknownEncoder";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::MissingConcept: return "MissingConcept";
    case ErrorKind::UnexpectedConcept: return "UnexpectedConcept";
    case ErrorKind::AmbiguousTargetText: return "AmbiguousTargetText";
    case ErrorKind::MissingAttributeSide: return "MissingAttributeSide";
    case ErrorKind::InvalidManifest: return "InvalidManifest";
    case ErrorKind::EmptyAttributeSet: return "EmptyAttributeSet";
    case ErrorKind::EmptyTargetSet: return "EmptyTargetSet";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::DuplicateEncoder: return "DuplicateEncoder";
    case ErrorKind::MissingSuite: return "MissingSuite";
    case ErrorKind::EmptyGroup: return "EmptyGroup";
    case ErrorKind::InsufficientPoints: return "InsufficientPoints";
    case ErrorKind::DegenerateNeighborhood: return "DegenerateNeighborhood";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::NoiseNotZero: return "NoiseNotZero";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, std::string message, std::string subject,
             std::size_t line)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      subject_(std::move(subject)),
      line_(line),
      message_(std::move(message)) {}

}  // namespace biasaudit
