#include "mfpca/error.hpp"

namespace mfpca {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::NonContiguousYears: return "NonContiguousYears";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::AllMissingYear: return "AllMissingYear";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::KappaOutOfRange: return "KappaOutOfRange";
    case ErrorCode::InsufficientYears: return "InsufficientYears";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyBundle: return "EmptyBundle";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InsufficientSpan: return "InsufficientSpan";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string module, const std::string& message)
    : std::runtime_error(module + ": " + std::string(to_string(code)) + ": " + message),
      code_(code),
      module_(std::move(module)) {}

}  // namespace mfpca
