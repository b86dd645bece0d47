#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mfpca {

enum class ErrorCode {
  MalformedRow,
  NonContiguousYears,
  EmptyInput,
  AllMissingYear,
  IoError,
  SchemaMismatch,
  SingularSystem,
  NonFiniteInput,
  KappaOutOfRange,
  InsufficientYears,
  IndexOutOfRange,
  EmptyBundle,
  SeriesTooShort,
  AlphaOutOfRange,
  ShapeMismatch,
  InsufficientSpan,
  ConfigError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries the module that produced it and
// a machine-readable code. what() renders as "<module>: <Code>: <message>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorCode code_;
  std::string module_;
};

}  // namespace mfpca
