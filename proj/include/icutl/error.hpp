#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace icutl {

enum class ErrorCode {
  kMissingTable,
  kSchemaMismatch,
  kReferentialViolation,
  kParseError,
  kUnknownAdmission,
  kUnknownSubject,
  kUnknownStay,
  kUnknownSeriesName,
  kInvalidRange,
  kNegativeAge,
  kInvalidHorizon,
  kStayTooShort,
  kEmptyInput,
  kSingleClass,
  kDimensionMismatch,
  kTooFew,
  kDomainError,
  kSchemaViolation,
  kDuplicate,
  kIoError,
  kInvalidArgument,
  kUnknownModel,
};

std::string_view error_code_name(ErrorCode code);

// Every failure raised by the library carries a stable code; the CLI prints
// it as `error: <Code>: <message>` and the service maps it to an HTTP status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace icutl
