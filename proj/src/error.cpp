#include "icutl/error.hpp"

namespace icutl {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingTable: return "MissingTable";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kReferentialViolation: return "ReferentialViolation";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kUnknownAdmission: return "UnknownAdmission";
    case ErrorCode::kUnknownSubject: return "UnknownSubject";
    case ErrorCode::kUnknownStay: return "UnknownStay";
    case ErrorCode::kUnknownSeriesName: return "UnknownSeriesName";
    case ErrorCode::kInvalidRange: return "InvalidRange";
    case ErrorCode::kNegativeAge: return "NegativeAge";
    case ErrorCode::kInvalidHorizon: return "InvalidHorizon";
    case ErrorCode::kStayTooShort: return "StayTooShort";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kTooFew: return "TooFew";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kDuplicate: return "Duplicate";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kUnknownModel: return "UnknownModel";
  }
  return "Unknown";
}

}  // namespace icutl
