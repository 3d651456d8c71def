#pragma once

#include <stdexcept>
#include <string>

namespace posrec {

enum class ErrorCode {
  SchemaMismatch,
  ValueOverflow,
  IoError,
  PositionOutOfRange,
  UnknownColumn,
  TableNotCovered,
  ExpressionTypeError,
  KeyTypeError,
  ProtocolViolation,
  CteUnbound,
  TableMismatch,
  JsonError,
  UnknownOp,
  MissingField,
  InvalidConfig,
  InvalidPlan,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::ValueOverflow: return "ValueOverflow";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::PositionOutOfRange: return "PositionOutOfRange";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::TableNotCovered: return "TableNotCovered";
    case ErrorCode::ExpressionTypeError: return "ExpressionTypeError";
    case ErrorCode::KeyTypeError: return "KeyTypeError";
    case ErrorCode::ProtocolViolation: return "ProtocolViolation";
    case ErrorCode::CteUnbound: return "CteUnbound";
    case ErrorCode::TableMismatch: return "TableMismatch";
    case ErrorCode::JsonError: return "JsonError";
    case ErrorCode::UnknownOp: return "UnknownOp";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidPlan: return "InvalidPlan";
  }
  return "Unknown";
}

class EngineError : public std::runtime_error {
 public:
  EngineError(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + msg), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace posrec
