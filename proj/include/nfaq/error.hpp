#pragma once

#include <stdexcept>
#include <string>

namespace nfaq {

// Stable error codes shared across modules. The CLI maps these onto its
// exit contract; library callers can switch on code() instead of parsing
// messages.
enum class ErrorCode {
  SchemaError,
  DuplicateStateId,
  UnknownPrimitive,
  IspMismatch,
  UnboundPrimitive,
  InvalidInsertionPoint,
  UnknownPage,
  ExtractionEmpty,
  EmptyInput,
  NonpositiveIncome,
  ZeroBsl,
  EmptyCbg,
  Degenerate,
  EnvFault,
  BudgetExceeded,
  UnknownSubcommand,
  Internal,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nfaq
