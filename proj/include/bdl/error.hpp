#pragma once

#include <stdexcept>
#include <string>

namespace bdl {

enum class ErrorCode {
  NonPositiveParameter,
  InvalidParameter,
  BetaMassOutOfRange,
  EmptyClass,
  InvalidData,
  IndexOutOfRange,
  AllAtomsPruned,
  NoSamplesCollected,
  ZeroDictionary,
  DimensionMismatch,
  SingularSystem,
  BadMagic,
  TruncatedFile,
  ParseError,
  DimensionOverflow,
  InfeasibleSparsity,
  ClassOutOfRange,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bdl
