#pragma once

#include <stdexcept>
#include <string>

namespace cdae {

/// Fine-grained failure reasons. Each maps onto one of the coarse
/// categories the command-line tool turns into exit codes.
enum class ErrorCode {
  InvalidArgument,
  ShapeMismatch,
  ParseError,
  BadMagic,
  VersionMismatch,
  Truncated,
  UnsupportedFormat,
  MissingFile,
  Io,
  TooFewSamples,
  UndefinedAuc,
  NoCategories,
  Divergence,
  NonFinite,
};

enum class ErrorCategory { Config, Data, Numeric };

ErrorCategory category_of(ErrorCode code) noexcept;
const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] void throw_error(ErrorCode code, const std::string& what);

}  // namespace cdae
