#include "cdae/error.hpp"

namespace cdae {

ErrorCategory category_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ParseError:
      return ErrorCategory::Config;
    case ErrorCode::UndefinedAuc:
    case ErrorCode::Divergence:
    case ErrorCode::NonFinite:
      return ErrorCategory::Numeric;
    default:
      return ErrorCategory::Data;
  }
}

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::ShapeMismatch: return "shape error";
    case ErrorCode::ParseError: return "parse error";
    case ErrorCode::BadMagic: return "not a model file";
    case ErrorCode::VersionMismatch: return "version mismatch";
    case ErrorCode::Truncated: return "truncated file";
    case ErrorCode::UnsupportedFormat: return "unsupported format";
    case ErrorCode::MissingFile: return "missing file";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::TooFewSamples: return "too few samples";
    case ErrorCode::UndefinedAuc: return "undefined AUC";
    case ErrorCode::NoCategories: return "no categories";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::NonFinite: return "non-finite value";
  }
  return "unknown error";
}

void throw_error(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace cdae
