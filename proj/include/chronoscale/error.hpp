#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace chronoscale {

enum class ErrorCode {
  kEmptyScale,
  kNotInScale,
  kBadInterval,
  kOutsideKappaDomain,
  kNoConvergence,
  kEvalDomain,
  kTabulationGap,
  kBadSubstitution,
  kQuotientUndefined,
  kNotDifferentiable,
  kSyntax,
  kBadArgument,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyScale: return "EmptyScale";
    case ErrorCode::kNotInScale: return "NotInScale";
    case ErrorCode::kBadInterval: return "BadInterval";
    case ErrorCode::kOutsideKappaDomain: return "OutsideKappaDomain";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kEvalDomain: return "EvalDomain";
    case ErrorCode::kTabulationGap: return "TabulationGap";
    case ErrorCode::kBadSubstitution: return "BadSubstitution";
    case ErrorCode::kQuotientUndefined: return "QuotientUndefined";
    case ErrorCode::kNotDifferentiable: return "NotDifferentiable";
    case ErrorCode::kSyntax: return "Syntax";
    case ErrorCode::kBadArgument: return "BadArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parse failure with the byte offset of the offending token and the set of
/// tokens that would have been accepted there.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::vector<std::string> expected,
              const std::string& detail)
      : Error(ErrorCode::kSyntax, describe(offset, expected, detail)),
        offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  static std::string describe(std::size_t offset,
                              const std::vector<std::string>& expected,
                              const std::string& detail) {
    std::string msg = detail + " at offset " + std::to_string(offset);
    if (!expected.empty()) {
      msg += "; expected one of:";
      for (const auto& e : expected) msg += " " + e;
    }
    return msg;
  }

  std::size_t offset_;
  std::vector<std::string> expected_;
};

}  // namespace chronoscale
