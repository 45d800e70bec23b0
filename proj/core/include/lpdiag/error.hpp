#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lpdiag {

/// 1-based line/column of a token in program or query text.
struct SourcePos {
  int line = 0;
  int column = 0;

  friend bool operator==(const SourcePos&, const SourcePos&) = default;
};

enum class ErrorCode {
  kSyntax,
  kDuplicateBlockDeclaration,
  kInvalidProgram,
  kInvalidArgument,
  kUnknownPredicate,
  kBuiltinTypeError,
  kTraceMismatch,
  kInternalInconsistency,
  kPseudoProofRejected,
  kNotASymptomCandidate,
  kSpecDivergence,
  kWellFormednessViolation,
  kAnswerNotFound,
  kUnknownNode,
  kNoActiveJudgment,
  kJudgmentConflict,
  kNoTarget,
  kUnresolvedOracleQuery,
  kProbeInconclusive,
};

std::string_view error_code_name(ErrorCode code);

/// Base exception for every failure surfaced by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<SourcePos> pos = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  const std::optional<SourcePos>& position() const noexcept { return pos_; }
  /// Message without the position prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::optional<SourcePos> pos_;
  std::string detail_;
};

}  // namespace lpdiag
