#include "lpdiag/error.hpp"

namespace lpdiag {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSyntax: return "SyntaxError";
    case ErrorCode::kDuplicateBlockDeclaration: return "DuplicateBlockDeclaration";
    case ErrorCode::kInvalidProgram: return "InvalidProgram";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kUnknownPredicate: return "UnknownPredicate";
    case ErrorCode::kBuiltinTypeError: return "BuiltinTypeError";
    case ErrorCode::kTraceMismatch: return "TraceMismatch";
    case ErrorCode::kInternalInconsistency: return "InternalInconsistency";
    case ErrorCode::kPseudoProofRejected: return "PseudoProofRejected";
    case ErrorCode::kNotASymptomCandidate: return "NotASymptomCandidate";
    case ErrorCode::kSpecDivergence: return "SpecDivergence";
    case ErrorCode::kWellFormednessViolation: return "WellFormednessViolation";
    case ErrorCode::kAnswerNotFound: return "AnswerNotFound";
    case ErrorCode::kUnknownNode: return "UnknownNode";
    case ErrorCode::kNoActiveJudgment: return "NoActiveJudgment";
    case ErrorCode::kJudgmentConflict: return "JudgmentConflict";
    case ErrorCode::kNoTarget: return "NoTarget";
    case ErrorCode::kUnresolvedOracleQuery: return "UnresolvedOracleQuery";
    case ErrorCode::kProbeInconclusive: return "ProbeInconclusive";
  }
  return "Error";
}

namespace {
std::string with_position(const std::string& message, const std::optional<SourcePos>& pos) {
  if (!pos) return message;
  return std::to_string(pos->line) + ":" + std::to_string(pos->column) + ": " + message;
}
}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::optional<SourcePos> pos)
    : std::runtime_error(with_position(message, pos)), code_(code), pos_(pos), detail_(message) {}

}  // namespace lpdiag
