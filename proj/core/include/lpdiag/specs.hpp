#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lpdiag/engine.hpp"
#include "lpdiag/enumerate.hpp"
#include "lpdiag/fixpoint.hpp"
#include "lpdiag/program.hpp"

namespace lpdiag {

enum class Confidence { kExact, kTruncated };

struct MembershipVerdict {
  bool in = false;
  Confidence confidence = Confidence::kExact;
};

enum class Verdict { kNotSymptom, kSymptom, kUnknown };
std::string_view verdict_name(Verdict v);

struct OracleVerdict {
  Verdict value = Verdict::kUnknown;
  Confidence confidence = Confidence::kExact;
  /// Symptom evidence: the instance outside S, or the required atom missing.
  std::optional<Term> witness;
  std::string reason;
};

struct SpecEntry {
  PredicateKey pred;
  bool has_correct = false;
  bool has_complete = false;
};

struct SpecOptions {
  /// Limits for one run of a checker predicate on a ground atom.
  Limits checker_limits{10000, 2000, 1};
  /// Limits for enumerating the required instances of a call.
  Limits generator_limits{10000, 5000, 200000};
  std::size_t enumeration_cap = 20000;
  bool check_well_formedness = true;
  /// Atoms checked for S0 within S, beyond the generated S0 atoms.
  std::size_t sample_size = 400;
  std::uint64_t seed = 20240601;
};

/// Ground atoms of S0 among the instances of a call.
struct RequiredSet {
  std::vector<Term> atoms;  // enumeration-ordered
  bool exhaustive = true;
};

/// A pair S0 (complete_p) within S (correct_p) given by trusted checker
/// predicates. Immutable after load; queries are safe from several threads.
class ApproximateSpec {
 public:
  /// Throws Error(kSyntax) or Error(kWellFormednessViolation).
  static std::shared_ptr<const ApproximateSpec> load(std::string_view text, SpecOptions options = {});

  const Program& checker() const noexcept { return checker_; }
  const Bounds& bounds() const noexcept { return bounds_; }
  const SpecOptions& options() const noexcept { return options_; }
  const std::vector<SpecEntry>& entries() const noexcept { return entries_; }
  const SpecEntry* entry(const PredicateKey& pred) const;

  /// S membership of a ground atom; true for unspecified predicates.
  /// Throws Error(kSpecDivergence) when the checker does not decide.
  bool member_correct(const Term& ground_atom) const;
  /// S0 membership of a ground atom; false for unspecified predicates.
  bool member_complete(const Term& ground_atom) const;

  /// Universe for enumerating instances over a program's signature, the
  /// checker's own symbols, and `extra` atoms.
  std::shared_ptr<TermUniverse> universe_for(const Signature& program_signature,
                                             const std::vector<Term>& extra = {}) const;

  /// Instances of `call` within bounds that S0 requires.
  RequiredSet required_instances(const Term& call, std::shared_ptr<TermUniverse> universe) const;

 private:
  ApproximateSpec() = default;
  bool run_checker(const std::string& prefix, const Term& atom) const;
  void check_well_formedness() const;

  Program checker_;
  Bounds bounds_;
  SpecOptions options_;
  std::vector<SpecEntry> entries_;
  mutable std::mutex memo_mutex_;
  mutable std::unordered_map<Term, bool, TermHash> correct_memo_;
  mutable std::unordered_map<Term, bool, TermHash> complete_memo_;
};

/// Symptom iff some ground instance within bounds lies outside S.
OracleVerdict judge_correctness(const ApproximateSpec& spec, const Term& atom,
                                std::shared_ptr<TermUniverse> universe);
OracleVerdict judge_correctness(const ApproximateSpec& spec, const Term& atom,
                                const Signature& program_signature);

/// Applies the two rules for pseudo-answers: a required atom missing from
/// every answer is a symptom only when no answer may be too specific (flag
/// i) and the call terminated; all required atoms covered by answers that
/// cannot be too general (flag ii) is a non-symptom. Otherwise unknown.
OracleVerdict judge_completeness(const ApproximateSpec& spec, const Term& call,
                                 const std::vector<PseudoAnswer>& answers, OutcomeStatus status,
                                 std::shared_ptr<TermUniverse> universe);
OracleVerdict judge_completeness(const ApproximateSpec& spec, const Term& call,
                                 const std::vector<PseudoAnswer>& answers, OutcomeStatus status,
                                 const Signature& program_signature);

struct CheckResult {
  std::vector<Term> violations;
  /// The model or the S0 enumeration was cut short.
  bool truncated = false;
};

/// Model atoms outside S.
CheckResult check_correctness(const Program& prog, const ApproximateSpec& spec, const Bounds& bounds);
CheckResult check_correctness(const FixpointModel& model, const ApproximateSpec& spec);
/// Atoms of S0 within bounds missing from the model.
CheckResult check_completeness(const Program& prog, const ApproximateSpec& spec, const Bounds& bounds);
CheckResult check_completeness(const Program& prog, const FixpointModel& model,
                               const ApproximateSpec& spec, const Bounds& bounds);

}  // namespace lpdiag
