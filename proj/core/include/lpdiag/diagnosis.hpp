#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lpdiag/specs.hpp"
#include "lpdiag/trees.hpp"

namespace lpdiag {

enum class JudgmentValue { kSymptom, kNotSymptom };
enum class Provenance { kSpecOracle, kUser, kAssumption };
enum class Strategy { kTopDown, kDivideAndQuery, kFree };
enum class SessionStatus { kRunning, kTargetFound, kExhaustedNoTarget, kAborted };

std::string_view judgment_value_name(JudgmentValue v);
std::string_view provenance_name(Provenance p);
std::string_view strategy_name(Strategy s);
std::string_view session_status_name(SessionStatus s);
/// Accepts "top-down", "dq" / "divide-and-query", "free".
Strategy parse_strategy(std::string_view name);
/// Accepts "symptom" and "not-symptom" (also "yes"/"no").
JudgmentValue parse_judgment_value(std::string_view text);

using JudgmentId = std::uint64_t;

struct Judgment {
  JudgmentId id = 0;
  NodeId node = 0;
  JudgmentValue value = JudgmentValue::kSymptom;
  Provenance provenance = Provenance::kUser;
  std::chrono::system_clock::time_point at;
  std::optional<JudgmentId> supersedes;
  std::optional<JudgmentId> superseded_by;
  bool withdrawn = false;
  std::string note;
};

/// Every judgment ever made, in order. The active judgment of a node is its
/// latest one that has not been withdrawn.
class JudgmentStore {
 public:
  const Judgment* active(NodeId node) const;
  std::optional<JudgmentValue> value(NodeId node) const;
  std::map<NodeId, JudgmentValue> active_set() const;
  const std::vector<Judgment>& log() const noexcept { return log_; }
  const Judgment& get(JudgmentId id) const;
  /// Judgments of `node`, oldest first.
  std::vector<const Judgment*> history(NodeId node) const;

  /// Throws Error(kJudgmentConflict) if the node already has an active judgment.
  const Judgment& submit(NodeId node, JudgmentValue v, Provenance p, std::string note = {});
  /// Throws Error(kNoActiveJudgment).
  const Judgment& revise(NodeId node, JudgmentValue v, std::string note = {});
  /// Supersedes whatever is active, if anything.
  const Judgment& assume(NodeId node, JudgmentValue v);
  /// Withdraws the active assumption; the judgment it replaced (if any)
  /// becomes active again. Throws Error(kNoActiveJudgment).
  const Judgment& withdraw(NodeId node);

 private:
  Judgment& append(NodeId node, JudgmentValue v, Provenance p, std::string note);
  std::vector<Judgment> log_;
  std::map<NodeId, std::vector<JudgmentId>> by_node_;
};

/// Where the search stands, derived from the tree and the active judgments.
struct SearchState {
  SessionStatus status = SessionStatus::kRunning;
  std::optional<NodeId> target;
  /// The shallowest symptom node without a symptom below it.
  std::optional<NodeId> frontier;
  /// Nodes below the frontier not yet cleared by a not-symptom judgment.
  std::vector<NodeId> suspect_region;
};

SearchState compute_search_state(const DDTree& tree, const std::map<NodeId, JudgmentValue>& active);

/// True when `node` is judged symptom, expanded, and all its children are
/// judged not-symptom.
bool is_target(const DDTree& tree, const std::map<NodeId, JudgmentValue>& active, NodeId node);

struct ErrorReport;
std::string error_report_json(const ErrorReport& r);

struct ErrorReport {
  enum class Kind { kIncorrectClauseInstance, kUncoveredAtom };
  Kind kind = Kind::kIncorrectClauseInstance;
  NodeId node = 0;
  // Incorrect clause instance.
  ClauseId clause = 0;
  Term head = Term::nil();
  std::vector<Term> body;
  // Uncovered atom.
  PredicateKey pred;
  Term call = Term::nil();
  /// Absent when no specification can name a missing answer.
  std::optional<Term> atom;
  /// Active judgments of the target and its children.
  std::vector<Judgment> trail;

  std::string describe() const;
};

/// Why the oracle refused the root the caller presented as a symptom.
struct Contradiction {
  NodeId node = 0;
  std::string reason;
};

struct ProbeOptions {
  Limits limits{10000, 500, 256};
  /// Go straight to the trace-based steps.
  bool skip_plain = false;
};

struct ProbeResult {
  /// 1: plain rerun, 2: generalized pseudo-proofs, 3: resumed residuals.
  int step = 0;
  std::string note;
};

class DiagnosisSession {
 public:
  DiagnosisSession(DDTree tree, Strategy strategy, std::shared_ptr<const ApproximateSpec> spec = nullptr,
                   bool strict = true);

  const DDTree& tree() const noexcept { return tree_; }
  TreeKind kind() const noexcept { return tree_.kind(); }
  const JudgmentStore& judgments() const noexcept { return store_; }
  Strategy strategy() const noexcept { return strategy_; }
  void set_strategy(Strategy s) { strategy_ = s; }
  std::shared_ptr<const ApproximateSpec> spec() const noexcept { return spec_; }
  bool strict() const noexcept { return strict_; }

  SearchState state() const;
  SessionStatus status() const;

  /// Node to ask about next under the strategy, or none. May expand the
  /// frontier node of an incompleteness tree.
  std::optional<NodeId> next_query();

  SessionStatus submit(NodeId node, JudgmentValue v, Provenance p = Provenance::kUser, std::string note = {});
  SessionStatus revise(NodeId node, JudgmentValue v);
  SessionStatus assume(NodeId node, JudgmentValue v);
  SessionStatus withdraw(NodeId node);
  /// Moves the node to the back of the query order until judged.
  void postpone(NodeId node);
  const std::set<NodeId>& postponed() const noexcept { return postponed_; }
  const std::vector<NodeId>& expand(NodeId node);

  /// Throws Error(kNoTarget) unless a target was found.
  ErrorReport derive_error() const;

  void abort(NodeId unresolved, std::string reason);
  std::optional<NodeId> unresolved() const noexcept { return unresolved_; }
  const std::string& abort_reason() const noexcept { return abort_reason_; }
  void set_contradiction(Contradiction c) { contradiction_ = std::move(c); }
  const std::optional<Contradiction>& contradiction() const noexcept { return contradiction_; }

  /// Replaces the answers of a completeness node with better ones.
  ProbeResult probe(NodeId node, const ProbeOptions& options = {});

  /// Tree, active judgments, revision history and status as a JSON document.
  std::string snapshot_json() const;

  /// Oracle universe: the program signature, the spec's symbols and the root.
  /// Null without a spec.
  std::shared_ptr<TermUniverse> universe() const;

 private:
  void after_judgment(NodeId node, JudgmentValue v);
  std::optional<NodeId> pick_top_down(NodeId frontier) const;
  std::optional<NodeId> pick_divide_and_query(const SearchState& s) const;

  DDTree tree_;
  Strategy strategy_;
  std::shared_ptr<const ApproximateSpec> spec_;
  bool strict_;
  JudgmentStore store_;
  std::set<NodeId> postponed_;
  bool aborted_ = false;
  std::optional<NodeId> unresolved_;
  std::string abort_reason_;
  std::optional<Contradiction> contradiction_;
  mutable std::shared_ptr<TermUniverse> universe_;
};

ProbeResult probe_node(DiagnosisSession& session, NodeId node, const ProbeOptions& options = {});

/// How the root symptom is established when a session starts.
enum class RootCheck {
  /// The caller asserts it; recorded as a user judgment.
  kAssert,
  /// The spec oracle must confirm it; Error(kNotASymptomCandidate) otherwise.
  kVerify,
};

struct SessionOptions {
  Strategy strategy = Strategy::kTopDown;
  Limits limits;
  SolveMode mode = SolveMode::kCoroutining;
  bool occurs_check = true;
  bool strict = true;
  RootCheck root_check = RootCheck::kAssert;
};

/// Incorrectness session for the answer of `query` that is a variant of
/// `answer`. Throws Error(kAnswerNotFound), Error(kPseudoProofRejected).
std::unique_ptr<DiagnosisSession> start_incorrectness(std::shared_ptr<const Program> prog, const Term& query,
                                                      const Term& answer, const SessionOptions& options,
                                                      std::shared_ptr<const ApproximateSpec> spec = nullptr);
/// Same for an Outcome already computed.
std::unique_ptr<DiagnosisSession> start_incorrectness(std::shared_ptr<const Program> prog, const Outcome& outcome,
                                                      const Term& answer, const SessionOptions& options,
                                                      std::shared_ptr<const ApproximateSpec> spec = nullptr);
std::unique_ptr<DiagnosisSession> start_incompleteness(std::shared_ptr<const Program> prog, const Term& call,
                                                       const SessionOptions& options,
                                                       std::shared_ptr<const ApproximateSpec> spec = nullptr);

/// The spec's verdict on a node, probing completeness nodes whose answers
/// are of unknown quality when needed.
OracleVerdict oracle_verdict(DiagnosisSession& session, NodeId node, const ProbeOptions& probe);

struct AutoOptions {
  SessionOptions session;
  ProbeOptions probe;
  /// Incorrectness: the wrong answer; when absent the first answer the spec
  /// rejects is used.
  std::optional<Term> answer;
  /// Stop after this many oracle judgments.
  std::size_t max_queries = 10000;
};

struct AutoResult {
  SessionStatus status = SessionStatus::kRunning;
  std::optional<ErrorReport> report;
  std::size_t oracle_queries = 0;
  std::size_t probes = 0;
  std::optional<NodeId> unresolved;
  std::optional<Contradiction> contradiction;
  std::string detail;
  std::unique_ptr<DiagnosisSession> session;
};

/// Runs the query/judge loop with the spec as oracle. `root` is the query
/// (incorrectness) or the call (incompleteness).
AutoResult auto_diagnose(std::shared_ptr<const Program> prog, std::shared_ptr<const ApproximateSpec> spec,
                         TreeKind kind, const Term& root, const AutoOptions& options = {});

/// Completes the loop of an existing session with the spec oracle.
AutoResult run_oracle(std::unique_ptr<DiagnosisSession> session, const AutoOptions& options);

enum class Coverage { kCovered, kUncovered, kUndecided };

struct CoverageResult {
  Coverage value = Coverage::kUncovered;
  ClauseId clause = 0;
  std::vector<Term> body;
};

/// Looks for a clause instance `atom :- B` whose user atoms all lie in S0
/// (within the spec bounds) and whose builtins hold. kUndecided when the
/// bounded enumeration could not settle it.
CoverageResult find_covering_instance(const Program& prog, const ApproximateSpec& spec, const Term& atom,
                                      std::shared_ptr<TermUniverse> universe);

}  // namespace lpdiag
