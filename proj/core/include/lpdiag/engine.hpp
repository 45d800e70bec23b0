#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lpdiag/enumerate.hpp"
#include "lpdiag/program.hpp"
#include "lpdiag/substitution.hpp"
#include "lpdiag/term.hpp"

namespace lpdiag {

struct Limits {
  /// Resolution steps (clause or builtin applications) per derivation.
  std::uint64_t max_depth = 10000;
  std::int64_t time_ms = 2000;
  std::size_t answer_cap = 256;

  /// Throws Error(kInvalidArgument) unless every field is positive.
  void validate() const;
};

enum class SolveMode { kPlain, kCoroutining };

enum class OutcomeStatus { kExhausted, kAnswerCapHit, kDepthCut, kTimeout, kFloundered };

std::string_view status_name(OutcomeStatus s);
std::string_view mode_name(SolveMode m);

using GoalId = std::uint32_t;

enum class TraceKind { kCall, kExit, kFail, kDelay, kWake, kRedo };
std::string_view trace_kind_name(TraceKind k);

struct TraceEvent {
  TraceKind kind;
  GoalId goal = 0;
  GoalId parent = 0;
  /// The goal as instantiated when the event happened.
  Term atom;
  /// Clause used (Exit, Redo) or 0.
  ClauseId clause = 0;
  /// Wake: the bindings that released the goal.
  std::string detail;
};

enum class StepKind { kResolved, kBuiltin, kPending };

/// One goal of a successful (or floundered) derivation.
struct DerivationStep {
  GoalId goal = 0;
  GoalId parent = 0;  // 0 for query goals
  std::uint32_t index = 0;  // position in the parent's clause body
  StepKind kind = StepKind::kResolved;
  ClauseId clause = 0;
  Term final_atom = Term::nil();
  std::uint32_t order = 0;  // execution order; pending goals come last
  /// Delayed outside the current query and released inside it.
  bool external = false;
};

/// The branch of the search that produced one pseudo-answer, enough to
/// rebuild its (pseudo-)proof tree.
struct Derivation {
  std::vector<GoalId> roots;
  std::vector<DerivationStep> steps;

  const DerivationStep* find(GoalId g) const;
  /// Children of `g` ordered by body position.
  std::vector<const DerivationStep*> children_of(GoalId g) const;
};

struct PseudoAnswer {
  /// Query goals under the answer substitution.
  std::vector<Term> answer;
  /// Goals of this query still delayed at the end of the derivation.
  std::vector<Term> residual;
  /// Goals handed in as already delayed that are still pending.
  std::vector<Term> carried;
  bool flag_i = false;
  bool flag_ii = false;
  std::shared_ptr<const Derivation> derivation;
  /// Position in the Outcome's answer list.
  std::size_t index = 0;

  bool genuine() const noexcept { return !flag_i && !flag_ii && residual.empty(); }
};

struct EngineError {
  ErrorCode code;
  std::string message;
  Term atom;
};

struct Outcome {
  std::vector<Term> query;
  OutcomeStatus status = OutcomeStatus::kExhausted;
  std::vector<PseudoAnswer> answers;
  std::vector<TraceEvent> trace;
  std::vector<EngineError> errors;
  /// Set when a goal handed in as delayed failed after waking.
  bool external_failure = false;
  std::uint64_t steps = 0;
  std::chrono::milliseconds elapsed{0};

  bool terminated() const noexcept { return status == OutcomeStatus::kExhausted || status == OutcomeStatus::kFloundered; }
};

/// Lets the engine enumerate the ground instances a checker predicate
/// describes: unbound builtin arguments are instantiated over the bounded
/// universe and branches whose query leaves the bounds are pruned.
struct GenerationBounds {
  std::shared_ptr<TermUniverse> universe;
};

struct SolveOptions {
  SolveMode mode = SolveMode::kPlain;
  Limits limits;
  bool occurs_check = true;
  bool record_trace = true;
  /// Goals delayed outside this query (coroutining only).
  std::vector<Term> pending;
  /// When only delayed goals remain, run the oldest one regardless of its
  /// block declaration instead of floundering.
  bool force_on_flounder = false;
  std::optional<GenerationBounds> generation;
};

Outcome solve(const Program& prog, const std::vector<Term>& query, const SolveOptions& opts);
Outcome solve(const Program& prog, const std::vector<Term>& query, SolveMode mode,
              const Limits& limits = {});

/// A procedure call met while meta-interpreting one clause of a call.
struct TopLevelCall {
  Term call;
  ClauseId clause = 0;
  std::uint32_t body_index = 0;
  Outcome outcome;
};

/// Meta-interprets each clause whose head unifies with `call`; every body
/// atom instance is run by the engine, builtins are executed but not listed.
/// Delayed goals of earlier body atoms are handed on to later ones.
std::vector<TopLevelCall> top_level_calls(const Program& prog, const Term& call,
                                          const Limits& limits, SolveMode mode,
                                          bool occurs_check = true,
                                          std::size_t max_children = 2000);

/// Runs left-over delayed goals with coroutining; goals that stay blocked
/// are run anyway so a floundered derivation can complete.
Outcome resume_residual(const Program& prog, const std::vector<Term>& residual,
                        const Limits& limits, bool occurs_check = true);

enum class BuiltinStatus { kSuccess, kFailure, kTypeError, kInstantiation };

struct BuiltinResult {
  BuiltinStatus status = BuiltinStatus::kFailure;
  Substitution bindings;
  std::string message;
};

/// Evaluates a builtin atom under `current` (not modified).
BuiltinResult eval_builtin(const Term& atom, const Substitution& current = {},
                           bool occurs_check = true);

/// Integer value of an arithmetic expression, or nullopt with `error` set.
std::optional<std::int64_t> eval_arith(const Term& expr, std::string& error);

/// One record per line: kind, goal id, atom, clause id (tab separated).
std::string export_trace(const std::vector<TraceEvent>& trace);

/// `X = value` pairs for the named query variables under an answer.
std::vector<std::pair<std::string, Term>> answer_bindings(
    const std::vector<std::pair<std::string, Term>>& query_vars, const std::vector<Term>& query,
    const std::vector<Term>& answer);

}  // namespace lpdiag
