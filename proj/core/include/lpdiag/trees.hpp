#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lpdiag/engine.hpp"
#include "lpdiag/program.hpp"
#include "lpdiag/term.hpp"

namespace lpdiag {

/// Proof tree, or pseudo-proof tree when some subtree is missing because its
/// goal was delayed and never completed.
struct ProofTree {
  Term atom = Term::nil();
  /// Clause applied at this node; absent for builtin leaves and missing goals.
  std::optional<ClauseId> clause;
  bool builtin = false;
  /// The goal was still delayed when the derivation ended.
  bool missing = false;
  std::uint32_t order = 0;
  /// Root only: the call the computation started from.
  std::optional<Term> call;
  std::vector<ProofTree> children;

  /// Positions of children that are missing markers.
  std::vector<std::size_t> missing_markers() const;
  /// True when no node of the tree has a missing marker.
  bool complete() const;
  std::size_t size() const;
};

/// Tree of the derivation of `answer` for the `goal_index`-th query goal of
/// `outcome`. Throws Error(kTraceMismatch) if the answer is not part of it.
ProofTree extract_proof_tree(const Outcome& outcome, const PseudoAnswer& answer,
                             std::size_t goal_index = 0);

/// Same, from an answer kept without its Outcome; `call` is the query goal.
ProofTree extract_proof_tree(const PseudoAnswer& answer, const Term& call,
                             std::size_t goal_index = 0);

struct GeneralizedProof {
  Term root = Term::nil();
  ProofTree tree;
  /// Missing goals plus builtins that could not be decided, as instantiated
  /// in the generalized tree.
  std::vector<Term> residual;
};

/// Replays the clauses recorded in `t` on most general renamed variants,
/// starting from the original call, to obtain the most general root.
GeneralizedProof generalize_pseudo_proof(const ProofTree& t, const Program& prog,
                                         bool occurs_check = true);

/// True when every internal node together with its children is an instance of
/// the clause recorded at that node.
bool is_valid_proof_tree(const ProofTree& t, const Program& prog);

enum class TreeKind { kIncorrectness, kIncompleteness };
std::string_view tree_kind_name(TreeKind k);

using NodeId = std::uint32_t;

struct DDNode {
  NodeId id = 0;
  std::optional<NodeId> parent;
  std::vector<NodeId> children;
  bool expanded = false;
  std::uint32_t depth = 0;

  /// Correctness node: the answer atom. Completeness node: the call.
  Term atom = Term::nil();
  /// Clause applied at this node (correctness) or the parent clause whose
  /// body produced this call (completeness; 0 at the root).
  ClauseId clause = 0;
  /// Correctness nodes: every body atom instance, builtins included.
  std::vector<Term> body;

  // Completeness nodes only.
  std::vector<PseudoAnswer> answers;
  OutcomeStatus status = OutcomeStatus::kExhausted;
  std::vector<EngineError> errors;
  /// Set once probe_node replaced the answers.
  std::string probe_note;

  bool unknown_quality() const;
};

/// The search tree of oracle queries. Completeness trees grow lazily through
/// expand(); correctness trees are complete on construction.
class DDTree {
 public:
  struct Config {
    Limits limits;
    SolveMode mode = SolveMode::kCoroutining;
    bool occurs_check = true;
  };

  DDTree(TreeKind kind, std::shared_ptr<const Program> prog, Config config);

  TreeKind kind() const noexcept { return kind_; }
  const Program& program() const noexcept { return *prog_; }
  std::shared_ptr<const Program> program_ptr() const noexcept { return prog_; }
  const Config& config() const noexcept { return config_; }

  static constexpr NodeId kRoot = 1;
  NodeId root() const noexcept { return kRoot; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool contains(NodeId id) const noexcept { return id >= 1 && id <= nodes_.size(); }
  /// Throws Error(kUnknownNode).
  const DDNode& node(NodeId id) const;
  DDNode& mutable_node(NodeId id);
  const std::vector<DDNode>& nodes() const noexcept { return nodes_; }

  NodeId add_node(DDNode n, std::optional<NodeId> parent);

  /// Children of `id`, computing them first for an unexpanded completeness
  /// node. Repeated calls return the same ids.
  const std::vector<NodeId>& expand(NodeId id);

  /// Ids of the expanded subtree rooted at `id`, preorder.
  std::vector<NodeId> subtree(NodeId id) const;

 private:
  TreeKind kind_;
  std::shared_ptr<const Program> prog_;
  Config config_;
  std::vector<DDNode> nodes_;
};

/// Throws Error(kPseudoProofRejected) if `t` has missing markers.
DDTree build_incorrectness_tree(const ProofTree& t, std::shared_ptr<const Program> prog);

/// With `strict`, throws Error(kNotASymptomCandidate) unless the call's
/// computation terminated without hitting a limit.
DDTree build_incompleteness_root(std::shared_ptr<const Program> prog, const Term& call,
                                 const Limits& limits, SolveMode mode, bool strict = true,
                                 bool occurs_check = true);

const std::vector<NodeId>& expand_node(DDTree& tree, NodeId id);

/// One line per answer: "answer" or "answer  [residual: ...] (i) (ii)".
std::string format_answer(const PseudoAnswer& a);

}  // namespace lpdiag
