#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "lpdiag/error.hpp"
#include "lpdiag/term.hpp"

namespace lpdiag {

/// 1-based index of a clause in source order.
using ClauseId = std::uint32_t;

struct Clause {
  Term head;
  std::vector<Term> body;
  ClauseId id = 0;
  SourcePos pos;
};

enum class BlockArg : std::uint8_t { kMustBind, kAny };  // '-' and '?'

/// One `:- block p(m1,...,mk).` line.
struct BlockSpec {
  PredicateKey pred;
  std::vector<BlockArg> mask;
  SourcePos pos;
};

/// Constants and function symbols a program uses in user-predicate atoms.
/// Symbols that occur only inside builtin calls (e.g. arithmetic) are excluded.
struct Signature {
  std::vector<Term> constants;  // atoms and integers, enumeration-ordered
  std::vector<PredicateKey> functors;  // arity >= 1, sorted by (arity, name)
  /// Set when integers appear in user atoms or arithmetic builtins are used;
  /// the ground universe then includes the whole configured integer range.
  bool uses_integers = false;

  void merge(const Signature& other);
};

bool is_builtin(const PredicateKey& key);
bool is_builtin_atom(const Term& atom);

class Program {
 public:
  Program() = default;
  /// Validates clause heads and block declarations; throws Error.
  Program(std::vector<Clause> clauses, std::vector<BlockSpec> blocks);
  Program(const Program& other);
  Program& operator=(const Program& other);
  Program(Program&&) noexcept = default;
  Program& operator=(Program&&) noexcept = default;

  const std::vector<Clause>& clauses() const noexcept { return clauses_; }
  const std::vector<BlockSpec>& blocks() const noexcept { return blocks_; }
  bool has_blocks() const noexcept { return !blocks_.empty(); }

  const Clause& clause(ClauseId id) const;
  bool defines(const PredicateKey& key) const { return procedures_.contains(key); }
  /// Clauses of procedure `key` in source order; empty when undefined.
  const std::vector<const Clause*>& procedure(const PredicateKey& key) const;
  std::vector<const BlockSpec*> blocks_for(const PredicateKey& key) const;
  /// User predicates in order of first definition.
  const std::vector<PredicateKey>& predicates() const noexcept { return predicate_order_; }

  Signature signature() const;

 private:
  void build_index();

  std::vector<Clause> clauses_;
  std::vector<BlockSpec> blocks_;
  std::unordered_map<PredicateKey, std::vector<const Clause*>, PredicateKeyHash> procedures_;
  std::vector<PredicateKey> predicate_order_;
};

/// Signature of a set of atoms (same filtering rules as Program::signature).
Signature signature_of_atoms(const std::vector<Term>& atoms);

}  // namespace lpdiag
