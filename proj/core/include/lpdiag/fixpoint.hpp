#pragma once

#include <unordered_set>
#include <vector>

#include "lpdiag/enumerate.hpp"
#include "lpdiag/program.hpp"

namespace lpdiag {

/// Least model of a program restricted to the ground atoms within bounds.
class FixpointModel {
 public:
  /// All atoms, enumeration-ordered.
  const std::vector<Term>& atoms() const noexcept { return atoms_; }
  bool contains(const Term& ground_atom) const { return set_.contains(ground_atom); }
  std::vector<Term> slice(const PredicateKey& pred) const;
  /// Model atoms that are instances of `pattern`, enumeration-ordered.
  std::vector<Term> instances_of(const Term& pattern) const;
  /// Some derivation could not be followed completely (universe level or
  /// atom budget exceeded); the set is then a subset of the bounded model.
  bool truncated() const noexcept { return truncated_; }

 private:
  friend class FixpointBuilder;
  std::vector<Term> atoms_;
  std::unordered_set<Term, TermHash> set_;
  bool truncated_ = false;
};

struct FixpointOptions {
  std::size_t max_atoms = 4'000'000;
  /// Symbols added to the program's own, e.g. those of a query.
  Signature extra;
};

/// Semi-naive bottom-up evaluation. Builtins run after the user atoms of a
/// body; variables they leave unbound range over the integer range (for
/// arithmetic and type tests) or the bounded universe. Head variables left
/// unbound are instantiated over the universe. Atoms outside the bounds are
/// dropped, so only derivations staying inside the slice count.
FixpointModel fixpoint_model(const Program& prog, const Bounds& bounds,
                             const FixpointOptions& options = {});

}  // namespace lpdiag
