#pragma once

#include <cstddef>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lpdiag/term.hpp"

namespace lpdiag {

/// Idempotent substitution: no bound variable occurs in any binding's value,
/// and no variable is bound to itself.
class Substitution {
 public:
  Substitution() = default;

  /// Builds an idempotent substitution from arbitrary triangular bindings.
  static Substitution from_triangular(const std::unordered_map<VarId, Term>& bindings);
  /// Takes `bindings` as a simultaneous replacement, as produced by matching.
  /// Idempotent only when no value mentions a bound variable.
  static Substitution simultaneous(std::unordered_map<VarId, Term> bindings);

  std::optional<Term> lookup(VarId var) const;
  bool empty() const noexcept { return map_.empty(); }
  std::size_t size() const noexcept { return map_.size(); }
  /// Bindings sorted by variable id.
  std::vector<std::pair<VarId, Term>> bindings() const;

  Term apply(const Term& t) const;

  /// `this` followed by `later`: apply(compose(s, l), t) = l.apply(s.apply(t)).
  Substitution then(const Substitution& later) const;

  friend bool operator==(const Substitution& a, const Substitution& b);

 private:
  friend class Bindings;
  std::unordered_map<VarId, Term> map_;
};

/// Mutable triangular binding store with an undo trail; the working memory of
/// the resolution engine and the bottom-up evaluator.
class Bindings {
 public:
  Term deref(Term t) const;
  /// Fully applies the current bindings.
  Term resolve(const Term& t) const;

  bool is_bound(VarId v) const { return map_.contains(v); }
  void bind(VarId v, Term value);

  /// Most general unification; records every binding on the trail. Leaves
  /// partial bindings in place on failure (callers undo to a mark).
  bool unify(const Term& a, const Term& b, bool occurs_check);

  std::size_t mark() const noexcept { return trail_.size(); }
  void undo(std::size_t mark);
  /// Variables bound since `mark`, oldest first.
  std::vector<VarId> bound_since(std::size_t mark) const;

  Substitution to_substitution() const;
  void clear() {
    map_.clear();
    trail_.clear();
  }

 private:
  bool occurs(VarId v, const Term& t) const;

  std::unordered_map<VarId, Term> map_;
  std::vector<VarId> trail_;
};

}  // namespace lpdiag
