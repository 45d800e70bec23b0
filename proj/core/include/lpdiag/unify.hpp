#pragma once

#include <optional>

#include "lpdiag/program.hpp"
#include "lpdiag/substitution.hpp"
#include "lpdiag/term.hpp"

namespace lpdiag {

/// Most general unifier, or nullopt on clash / occurs-check violation.
std::optional<Substitution> unify(const Term& a, const Term& b, bool occurs_check = true);

Term apply_substitution(const Substitution& s, const Term& t);

/// Variant of `c` whose variables are fresh; parsed display names are kept.
Clause rename_apart(const Clause& c, VarSupply& supply = VarSupply::global());

/// One-way matching: a substitution over the variables of `pattern` mapping it
/// onto `target`. Variables of `target` are treated as constants.
std::optional<Substitution> match(const Term& pattern, const Term& target);

bool is_instance_of(const Term& specific, const Term& general);

enum class Generality {
  kVariant,
  kFirstInstanceOfSecond,
  kSecondInstanceOfFirst,
  kIncomparable,
};

Generality generality_compare(const Term& a, const Term& b);
bool is_variant(const Term& a, const Term& b);

}  // namespace lpdiag
