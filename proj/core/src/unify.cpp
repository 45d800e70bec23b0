#include "lpdiag/unify.hpp"

#include <unordered_map>

namespace lpdiag {

std::optional<Substitution> unify(const Term& a, const Term& b, bool occurs_check) {
  Bindings bindings;
  if (!bindings.unify(a, b, occurs_check)) return std::nullopt;
  return bindings.to_substitution();
}

Term apply_substitution(const Substitution& s, const Term& t) { return s.apply(t); }

namespace {

Term rename_term(const Term& t, std::unordered_map<VarId, Term>& fresh, VarSupply& supply) {
  if (t.ground()) return t;
  if (t.is_var()) {
    auto it = fresh.find(t.var_id());
    if (it != fresh.end()) return it->second;
    Term v = Term::variable(supply.next(), t.name());
    fresh.emplace(t.var_id(), v);
    return v;
  }
  std::vector<Term> args;
  args.reserve(t.arity());
  for (const Term& a : t.args()) args.push_back(rename_term(a, fresh, supply));
  return Term::compound(t.name(), std::move(args));
}

bool match_into(const Term& pattern, const Term& target,
                std::unordered_map<VarId, Term>& theta) {
  if (pattern.is_var()) {
    auto [it, inserted] = theta.try_emplace(pattern.var_id(), target);
    return inserted || it->second == target;
  }
  if (pattern.kind() != target.kind()) return false;
  switch (pattern.kind()) {
    case TermKind::kInteger:
      return pattern.int_value() == target.int_value();
    case TermKind::kAtom:
      return pattern.name() == target.name();
    case TermKind::kCompound:
      if (pattern.name() != target.name() || pattern.arity() != target.arity()) return false;
      if (pattern.ground()) return pattern == target;
      for (std::size_t i = 0; i < pattern.arity(); ++i)
        if (!match_into(pattern.arg(i), target.arg(i), theta)) return false;
      return true;
    case TermKind::kVariable:
      return false;
  }
  return false;
}

}  // namespace

Clause rename_apart(const Clause& c, VarSupply& supply) {
  std::unordered_map<VarId, Term> fresh;
  Term head = rename_term(c.head, fresh, supply);
  std::vector<Term> body;
  body.reserve(c.body.size());
  for (const Term& b : c.body) body.push_back(rename_term(b, fresh, supply));
  return Clause{std::move(head), std::move(body), c.id, c.pos};
}

std::optional<Substitution> match(const Term& pattern, const Term& target) {
  std::unordered_map<VarId, Term> theta;
  if (!match_into(pattern, target, theta)) return std::nullopt;
  return Substitution::simultaneous(std::move(theta));
}

bool is_instance_of(const Term& specific, const Term& general) {
  std::unordered_map<VarId, Term> theta;
  return match_into(general, specific, theta);
}

Generality generality_compare(const Term& a, const Term& b) {
  bool a_inst_b = is_instance_of(a, b);
  bool b_inst_a = is_instance_of(b, a);
  if (a_inst_b && b_inst_a) return Generality::kVariant;
  if (a_inst_b) return Generality::kFirstInstanceOfSecond;
  if (b_inst_a) return Generality::kSecondInstanceOfFirst;
  return Generality::kIncomparable;
}

bool is_variant(const Term& a, const Term& b) {
  return generality_compare(a, b) == Generality::kVariant;
}

}  // namespace lpdiag
