#include "lpdiag/substitution.hpp"

#include <algorithm>

namespace lpdiag {

namespace {

Term apply_map(const std::unordered_map<VarId, Term>& map, const Term& t) {
  if (t.ground() || map.empty()) return t;
  if (t.is_var()) {
    auto it = map.find(t.var_id());
    return it == map.end() ? t : it->second;
  }
  std::vector<Term> args;
  args.reserve(t.arity());
  bool changed = false;
  for (const Term& a : t.args()) {
    args.push_back(apply_map(map, a));
    changed = changed || !args.back().same_node(a);
  }
  return changed ? Term::compound(t.name(), std::move(args)) : t;
}

}  // namespace

Substitution Substitution::from_triangular(const std::unordered_map<VarId, Term>& bindings) {
  Bindings b;
  for (const auto& [v, t] : bindings) b.bind(v, t);
  return b.to_substitution();
}

Substitution Substitution::simultaneous(std::unordered_map<VarId, Term> bindings) {
  Substitution out;
  for (auto& [v, t] : bindings)
    if (!(t.is_var() && t.var_id() == v)) out.map_.emplace(v, std::move(t));
  return out;
}

std::optional<Term> Substitution::lookup(VarId var) const {
  auto it = map_.find(var);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<VarId, Term>> Substitution::bindings() const {
  std::vector<std::pair<VarId, Term>> out(map_.begin(), map_.end());
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

Term Substitution::apply(const Term& t) const { return apply_map(map_, t); }

Substitution Substitution::then(const Substitution& later) const {
  Substitution out;
  for (const auto& [v, t] : map_) {
    Term value = later.apply(t);
    if (value.is_var() && value.var_id() == v) continue;
    out.map_.emplace(v, std::move(value));
  }
  for (const auto& [v, t] : later.map_)
    if (!map_.contains(v)) out.map_.emplace(v, t);
  return out;
}

bool operator==(const Substitution& a, const Substitution& b) {
  if (a.map_.size() != b.map_.size()) return false;
  for (const auto& [v, t] : a.map_) {
    auto it = b.map_.find(v);
    if (it == b.map_.end() || !(it->second == t)) return false;
  }
  return true;
}

Term Bindings::deref(Term t) const {
  while (t.is_var()) {
    auto it = map_.find(t.var_id());
    if (it == map_.end()) break;
    t = it->second;
  }
  return t;
}

Term Bindings::resolve(const Term& t) const {
  if (t.ground() || map_.empty()) return t;
  Term d = deref(t);
  if (d.is_var() || d.ground()) return d;
  std::vector<Term> args;
  args.reserve(d.arity());
  bool changed = false;
  for (const Term& a : d.args()) {
    args.push_back(resolve(a));
    changed = changed || !args.back().same_node(a);
  }
  return changed ? Term::compound(d.name(), std::move(args)) : d;
}

void Bindings::bind(VarId v, Term value) {
  map_.insert_or_assign(v, std::move(value));
  trail_.push_back(v);
}

void Bindings::undo(std::size_t mark) {
  while (trail_.size() > mark) {
    map_.erase(trail_.back());
    trail_.pop_back();
  }
}

std::vector<VarId> Bindings::bound_since(std::size_t mark) const {
  return {trail_.begin() + static_cast<std::ptrdiff_t>(mark), trail_.end()};
}

bool Bindings::occurs(VarId v, const Term& t) const {
  Term d = deref(t);
  if (d.ground()) return false;
  if (d.is_var()) return d.var_id() == v;
  for (const Term& a : d.args())
    if (occurs(v, a)) return true;
  return false;
}

bool Bindings::unify(const Term& a, const Term& b, bool occurs_check) {
  std::vector<std::pair<Term, Term>> stack;
  stack.emplace_back(a, b);
  while (!stack.empty()) {
    auto [x, y] = std::move(stack.back());
    stack.pop_back();
    x = deref(x);
    y = deref(y);
    if (x.same_node(y)) continue;
    if (x.is_var() && y.is_var()) {
      if (x.var_id() == y.var_id()) continue;
      // Bind the younger variable so older (query) names survive.
      if (x.var_id() < y.var_id()) std::swap(x, y);
      bind(x.var_id(), y);
      continue;
    }
    if (x.is_var() || y.is_var()) {
      if (y.is_var()) std::swap(x, y);
      if (occurs_check && occurs(x.var_id(), y)) return false;
      bind(x.var_id(), y);
      continue;
    }
    if (x.kind() != y.kind()) return false;
    switch (x.kind()) {
      case TermKind::kInteger:
        if (x.int_value() != y.int_value()) return false;
        break;
      case TermKind::kAtom:
        if (x.name() != y.name()) return false;
        break;
      case TermKind::kCompound:
        if (x.name() != y.name() || x.arity() != y.arity()) return false;
        if (x.ground() && y.ground()) {
          if (!(x == y)) return false;
          break;
        }
        for (std::size_t i = x.arity(); i-- > 0;) stack.emplace_back(x.arg(i), y.arg(i));
        break;
      case TermKind::kVariable:
        break;
    }
  }
  return true;
}

Substitution Bindings::to_substitution() const {
  Substitution out;
  for (const auto& [v, t] : map_) {
    Term value = resolve(t);
    if (value.is_var() && value.var_id() == v) continue;
    out.map_.emplace(v, std::move(value));
  }
  return out;
}

}  // namespace lpdiag
