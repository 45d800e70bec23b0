#include "lpdiag/term.hpp"

#include <algorithm>
#include <mutex>
#include <unordered_set>

#include "lpdiag/error.hpp"

namespace lpdiag {

namespace {

struct SymbolTable {
  std::mutex mutex;
  std::unordered_set<std::string> names;

  const std::string* intern(std::string_view text) {
    std::lock_guard lock(mutex);
    return &*names.emplace(text).first;
  }
};

SymbolTable& symbol_table() {
  static SymbolTable table;
  return table;
}

const std::string* empty_symbol() {
  static const std::string* empty = symbol_table().intern("");
  return empty;
}

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

Symbol::Symbol() : text_(empty_symbol()) {}
Symbol::Symbol(std::string_view text) : text_(symbol_table().intern(text)) {}

VarSupply& VarSupply::global() {
  static VarSupply supply;
  return supply;
}

struct TermNode {
  TermKind kind;
  bool ground;
  std::uint32_t depth;
  std::size_t hash;
  std::size_t size;
  std::int64_t value;  // integer value or variable id
  Symbol sym;
  std::vector<Term> args;
};

Term Term::variable(VarId id, Symbol display_name) {
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::kVariable;
  n->ground = false;
  n->depth = 1;
  n->size = 1;
  n->value = static_cast<std::int64_t>(id);
  n->sym = display_name;
  n->hash = mix(0x5bd1e995, static_cast<std::size_t>(id));
  return Term(std::move(n));
}

Term Term::fresh_variable(Symbol display_name) {
  return variable(VarSupply::global().next(), display_name);
}

Term Term::integer(std::int64_t value) {
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::kInteger;
  n->ground = true;
  n->depth = 1;
  n->size = 1;
  n->value = value;
  n->hash = mix(0x1234567, std::hash<std::int64_t>{}(value));
  return Term(std::move(n));
}

Term Term::atom(Symbol name) {
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::kAtom;
  n->ground = true;
  n->depth = 1;
  n->size = 1;
  n->value = 0;
  n->sym = name;
  n->hash = mix(0x7654321, std::hash<std::string>{}(name.str()));
  return Term(std::move(n));
}

Term Term::compound(Symbol functor, std::vector<Term> args) {
  if (args.empty()) return atom(functor);
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::kCompound;
  n->ground = true;
  n->depth = 0;
  n->size = 1;
  n->value = 0;
  n->sym = functor;
  std::size_t h = mix(std::hash<std::string>{}(functor.str()), args.size());
  for (const Term& a : args) {
    n->ground = n->ground && a.ground();
    n->depth = std::max(n->depth, a.depth());
    n->size += a.size();
    h = mix(h, a.hash());
  }
  n->depth += 1;
  n->hash = h;
  n->args = std::move(args);
  return Term(std::move(n));
}

Term Term::nil() {
  static const Term nil_term = atom(Symbol("[]"));
  return nil_term;
}

Term Term::cons(Term head, Term tail) {
  static const Symbol dot(".");
  return compound(dot, {std::move(head), std::move(tail)});
}

Term Term::list(const std::vector<Term>& items, std::optional<Term> tail) {
  Term result = tail ? *tail : nil();
  for (auto it = items.rbegin(); it != items.rend(); ++it) result = cons(*it, result);
  return result;
}

TermKind Term::kind() const noexcept { return node_->kind; }

bool Term::is_nil() const noexcept {
  static const Symbol nil_sym("[]");
  return node_->kind == TermKind::kAtom && node_->sym == nil_sym;
}

bool Term::is_cons() const noexcept {
  static const Symbol dot(".");
  return node_->kind == TermKind::kCompound && node_->args.size() == 2 && node_->sym == dot;
}

VarId Term::var_id() const noexcept { return static_cast<VarId>(node_->value); }
std::int64_t Term::int_value() const noexcept { return node_->value; }
Symbol Term::name() const noexcept { return node_->sym; }
std::span<const Term> Term::args() const noexcept { return node_->args; }
bool Term::ground() const noexcept { return node_->ground; }
std::uint32_t Term::depth() const noexcept { return node_->depth; }
std::size_t Term::hash() const noexcept { return node_->hash; }
std::size_t Term::size() const noexcept { return node_->size; }

bool operator==(const Term& a, const Term& b) noexcept {
  if (a.node_ == b.node_) return true;
  const TermNode& x = *a.node_;
  const TermNode& y = *b.node_;
  if (x.kind != y.kind || x.hash != y.hash) return false;
  switch (x.kind) {
    case TermKind::kVariable:
    case TermKind::kInteger:
      return x.value == y.value;
    case TermKind::kAtom:
      return x.sym == y.sym;
    case TermKind::kCompound:
      if (x.sym != y.sym || x.args.size() != y.args.size()) return false;
      for (std::size_t i = 0; i < x.args.size(); ++i)
        if (!(x.args[i] == y.args[i])) return false;
      return true;
  }
  return false;
}

std::strong_ordering compare_terms(const Term& a, const Term& b) {
  if (a.same_node(b)) return std::strong_ordering::equal;
  if (a.kind() != b.kind()) return a.kind() <=> b.kind();
  switch (a.kind()) {
    case TermKind::kVariable:
      return a.var_id() <=> b.var_id();
    case TermKind::kInteger:
      return a.int_value() <=> b.int_value();
    case TermKind::kAtom:
      return a.name() <=> b.name();
    case TermKind::kCompound: {
      if (auto c = a.arity() <=> b.arity(); c != 0) return c;
      if (auto c = a.name() <=> b.name(); c != 0) return c;
      for (std::size_t i = 0; i < a.arity(); ++i)
        if (auto c = compare_terms(a.arg(i), b.arg(i)); c != 0) return c;
      return std::strong_ordering::equal;
    }
  }
  return std::strong_ordering::equal;
}

bool enumeration_less(const Term& a, const Term& b) {
  if (a.depth() != b.depth()) return a.depth() < b.depth();
  return compare_terms(a, b) < 0;
}

std::uint32_t atom_depth(const Term& atom) {
  std::uint32_t d = 0;
  for (const Term& a : atom.args()) d = std::max(d, a.depth());
  return d;
}

void collect_variables(const Term& t, std::vector<Term>& out) {
  if (t.ground()) return;
  if (t.is_var()) {
    for (const Term& v : out)
      if (v.var_id() == t.var_id()) return;
    out.push_back(t);
    return;
  }
  for (const Term& a : t.args()) collect_variables(a, out);
}

std::vector<Term> variables_of(const Term& t) {
  std::vector<Term> out;
  collect_variables(t, out);
  return out;
}

bool occurs_in(VarId var, const Term& t) {
  if (t.ground()) return false;
  if (t.is_var()) return t.var_id() == var;
  for (const Term& a : t.args())
    if (occurs_in(var, a)) return true;
  return false;
}

PredicateKey PredicateKey::of(const Term& atom) {
  if (atom.is_var() || atom.is_int())
    throw Error(ErrorCode::kInvalidArgument, "not a callable atom");
  return PredicateKey{atom.name(), static_cast<std::uint32_t>(atom.arity())};
}

std::string PredicateKey::str() const { return name.str() + "/" + std::to_string(arity); }

}  // namespace lpdiag
