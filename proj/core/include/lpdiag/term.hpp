#pragma once

#include <atomic>
#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lpdiag {

/// Interned symbol name. Equality is pointer equality; ordering is by text.
class Symbol {
 public:
  Symbol();
  explicit Symbol(std::string_view text);

  const std::string& str() const noexcept { return *text_; }
  bool empty() const noexcept { return text_->empty(); }

  friend bool operator==(Symbol a, Symbol b) noexcept { return a.text_ == b.text_; }
  friend std::strong_ordering operator<=>(Symbol a, Symbol b) noexcept {
    if (a.text_ == b.text_) return std::strong_ordering::equal;
    return a.str().compare(b.str()) < 0 ? std::strong_ordering::less
                                        : std::strong_ordering::greater;
  }

  std::size_t hash() const noexcept { return std::hash<const void*>{}(text_); }

 private:
  const std::string* text_;
};

using VarId = std::uint64_t;

/// Process-wide source of fresh variable ids. Every parsed or renamed
/// variable draws from it, so ids never collide across programs and queries.
class VarSupply {
 public:
  VarId next() noexcept { return counter_.fetch_add(1, std::memory_order_relaxed); }
  static VarSupply& global();

 private:
  std::atomic<VarId> counter_{1};
};

enum class TermKind : std::uint8_t { kVariable, kInteger, kAtom, kCompound };

struct TermNode;

/// Immutable first-order term with shared structure. Copies are cheap.
class Term {
 public:
  static Term variable(VarId id, Symbol display_name = Symbol());
  static Term fresh_variable(Symbol display_name = Symbol());
  static Term integer(std::int64_t value);
  static Term atom(Symbol name);
  static Term atom(std::string_view name) { return atom(Symbol(name)); }
  /// Arity 0 yields an atom.
  static Term compound(Symbol functor, std::vector<Term> args);
  static Term compound(std::string_view functor, std::vector<Term> args) {
    return compound(Symbol(functor), std::move(args));
  }
  static Term nil();
  static Term cons(Term head, Term tail);
  static Term list(const std::vector<Term>& items, std::optional<Term> tail = std::nullopt);

  TermKind kind() const noexcept;
  bool is_var() const noexcept { return kind() == TermKind::kVariable; }
  bool is_int() const noexcept { return kind() == TermKind::kInteger; }
  bool is_atom() const noexcept { return kind() == TermKind::kAtom; }
  bool is_compound() const noexcept { return kind() == TermKind::kCompound; }
  bool is_atomic() const noexcept { return is_int() || is_atom(); }
  bool is_nil() const noexcept;
  bool is_cons() const noexcept;

  VarId var_id() const noexcept;
  std::int64_t int_value() const noexcept;
  /// Atom name, functor, or variable display name (possibly empty).
  Symbol name() const noexcept;
  std::span<const Term> args() const noexcept;
  std::size_t arity() const noexcept { return args().size(); }
  const Term& arg(std::size_t i) const noexcept { return args()[i]; }

  bool ground() const noexcept;
  /// Constants and variables have depth 1; f(t1..tn) has 1 + max depth(ti).
  std::uint32_t depth() const noexcept;
  std::size_t hash() const noexcept;
  std::size_t size() const noexcept;

  bool same_node(const Term& other) const noexcept { return node_ == other.node_; }

  friend bool operator==(const Term& a, const Term& b) noexcept;

 private:
  explicit Term(std::shared_ptr<const TermNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const TermNode> node_;
};

/// Standard order of terms: Var < Integer < Atom < Compound; compounds by
/// arity, then functor name, then arguments left to right.
std::strong_ordering compare_terms(const Term& a, const Term& b);

/// Enumeration order: by depth first, then standard order.
bool enumeration_less(const Term& a, const Term& b);

/// Atom depth is the maximum depth of its arguments (0 for propositions).
std::uint32_t atom_depth(const Term& atom);

/// Distinct variables of `t` in first-occurrence (left-to-right) order.
std::vector<Term> variables_of(const Term& t);
void collect_variables(const Term& t, std::vector<Term>& out);
bool occurs_in(VarId var, const Term& t);

struct TermHash {
  std::size_t operator()(const Term& t) const noexcept { return t.hash(); }
};

/// Predicate indicator p/n.
struct PredicateKey {
  Symbol name;
  std::uint32_t arity = 0;

  static PredicateKey of(const Term& atom);
  std::string str() const;

  friend bool operator==(const PredicateKey&, const PredicateKey&) = default;
  friend std::strong_ordering operator<=>(const PredicateKey& a, const PredicateKey& b) {
    if (auto c = a.name <=> b.name; c != 0) return c;
    return a.arity <=> b.arity;
  }
};

struct PredicateKeyHash {
  std::size_t operator()(const PredicateKey& k) const noexcept {
    return k.name.hash() * 31 + k.arity;
  }
};

}  // namespace lpdiag
