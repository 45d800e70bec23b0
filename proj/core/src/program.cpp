#include "lpdiag/program.hpp"

#include <algorithm>
#include <set>

namespace lpdiag {

namespace {

const std::set<std::pair<std::string, std::uint32_t>>& builtin_table() {
  static const std::set<std::pair<std::string, std::uint32_t>> table = {
      {"=", 2},  {"\\=", 2},     {"<", 2},    {"=<", 2},       {">", 2},
      {">=", 2}, {"is", 2},      {"true", 0}, {"integer", 1}, {"atom", 1},
      {"compound", 1},
  };
  return table;
}

void collect_signature(const Term& t, std::set<Term, bool (*)(const Term&, const Term&)>& consts,
                       std::set<PredicateKey>& functors) {
  if (t.is_var()) return;
  if (t.is_atomic()) {
    consts.insert(t);
    return;
  }
  functors.insert(PredicateKey::of(t));
  for (const Term& a : t.args()) collect_signature(a, consts, functors);
}

bool functor_less(const PredicateKey& a, const PredicateKey& b) {
  if (a.arity != b.arity) return a.arity < b.arity;
  return a.name < b.name;
}

}  // namespace

bool is_builtin(const PredicateKey& key) {
  return builtin_table().contains({key.name.str(), key.arity});
}

bool is_builtin_atom(const Term& atom) {
  if (atom.is_var() || atom.is_int()) return false;
  return is_builtin(PredicateKey::of(atom));
}

void Signature::merge(const Signature& other) {
  for (const Term& c : other.constants)
    if (std::find(constants.begin(), constants.end(), c) == constants.end()) constants.push_back(c);
  for (const PredicateKey& f : other.functors)
    if (std::find(functors.begin(), functors.end(), f) == functors.end()) functors.push_back(f);
  uses_integers = uses_integers || other.uses_integers;
  std::sort(constants.begin(), constants.end(), enumeration_less);
  std::sort(functors.begin(), functors.end(), functor_less);
}

Signature signature_of_atoms(const std::vector<Term>& atoms) {
  std::set<Term, bool (*)(const Term&, const Term&)> consts(enumeration_less);
  std::set<PredicateKey> functors;
  bool numeric = false;
  for (const Term& atom : atoms) {
    if (atom.is_var()) continue;
    if (is_builtin_atom(atom)) {
      const std::string& n = atom.name().str();
      if (n != "=" && n != "\\=" && n != "true" && n != "atom" && n != "compound") numeric = true;
      continue;
    }
    for (const Term& a : atom.args()) collect_signature(a, consts, functors);
  }
  Signature sig;
  sig.uses_integers =
      numeric || std::any_of(consts.begin(), consts.end(), [](const Term& c) { return c.is_int(); });
  sig.constants.assign(consts.begin(), consts.end());
  sig.functors.assign(functors.begin(), functors.end());
  std::sort(sig.functors.begin(), sig.functors.end(), functor_less);
  return sig;
}

Program::Program(std::vector<Clause> clauses, std::vector<BlockSpec> blocks)
    : clauses_(std::move(clauses)), blocks_(std::move(blocks)) {
  for (std::size_t i = 0; i < clauses_.size(); ++i) {
    Clause& c = clauses_[i];
    c.id = static_cast<ClauseId>(i + 1);
    if (c.head.is_var() || c.head.is_int())
      throw Error(ErrorCode::kInvalidProgram, "clause head is not an atom", c.pos);
    PredicateKey key = PredicateKey::of(c.head);
    if (is_builtin(key))
      throw Error(ErrorCode::kInvalidProgram, "cannot redefine builtin " + key.str(), c.pos);
    for (const Term& b : c.body)
      if (b.is_var() || b.is_int())
        throw Error(ErrorCode::kInvalidProgram, "body goal is not an atom", c.pos);
  }
  build_index();
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const BlockSpec& b = blocks_[i];
    if (!procedures_.contains(b.pred))
      throw Error(ErrorCode::kInvalidProgram,
                  "block declaration for undefined predicate " + b.pred.str(), b.pos);
    if (b.mask.size() != b.pred.arity)
      throw Error(ErrorCode::kInvalidProgram, "block mask arity mismatch for " + b.pred.str(),
                  b.pos);
    if (std::none_of(b.mask.begin(), b.mask.end(),
                     [](BlockArg a) { return a == BlockArg::kMustBind; }))
      throw Error(ErrorCode::kInvalidProgram,
                  "block declaration for " + b.pred.str() + " has no '-' position", b.pos);
    for (std::size_t j = 0; j < i; ++j)
      if (blocks_[j].pred == b.pred && blocks_[j].mask == b.mask)
        throw Error(ErrorCode::kDuplicateBlockDeclaration,
                    "duplicate block declaration for " + b.pred.str(), b.pos);
  }
}

Program::Program(const Program& other) : clauses_(other.clauses_), blocks_(other.blocks_) {
  build_index();
}

Program& Program::operator=(const Program& other) {
  if (this != &other) {
    clauses_ = other.clauses_;
    blocks_ = other.blocks_;
    build_index();
  }
  return *this;
}

void Program::build_index() {
  procedures_.clear();
  predicate_order_.clear();
  for (const Clause& c : clauses_) {
    PredicateKey key = PredicateKey::of(c.head);
    auto [it, inserted] = procedures_.try_emplace(key);
    if (inserted) predicate_order_.push_back(key);
    it->second.push_back(&c);
  }
}

const Clause& Program::clause(ClauseId id) const {
  if (id == 0 || id > clauses_.size())
    throw Error(ErrorCode::kInvalidArgument, "no clause " + std::to_string(id));
  return clauses_[id - 1];
}

const std::vector<const Clause*>& Program::procedure(const PredicateKey& key) const {
  static const std::vector<const Clause*> empty;
  auto it = procedures_.find(key);
  return it == procedures_.end() ? empty : it->second;
}

std::vector<const BlockSpec*> Program::blocks_for(const PredicateKey& key) const {
  std::vector<const BlockSpec*> out;
  for (const BlockSpec& b : blocks_)
    if (b.pred == key) out.push_back(&b);
  return out;
}

Signature Program::signature() const {
  std::vector<Term> atoms;
  for (const Clause& c : clauses_) {
    atoms.push_back(c.head);
    atoms.insert(atoms.end(), c.body.begin(), c.body.end());
  }
  return signature_of_atoms(atoms);
}

}  // namespace lpdiag
