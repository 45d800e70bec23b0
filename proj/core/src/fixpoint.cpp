#include "lpdiag/fixpoint.hpp"

#include <algorithm>
#include <unordered_map>

#include "lpdiag/engine.hpp"
#include "lpdiag/substitution.hpp"
#include "lpdiag/unify.hpp"

namespace lpdiag {

std::vector<Term> FixpointModel::slice(const PredicateKey& pred) const {
  std::vector<Term> out;
  for (const Term& a : atoms_)
    if (PredicateKey::of(a) == pred) out.push_back(a);
  return out;
}

std::vector<Term> FixpointModel::instances_of(const Term& pattern) const {
  std::vector<Term> out;
  PredicateKey key = PredicateKey::of(pattern);
  for (const Term& a : atoms_)
    if (PredicateKey::of(a) == key && is_instance_of(a, pattern)) out.push_back(a);
  return out;
}

static Signature signature_with(const Program& prog, const Signature& extra) {
  Signature sig = prog.signature();
  sig.merge(extra);
  return sig;
}

class FixpointBuilder {
 public:
  FixpointBuilder(const Program& prog, const Bounds& bounds, const FixpointOptions& options)
      : bounds_(bounds),
        options_(options),
        universe_(std::make_shared<TermUniverse>(signature_with(prog, options.extra), bounds)) {
    for (const Clause& c : prog.clauses()) {
      Rule r{c.head, {}, {}};
      for (const Term& b : c.body) (is_builtin_atom(b) ? r.builtins : r.user).push_back(b);
      rules_.push_back(std::move(r));
    }
  }

  FixpointModel run() {
    for (const Rule& r : rules_)
      if (r.user.empty()) run_builtins(r, 0);
    commit();
    while (!stop_ && any_delta()) {
      for (const Rule& r : rules_)
        for (std::size_t k = 0; k < r.user.size() && !stop_; ++k) {
          const Relation* rel = relation(PredicateKey::of(r.user[k]));
          if (!rel || rel->delta_begin == rel->facts.size()) continue;
          join_delta(r, k, *rel);
        }
      commit();
    }
    std::sort(model_.atoms_.begin(), model_.atoms_.end(), enumeration_less);
    return std::move(model_);
  }

 private:
  struct Rule {
    Term head;
    std::vector<Term> user;
    std::vector<Term> builtins;
  };

  struct Relation {
    std::vector<Term> facts;
    std::size_t delta_begin = 0;
    /// index[i]: value of argument i -> positions in `facts`.
    std::vector<std::unordered_map<Term, std::vector<std::size_t>, TermHash>> index;
  };

  Relation* relation(const PredicateKey& k) {
    auto it = relations_.find(k);
    return it == relations_.end() ? nullptr : &it->second;
  }

  bool any_delta() const {
    return std::any_of(relations_.begin(), relations_.end(),
                       [](const auto& kv) { return kv.second.delta_begin < kv.second.facts.size(); });
  }

  void commit() {
    for (auto& [k, rel] : relations_) rel.delta_begin = rel.facts.size();
    for (Term& a : fresh_) {
      Relation& rel = relations_[PredicateKey::of(a)];
      if (rel.index.size() < a.arity()) rel.index.resize(a.arity());
      for (std::size_t i = 0; i < a.arity(); ++i) rel.index[i][a.arg(i)].push_back(rel.facts.size());
      rel.facts.push_back(a);
      model_.atoms_.push_back(std::move(a));
    }
    fresh_.clear();
  }

  void add(const Term& atom) {
    if (!within_bounds(atom, bounds_)) return;
    if (!model_.set_.insert(atom).second) return;
    fresh_.push_back(atom);
    if (model_.set_.size() >= options_.max_atoms) {
      model_.truncated_ = true;
      stop_ = true;
    }
  }

  void join_delta(const Rule& r, std::size_t k, const Relation& rel) {
    std::vector<std::size_t> order{k};
    for (std::size_t j = 0; j < r.user.size(); ++j)
      if (j != k) order.push_back(j);
    std::size_t end = rel.facts.size();
    for (std::size_t i = rel.delta_begin; i < end && !stop_; ++i) {
      std::size_t mark = b_.mark();
      if (b_.unify(r.user[k], rel.facts[i], false)) join(r, order, 1);
      b_.undo(mark);
    }
  }

  void join(const Rule& r, const std::vector<std::size_t>& order, std::size_t pos) {
    if (stop_) return;
    if (pos == order.size()) {
      run_builtins(r, 0);
      return;
    }
    Term pattern = b_.resolve(r.user[order[pos]]);
    Relation* rel = relation(PredicateKey::of(pattern));
    if (!rel) return;
    const std::vector<std::size_t>* candidates = nullptr;
    for (std::size_t a = 0; a < pattern.arity(); ++a) {
      if (!pattern.arg(a).ground()) continue;
      auto it = rel->index[a].find(pattern.arg(a));
      if (it == rel->index[a].end()) return;
      if (!candidates || it->second.size() < candidates->size()) candidates = &it->second;
    }
    auto try_fact = [&](const Term& fact) {
      std::size_t mark = b_.mark();
      if (b_.unify(pattern, fact, false)) join(r, order, pos + 1);
      b_.undo(mark);
    };
    if (candidates) {
      for (std::size_t i : *candidates) try_fact(rel->facts[i]);
    } else {
      for (std::size_t i = 0; i < rel->facts.size(); ++i) try_fact(rel->facts[i]);
    }
  }

  /// Values for an unbound variable of builtin `g`, or nullptr when the
  /// universe level is too large.
  const std::vector<Term>* domain_for(const Term& g) {
    const std::string& n = g.name().str();
    if (n == "atom" || n == "compound" || n == "\\=") return universe_->up_to(bounds_.depth);
    return &universe_->integers();
  }

  void run_builtins(const Rule& r, std::size_t i) {
    if (stop_) return;
    if (i == r.builtins.size()) {
      emit(b_.resolve(r.head));
      return;
    }
    Term g = b_.resolve(r.builtins[i]);
    bool needs_value = false;
    if (g.name().str() == "\\=" && g.arity() == 2) {
      if (!unify(g.arg(0), g.arg(1), true)) {
        run_builtins(r, i + 1);
        return;
      }
      if (g.ground()) return;
      needs_value = true;
    } else {
      BuiltinResult res = eval_builtin(g, {}, true);
      if (res.status == BuiltinStatus::kSuccess) {
        std::size_t mark = b_.mark();
        bool ok = true;
        for (const auto& [v, value] : res.bindings.bindings())
          ok = ok && b_.unify(Term::variable(v), value, true);
        if (ok) run_builtins(r, i + 1);
        b_.undo(mark);
        return;
      }
      needs_value = res.status == BuiltinStatus::kInstantiation;
    }
    if (!needs_value) return;
    Term var = variables_of(g).front();
    const std::vector<Term>* dom = domain_for(g);
    if (!dom) {
      model_.truncated_ = true;
      return;
    }
    for (const Term& value : *dom) {
      if (g.name().str() == "atom" && !value.is_atom()) continue;
      if (g.name().str() == "compound" && !value.is_compound()) continue;
      std::size_t mark = b_.mark();
      b_.bind(var.var_id(), value);
      run_builtins(r, i);
      b_.undo(mark);
      if (stop_) return;
    }
  }

  void emit(const Term& head) {
    if (head.ground()) {
      add(head);
      return;
    }
    // Variables count as depth 1, so no instance of an out-of-bounds head fits.
    if (!within_bounds(head, bounds_)) return;
    InstanceEnumerator it(head, universe_, options_.max_atoms);
    while (auto a = it.next()) {
      add(*a);
      if (stop_) return;
    }
    if (it.truncated()) model_.truncated_ = true;
  }

  Bounds bounds_;
  FixpointOptions options_;
  std::shared_ptr<TermUniverse> universe_;
  std::vector<Rule> rules_;
  std::unordered_map<PredicateKey, Relation, PredicateKeyHash> relations_;
  std::vector<Term> fresh_;
  Bindings b_;
  FixpointModel model_;
  bool stop_ = false;
};

FixpointModel fixpoint_model(const Program& prog, const Bounds& bounds, const FixpointOptions& options) {
  return FixpointBuilder(prog, bounds, options).run();
}

}  // namespace lpdiag
