#include "lpdiag/engine.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "lpdiag/parser.hpp"
#include "lpdiag/unify.hpp"

namespace lpdiag {

void Limits::validate() const {
  if (max_depth == 0 || time_ms <= 0 || answer_cap == 0)
    throw Error(ErrorCode::kInvalidArgument, "limits must be positive");
}

std::string_view status_name(OutcomeStatus s) {
  switch (s) {
    case OutcomeStatus::kExhausted: return "exhausted";
    case OutcomeStatus::kAnswerCapHit: return "answer-cap-hit";
    case OutcomeStatus::kDepthCut: return "depth-cut";
    case OutcomeStatus::kTimeout: return "timeout";
    case OutcomeStatus::kFloundered: return "floundered";
  }
  return "?";
}

std::string_view mode_name(SolveMode m) {
  return m == SolveMode::kPlain ? "plain" : "coroutining";
}

std::string_view trace_kind_name(TraceKind k) {
  switch (k) {
    case TraceKind::kCall: return "Call";
    case TraceKind::kExit: return "Exit";
    case TraceKind::kFail: return "Fail";
    case TraceKind::kDelay: return "Delay";
    case TraceKind::kWake: return "Wake";
    case TraceKind::kRedo: return "Redo";
  }
  return "?";
}

const DerivationStep* Derivation::find(GoalId g) const {
  for (const DerivationStep& s : steps)
    if (s.goal == g) return &s;
  return nullptr;
}

std::vector<const DerivationStep*> Derivation::children_of(GoalId g) const {
  std::vector<const DerivationStep*> out;
  for (const DerivationStep& s : steps)
    if (s.parent == g && !s.external) out.push_back(&s);
  std::stable_sort(out.begin(), out.end(),
                   [](const DerivationStep* a, const DerivationStep* b) { return a->index < b->index; });
  return out;
}

// ---------------------------------------------------------------------------
// Arithmetic and builtins

namespace {

enum class ArithFail { kNone, kInstantiation, kType, kEvaluation };

std::optional<std::int64_t> arith(const Term& t, const Bindings* b, ArithFail& fail,
                                  std::string& msg, Term* unbound) {
  Term e = b ? b->deref(t) : t;
  switch (e.kind()) {
    case TermKind::kInteger:
      return e.int_value();
    case TermKind::kVariable:
      fail = ArithFail::kInstantiation;
      msg = "arguments are not sufficiently instantiated";
      if (unbound) *unbound = e;
      return std::nullopt;
    case TermKind::kAtom:
      fail = ArithFail::kType;
      msg = "type error: evaluable expected, found " + to_string(e);
      return std::nullopt;
    case TermKind::kCompound:
      break;
  }
  const std::string& op = e.name().str();
  if (e.arity() == 1 && op == "-") {
    auto v = arith(e.arg(0), b, fail, msg, unbound);
    if (!v) return std::nullopt;
    if (*v == std::numeric_limits<std::int64_t>::min()) {
      fail = ArithFail::kEvaluation;
      msg = "integer overflow";
      return std::nullopt;
    }
    return -*v;
  }
  if (e.arity() != 2 || (op != "+" && op != "-" && op != "*" && op != "//" && op != "mod")) {
    fail = ArithFail::kType;
    msg = "type error: evaluable expected, found " + to_string(e);
    return std::nullopt;
  }
  auto l = arith(e.arg(0), b, fail, msg, unbound);
  if (!l) return std::nullopt;
  auto r = arith(e.arg(1), b, fail, msg, unbound);
  if (!r) return std::nullopt;
  std::int64_t out = 0;
  bool overflow = false;
  if (op == "+") {
    overflow = __builtin_add_overflow(*l, *r, &out);
  } else if (op == "-") {
    overflow = __builtin_sub_overflow(*l, *r, &out);
  } else if (op == "*") {
    overflow = __builtin_mul_overflow(*l, *r, &out);
  } else {
    if (*r == 0) {
      fail = ArithFail::kEvaluation;
      msg = "evaluation error: zero divisor";
      return std::nullopt;
    }
    if (*l == std::numeric_limits<std::int64_t>::min() && *r == -1) {
      overflow = true;
    } else if (op == "//") {
      out = *l / *r;
    } else {
      out = *l % *r;
      if (out != 0 && ((out < 0) != (*r < 0))) out += *r;
    }
  }
  if (overflow) {
    fail = ArithFail::kEvaluation;
    msg = "integer overflow";
    return std::nullopt;
  }
  return out;
}

bool compare_ints(const std::string& op, std::int64_t l, std::int64_t r) {
  if (op == "<") return l < r;
  if (op == "=<") return l <= r;
  if (op == ">") return l > r;
  return l >= r;
}

bool is_comparison(const std::string& n) { return n == "<" || n == "=<" || n == ">" || n == ">="; }

enum class BuiltinKind { kSuccess, kFailure, kError, kNeedsValue };

struct BuiltinStep {
  BuiltinKind kind = BuiltinKind::kFailure;
  std::string message;
  /// For kNeedsValue: the unbound variable and which domain to draw from.
  Term var = Term::nil();
  enum class Domain { kInts, kConstants, kCompounds, kAny } domain = Domain::kInts;
};

// Executes a builtin against the binding store. Instantiation errors are
// reported as kNeedsValue so generation mode can enumerate the variable.
BuiltinStep run_builtin(const Term& atom, Bindings& b, bool occurs_check) {
  BuiltinStep st;
  const std::string& n = atom.name().str();
  if (n == "true") {
    st.kind = BuiltinKind::kSuccess;
    return st;
  }
  if (n == "=") {
    std::size_t m = b.mark();
    if (b.unify(atom.arg(0), atom.arg(1), occurs_check)) {
      st.kind = BuiltinKind::kSuccess;
    } else {
      b.undo(m);
      st.kind = BuiltinKind::kFailure;
    }
    return st;
  }
  if (n == "\\=") {
    std::size_t m = b.mark();
    bool unifiable = b.unify(atom.arg(0), atom.arg(1), occurs_check);
    b.undo(m);
    if (!unifiable) {
      st.kind = BuiltinKind::kSuccess;
      return st;
    }
    Term resolved = b.resolve(Term::compound("t", {atom.arg(0), atom.arg(1)}));
    if (!resolved.ground()) {
      // Succeeds for no instance yet may fail for some: report the first
      // variable so generators can enumerate; plain execution just fails.
      st.kind = BuiltinKind::kNeedsValue;
      st.var = variables_of(resolved).front();
      st.domain = BuiltinStep::Domain::kAny;
      st.message = "\\= on non-ground terms";
      return st;
    }
    st.kind = BuiltinKind::kFailure;
    return st;
  }
  if (n == "integer" || n == "atom" || n == "compound") {
    Term v = b.deref(atom.arg(0));
    if (v.is_var()) {
      st.kind = BuiltinKind::kNeedsValue;
      st.var = v;
      st.domain = n == "integer" ? BuiltinStep::Domain::kInts
                  : n == "atom"  ? BuiltinStep::Domain::kConstants
                                 : BuiltinStep::Domain::kCompounds;
      st.message = "arguments are not sufficiently instantiated";
      return st;
    }
    bool ok = n == "integer" ? v.is_int() : n == "atom" ? v.is_atom() : v.is_compound();
    st.kind = ok ? BuiltinKind::kSuccess : BuiltinKind::kFailure;
    return st;
  }
  ArithFail fail = ArithFail::kNone;
  Term unbound = atom;
  if (is_comparison(n)) {
    auto l = arith(atom.arg(0), &b, fail, st.message, &unbound);
    std::optional<std::int64_t> r;
    if (l) r = arith(atom.arg(1), &b, fail, st.message, &unbound);
    if (l && r) {
      st.kind = compare_ints(n, *l, *r) ? BuiltinKind::kSuccess : BuiltinKind::kFailure;
      return st;
    }
  } else if (n == "is") {
    auto r = arith(atom.arg(1), &b, fail, st.message, &unbound);
    if (r) {
      std::size_t m = b.mark();
      if (b.unify(atom.arg(0), Term::integer(*r), occurs_check)) {
        st.kind = BuiltinKind::kSuccess;
      } else {
        b.undo(m);
        st.kind = BuiltinKind::kFailure;
      }
      return st;
    }
  }
  if (fail == ArithFail::kInstantiation) {
    st.kind = BuiltinKind::kNeedsValue;
    st.var = unbound;
    st.domain = BuiltinStep::Domain::kInts;
    return st;
  }
  st.kind = BuiltinKind::kError;
  return st;
}

// ---------------------------------------------------------------------------
// Persistent lists shared between choicepoints.

template <class T>
struct PNode {
  T value;
  std::shared_ptr<const PNode> next;
};
template <class T>
using PList = std::shared_ptr<const PNode<T>>;

template <class T>
PList<T> pcons(T value, PList<T> next) {
  return std::make_shared<const PNode<T>>(PNode<T>{std::move(value), std::move(next)});
}

struct Goal {
  Term atom;
  GoalId id = 0;
  GoalId parent = 0;
  std::uint32_t index = 0;
  bool external = false;
  /// Released from delay (or forced); runs without a new Call event.
  bool resumed = false;
  bool forced = false;
};

struct Item {
  bool exit = false;
  Goal goal;
  ClauseId clause = 0;
};

struct LogEntry {
  GoalId goal;
  GoalId parent;
  std::uint32_t index;
  StepKind kind;
  ClauseId clause;
  Term atom;
  bool external;
};

struct State {
  PList<Item> cont;
  PList<Goal> delayed;  // newest first
  PList<LogEntry> log;  // newest first
  std::uint64_t depth = 0;
  bool flag_i = false;
  bool flag_ii = false;
};

struct ChoicePoint {
  enum class Kind { kClauses, kValues } kind;
  State state;
  Goal goal;
  std::size_t next = 0;
  std::size_t trail_mark = 0;
  std::shared_ptr<const std::vector<Term>> values;
  Term var = Term::nil();
};

class Solver {
 public:
  Solver(const Program& prog, const std::vector<Term>& query, const SolveOptions& opts)
      : prog_(prog), query_(query), opts_(opts), start_(std::chrono::steady_clock::now()) {}

  Outcome run();

 private:
  bool coroutining() const { return opts_.mode == SolveMode::kCoroutining; }
  void emit(TraceKind k, const Goal& g, ClauseId clause = 0, std::string detail = {});
  bool out_of_time();
  bool blocked(const Goal& g);
  void wake(State& st);
  bool step(const Goal& g, State& st);
  bool try_clauses(const Goal& g, State& st, std::size_t start);
  bool run_builtin_goal(const Goal& g, State& st);
  bool resume(ChoicePoint& cp, State& st);
  bool bind_value(ChoicePoint& cp, State& st);
  bool within_generation_bounds() const;
  std::unordered_set<VarId> query_vars() const;
  void note_external_bindings(const Goal& g, State& st, const std::unordered_set<VarId>& qvars,
                              std::size_t mark);
  void record_answer(const State& st);
  std::shared_ptr<const std::vector<Term>> domain_for(const BuiltinStep& bs);
  std::vector<Goal> delayed_oldest_first(const PList<Goal>& d) const;

  const Program& prog_;
  const std::vector<Term>& query_;
  const SolveOptions& opts_;
  std::chrono::steady_clock::time_point start_;
  Bindings b_;
  std::vector<ChoicePoint> cps_;
  std::vector<GoalId> roots_;
  Outcome out_;
  GoalId next_goal_ = 1;
  bool timeout_ = false;
  bool cap_hit_ = false;
  bool depth_cut_ = false;
  bool floundered_ = false;
  std::unordered_map<PredicateKey, std::vector<const BlockSpec*>, PredicateKeyHash> block_cache_;
};

void Solver::emit(TraceKind k, const Goal& g, ClauseId clause, std::string detail) {
  if (!opts_.record_trace) return;
  out_.trace.push_back(TraceEvent{k, g.id, g.parent, b_.resolve(g.atom), clause, std::move(detail)});
}

bool Solver::out_of_time() {
  if (timeout_) return true;
  if (out_.steps % 32 != 0) return false;
  auto now = std::chrono::steady_clock::now();
  if (now - start_ >= std::chrono::milliseconds(opts_.limits.time_ms)) timeout_ = true;
  return timeout_;
}

bool Solver::blocked(const Goal& g) {
  if (!coroutining() || g.resumed || !prog_.has_blocks() || g.atom.is_atom()) return false;
  PredicateKey key = PredicateKey::of(g.atom);
  auto it = block_cache_.find(key);
  if (it == block_cache_.end()) it = block_cache_.emplace(key, prog_.blocks_for(key)).first;
  for (const BlockSpec* spec : it->second) {
    bool all_unbound = true;
    for (std::size_t i = 0; i < spec->mask.size() && all_unbound; ++i)
      if (spec->mask[i] == BlockArg::kMustBind && !b_.deref(g.atom.arg(i)).is_var())
        all_unbound = false;
    if (all_unbound) return true;
  }
  return false;
}

std::vector<Goal> Solver::delayed_oldest_first(const PList<Goal>& d) const {
  std::vector<Goal> out;
  for (auto n = d; n; n = n->next) out.push_back(n->value);
  std::reverse(out.begin(), out.end());
  return out;
}

void Solver::wake(State& st) {
  if (!st.delayed) return;
  std::vector<Goal> all = delayed_oldest_first(st.delayed);
  std::vector<Goal> still, woken;
  for (Goal& g : all) (blocked(g) ? still : woken).push_back(g);
  if (woken.empty()) return;
  PList<Goal> rebuilt;
  for (Goal& g : still) rebuilt = pcons(g, rebuilt);
  st.delayed = rebuilt;
  for (auto it = woken.rbegin(); it != woken.rend(); ++it) {
    Goal g = *it;
    g.resumed = true;
    st.cont = pcons(Item{false, g, 0}, st.cont);
  }
  for (const Goal& g : woken) {
    std::string detail;
    PredicateKey key = PredicateKey::of(g.atom);
    for (const BlockSpec* spec : prog_.blocks_for(key)) {
      for (std::size_t i = 0; i < spec->mask.size(); ++i) {
        if (spec->mask[i] != BlockArg::kMustBind) continue;
        Term v = b_.deref(g.atom.arg(i));
        if (v.is_var()) continue;
        if (!detail.empty()) detail += ", ";
        detail += to_string(g.atom.arg(i)) + "=" + to_string(b_.resolve(v));
      }
    }
    emit(TraceKind::kWake, g, 0, detail);
  }
}

std::unordered_set<VarId> Solver::query_vars() const {
  std::unordered_set<VarId> out;
  for (const Term& q : query_)
    for (const Term& v : variables_of(b_.resolve(q))) out.insert(v.var_id());
  return out;
}

void Solver::note_external_bindings(const Goal& g, State& st,
                                    const std::unordered_set<VarId>& qvars, std::size_t mark) {
  if (!g.external || st.flag_i) return;
  for (VarId v : b_.bound_since(mark))
    if (qvars.contains(v)) {
      st.flag_i = true;
      return;
    }
}

bool Solver::within_generation_bounds() const {
  if (!opts_.generation) return true;
  const Bounds& bounds = opts_.generation->universe->bounds();
  for (const Term& q : query_) {
    Term r = b_.resolve(q);
    if (r.is_atomic()) continue;
    for (const Term& a : r.args()) {
      if (a.depth() > bounds.depth) return false;
      // Integers outside the range never become in-range again.
      std::vector<Term> stack{a};
      while (!stack.empty()) {
        Term t = stack.back();
        stack.pop_back();
        if (t.is_int() && (t.int_value() < bounds.int_lo || t.int_value() > bounds.int_hi))
          return false;
        if (t.is_compound())
          for (const Term& s : t.args()) stack.push_back(s);
      }
    }
  }
  return true;
}

std::shared_ptr<const std::vector<Term>> Solver::domain_for(const BuiltinStep& bs) {
  TermUniverse& u = *opts_.generation->universe;
  auto out = std::make_shared<std::vector<Term>>();
  switch (bs.domain) {
    case BuiltinStep::Domain::kInts:
      *out = u.integers();
      break;
    case BuiltinStep::Domain::kConstants:
      for (const Term& c : *u.up_to(1))
        if (c.is_atom()) out->push_back(c);
      break;
    case BuiltinStep::Domain::kCompounds:
    case BuiltinStep::Domain::kAny: {
      const std::vector<Term>* all = u.up_to(u.bounds().depth);
      if (!all) return nullptr;
      for (const Term& t : *all)
        if (bs.domain == BuiltinStep::Domain::kAny || t.is_compound()) out->push_back(t);
      break;
    }
  }
  return out;
}

bool Solver::bind_value(ChoicePoint& cp, State& st) {
  while (cp.next < cp.values->size()) {
    std::size_t i = cp.next++;
    if (cp.next < cp.values->size()) {
      cps_.push_back(cp);
      cps_.back().trail_mark = b_.mark();
    }
    b_.bind(cp.var.var_id(), (*cp.values)[i]);
    if (!within_generation_bounds()) {
      if (cp.next < cp.values->size()) {
        cps_.pop_back();
        b_.undo(cp.trail_mark);
        continue;
      }
      return false;
    }
    wake(st);
    return true;
  }
  return false;
}

bool Solver::run_builtin_goal(const Goal& g, State& st) {
  std::unordered_set<VarId> qvars;
  if (g.external && !st.flag_i) qvars = query_vars();
  std::size_t mark = b_.mark();
  BuiltinStep bs = run_builtin(b_.resolve(g.atom), b_, opts_.occurs_check);
  switch (bs.kind) {
    case BuiltinKind::kSuccess:
      break;
    case BuiltinKind::kFailure:
      emit(TraceKind::kFail, g);
      if (g.external) out_.external_failure = true;
      return false;
    case BuiltinKind::kNeedsValue:
      if (opts_.generation) {
        auto values = domain_for(bs);
        if (values && !values->empty()) {
          // Retry the goal once per candidate value of the variable.
          Goal retry = g;
          retry.resumed = true;
          State before = st;
          before.depth -= 1;
          before.cont = pcons(Item{false, retry, 0}, st.cont);
          ChoicePoint cp{ChoicePoint::Kind::kValues, before, retry, 0, b_.mark(), values, bs.var};
          st = before;
          return bind_value(cp, st);
        }
      }
      if (g.atom.name().str() == "\\=") {
        // Plain semantics: the terms unify, so \= fails.
        emit(TraceKind::kFail, g);
        return false;
      }
      [[fallthrough]];
    case BuiltinKind::kError: {
      std::string msg = bs.message.empty() ? "type error" : bs.message;
      out_.errors.push_back(
          EngineError{ErrorCode::kBuiltinTypeError, msg + " in " + to_string(b_.resolve(g.atom)),
                      b_.resolve(g.atom)});
      emit(TraceKind::kFail, g);
      return false;
    }
  }
  if (!within_generation_bounds()) {
    b_.undo(mark);
    emit(TraceKind::kFail, g);
    return false;
  }
  note_external_bindings(g, st, qvars, mark);
  st.log = pcons(LogEntry{g.id, g.parent, g.index, StepKind::kBuiltin, 0, g.atom, g.external}, st.log);
  emit(TraceKind::kExit, g);
  wake(st);
  return true;
}

bool Solver::try_clauses(const Goal& g, State& st, std::size_t start) {
  const auto& procs = prog_.procedure(PredicateKey::of(g.atom));
  std::unordered_set<VarId> qvars;
  bool need_qvars = g.external && !st.flag_i;
  if (need_qvars) qvars = query_vars();
  for (std::size_t i = start; i < procs.size(); ++i) {
    std::size_t mark = b_.mark();
    Clause renamed = rename_apart(*procs[i]);
    if (!b_.unify(g.atom, renamed.head, opts_.occurs_check)) {
      b_.undo(mark);
      continue;
    }
    if (!within_generation_bounds()) {
      b_.undo(mark);
      continue;
    }
    if (i + 1 < procs.size())
      cps_.push_back(ChoicePoint{ChoicePoint::Kind::kClauses, st, g, i + 1, mark, nullptr, g.atom});
    note_external_bindings(g, st, qvars, mark);
    st.log = pcons(LogEntry{g.id, g.parent, g.index, StepKind::kResolved, renamed.id, g.atom, g.external},
                   st.log);
    PList<Item> cont = pcons(Item{true, g, renamed.id}, st.cont);
    std::vector<Goal> body;
    for (std::size_t k = 0; k < renamed.body.size(); ++k)
      body.push_back(Goal{renamed.body[k], next_goal_++, g.id, static_cast<std::uint32_t>(k), g.external});
    for (auto it = body.rbegin(); it != body.rend(); ++it) cont = pcons(Item{false, *it, 0}, cont);
    st.cont = cont;
    wake(st);
    return true;
  }
  emit(TraceKind::kFail, g);
  if (g.external) out_.external_failure = true;
  return false;
}

bool Solver::step(const Goal& g, State& st) {
  if (!g.resumed) emit(TraceKind::kCall, g);
  if (coroutining() && !g.forced && blocked(g)) {
    emit(TraceKind::kDelay, g);
    if (!g.external) st.flag_ii = true;
    st.delayed = pcons(g, st.delayed);
    return true;
  }
  if (st.depth + 1 > opts_.limits.max_depth) {
    depth_cut_ = true;
    emit(TraceKind::kFail, g);
    return false;
  }
  st.depth += 1;
  if (is_builtin_atom(g.atom)) return run_builtin_goal(g, st);
  if (!prog_.defines(PredicateKey::of(g.atom))) {
    out_.errors.push_back(EngineError{ErrorCode::kUnknownPredicate,
                                      "unknown predicate " + PredicateKey::of(g.atom).str(),
                                      b_.resolve(g.atom)});
    emit(TraceKind::kFail, g);
    return false;
  }
  return try_clauses(g, st, 0);
}

bool Solver::resume(ChoicePoint& cp, State& st) {
  b_.undo(cp.trail_mark);
  st = cp.state;
  if (cp.kind == ChoicePoint::Kind::kValues) return bind_value(cp, st);
  emit(TraceKind::kRedo, cp.goal);
  return try_clauses(cp.goal, st, cp.next);
}

void Solver::record_answer(const State& st) {
  PseudoAnswer pa;
  for (const Term& q : query_) pa.answer.push_back(b_.resolve(q));
  auto derivation = std::make_shared<Derivation>();
  derivation->roots = roots_;
  std::vector<LogEntry> log;
  for (auto n = st.log; n; n = n->next) log.push_back(n->value);
  std::reverse(log.begin(), log.end());
  std::uint32_t order = 0;
  for (const LogEntry& e : log)
    derivation->steps.push_back(DerivationStep{e.goal, e.parent, e.index, e.kind, e.clause,
                                               b_.resolve(e.atom), order++, e.external});
  for (const Goal& g : delayed_oldest_first(st.delayed)) {
    Term r = b_.resolve(g.atom);
    (g.external ? pa.carried : pa.residual).push_back(r);
    derivation->steps.push_back(
        DerivationStep{g.id, g.parent, g.index, StepKind::kPending, 0, r, order++, g.external});
  }
  pa.flag_i = st.flag_i;
  pa.flag_ii = st.flag_ii || !pa.residual.empty();
  pa.derivation = std::move(derivation);
  pa.index = out_.answers.size();
  if (!pa.residual.empty()) floundered_ = true;
  out_.answers.push_back(std::move(pa));
}

Outcome Solver::run() {
  opts_.limits.validate();
  out_.query = query_;
  State st;
  std::vector<Goal> goals;
  for (const Term& q : query_) {
    goals.push_back(Goal{q, next_goal_++, 0, static_cast<std::uint32_t>(roots_.size()), false});
    roots_.push_back(goals.back().id);
  }
  for (auto it = goals.rbegin(); it != goals.rend(); ++it) st.cont = pcons(Item{false, *it, 0}, st.cont);
  if (coroutining()) {
    for (const Term& p : opts_.pending) {
      Goal g{p, next_goal_++, 0, 0, true};
      emit(TraceKind::kCall, g);
      emit(TraceKind::kDelay, g);
      st.delayed = pcons(g, st.delayed);
    }
    wake(st);
  }

  bool ok = true;
  while (true) {
    if (!ok) {
      bool resumed = false;
      while (!cps_.empty()) {
        ChoicePoint cp = std::move(cps_.back());
        cps_.pop_back();
        if (out_of_time()) break;
        if (resume(cp, st)) {
          resumed = true;
          break;
        }
      }
      if (!resumed) break;
      ok = true;
      continue;
    }
    ++out_.steps;
    if (out_of_time()) break;
    if (!st.cont) {
      if (opts_.force_on_flounder && st.delayed) {
        std::vector<Goal> pending = delayed_oldest_first(st.delayed);
        auto first = std::find_if(pending.begin(), pending.end(), [](const Goal& g) { return !g.external; });
        if (first != pending.end()) {
          Goal g = *first;
          g.resumed = true;
          g.forced = true;
          PList<Goal> rebuilt;
          for (const Goal& p : pending)
            if (p.id != g.id) rebuilt = pcons(p, rebuilt);
          st.delayed = rebuilt;
          emit(TraceKind::kWake, g, 0, "forced");
          st.cont = pcons(Item{false, g, 0}, st.cont);
          continue;
        }
      }
      record_answer(st);
      if (out_.answers.size() >= opts_.limits.answer_cap) {
        if (!cps_.empty()) cap_hit_ = true;
        break;
      }
      ok = false;
      continue;
    }
    Item item = st.cont->value;
    st.cont = st.cont->next;
    if (item.exit) {
      emit(TraceKind::kExit, item.goal, item.clause);
      continue;
    }
    ok = step(item.goal, st);
  }

  if (timeout_) out_.status = OutcomeStatus::kTimeout;
  else if (cap_hit_) out_.status = OutcomeStatus::kAnswerCapHit;
  else if (depth_cut_) out_.status = OutcomeStatus::kDepthCut;
  else if (floundered_) out_.status = OutcomeStatus::kFloundered;
  else out_.status = OutcomeStatus::kExhausted;
  out_.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start_);
  return std::move(out_);
}

Substitution instance_mapping(const std::vector<Term>& general, const std::vector<Term>& specific) {
  auto m = match(Term::compound("q", general), Term::compound("q", specific));
  if (!m) throw Error(ErrorCode::kInternalInconsistency, "answer is not an instance of its query");
  return *m;
}

}  // namespace

Outcome solve(const Program& prog, const std::vector<Term>& query, const SolveOptions& opts) {
  Solver solver(prog, query, opts);
  return solver.run();
}

Outcome solve(const Program& prog, const std::vector<Term>& query, SolveMode mode,
              const Limits& limits) {
  SolveOptions opts;
  opts.mode = mode;
  opts.limits = limits;
  return solve(prog, query, opts);
}

namespace {

struct MetaContext {
  const Program& prog;
  const Limits& limits;
  SolveMode mode;
  bool occurs_check;
  std::size_t max_children;
  ClauseId clause;
  std::vector<TopLevelCall>& out;
};

void meta_body(MetaContext& ctx, const std::vector<Term>& body, std::size_t i,
               const std::vector<Term>& pending) {
  if (i >= body.size() || ctx.out.size() >= ctx.max_children) return;
  SolveOptions opts;
  opts.mode = ctx.mode;
  opts.limits = ctx.limits;
  opts.occurs_check = ctx.occurs_check;
  opts.pending = pending;
  const Term& atom = body[i];
  Outcome outcome = solve(ctx.prog, {atom}, opts);
  std::vector<PseudoAnswer> answers = outcome.answers;
  if (!is_builtin_atom(atom))
    ctx.out.push_back(TopLevelCall{atom, ctx.clause, static_cast<std::uint32_t>(i), std::move(outcome)});
  for (const PseudoAnswer& pa : answers) {
    if (ctx.out.size() >= ctx.max_children) return;
    // Delayed goals and the answer's bindings both flow to later atoms.
    std::vector<Term> instance = pa.answer;
    Substitution theta = instance_mapping({atom}, instance);
    std::vector<Term> rest;
    for (const Term& b : body) rest.push_back(theta.apply(b));
    std::vector<Term> next_pending = pa.carried;
    next_pending.insert(next_pending.end(), pa.residual.begin(), pa.residual.end());
    meta_body(ctx, rest, i + 1, next_pending);
  }
}

}  // namespace

std::vector<TopLevelCall> top_level_calls(const Program& prog, const Term& call,
                                          const Limits& limits, SolveMode mode, bool occurs_check,
                                          std::size_t max_children) {
  std::vector<TopLevelCall> out;
  if (is_builtin_atom(call)) return out;
  PredicateKey key = PredicateKey::of(call);
  if (!prog.defines(key))
    throw Error(ErrorCode::kUnknownPredicate, "unknown predicate " + key.str());
  for (const Clause* c : prog.procedure(key)) {
    Clause renamed = rename_apart(*c);
    auto theta = unify(call, renamed.head, occurs_check);
    if (!theta) continue;
    std::vector<Term> body;
    for (const Term& b : renamed.body) body.push_back(theta->apply(b));
    MetaContext ctx{prog, limits, mode, occurs_check, max_children, c->id, out};
    meta_body(ctx, body, 0, {});
  }
  return out;
}

Outcome resume_residual(const Program& prog, const std::vector<Term>& residual,
                        const Limits& limits, bool occurs_check) {
  SolveOptions opts;
  opts.mode = SolveMode::kCoroutining;
  opts.limits = limits;
  opts.occurs_check = occurs_check;
  opts.force_on_flounder = true;
  return solve(prog, residual, opts);
}

BuiltinResult eval_builtin(const Term& atom, const Substitution& current, bool occurs_check) {
  if (!is_builtin_atom(atom))
    throw Error(ErrorCode::kInvalidArgument, to_string(atom) + " is not a builtin");
  Bindings b;
  Term goal = current.apply(atom);
  BuiltinStep st = run_builtin(goal, b, occurs_check);
  BuiltinResult r;
  r.message = st.message;
  switch (st.kind) {
    case BuiltinKind::kSuccess:
      r.status = BuiltinStatus::kSuccess;
      r.bindings = b.to_substitution();
      break;
    case BuiltinKind::kFailure:
      r.status = BuiltinStatus::kFailure;
      break;
    case BuiltinKind::kNeedsValue:
      r.status = goal.name().str() == "\\=" ? BuiltinStatus::kFailure : BuiltinStatus::kInstantiation;
      break;
    case BuiltinKind::kError:
      r.status = BuiltinStatus::kTypeError;
      break;
  }
  return r;
}

std::optional<std::int64_t> eval_arith(const Term& expr, std::string& error) {
  ArithFail fail = ArithFail::kNone;
  return arith(expr, nullptr, fail, error, nullptr);
}

std::string export_trace(const std::vector<TraceEvent>& trace) {
  std::string out;
  for (const TraceEvent& e : trace) {
    out += trace_kind_name(e.kind);
    out += '\t' + std::to_string(e.goal) + '\t' + to_string(e.atom) + '\t' + std::to_string(e.clause);
    out += '\n';
  }
  return out;
}

std::vector<std::pair<std::string, Term>> answer_bindings(
    const std::vector<std::pair<std::string, Term>>& query_vars, const std::vector<Term>& query,
    const std::vector<Term>& answer) {
  Substitution theta = instance_mapping(query, answer);
  std::vector<std::pair<std::string, Term>> out;
  for (const auto& [name, var] : query_vars) out.emplace_back(name, theta.apply(var));
  return out;
}

}  // namespace lpdiag
