#include "lpdiag/diagnosis.hpp"

#include <algorithm>
#include <cstdlib>
#include <ctime>

#include "json_io.hpp"
#include "lpdiag/error.hpp"
#include "lpdiag/parser.hpp"
#include "lpdiag/unify.hpp"

namespace lpdiag {

std::string_view judgment_value_name(JudgmentValue v) {
  return v == JudgmentValue::kSymptom ? "symptom" : "not-symptom";
}

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kSpecOracle: return "spec-oracle";
    case Provenance::kUser: return "user";
    case Provenance::kAssumption: return "assumption";
  }
  return "?";
}

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kTopDown: return "top-down";
    case Strategy::kDivideAndQuery: return "dq";
    case Strategy::kFree: return "free";
  }
  return "?";
}

std::string_view session_status_name(SessionStatus s) {
  switch (s) {
    case SessionStatus::kRunning: return "running";
    case SessionStatus::kTargetFound: return "target-found";
    case SessionStatus::kExhaustedNoTarget: return "exhausted-no-target";
    case SessionStatus::kAborted: return "aborted";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "top-down") return Strategy::kTopDown;
  if (name == "dq" || name == "divide-and-query") return Strategy::kDivideAndQuery;
  if (name == "free") return Strategy::kFree;
  throw Error(ErrorCode::kInvalidArgument, "unknown strategy '" + std::string(name) + "'");
}

JudgmentValue parse_judgment_value(std::string_view text) {
  if (text == "symptom" || text == "yes") return JudgmentValue::kSymptom;
  if (text == "not-symptom" || text == "no") return JudgmentValue::kNotSymptom;
  throw Error(ErrorCode::kInvalidArgument, "judgment must be symptom or not-symptom, got '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Judgment store

const Judgment* JudgmentStore::active(NodeId node) const {
  auto it = by_node_.find(node);
  if (it == by_node_.end()) return nullptr;
  for (auto j = it->second.rbegin(); j != it->second.rend(); ++j)
    if (!log_[*j - 1].withdrawn) return &log_[*j - 1];
  return nullptr;
}

std::optional<JudgmentValue> JudgmentStore::value(NodeId node) const {
  const Judgment* j = active(node);
  if (!j) return std::nullopt;
  return j->value;
}

std::map<NodeId, JudgmentValue> JudgmentStore::active_set() const {
  std::map<NodeId, JudgmentValue> out;
  for (const auto& [node, ids] : by_node_)
    if (const Judgment* j = active(node)) out.emplace(node, j->value);
  return out;
}

const Judgment& JudgmentStore::get(JudgmentId id) const {
  if (id == 0 || id > log_.size()) throw Error(ErrorCode::kInvalidArgument, "no judgment " + std::to_string(id));
  return log_[id - 1];
}

std::vector<const Judgment*> JudgmentStore::history(NodeId node) const {
  std::vector<const Judgment*> out;
  auto it = by_node_.find(node);
  if (it != by_node_.end())
    for (JudgmentId id : it->second) out.push_back(&log_[id - 1]);
  return out;
}

Judgment& JudgmentStore::append(NodeId node, JudgmentValue v, Provenance p, std::string note) {
  Judgment j;
  j.id = log_.size() + 1;
  j.node = node;
  j.value = v;
  j.provenance = p;
  j.at = std::chrono::system_clock::now();
  j.note = std::move(note);
  log_.push_back(std::move(j));
  by_node_[node].push_back(log_.back().id);
  return log_.back();
}

const Judgment& JudgmentStore::submit(NodeId node, JudgmentValue v, Provenance p, std::string note) {
  if (const Judgment* a = active(node))
    throw Error(ErrorCode::kJudgmentConflict, "node " + std::to_string(node) + " is already judged " +
                                                  std::string(judgment_value_name(a->value)) + "; revise it instead");
  return append(node, v, p, std::move(note));
}

const Judgment& JudgmentStore::revise(NodeId node, JudgmentValue v, std::string note) {
  const Judgment* a = active(node);
  if (!a) throw Error(ErrorCode::kNoActiveJudgment, "node " + std::to_string(node) + " has no judgment to revise");
  JudgmentId old = a->id;
  Provenance p = a->provenance == Provenance::kSpecOracle ? Provenance::kSpecOracle : Provenance::kUser;
  Judgment& j = append(node, v, p, std::move(note));
  j.supersedes = old;
  log_[old - 1].superseded_by = j.id;
  return j;
}

const Judgment& JudgmentStore::assume(NodeId node, JudgmentValue v) {
  const Judgment* a = active(node);
  std::optional<JudgmentId> old = a ? std::optional<JudgmentId>(a->id) : std::nullopt;
  Judgment& j = append(node, v, Provenance::kAssumption, {});
  j.supersedes = old;
  if (old) log_[*old - 1].superseded_by = j.id;
  return j;
}

const Judgment& JudgmentStore::withdraw(NodeId node) {
  const Judgment* a = active(node);
  if (!a || a->provenance != Provenance::kAssumption)
    throw Error(ErrorCode::kNoActiveJudgment, "node " + std::to_string(node) + " has no active assumption");
  Judgment& j = log_[a->id - 1];
  j.withdrawn = true;
  if (j.supersedes) log_[*j.supersedes - 1].superseded_by.reset();
  return j;
}

// ---------------------------------------------------------------------------
// Search state

bool is_target(const DDTree& tree, const std::map<NodeId, JudgmentValue>& active, NodeId node) {
  auto it = active.find(node);
  if (it == active.end() || it->second != JudgmentValue::kSymptom) return false;
  const DDNode& n = tree.node(node);
  if (!n.expanded) return false;
  return std::all_of(n.children.begin(), n.children.end(), [&](NodeId c) {
    auto jc = active.find(c);
    return jc != active.end() && jc->second == JudgmentValue::kNotSymptom;
  });
}

SearchState compute_search_state(const DDTree& tree, const std::map<NodeId, JudgmentValue>& active) {
  SearchState s;
  auto judged = [&](NodeId n, JudgmentValue v) {
    auto it = active.find(n);
    return it != active.end() && it->second == v;
  };
  for (const DDNode& n : tree.nodes())
    if (is_target(tree, active, n.id)) {
      s.target = n.id;
      s.status = SessionStatus::kTargetFound;
      break;
    }
  if (!s.target && judged(tree.root(), JudgmentValue::kNotSymptom)) s.status = SessionStatus::kExhaustedNoTarget;

  // Symptom nodes with a symptom strictly below them are not frontier
  // candidates; walk up from every symptom to mark its ancestors.
  std::vector<bool> has_symptom_below(tree.size() + 1, false);
  for (const auto& [id, v] : active) {
    if (v != JudgmentValue::kSymptom || !tree.contains(id)) continue;
    for (auto p = tree.node(id).parent; p; p = tree.node(*p).parent) {
      if (has_symptom_below[*p]) break;
      has_symptom_below[*p] = true;
    }
  }
  for (const auto& [id, v] : active) {
    if (v != JudgmentValue::kSymptom || !tree.contains(id) || has_symptom_below[id]) continue;
    if (!s.frontier || tree.node(id).depth < tree.node(*s.frontier).depth) s.frontier = id;
  }
  if (!s.frontier) return s;
  std::vector<NodeId> stack(tree.node(*s.frontier).children.rbegin(), tree.node(*s.frontier).children.rend());
  while (!stack.empty()) {
    NodeId n = stack.back();
    stack.pop_back();
    if (judged(n, JudgmentValue::kNotSymptom)) continue;
    s.suspect_region.push_back(n);
    const auto& ch = tree.node(n).children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Session

DiagnosisSession::DiagnosisSession(DDTree tree, Strategy strategy, std::shared_ptr<const ApproximateSpec> spec,
                                   bool strict)
    : tree_(std::move(tree)), strategy_(strategy), spec_(std::move(spec)), strict_(strict) {}

SearchState DiagnosisSession::state() const {
  SearchState s = compute_search_state(tree_, store_.active_set());
  if (aborted_) s.status = SessionStatus::kAborted;
  return s;
}

SessionStatus DiagnosisSession::status() const { return state().status; }

const std::vector<NodeId>& DiagnosisSession::expand(NodeId node) { return tree_.expand(node); }

void DiagnosisSession::after_judgment(NodeId node, JudgmentValue v) {
  postponed_.erase(node);
  // A symptom can only become a target once its children are known.
  if (v == JudgmentValue::kSymptom) tree_.expand(node);
}

namespace {

void check_judgeable(const DDTree& tree, NodeId node, JudgmentValue v, bool strict) {
  const DDNode& n = tree.node(node);
  if (strict && v == JudgmentValue::kSymptom && tree.kind() == TreeKind::kIncompleteness &&
      n.status != OutcomeStatus::kExhausted && n.status != OutcomeStatus::kFloundered)
    throw Error(ErrorCode::kNotASymptomCandidate,
                to_string(n.atom) + " did not terminate (" + std::string(status_name(n.status)) +
                    "); a missing answer is not a symptom");
}

}  // namespace

SessionStatus DiagnosisSession::submit(NodeId node, JudgmentValue v, Provenance p, std::string note) {
  check_judgeable(tree_, node, v, strict_);
  store_.submit(node, v, p, std::move(note));
  after_judgment(node, v);
  return status();
}

SessionStatus DiagnosisSession::revise(NodeId node, JudgmentValue v) {
  check_judgeable(tree_, node, v, strict_);
  store_.revise(node, v);
  after_judgment(node, v);
  return status();
}

SessionStatus DiagnosisSession::assume(NodeId node, JudgmentValue v) {
  check_judgeable(tree_, node, v, strict_);
  store_.assume(node, v);
  after_judgment(node, v);
  return status();
}

SessionStatus DiagnosisSession::withdraw(NodeId node) {
  tree_.node(node);
  store_.withdraw(node);
  if (auto v = store_.value(node)) after_judgment(node, *v);
  return status();
}

void DiagnosisSession::postpone(NodeId node) {
  tree_.node(node);
  postponed_.insert(node);
}

void DiagnosisSession::abort(NodeId unresolved, std::string reason) {
  aborted_ = true;
  unresolved_ = unresolved;
  abort_reason_ = std::move(reason);
}

std::optional<NodeId> DiagnosisSession::pick_top_down(NodeId frontier) const {
  std::optional<NodeId> deferred;
  for (NodeId c : tree_.node(frontier).children) {
    if (store_.active(c)) continue;
    if (!postponed_.contains(c)) return c;
    if (!deferred) deferred = c;
  }
  return deferred;
}

std::optional<NodeId> DiagnosisSession::pick_divide_and_query(const SearchState& s) const {
  // Weight of a node: the part of the suspect region in its subtree. The
  // region is listed in preorder, so one reverse pass sums the subtrees.
  std::map<NodeId, std::size_t> weight;
  for (NodeId n : s.suspect_region) weight[n] = 1;
  for (auto it = s.suspect_region.rbegin(); it != s.suspect_region.rend(); ++it) {
    auto p = tree_.node(*it).parent;
    if (p && weight.contains(*p)) weight[*p] += weight[*it];
  }
  const auto total = static_cast<long long>(s.suspect_region.size());
  std::optional<NodeId> best;
  long long best_score = 0;
  bool best_postponed = true;
  for (const auto& [n, w] : weight) {
    long long score = std::llabs(2 * static_cast<long long>(w) - total);
    bool post = postponed_.contains(n);
    bool better = !best || (best_postponed && !post) ||
                  (post == best_postponed && (score < best_score || (score == best_score && n < *best)));
    if (better) {
      best = n;
      best_score = score;
      best_postponed = post;
    }
  }
  return best;
}

std::optional<NodeId> DiagnosisSession::next_query() {
  SearchState s = state();
  if (s.status != SessionStatus::kRunning || strategy_ == Strategy::kFree) return std::nullopt;
  if (!s.frontier) {
    if (!store_.active(tree_.root())) return tree_.root();
    return std::nullopt;
  }
  if (!tree_.node(*s.frontier).expanded) {
    tree_.expand(*s.frontier);
    s = state();
    if (s.status != SessionStatus::kRunning) return std::nullopt;
  }
  if (strategy_ == Strategy::kTopDown) return pick_top_down(*s.frontier);
  return pick_divide_and_query(s);
}

std::string ErrorReport::describe() const {
  if (kind == Kind::kIncorrectClauseInstance) {
    std::string s = "incorrect clause instance (clause " + std::to_string(clause) + "): " + to_string(head);
    if (!body.empty()) s += " :- " + format_goals(body);
    return s;
  }
  std::string s = "uncovered atom in procedure " + pred.str() + " (call " + to_string(call) + ")";
  if (atom) s += ": " + to_string(*atom);
  return s;
}

std::shared_ptr<TermUniverse> DiagnosisSession::universe() const {
  if (!universe_ && spec_) universe_ = spec_->universe_for(tree_.program().signature(), {tree_.node(tree_.root()).atom});
  return universe_;
}

ErrorReport DiagnosisSession::derive_error() const {
  SearchState s = state();
  if (!s.target) throw Error(ErrorCode::kNoTarget, "no target yet (" + std::string(session_status_name(s.status)) + ")");
  const DDNode& n = tree_.node(*s.target);
  ErrorReport r;
  r.node = n.id;
  auto add_trail = [&](NodeId id) {
    if (const Judgment* j = store_.active(id)) r.trail.push_back(*j);
  };
  add_trail(n.id);
  for (NodeId c : n.children) add_trail(c);
  if (tree_.kind() == TreeKind::kIncorrectness) {
    r.kind = ErrorReport::Kind::kIncorrectClauseInstance;
    r.clause = n.clause;
    r.head = n.atom;
    r.body = n.body;
    return r;
  }
  r.kind = ErrorReport::Kind::kUncoveredAtom;
  r.pred = PredicateKey::of(n.atom);
  r.call = n.atom;
  if (spec_) {
    OracleVerdict v = judge_completeness(*spec_, n.atom, n.answers, n.status, universe());
    if (v.value == Verdict::kSymptom) r.atom = v.witness;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Probes

ProbeResult DiagnosisSession::probe(NodeId id, const ProbeOptions& options) {
  if (tree_.kind() != TreeKind::kIncompleteness)
    throw Error(ErrorCode::kInvalidArgument, "only completeness nodes can be probed");
  DDNode& n = tree_.mutable_node(id);
  const Program& prog = tree_.program();
  bool occurs = tree_.config().occurs_check;
  options.limits.validate();

  if (!options.skip_plain) {
    SolveOptions plain;
    plain.mode = SolveMode::kPlain;
    plain.limits = options.limits;
    plain.occurs_check = occurs;
    plain.record_trace = false;
    Outcome o = solve(prog, {n.atom}, plain);
    if (o.status == OutcomeStatus::kExhausted) {
      n.answers = std::move(o.answers);
      n.status = o.status;
      n.errors = std::move(o.errors);
      n.probe_note = "plain rerun terminated with " + std::to_string(n.answers.size()) + " answer(s)";
      return ProbeResult{1, n.probe_note};
    }
  }
  if (n.status != OutcomeStatus::kExhausted && n.status != OutcomeStatus::kFloundered)
    throw Error(ErrorCode::kProbeInconclusive,
                to_string(n.atom) + ": the computation hit a limit (" + std::string(status_name(n.status)) + ")");

  std::vector<PseudoAnswer> upgraded;
  bool resumed = false;
  for (const PseudoAnswer& a : n.answers) {
    if (a.genuine()) {
      upgraded.push_back(a);
      continue;
    }
    GeneralizedProof g = generalize_pseudo_proof(extract_proof_tree(a, n.atom), prog, occurs);
    if (g.residual.empty()) {
      PseudoAnswer pa;
      pa.answer = {g.root};
      upgraded.push_back(std::move(pa));
      continue;
    }
    Outcome r = resume_residual(prog, g.residual, options.limits, occurs);
    if (r.status != OutcomeStatus::kExhausted)
      throw Error(ErrorCode::kProbeInconclusive, "resuming " + format_goals(g.residual) + " for " + to_string(n.atom) +
                                                     " ended with " + std::string(status_name(r.status)));
    resumed = true;
    for (const PseudoAnswer& ra : r.answers) {
      auto m = match(Term::compound("q", g.residual), Term::compound("q", ra.answer));
      if (!m) throw Error(ErrorCode::kInternalInconsistency, "resumed answer is not an instance of the residual");
      PseudoAnswer pa;
      pa.answer = {m->apply(g.root)};
      upgraded.push_back(std::move(pa));
    }
  }
  for (std::size_t i = 0; i < upgraded.size(); ++i) upgraded[i].index = i;
  n.answers = std::move(upgraded);
  n.probe_note = resumed ? "residual goals resumed" : "pseudo-proofs generalized";
  return ProbeResult{resumed ? 3 : 2, n.probe_note};
}

ProbeResult probe_node(DiagnosisSession& session, NodeId node, const ProbeOptions& options) {
  return session.probe(node, options);
}

// ---------------------------------------------------------------------------
// Starting sessions

namespace {

void verify_root(DiagnosisSession& s, const SessionOptions& options) {
  if (options.root_check == RootCheck::kAssert || !s.spec()) {
    s.submit(s.tree().root(), JudgmentValue::kSymptom, Provenance::kUser, "asserted at start");
    return;
  }
  OracleVerdict v = oracle_verdict(s, s.tree().root(), ProbeOptions{options.limits, false});
  if (v.value != Verdict::kSymptom)
    throw Error(ErrorCode::kNotASymptomCandidate,
                to_string(s.tree().node(s.tree().root()).atom) + " is not a symptom: " + v.reason);
  s.submit(s.tree().root(), JudgmentValue::kSymptom, Provenance::kSpecOracle, v.reason);
}

}  // namespace

std::unique_ptr<DiagnosisSession> start_incorrectness(std::shared_ptr<const Program> prog, const Outcome& outcome,
                                                      const Term& answer, const SessionOptions& options,
                                                      std::shared_ptr<const ApproximateSpec> spec) {
  const PseudoAnswer* found = nullptr;
  for (const PseudoAnswer& a : outcome.answers)
    if (a.answer.size() == 1 && is_variant(a.answer.front(), answer)) {
      found = &a;
      break;
    }
  if (!found) throw Error(ErrorCode::kAnswerNotFound, to_string(answer) + " is not a computed answer of the query");
  ProofTree t = extract_proof_tree(outcome, *found);
  auto s = std::make_unique<DiagnosisSession>(build_incorrectness_tree(t, prog), options.strategy, std::move(spec),
                                              options.strict);
  verify_root(*s, options);
  return s;
}

std::unique_ptr<DiagnosisSession> start_incorrectness(std::shared_ptr<const Program> prog, const Term& query,
                                                      const Term& answer, const SessionOptions& options,
                                                      std::shared_ptr<const ApproximateSpec> spec) {
  SolveOptions so;
  so.mode = options.mode;
  so.limits = options.limits;
  so.occurs_check = options.occurs_check;
  so.record_trace = false;
  Outcome o = solve(*prog, {query}, so);
  return start_incorrectness(std::move(prog), o, answer, options, std::move(spec));
}

std::unique_ptr<DiagnosisSession> start_incompleteness(std::shared_ptr<const Program> prog, const Term& call,
                                                       const SessionOptions& options,
                                                       std::shared_ptr<const ApproximateSpec> spec) {
  DDTree tree = build_incompleteness_root(std::move(prog), call, options.limits, options.mode, options.strict,
                                          options.occurs_check);
  auto s = std::make_unique<DiagnosisSession>(std::move(tree), options.strategy, std::move(spec), options.strict);
  verify_root(*s, options);
  return s;
}

// ---------------------------------------------------------------------------
// Spec as oracle

OracleVerdict oracle_verdict(DiagnosisSession& session, NodeId node, const ProbeOptions& probe) {
  if (!session.spec()) throw Error(ErrorCode::kInvalidArgument, "the session has no specification");
  const ApproximateSpec& spec = *session.spec();
  const DDNode& n = session.tree().node(node);
  if (session.kind() == TreeKind::kIncorrectness) return judge_correctness(spec, n.atom, session.universe());
  OracleVerdict v = judge_completeness(spec, n.atom, n.answers, n.status, session.universe());
  if (v.value != Verdict::kUnknown || v.confidence == Confidence::kTruncated || !n.probe_note.empty()) return v;
  try {
    session.probe(node, probe);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kProbeInconclusive) throw;
    v.reason += "; probe inconclusive: " + e.detail();
    return v;
  }
  const DDNode& again = session.tree().node(node);
  return judge_completeness(spec, again.atom, again.answers, again.status, session.universe());
}

AutoResult run_oracle(std::unique_ptr<DiagnosisSession> session, const AutoOptions& options) {
  AutoResult r;
  DiagnosisSession& s = *session;
  NodeId root = s.tree().root();
  auto count_probe = [&](NodeId id) {
    if (!s.tree().node(id).probe_note.empty()) ++r.probes;
  };
  const Judgment* rj = s.judgments().active(root);
  if (!rj || rj->provenance != Provenance::kSpecOracle) {
    bool had_probe = !s.tree().node(root).probe_note.empty();
    OracleVerdict v = oracle_verdict(s, root, options.probe);
    if (!had_probe) count_probe(root);
    ++r.oracle_queries;
    if (v.value == Verdict::kNotSymptom) {
      if (rj)
        s.revise(root, JudgmentValue::kNotSymptom);
      else
        s.submit(root, JudgmentValue::kNotSymptom, Provenance::kSpecOracle, v.reason);
      s.set_contradiction(Contradiction{root, v.reason});
    } else if (!rj) {
      if (v.value == Verdict::kUnknown)
        s.abort(root, v.reason);
      else
        s.submit(root, JudgmentValue::kSymptom, Provenance::kSpecOracle, v.reason);
    }
  }
  while (s.status() == SessionStatus::kRunning) {
    if (r.oracle_queries >= options.max_queries) {
      r.detail = "query budget exhausted";
      break;
    }
    std::optional<NodeId> q = s.next_query();
    if (!q) break;
    bool had_probe = !s.tree().node(*q).probe_note.empty();
    OracleVerdict v = oracle_verdict(s, *q, options.probe);
    if (!had_probe) count_probe(*q);
    ++r.oracle_queries;
    if (v.value == Verdict::kUnknown) {
      s.abort(*q, v.reason);
      break;
    }
    s.submit(*q, v.value == Verdict::kSymptom ? JudgmentValue::kSymptom : JudgmentValue::kNotSymptom,
             Provenance::kSpecOracle, v.reason);
  }
  r.status = s.status();
  r.contradiction = s.contradiction();
  r.unresolved = s.unresolved();
  if (r.status == SessionStatus::kTargetFound) r.report = s.derive_error();
  if (r.status == SessionStatus::kAborted) r.detail = "oracle could not judge node " +
                                                       std::to_string(*s.unresolved()) + ": " + s.abort_reason();
  if (r.status == SessionStatus::kExhaustedNoTarget && r.contradiction)
    r.detail = "the root is not a symptom: " + r.contradiction->reason;
  r.session = std::move(session);
  return r;
}

AutoResult auto_diagnose(std::shared_ptr<const Program> prog, std::shared_ptr<const ApproximateSpec> spec,
                         TreeKind kind, const Term& root, const AutoOptions& options) {
  if (!spec) throw Error(ErrorCode::kInvalidArgument, "automatic diagnosis needs a specification");
  SessionOptions so = options.session;
  so.root_check = RootCheck::kAssert;
  if (kind == TreeKind::kIncompleteness)
    return run_oracle(start_incompleteness(std::move(prog), root, so, std::move(spec)), options);

  SolveOptions solve_opts;
  solve_opts.mode = so.mode;
  solve_opts.limits = so.limits;
  solve_opts.occurs_check = so.occurs_check;
  solve_opts.record_trace = false;
  Outcome o = solve(*prog, {root}, solve_opts);
  Term answer = Term::nil();
  if (options.answer) {
    answer = *options.answer;
  } else {
    auto universe = spec->universe_for(prog->signature(), {root});
    bool found = false;
    for (const PseudoAnswer& a : o.answers) {
      if (!a.genuine()) continue;
      if (judge_correctness(*spec, a.answer.front(), universe).value == Verdict::kSymptom) {
        answer = a.answer.front();
        found = true;
        break;
      }
    }
    if (!found)
      throw Error(ErrorCode::kNotASymptomCandidate,
                  "no computed answer of " + to_string(root) + " is outside the specification");
  }
  return run_oracle(start_incorrectness(std::move(prog), o, answer, so, std::move(spec)), options);
}

// ---------------------------------------------------------------------------
// Documents

namespace {

using json_io::json;

std::string rfc3339(std::chrono::system_clock::time_point t) {
  auto secs = std::chrono::time_point_cast<std::chrono::seconds>(t);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(t - secs).count();
  std::time_t tt = std::chrono::system_clock::to_time_t(secs);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

json judgment_json(const Judgment& j) {
  json o{{"id", j.id},
         {"node_id", j.node},
         {"judgment", judgment_value_name(j.value)},
         {"provenance", provenance_name(j.provenance)},
         {"at", rfc3339(j.at)},
         {"withdrawn", j.withdrawn}};
  o["supersedes"] = j.supersedes ? json(*j.supersedes) : json(nullptr);
  o["superseded_by"] = j.superseded_by ? json(*j.superseded_by) : json(nullptr);
  if (!j.note.empty()) o["note"] = j.note;
  return o;
}

json optional_id(const std::optional<NodeId>& id) { return id ? json(*id) : json(nullptr); }

}  // namespace

std::string error_report_json(const ErrorReport& r) {
  json o;
  o["node_id"] = r.node;
  if (r.kind == ErrorReport::Kind::kIncorrectClauseInstance) {
    o["kind"] = "incorrect-clause-instance";
    o["clause"] = r.clause;
    o["head"] = to_string(r.head);
    json body = json::array();
    for (const Term& b : r.body) body.push_back(to_string(b));
    o["body"] = body;
  } else {
    o["kind"] = "uncovered-atom";
    o["procedure"] = r.pred.str();
    o["call"] = to_string(r.call);
    o["atom"] = r.atom ? json(to_string(*r.atom)) : json(nullptr);
  }
  json trail = json::array();
  for (const Judgment& j : r.trail) trail.push_back(judgment_json(j));
  o["trail"] = trail;
  o["summary"] = r.describe();
  return o.dump();
}

std::string DiagnosisSession::snapshot_json() const {
  SearchState s = state();
  json doc = json_io::dd_tree_json(tree_);
  for (json& n : doc["nodes"]) {
    NodeId id = n["node_id"].get<NodeId>();
    const Judgment* a = store_.active(id);
    n["judgment"] = a ? json(judgment_value_name(a->value)) : json(nullptr);
    n["judgment_id"] = a ? json(a->id) : json(nullptr);
    n["provenance"] = a ? json(provenance_name(a->provenance)) : json(nullptr);
    json chain = json::array();
    for (const Judgment* j : store_.history(id)) chain.push_back(j->id);
    n["revisions"] = chain;
    n["postponed"] = postponed_.contains(id);
  }
  doc["strategy"] = strategy_name(strategy_);
  doc["status"] = session_status_name(s.status);
  doc["strict"] = strict_;
  doc["target"] = optional_id(s.target);
  doc["frontier"] = optional_id(s.frontier);
  doc["suspect_region"] = s.suspect_region;
  json log = json::array();
  for (const Judgment& j : store_.log()) log.push_back(judgment_json(j));
  doc["judgments"] = log;
  doc["unresolved"] = optional_id(unresolved_);
  if (aborted_) doc["abort_reason"] = abort_reason_;
  if (contradiction_) doc["contradiction"] = json{{"node_id", contradiction_->node}, {"reason", contradiction_->reason}};
  return doc.dump();
}

// ---------------------------------------------------------------------------
// Covering clause instances

namespace {

struct CoverSearch {
  const ApproximateSpec& spec;
  std::shared_ptr<TermUniverse> universe;
  Bindings b;
  bool undecided = false;

  bool run(const std::vector<Term>& goals, std::size_t i, std::vector<Term> deferred) {
    if (i == goals.size()) return finish(deferred);
    Term g = b.resolve(goals[i]);
    if (is_builtin_atom(g)) {
      BuiltinResult r = eval_builtin(g);
      if (r.status == BuiltinStatus::kInstantiation) {
        deferred.push_back(goals[i]);
        return run(goals, i + 1, std::move(deferred));
      }
      if (r.status != BuiltinStatus::kSuccess) return false;
      auto mark = b.mark();
      for (const auto& [v, value] : r.bindings.bindings())
        if (!b.unify(Term::variable(v), value, true)) {
          b.undo(mark);
          return false;
        }
      bool ok = run(goals, i + 1, std::move(deferred));
      if (!ok) b.undo(mark);
      return ok;
    }
    RequiredSet req = spec.required_instances(g, universe);
    if (!req.exhaustive) undecided = true;
    for (const Term& a : req.atoms) {
      auto mark = b.mark();
      if (b.unify(g, a, true) && run(goals, i + 1, deferred)) return true;
      b.undo(mark);
    }
    return false;
  }

  bool finish(const std::vector<Term>& deferred) {
    for (const Term& d : deferred) {
      BuiltinResult r = eval_builtin(b.resolve(d));
      if (r.status == BuiltinStatus::kInstantiation) undecided = true;
      if (r.status != BuiltinStatus::kSuccess) return false;
      for (const auto& [v, value] : r.bindings.bindings())
        if (!b.unify(Term::variable(v), value, true)) return false;
    }
    return true;
  }
};

}  // namespace

CoverageResult find_covering_instance(const Program& prog, const ApproximateSpec& spec, const Term& atom,
                                      std::shared_ptr<TermUniverse> universe) {
  CoverageResult out;
  PredicateKey key = PredicateKey::of(atom);
  if (!prog.defines(key)) {
    out.value = Coverage::kUncovered;
    return out;
  }
  bool undecided = false;
  for (const Clause* c : prog.procedure(key)) {
    Clause r = rename_apart(*c);
    CoverSearch s{spec, universe, {}, false};
    if (!s.b.unify(r.head, atom, true)) continue;
    if (s.run(r.body, 0, {})) {
      out.value = Coverage::kCovered;
      out.clause = c->id;
      for (const Term& g : r.body) out.body.push_back(s.b.resolve(g));
      return out;
    }
    undecided = undecided || s.undecided;
  }
  out.value = undecided ? Coverage::kUndecided : Coverage::kUncovered;
  return out;
}

}  // namespace lpdiag
