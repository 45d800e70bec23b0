#include "lpdiag/trees.hpp"

#include <algorithm>
#include <queue>

#include "lpdiag/error.hpp"
#include "lpdiag/parser.hpp"
#include "lpdiag/unify.hpp"

namespace lpdiag {

std::vector<std::size_t> ProofTree::missing_markers() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < children.size(); ++i)
    if (children[i].missing) out.push_back(i);
  return out;
}

bool ProofTree::complete() const {
  if (missing) return false;
  return std::all_of(children.begin(), children.end(), [](const ProofTree& c) { return c.complete(); });
}

std::size_t ProofTree::size() const {
  std::size_t n = 1;
  for (const ProofTree& c : children) n += c.size();
  return n;
}

namespace {

ProofTree tree_from_step(const Derivation& d, const DerivationStep& s) {
  ProofTree t;
  t.atom = s.final_atom;
  t.order = s.order;
  switch (s.kind) {
    case StepKind::kBuiltin:
      t.builtin = true;
      break;
    case StepKind::kPending:
      t.missing = true;
      break;
    case StepKind::kResolved:
      t.clause = s.clause;
      for (const DerivationStep* c : d.children_of(s.goal)) t.children.push_back(tree_from_step(d, *c));
      break;
  }
  return t;
}

}  // namespace

ProofTree extract_proof_tree(const PseudoAnswer& answer, const Term& call, std::size_t goal_index) {
  if (!answer.derivation) throw Error(ErrorCode::kTraceMismatch, "answer has no recorded derivation");
  const Derivation& d = *answer.derivation;
  if (goal_index >= d.roots.size())
    throw Error(ErrorCode::kTraceMismatch, "query has no goal " + std::to_string(goal_index));
  const DerivationStep* root = d.find(d.roots[goal_index]);
  if (!root) throw Error(ErrorCode::kTraceMismatch, "derivation lost its root goal");
  ProofTree t = tree_from_step(d, *root);
  t.call = call;
  return t;
}

ProofTree extract_proof_tree(const Outcome& outcome, const PseudoAnswer& answer,
                             std::size_t goal_index) {
  if (answer.index >= outcome.answers.size() ||
      outcome.answers[answer.index].derivation != answer.derivation || !answer.derivation)
    throw Error(ErrorCode::kTraceMismatch, "answer does not belong to this computation");
  if (goal_index >= outcome.query.size())
    throw Error(ErrorCode::kTraceMismatch, "query has no goal " + std::to_string(goal_index));
  return extract_proof_tree(answer, outcome.query[goal_index], goal_index);
}

namespace {

struct Pending {
  const ProofTree* src;
  ProofTree* dst;
  Term goal;
};

struct LaterFirst {
  bool operator()(const Pending& a, const Pending& b) const { return a.src->order > b.src->order; }
};

/// Decides a builtin on the generalized tree. Returns false when it has to
/// stay in the residual because its arguments are not instantiated enough.
bool decide_builtin(const Term& goal, Bindings& b, bool occurs_check) {
  Term g = b.resolve(goal);
  if (g.name().str() == "\\=" && g.arity() == 2) {
    if (!unify(g.arg(0), g.arg(1), occurs_check)) return true;
    if (g.ground())
      throw Error(ErrorCode::kInternalInconsistency, "recorded builtin " + to_string(g) + " fails");
    return false;
  }
  BuiltinResult r = eval_builtin(g, {}, occurs_check);
  switch (r.status) {
    case BuiltinStatus::kSuccess:
      for (const auto& [v, value] : r.bindings.bindings())
        if (!b.unify(Term::variable(v), value, occurs_check))
          throw Error(ErrorCode::kInternalInconsistency, "builtin bindings clash");
      return true;
    case BuiltinStatus::kInstantiation:
      return false;
    default:
      throw Error(ErrorCode::kInternalInconsistency, "recorded builtin " + to_string(g) + " fails");
  }
}

void resolve_atoms(ProofTree& t, const Bindings& b) {
  t.atom = b.resolve(t.atom);
  for (ProofTree& c : t.children) resolve_atoms(c, b);
}

}  // namespace

GeneralizedProof generalize_pseudo_proof(const ProofTree& t, const Program& prog, bool occurs_check) {
  GeneralizedProof out;
  out.tree = t;
  Term start = t.call.value_or(t.atom);
  Bindings b;
  std::vector<Term> residual_goals;
  std::vector<std::pair<std::uint32_t, Term>> undecided;
  std::priority_queue<Pending, std::vector<Pending>, LaterFirst> work;
  work.push(Pending{&t, &out.tree, start});
  while (!work.empty()) {
    Pending p = work.top();
    work.pop();
    p.dst->atom = p.goal;
    if (p.src->missing) {
      residual_goals.push_back(p.goal);
      continue;
    }
    if (p.src->builtin) {
      if (!decide_builtin(p.goal, b, occurs_check)) undecided.emplace_back(p.src->order, p.goal);
      continue;
    }
    if (!p.src->clause)
      throw Error(ErrorCode::kInternalInconsistency, "proof node without a clause");
    Clause c = rename_apart(prog.clause(*p.src->clause));
    if (c.body.size() != p.src->children.size() || !b.unify(p.goal, c.head, occurs_check))
      throw Error(ErrorCode::kInternalInconsistency,
                  "clause " + std::to_string(c.id) + " does not fit " + to_string(b.resolve(p.goal)));
    for (std::size_t k = 0; k < c.body.size(); ++k)
      work.push(Pending{&p.src->children[k], &p.dst->children[k], c.body[k]});
  }
  // Builtins skipped for lack of bindings may be decidable now.
  std::sort(undecided.begin(), undecided.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  bool progress = true;
  while (progress) {
    progress = false;
    for (auto it = undecided.begin(); it != undecided.end();) {
      if (decide_builtin(it->second, b, occurs_check)) {
        it = undecided.erase(it);
        progress = true;
      } else {
        ++it;
      }
    }
  }
  resolve_atoms(out.tree, b);
  out.tree.call = b.resolve(start);
  out.root = out.tree.atom;
  for (const Term& g : residual_goals) out.residual.push_back(b.resolve(g));
  for (const auto& u : undecided) out.residual.push_back(b.resolve(u.second));
  return out;
}

bool is_valid_proof_tree(const ProofTree& t, const Program& prog) {
  if (t.missing) return true;
  if (t.builtin) {
    if (!t.atom.ground()) return true;
    return eval_builtin(t.atom).status == BuiltinStatus::kSuccess;
  }
  if (!t.clause) return false;
  Clause c = rename_apart(prog.clause(*t.clause));
  if (c.body.size() != t.children.size()) return false;
  Bindings b;
  if (!b.unify(c.head, t.atom, true)) return false;
  for (std::size_t k = 0; k < c.body.size(); ++k)
    if (!b.unify(c.body[k], t.children[k].atom, true)) return false;
  return std::all_of(t.children.begin(), t.children.end(),
                     [&](const ProofTree& ch) { return is_valid_proof_tree(ch, prog); });
}

std::string_view tree_kind_name(TreeKind k) {
  return k == TreeKind::kIncorrectness ? "incorrectness" : "incompleteness";
}

bool DDNode::unknown_quality() const {
  return std::any_of(answers.begin(), answers.end(),
                     [](const PseudoAnswer& a) { return !a.genuine(); });
}

DDTree::DDTree(TreeKind kind, std::shared_ptr<const Program> prog, Config config)
    : kind_(kind), prog_(std::move(prog)), config_(std::move(config)) {
  if (!prog_) throw Error(ErrorCode::kInvalidArgument, "tree needs a program");
}

const DDNode& DDTree::node(NodeId id) const {
  if (!contains(id)) throw Error(ErrorCode::kUnknownNode, "no node " + std::to_string(id));
  return nodes_[id - 1];
}

DDNode& DDTree::mutable_node(NodeId id) {
  if (!contains(id)) throw Error(ErrorCode::kUnknownNode, "no node " + std::to_string(id));
  return nodes_[id - 1];
}

NodeId DDTree::add_node(DDNode n, std::optional<NodeId> parent) {
  n.id = static_cast<NodeId>(nodes_.size() + 1);
  n.parent = parent;
  n.depth = parent ? node(*parent).depth + 1 : 0;
  nodes_.push_back(std::move(n));
  if (parent) nodes_[*parent - 1].children.push_back(nodes_.back().id);
  return nodes_.back().id;
}

const std::vector<NodeId>& DDTree::expand(NodeId id) {
  DDNode& n = mutable_node(id);
  if (n.expanded) return n.children;
  Term call = n.atom;
  std::vector<TopLevelCall> calls;
  if (prog_->defines(PredicateKey::of(call)))
    calls = top_level_calls(*prog_, call, config_.limits, config_.mode, config_.occurs_check);
  for (TopLevelCall& tc : calls) {
    DDNode child;
    child.atom = tc.call;
    child.clause = tc.clause;
    child.answers = std::move(tc.outcome.answers);
    child.status = tc.outcome.status;
    child.errors = std::move(tc.outcome.errors);
    child.expanded = false;
    add_node(std::move(child), id);
  }
  // add_node may reallocate; look the node up again.
  DDNode& again = mutable_node(id);
  again.expanded = true;
  return again.children;
}

std::vector<NodeId> DDTree::subtree(NodeId id) const {
  std::vector<NodeId> out;
  std::vector<NodeId> stack{id};
  node(id);
  while (!stack.empty()) {
    NodeId n = stack.back();
    stack.pop_back();
    out.push_back(n);
    const auto& ch = nodes_[n - 1].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

namespace {

void add_correctness_nodes(DDTree& tree, const ProofTree& t, std::optional<NodeId> parent) {
  DDNode n;
  n.atom = t.atom;
  n.clause = t.clause.value_or(0);
  n.expanded = true;
  for (const ProofTree& c : t.children) n.body.push_back(c.atom);
  NodeId id = tree.add_node(std::move(n), parent);
  for (const ProofTree& c : t.children)
    if (!c.builtin) add_correctness_nodes(tree, c, id);
}

}  // namespace

DDTree build_incorrectness_tree(const ProofTree& t, std::shared_ptr<const Program> prog) {
  if (!t.complete())
    throw Error(ErrorCode::kPseudoProofRejected,
                "the tree has subtrees missing at delayed goals; generalize it first");
  if (t.builtin) throw Error(ErrorCode::kInvalidArgument, "a builtin cannot be diagnosed");
  DDTree tree(TreeKind::kIncorrectness, std::move(prog), {});
  add_correctness_nodes(tree, t, std::nullopt);
  return tree;
}

DDTree build_incompleteness_root(std::shared_ptr<const Program> prog, const Term& call,
                                 const Limits& limits, SolveMode mode, bool strict,
                                 bool occurs_check) {
  if (is_builtin_atom(call)) throw Error(ErrorCode::kInvalidArgument, "a builtin cannot be diagnosed");
  SolveOptions opts;
  opts.mode = mode;
  opts.limits = limits;
  opts.occurs_check = occurs_check;
  opts.record_trace = false;
  Outcome o = solve(*prog, {call}, opts);
  if (strict && !o.terminated())
    throw Error(ErrorCode::kNotASymptomCandidate,
                to_string(call) + " did not terminate (" + std::string(status_name(o.status)) + ")");
  DDTree tree(TreeKind::kIncompleteness, std::move(prog), DDTree::Config{limits, mode, occurs_check});
  DDNode root;
  root.atom = call;
  root.answers = std::move(o.answers);
  root.status = o.status;
  root.errors = std::move(o.errors);
  tree.add_node(std::move(root), std::nullopt);
  return tree;
}

const std::vector<NodeId>& expand_node(DDTree& tree, NodeId id) { return tree.expand(id); }

std::string format_answer(const PseudoAnswer& a) {
  std::string s = format_goals(a.answer);
  if (!a.residual.empty()) s += "  [residual: " + format_goals(a.residual) + "]";
  if (a.flag_i) s += " (i)";
  if (a.flag_ii) s += " (ii)";
  return s;
}

}  // namespace lpdiag
