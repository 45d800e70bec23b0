#include <gtest/gtest.h>

#include <json.hpp>

#include "lpdiag/export.hpp"
#include "lpdiag/trees.hpp"
#include "lpdiag/unify.hpp"
#include "test_support.hpp"

namespace lpdiag {
namespace {

using testing::fixture;

Outcome run(const Program& p, std::string_view q, SolveMode mode = SolveMode::kCoroutining) {
  return solve(p, parse_query(q).goals, mode);
}

const PseudoAnswer& answer_matching(const Outcome& o, std::string_view text) {
  for (const PseudoAnswer& a : o.answers)
    if (format_goals(a.answer) == text) return a;
  throw std::runtime_error("no answer " + std::string(text));
}

TEST(ProofTree, BuggyIsortHasThreeLevels) {
  Program p = fixture("isort_buggy.pl");
  Outcome o = run(p, "isort([2,1],L)");
  ProofTree t = extract_proof_tree(o, answer_matching(o, "isort([2,1],[2,1])"));
  EXPECT_EQ(to_string(t.atom), "isort([2,1],[2,1])");
  EXPECT_EQ(t.clause, 2u);
  ASSERT_EQ(t.children.size(), 2u);
  EXPECT_EQ(to_string(t.children[0].atom), "isort([1],[1])");
  const ProofTree& ins = t.children[1];
  EXPECT_EQ(to_string(ins.atom), "insert(2,[1],[2,1])");
  EXPECT_EQ(ins.clause, 4u);
  ASSERT_EQ(ins.children.size(), 1u);
  EXPECT_TRUE(ins.children[0].builtin);
  EXPECT_EQ(to_string(ins.children[0].atom), "2>=1");
  EXPECT_TRUE(t.complete());
  EXPECT_TRUE(is_valid_proof_tree(t, p));
}

TEST(ProofTree, FactAnswerIsSingleNode) {
  Program p = parse_program("p(a).");
  Outcome o = run(p, "p(X)");
  ProofTree t = extract_proof_tree(o, o.answers.at(0));
  EXPECT_EQ(t.size(), 1u);
  EXPECT_EQ(t.clause, 1u);
}

TEST(ProofTree, FlounderedAnswerHasMissingMarker) {
  Program p = fixture("le.pl");
  Outcome o = run(p, "p(X)");
  ASSERT_EQ(o.answers.size(), 1u);
  ProofTree t = extract_proof_tree(o, o.answers[0]);
  EXPECT_EQ(to_string(t.atom), "p(X)");
  ASSERT_EQ(t.children.size(), 1u);
  EXPECT_EQ(t.missing_markers(), std::vector<std::size_t>{0});
  EXPECT_EQ(to_string(t.children[0].atom), "le(X,s(0))");
  EXPECT_FALSE(t.complete());
}

TEST(ProofTree, ForeignAnswerIsTraceMismatch) {
  Program p = fixture("app.pl");
  Outcome a = run(p, "app(X,Y,[1])");
  Outcome b = run(p, "app(X,Y,[1])");
  try {
    extract_proof_tree(a, b.answers.at(0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTraceMismatch);
  }
}

TEST(Generalize, CaseIRecoversMostGeneralAnswer) {
  Program p = fixture("case_i.pl");
  auto calls = top_level_calls(p, parse_term("main(W)"), {}, SolveMode::kCoroutining);
  ASSERT_EQ(calls.size(), 2u);
  const TopLevelCall& s = calls[1];
  EXPECT_EQ(to_string(s.call), "s(X,W)");
  ASSERT_EQ(s.outcome.answers.size(), 1u);
  const PseudoAnswer& pa = s.outcome.answers[0];
  EXPECT_EQ(format_goals(pa.answer), "s(a,done)");
  EXPECT_TRUE(pa.flag_i);
  GeneralizedProof g = generalize_pseudo_proof(extract_proof_tree(s.outcome, pa), p);
  EXPECT_EQ(to_string(g.root), "s(a,W)");
  EXPECT_TRUE(g.residual.empty());
  EXPECT_TRUE(is_instance_of(pa.answer[0], g.root));
}

TEST(Generalize, LePseudoProofKeepsResidual) {
  Program p = fixture("le.pl");
  Outcome o = run(p, "p(X)");
  GeneralizedProof g = generalize_pseudo_proof(extract_proof_tree(o, o.answers.at(0)), p);
  EXPECT_EQ(to_string(g.root), "p(X)");
  ASSERT_EQ(g.residual.size(), 1u);
  EXPECT_EQ(to_string(g.residual[0]), "le(X,s(0))");
}

TEST(Generalize, PlainProofGivesVariantOfRoot) {
  Program p = fixture("isort.pl");
  Outcome o = run(p, "isort([3,1,2],L)", SolveMode::kPlain);
  ProofTree t = extract_proof_tree(o, o.answers.at(0));
  GeneralizedProof g = generalize_pseudo_proof(t, p);
  EXPECT_TRUE(is_variant(g.root, t.atom));
  EXPECT_TRUE(g.residual.empty());
  EXPECT_TRUE(is_valid_proof_tree(g.tree, p));
}

// The original tree is an instance of its generalization, node by node.
void expect_instance_tree(const ProofTree& specific, const ProofTree& general) {
  EXPECT_TRUE(is_instance_of(specific.atom, general.atom))
      << to_string(specific.atom) << " vs " << to_string(general.atom);
  ASSERT_EQ(specific.children.size(), general.children.size());
  for (std::size_t i = 0; i < specific.children.size(); ++i)
    expect_instance_tree(specific.children[i], general.children[i]);
}

TEST(Generalize, TreeIsInstanceOfGeneralizationOnFixtures) {
  struct Case {
    const char* file;
    const char* query;
  };
  for (const Case& c : {Case{"app.pl", "app(X,Y,[1,2])"}, Case{"isort.pl", "isort([2,1,3],L)"},
                        Case{"family.pl", "ancestor(tom,W)"}, Case{"plus.pl", "plus(X,Y,s(s(0)))"},
                        Case{"le.pl", "le(X,Y), X = s(Z)"}, Case{"member.pl", "member(X,[a,b])"}}) {
    Program p = fixture(c.file);
    Outcome o = run(p, c.query);
    for (const PseudoAnswer& a : o.answers) {
      ProofTree t = extract_proof_tree(o, a);
      GeneralizedProof g = generalize_pseudo_proof(t, p);
      expect_instance_tree(t, g.tree);
      EXPECT_TRUE(is_instance_of(a.answer[0], g.root)) << c.file;
    }
  }
}

TEST(DDTree, IncorrectnessTreeMirrorsProof) {
  auto p = std::make_shared<Program>(fixture("isort_buggy.pl"));
  Outcome o = run(*p, "isort([2,1],L)");
  DDTree tree = build_incorrectness_tree(extract_proof_tree(o, o.answers.at(0)), p);
  // isort([1],[1]) keeps its own two-node subtree; the builtin leaf is dropped.
  ASSERT_EQ(tree.size(), 5u);
  const DDNode& root = tree.node(tree.root());
  EXPECT_EQ(to_string(root.atom), "isort([2,1],[2,1])");
  ASSERT_EQ(root.children.size(), 2u);
  EXPECT_EQ(to_string(tree.node(root.children[0]).atom), "isort([1],[1])");
  const DDNode& ins = tree.node(root.children[1]);
  EXPECT_EQ(to_string(ins.atom), "insert(2,[1],[2,1])");
  EXPECT_EQ(ins.clause, 4u);
  EXPECT_EQ(format_goals(ins.body), "2>=1");
  EXPECT_TRUE(ins.children.empty());
}

TEST(DDTree, PseudoProofIsRejected) {
  auto p = std::make_shared<Program>(fixture("le.pl"));
  Outcome o = run(*p, "p(X)");
  try {
    build_incorrectness_tree(extract_proof_tree(o, o.answers.at(0)), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPseudoProofRejected);
  }
}

TEST(DDTree, SingleNodeIncorrectnessTree) {
  auto p = std::make_shared<Program>(parse_program("p(a)."));
  Outcome o = run(*p, "p(X)");
  DDTree tree = build_incorrectness_tree(extract_proof_tree(o, o.answers.at(0)), p);
  EXPECT_EQ(tree.size(), 1u);
}

TEST(DDTree, MissingBaseRootAndExpansion) {
  auto p = std::make_shared<Program>(fixture("isort_missing_base.pl"));
  DDTree tree = build_incompleteness_root(p, parse_term("isort([1],L)"), {}, SolveMode::kCoroutining);
  const DDNode& root = tree.node(tree.root());
  EXPECT_TRUE(root.answers.empty());
  EXPECT_EQ(root.status, OutcomeStatus::kExhausted);
  EXPECT_FALSE(root.expanded);
  std::vector<NodeId> kids = expand_node(tree, tree.root());
  ASSERT_EQ(kids.size(), 2u);
  EXPECT_EQ(to_string(tree.node(kids[0]).atom), "isort([],Zs)");
  ASSERT_EQ(tree.node(kids[0]).answers.size(), 1u);
  EXPECT_EQ(format_goals(tree.node(kids[0]).answers[0].answer), "isort([],[])");
  EXPECT_EQ(to_string(tree.node(kids[1]).atom), "insert(1,[],L)");
  EXPECT_TRUE(tree.node(kids[1]).answers.empty());
  // Idempotent.
  EXPECT_EQ(expand_node(tree, tree.root()), kids);
  EXPECT_EQ(tree.size(), 3u);
  EXPECT_TRUE(expand_node(tree, kids[1]).empty());
}

TEST(DDTree, RootWithAnswersAndEmptyProcedure) {
  auto p = std::make_shared<Program>(fixture("app.pl"));
  DDTree tree = build_incompleteness_root(p, parse_term("app(X,Y,[1])"), {}, SolveMode::kPlain);
  EXPECT_EQ(tree.node(1).answers.size(), 2u);

  auto q = std::make_shared<Program>(parse_program("q(b). r(X) :- q(X)."));
  DDTree empty = build_incompleteness_root(q, parse_term("q(a)"), {}, SolveMode::kPlain);
  EXPECT_TRUE(empty.node(1).answers.empty());
  EXPECT_EQ(empty.node(1).status, OutcomeStatus::kExhausted);
  EXPECT_TRUE(expand_node(empty, 1).empty());
}

TEST(DDTree, StrictModeRejectsNonTermination) {
  auto p = std::make_shared<Program>(parse_program("loop(X) :- loop(X)."));
  Limits lim;
  lim.max_depth = 200;
  try {
    build_incompleteness_root(p, parse_term("loop(a)"), lim, SolveMode::kPlain);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotASymptomCandidate);
  }
  DDTree lenient = build_incompleteness_root(p, parse_term("loop(a)"), lim, SolveMode::kPlain, false);
  EXPECT_EQ(lenient.node(1).status, OutcomeStatus::kDepthCut);
}

TEST(DDTree, UnknownNode) {
  auto p = std::make_shared<Program>(fixture("app.pl"));
  DDTree tree = build_incompleteness_root(p, parse_term("app(X,Y,[1])"), {}, SolveMode::kPlain);
  EXPECT_THROW(tree.node(7), Error);
  EXPECT_THROW(expand_node(tree, 0), Error);
}

// Without block declarations the coroutining tree equals the plain one.
TEST(DDTree, DelayFreeTreesAgree) {
  for (auto [file, call] : {std::pair{"isort.pl", "isort([3,1,2],L)"}, std::pair{"app.pl", "app(X,Y,[1,2])"},
                            std::pair{"family.pl", "grandparent(tom,Z)"}}) {
    auto p = std::make_shared<Program>(fixture(file));
    DDTree a = build_incompleteness_root(p, parse_term(call), {}, SolveMode::kPlain);
    DDTree b = build_incompleteness_root(p, parse_term(call), {}, SolveMode::kCoroutining);
    for (std::size_t i = 1; i <= a.size(); ++i) {
      ASSERT_LE(i, b.size());
      expand_node(a, static_cast<NodeId>(i));
      expand_node(b, static_cast<NodeId>(i));
      const DDNode& x = a.node(static_cast<NodeId>(i));
      const DDNode& y = b.node(static_cast<NodeId>(i));
      EXPECT_TRUE(is_variant(x.atom, y.atom));
      EXPECT_EQ(x.children, y.children);
      ASSERT_EQ(x.answers.size(), y.answers.size());
      for (std::size_t k = 0; k < x.answers.size(); ++k)
        EXPECT_TRUE(is_variant(x.answers[k].answer[0], y.answers[k].answer[0]));
    }
    EXPECT_EQ(a.size(), b.size());
  }
}

TEST(Export, JsonAndDotAreWellFormed) {
  auto p = std::make_shared<Program>(fixture("isort_missing_base.pl"));
  DDTree tree = build_incompleteness_root(p, parse_term("isort([1],L)"), {}, SolveMode::kCoroutining);
  expand_node(tree, 1);
  auto doc = nlohmann::json::parse(export_json(tree));
  EXPECT_EQ(doc["kind"], "incompleteness");
  ASSERT_EQ(doc["nodes"].size(), 3u);
  EXPECT_EQ(doc["nodes"][1]["parent_id"], 1);
  EXPECT_EQ(doc["nodes"][1]["answers"][0]["flags"]["i"], false);
  std::string dot = export_dot(tree);
  EXPECT_EQ(dot.rfind("digraph dd {", 0), 0u);
  EXPECT_NE(dot.find("n1 -> n2;"), std::string::npos);
  EXPECT_EQ(dot.back(), '\n');
  EXPECT_EQ(std::count(dot.begin(), dot.end(), '{'), std::count(dot.begin(), dot.end(), '}'));

  Program le = fixture("le.pl");
  Outcome o = run(le, "p(X)");
  auto pt = nlohmann::json::parse(export_json(extract_proof_tree(o, o.answers[0])));
  EXPECT_TRUE(pt["pseudo"].get<bool>());
  EXPECT_EQ(pt["nodes"][1]["kind"], "missing");
}

}  // namespace
}  // namespace lpdiag
