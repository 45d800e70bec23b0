#include <gtest/gtest.h>

#include <json.hpp>
#include <random>
#include <set>

#include "lpdiag/diagnosis.hpp"
#include "lpdiag/unify.hpp"
#include "test_support.hpp"

namespace lpdiag {
namespace {

using testing::fixture;
using testing::fixture_text;

std::shared_ptr<const Program> program(const std::string& name) {
  return std::make_shared<const Program>(fixture(name));
}

std::shared_ptr<const ApproximateSpec> insert_spec() {
  static auto spec = ApproximateSpec::load(fixture_text("insert.spec"));
  return spec;
}

Term atom(std::string_view s) { return parse_term(s); }

std::string atom_of(const DiagnosisSession& s, NodeId id) { return to_string(s.tree().node(id).atom); }

std::unique_ptr<DiagnosisSession> buggy_session(Strategy strategy = Strategy::kTopDown) {
  SessionOptions o;
  o.strategy = strategy;
  return start_incorrectness(program("isort_buggy.pl"), atom("isort([2,1],L)"), atom("isort([2,1],[2,1])"), o);
}

// c(s^n(0)) proved by n+1 uses of the same two clauses: a chain of n+1 nodes.
std::unique_ptr<DiagnosisSession> chain_session(int length, Strategy strategy) {
  auto p = std::make_shared<const Program>(parse_program("c(s(X)) :- c(X). c(0)."));
  Term t = Term::integer(0);
  for (int i = 1; i < length; ++i) t = Term::compound("s", {t});
  SessionOptions o;
  o.strategy = strategy;
  Term goal = Term::compound("c", {t});
  return start_incorrectness(p, goal, goal, o);
}

TEST(Judgments, StoreKeepsRevisionChains) {
  JudgmentStore st;
  const Judgment& a = st.submit(3, JudgmentValue::kSymptom, Provenance::kUser);
  EXPECT_EQ(a.id, 1u);
  EXPECT_THROW(st.submit(3, JudgmentValue::kNotSymptom, Provenance::kUser), Error);
  EXPECT_THROW(st.revise(4, JudgmentValue::kNotSymptom), Error);
  st.revise(3, JudgmentValue::kNotSymptom);
  EXPECT_EQ(st.value(3), JudgmentValue::kNotSymptom);
  EXPECT_EQ(st.get(1).superseded_by, 2u);
  EXPECT_EQ(st.get(2).supersedes, 1u);

  st.assume(3, JudgmentValue::kSymptom);
  EXPECT_EQ(st.value(3), JudgmentValue::kSymptom);
  st.withdraw(3);
  EXPECT_EQ(st.value(3), JudgmentValue::kNotSymptom);
  EXPECT_FALSE(st.get(2).superseded_by.has_value());
  EXPECT_THROW(st.withdraw(3), Error);

  st.assume(7, JudgmentValue::kNotSymptom);
  st.withdraw(7);
  EXPECT_FALSE(st.value(7).has_value());
  EXPECT_EQ(st.history(3).size(), 3u);
}

TEST(Session, BuggyIsortTopDownAsksSmallerSortFirst) {
  auto s = buggy_session();
  EXPECT_EQ(s->tree().size(), 5u);
  EXPECT_EQ(s->status(), SessionStatus::kRunning);
  auto q = s->next_query();
  ASSERT_TRUE(q);
  EXPECT_EQ(atom_of(*s, *q), "isort([1],[1])");
  s->submit(*q, JudgmentValue::kNotSymptom);
  q = s->next_query();
  ASSERT_TRUE(q);
  EXPECT_EQ(atom_of(*s, *q), "insert(2,[1],[2,1])");
  EXPECT_EQ(s->submit(*q, JudgmentValue::kSymptom), SessionStatus::kTargetFound);
  EXPECT_FALSE(s->next_query());

  ErrorReport r = s->derive_error();
  EXPECT_EQ(r.kind, ErrorReport::Kind::kIncorrectClauseInstance);
  EXPECT_EQ(r.clause, 4u);
  EXPECT_EQ(to_string(r.head), "insert(2,[1],[2,1])");
  EXPECT_EQ(format_goals(r.body), "2>=1");
  EXPECT_EQ(r.describe(), "incorrect clause instance (clause 4): insert(2,[1],[2,1]) :- 2>=1");
  ASSERT_EQ(r.trail.size(), 1u);
  EXPECT_EQ(r.trail[0].value, JudgmentValue::kSymptom);
}

TEST(Session, RevisionReopensTheSearch) {
  auto s = buggy_session();
  NodeId sort1 = *s->next_query();
  s->submit(sort1, JudgmentValue::kNotSymptom);
  NodeId ins = *s->next_query();
  s->submit(ins, JudgmentValue::kSymptom);
  ASSERT_EQ(s->status(), SessionStatus::kTargetFound);
  EXPECT_EQ(s->revise(ins, JudgmentValue::kNotSymptom), SessionStatus::kTargetFound);
  // Both children now clear: the root is the target.
  EXPECT_EQ(s->state().target, s->tree().root());
  EXPECT_EQ(s->revise(sort1, JudgmentValue::kSymptom), SessionStatus::kRunning);
  EXPECT_EQ(s->state().frontier, sort1);
  auto q = s->next_query();
  ASSERT_TRUE(q);
  EXPECT_EQ(atom_of(*s, *q), "isort([],[])");
}

TEST(Session, AssumptionsCanBeWithdrawn) {
  auto s = buggy_session(Strategy::kFree);
  EXPECT_FALSE(s->next_query());
  NodeId sort1 = s->tree().node(1).children[0];
  NodeId ins = s->tree().node(1).children[1];
  s->assume(ins, JudgmentValue::kSymptom);
  EXPECT_EQ(s->status(), SessionStatus::kTargetFound);
  s->withdraw(ins);
  EXPECT_FALSE(s->judgments().active(ins));
  EXPECT_EQ(s->status(), SessionStatus::kRunning);
  s->submit(sort1, JudgmentValue::kNotSymptom);
  s->assume(sort1, JudgmentValue::kSymptom);
  EXPECT_EQ(s->state().frontier, sort1);
  s->withdraw(sort1);
  EXPECT_EQ(s->judgments().value(sort1), JudgmentValue::kNotSymptom);
  EXPECT_THROW(s->withdraw(sort1), Error);
  EXPECT_THROW(s->submit(99, JudgmentValue::kSymptom), Error);
}

TEST(Session, PostponedNodesAreAskedLast) {
  auto s = buggy_session();
  NodeId first = *s->next_query();
  s->postpone(first);
  NodeId second = *s->next_query();
  EXPECT_NE(first, second);
  s->submit(second, JudgmentValue::kNotSymptom);
  EXPECT_EQ(s->next_query(), first);
}

TEST(Session, WrongFactIsImmediatelyTheTarget) {
  auto p = std::make_shared<const Program>(parse_program("p(a)."));
  auto s = start_incorrectness(p, atom("p(X)"), atom("p(a)"), {});
  EXPECT_EQ(s->status(), SessionStatus::kTargetFound);
  ErrorReport r = s->derive_error();
  EXPECT_EQ(to_string(r.head), "p(a)");
  EXPECT_TRUE(r.body.empty());
}

TEST(Session, AnswerMustBeComputed) {
  try {
    start_incorrectness(program("isort_buggy.pl"), atom("isort([2,1],L)"), atom("isort([2,1],[1,1])"), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAnswerNotFound);
  }
}

TEST(Session, NoTargetBeforeTheEnd) {
  auto s = buggy_session();
  EXPECT_THROW(s->derive_error(), Error);
  s->revise(1, JudgmentValue::kNotSymptom);
  EXPECT_EQ(s->status(), SessionStatus::kExhaustedNoTarget);
}

TEST(Session, MissingBaseInteractive) {
  auto s = start_incompleteness(program("isort_missing_base.pl"), atom("isort([1],L)"), {}, insert_spec());
  auto q = s->next_query();
  ASSERT_TRUE(q);
  EXPECT_EQ(atom_of(*s, *q), "isort([],Zs)");
  s->submit(*q, JudgmentValue::kNotSymptom);
  q = s->next_query();
  ASSERT_TRUE(q);
  EXPECT_EQ(atom_of(*s, *q), "insert(1,[],L)");
  EXPECT_EQ(s->submit(*q, JudgmentValue::kSymptom), SessionStatus::kTargetFound);
  ErrorReport r = s->derive_error();
  EXPECT_EQ(r.kind, ErrorReport::Kind::kUncoveredAtom);
  EXPECT_EQ(r.pred.str(), "insert/3");
  ASSERT_TRUE(r.atom);
  EXPECT_EQ(to_string(*r.atom), "insert(1,[],[1])");
}

TEST(Session, StrictModeRefusesNonTerminatedSymptoms) {
  auto p = std::make_shared<const Program>(parse_program("loop(X) :- loop(X)."));
  Limits lim{50, 1000, 10};
  DDTree lenient = build_incompleteness_root(p, atom("loop(a)"), lim, SolveMode::kPlain, false);
  DiagnosisSession strict(lenient, Strategy::kTopDown, nullptr, true);
  try {
    strict.submit(1, JudgmentValue::kSymptom);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotASymptomCandidate);
  }
  DiagnosisSession loose(lenient, Strategy::kTopDown, nullptr, false);
  EXPECT_NO_THROW(loose.submit(1, JudgmentValue::kSymptom));
}

TEST(Session, VerifiedRootMustBeASymptom) {
  SessionOptions o;
  o.root_check = RootCheck::kVerify;
  try {
    start_incompleteness(program("isort.pl"), atom("isort([1],L)"), o, insert_spec());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotASymptomCandidate);
  }
  auto s = start_incompleteness(program("isort_missing_base.pl"), atom("isort([1],L)"), o, insert_spec());
  EXPECT_EQ(s->judgments().active(1)->provenance, Provenance::kSpecOracle);
}

TEST(DivideAndQuery, FirstQueryHalvesTheChain) {
  auto s = chain_session(64, Strategy::kDivideAndQuery);
  ASSERT_EQ(s->tree().size(), 64u);
  auto q = s->next_query();
  ASSERT_TRUE(q);
  EXPECT_EQ(*q, 33u);
  EXPECT_EQ(s->tree().node(*q).depth, 32u);
}

// A planted wrong node e: exactly the nodes on the path to e are symptoms.
std::size_t judgments_to_target(Strategy strategy, NodeId planted, NodeId* found) {
  auto s = chain_session(64, strategy);
  std::size_t n = 0;
  while (auto q = s->next_query()) {
    s->submit(*q, *q <= planted ? JudgmentValue::kSymptom : JudgmentValue::kNotSymptom);
    ++n;
  }
  *found = s->state().target.value_or(0);
  return n;
}

TEST(DivideAndQuery, AtMostSevenJudgmentsOnSixtyFourNodes) {
  std::size_t worst_dq = 0;
  std::size_t worst_td = 0;
  for (NodeId planted = 1; planted <= 64; ++planted) {
    NodeId found = 0;
    worst_dq = std::max(worst_dq, judgments_to_target(Strategy::kDivideAndQuery, planted, &found));
    EXPECT_EQ(found, planted);
    worst_td = std::max(worst_td, judgments_to_target(Strategy::kTopDown, planted, &found));
    EXPECT_EQ(found, planted);
  }
  EXPECT_LE(worst_dq, 7u);
  EXPECT_EQ(worst_td, 63u);
}

TEST(Revision, RandomScriptsMatchRecomputation) {
  std::mt19937 rng(7);
  for (int round = 0; round < 40; ++round) {
    auto s = chain_session(12, Strategy::kDivideAndQuery);
    for (int step = 0; step < 30; ++step) {
      NodeId n = 1 + rng() % s->tree().size();
      JudgmentValue v = rng() % 2 ? JudgmentValue::kSymptom : JudgmentValue::kNotSymptom;
      try {
        switch (rng() % 4) {
          case 0: s->submit(n, v); break;
          case 1: s->revise(n, v); break;
          case 2: s->assume(n, v); break;
          default: s->withdraw(n); break;
        }
      } catch (const Error& e) {
        ASSERT_TRUE(e.code() == ErrorCode::kJudgmentConflict || e.code() == ErrorCode::kNoActiveJudgment);
      }
      auto active = s->judgments().active_set();
      SearchState fresh = compute_search_state(s->tree(), active);
      SearchState now = s->state();
      ASSERT_EQ(now.status, fresh.status);
      ASSERT_EQ(now.target, fresh.target);
      ASSERT_EQ(now.suspect_region, fresh.suspect_region);
      if (now.target) {
        ASSERT_TRUE(is_target(s->tree(), active, *now.target));
      }
    }
  }
}

TEST(Probe, LeResidualIsResumed) {
  auto s = start_incompleteness(program("le.pl"), atom("p(X)"), {});
  ASSERT_TRUE(s->tree().node(1).unknown_quality());
  ProbeResult r = s->probe(1, ProbeOptions{{}, true});
  EXPECT_EQ(r.step, 3);
  std::set<std::string> got;
  for (const PseudoAnswer& a : s->tree().node(1).answers) {
    EXPECT_TRUE(a.genuine());
    got.insert(format_goals(a.answer));
  }
  EXPECT_EQ(got, (std::set<std::string>{"p(0)", "p(s(0))"}));
}

TEST(Probe, CaseIAnswerIsGeneralized) {
  auto s = start_incompleteness(program("case_i.pl"), atom("main(W)"), {});
  const auto& kids = s->expand(1);
  ASSERT_EQ(kids.size(), 2u);
  NodeId sx = kids[1];
  ASSERT_EQ(atom_of(*s, sx), "s(X,W)");
  ASSERT_TRUE(s->tree().node(sx).answers.at(0).flag_i);
  ProbeResult r = s->probe(sx, ProbeOptions{{}, true});
  EXPECT_EQ(r.step, 2);
  ASSERT_EQ(s->tree().node(sx).answers.size(), 1u);
  EXPECT_EQ(format_goals(s->tree().node(sx).answers[0].answer), "s(a,W)");
}

TEST(Probe, DelayFreeNodeIsConfirmedByPlainRun) {
  auto s = start_incompleteness(program("app.pl"), atom("app(X,Y,[1])"), {});
  std::size_t before = s->tree().node(1).answers.size();
  ProbeResult r = s->probe(1);
  EXPECT_EQ(r.step, 1);
  EXPECT_EQ(s->tree().node(1).answers.size(), before);
  EXPECT_THROW(buggy_session()->probe(1), Error);
}

TEST(Auto, BuggyIsortFindsTheFlippedComparison) {
  AutoResult r = auto_diagnose(program("isort_buggy.pl"), insert_spec(), TreeKind::kIncorrectness,
                               atom("isort([2,1],L)"));
  ASSERT_EQ(r.status, SessionStatus::kTargetFound) << r.detail;
  ASSERT_TRUE(r.report);
  EXPECT_EQ(r.report->describe(), "incorrect clause instance (clause 4): insert(2,[1],[2,1]) :- 2>=1");
  EXPECT_FALSE(insert_spec()->member_correct(r.report->head));
  EXPECT_GE(r.oracle_queries, 2u);
}

TEST(Auto, MissingBaseFindsTheUncoveredAtom) {
  AutoResult r = auto_diagnose(program("isort_missing_base.pl"), insert_spec(), TreeKind::kIncompleteness,
                               atom("isort([1],L)"));
  ASSERT_EQ(r.status, SessionStatus::kTargetFound) << r.detail;
  ASSERT_TRUE(r.report && r.report->atom);
  EXPECT_EQ(r.report->pred.str(), "insert/3");
  EXPECT_EQ(to_string(*r.report->atom), "insert(1,[],[1])");
  EXPECT_TRUE(insert_spec()->member_complete(*r.report->atom));
  auto prog = program("isort_missing_base.pl");
  auto u = insert_spec()->universe_for(prog->signature(), {*r.report->atom});
  EXPECT_EQ(find_covering_instance(*prog, *insert_spec(), *r.report->atom, u).value, Coverage::kUncovered);
  CoverageResult fixed = find_covering_instance(fixture("isort.pl"), *insert_spec(), *r.report->atom, u);
  EXPECT_EQ(fixed.value, Coverage::kCovered);
  EXPECT_EQ(fixed.clause, 3u);
}

TEST(Auto, CorrectProgramContradictsTheAssertedRoot) {
  AutoOptions o;
  o.answer = atom("isort([2,1],[1,2])");
  AutoResult r = auto_diagnose(program("isort.pl"), insert_spec(), TreeKind::kIncorrectness, atom("isort([2,1],L)"), o);
  EXPECT_EQ(r.status, SessionStatus::kExhaustedNoTarget);
  ASSERT_TRUE(r.contradiction);
  EXPECT_EQ(r.contradiction->node, 1u);
  EXPECT_FALSE(r.report);
  EXPECT_THROW(auto_diagnose(program("isort.pl"), insert_spec(), TreeKind::kIncorrectness, atom("isort([2,1],L)")),
               Error);
}

TEST(Auto, StrategiesAgreeOnValidTargets) {
  for (Strategy st : {Strategy::kTopDown, Strategy::kDivideAndQuery}) {
    AutoOptions o;
    o.session.strategy = st;
    AutoResult r = auto_diagnose(program("isort_buggy.pl"), insert_spec(), TreeKind::kIncorrectness,
                                 atom("isort([3,2,1],L)"), o);
    ASSERT_EQ(r.status, SessionStatus::kTargetFound) << r.detail;
    EXPECT_TRUE(is_target(r.session->tree(), r.session->judgments().active_set(), r.report->node));
    EXPECT_FALSE(insert_spec()->member_correct(r.report->head));
  }
}

TEST(Snapshot, DocumentCarriesJudgmentsAndHistory) {
  auto s = buggy_session();
  NodeId q = *s->next_query();
  s->submit(q, JudgmentValue::kSymptom);
  s->revise(q, JudgmentValue::kNotSymptom);
  auto doc = nlohmann::json::parse(s->snapshot_json());
  EXPECT_EQ(doc["status"], "running");
  EXPECT_EQ(doc["judgments"].size(), 3u);
  EXPECT_EQ(doc["judgments"][2]["supersedes"], 2);
  std::string at = doc["judgments"][0]["at"];
  EXPECT_EQ(at.size(), 24u);
  EXPECT_EQ(at.back(), 'Z');
  bool seen = false;
  for (const auto& n : doc["nodes"])
    if (n["node_id"] == q) {
      seen = true;
      EXPECT_EQ(n["judgment"], "not-symptom");
      EXPECT_EQ(n["revisions"].size(), 2u);
    }
  EXPECT_TRUE(seen);
}

TEST(Snapshot, ReportDocument) {
  AutoResult r = auto_diagnose(program("isort_missing_base.pl"), insert_spec(), TreeKind::kIncompleteness,
                               atom("isort([1],L)"));
  ASSERT_TRUE(r.report);
  auto doc = nlohmann::json::parse(error_report_json(*r.report));
  EXPECT_EQ(doc["kind"], "uncovered-atom");
  EXPECT_EQ(doc["procedure"], "insert/3");
  EXPECT_EQ(doc["atom"], "insert(1,[],[1])");
  EXPECT_FALSE(doc["trail"].empty());
}

}  // namespace
}  // namespace lpdiag
