// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Thresholds are the constants below.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "lpdiag/diagnosis.hpp"
#include "lpdiag/fixpoint.hpp"
#include "lpdiag/parser.hpp"
#include "lpdiag/unify.hpp"

namespace {

using namespace lpdiag;
using Clock = std::chrono::steady_clock;

constexpr double kCaseStudySeconds = 1.0;
constexpr double kFixpointSeconds = 10.0;
constexpr double kCoroutiningSeconds = 1.0;
constexpr std::size_t kFixpointPrograms = 5;
constexpr Bounds kFixpointBounds{3, -8, 8};
constexpr std::size_t kMutants = 100;
constexpr std::uint32_t kMutationSeed = 1234;
constexpr std::size_t kChainLength = 64;
constexpr std::size_t kMaxDivideAndQueryJudgments = 7;

struct Line {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::string fixture_text(const std::string& name) {
  std::ifstream in(std::filesystem::path(LPDIAG_FIXTURE_DIR) / name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::shared_ptr<const Program> program(const std::string& name) {
  return std::make_shared<const Program>(parse_program(fixture_text(name)));
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt_seconds(double s) {
  std::ostringstream os;
  os.precision(3);
  os << std::fixed << s << " s";
  return os.str();
}

std::string set_string(const std::set<std::string>& s) {
  std::string out = "{";
  for (const std::string& x : s) out += (out.size() > 1 ? "," : "") + x;
  return out + "}";
}

// ---------------------------------------------------------------------------
// Case studies

Line buggy_isort() {
  Line l{"incorrectness case study (buggy insertion sort)"};
  auto t0 = Clock::now();
  auto prog = program("isort_buggy.pl");
  auto spec = ApproximateSpec::load(fixture_text("insert.spec"));
  Outcome out = solve(*prog, {parse_term("isort([2,1],L)")}, {});
  bool computed = std::any_of(out.answers.begin(), out.answers.end(), [](const PseudoAnswer& a) {
    return to_string(a.answer.front()) == "isort([2,1],[2,1])";
  });
  AutoResult r = auto_diagnose(prog, spec, TreeKind::kIncorrectness, parse_term("isort([2,1],L)"));
  double t = seconds_since(t0);
  if (!r.report) {
    l.detail = "no report: " + r.detail;
    return l;
  }
  const ErrorReport& e = *r.report;
  std::string body;
  for (const Term& b : e.body) body += (body.empty() ? "" : ", ") + to_string(b);
  bool insert_clause = PredicateKey::of(prog->clause(e.clause).head).str() == "insert/3";
  l.pass = computed && e.kind == ErrorReport::Kind::kIncorrectClauseInstance && insert_clause &&
           to_string(e.head) == "insert(2,[1],[2,1])" && body == "2>=1" && t < kCaseStudySeconds;
  l.detail = "answer computed=" + std::string(computed ? "yes" : "no") + ", report: " + e.describe() + ", " +
             fmt_seconds(t) + " (limit " + fmt_seconds(kCaseStudySeconds) + ")";
  return l;
}

Line missing_base() {
  Line l{"incompleteness case study (insert without base clause)"};
  auto t0 = Clock::now();
  auto prog = program("isort_missing_base.pl");
  auto spec = ApproximateSpec::load(fixture_text("insert.spec"));
  Outcome out = solve(*prog, {parse_term("isort([1],L)")}, {});
  AutoResult r = auto_diagnose(prog, spec, TreeKind::kIncompleteness, parse_term("isort([1],L)"));
  double t = seconds_since(t0);
  bool no_answers = out.status == OutcomeStatus::kExhausted && out.answers.empty();
  if (!r.report) {
    l.detail = "no report: " + r.detail;
    return l;
  }
  const ErrorReport& e = *r.report;
  l.pass = no_answers && e.kind == ErrorReport::Kind::kUncoveredAtom && e.pred.str() == "insert/3" && e.atom &&
           to_string(*e.atom) == "insert(1,[],[1])" && t < kCaseStudySeconds;
  l.detail = "query terminated with 0 answers=" + std::string(no_answers ? "yes" : "no") +
             ", report: " + e.describe() + ", " + fmt_seconds(t) + " (limit " + fmt_seconds(kCaseStudySeconds) + ")";
  return l;
}

// The spec with every correct_p replaced by complete_p, so S equals S0.
std::string collapse_to_s0(const std::string& spec_text, const std::vector<std::string>& preds) {
  std::istringstream in(spec_text);
  std::string out;
  std::string line;
  bool skipping = false;
  while (std::getline(in, line)) {
    if (line.rfind("correct_", 0) == 0) skipping = true;
    if (skipping) {
      skipping = line.find('.') == std::string::npos || line.back() != '.';
      continue;
    }
    out += line + "\n";
  }
  for (const std::string& p : preds) out += p;
  return out;
}

// (node, value) pairs answered by the oracle, in order.
std::vector<std::pair<NodeId, JudgmentValue>> oracle_answers(const AutoResult& r) {
  std::vector<std::pair<NodeId, JudgmentValue>> v;
  if (!r.session) return v;
  for (const Judgment& j : r.session->judgments().log())
    if (j.provenance == Provenance::kSpecOracle) v.emplace_back(j.node, j.value);
  return v;
}

Line intended_model_regression() {
  Line l{"intended-model regression (atom in S but not S0)"};
  std::string text = fixture_text("insert.spec");
  auto spec = ApproximateSpec::load(text);
  auto narrow = ApproximateSpec::load(collapse_to_s0(
      text, {"correct_insert(N, L1, L2) :- complete_insert(N, L1, L2).\n",
             "correct_isort(L1, L2) :- complete_isort(L1, L2).\n"}));
  auto prog = program("isort.pl");
  Term b = parse_term("insert(2,[3,1],[2,3,1])");
  Term call = parse_term("insert(2,[3,1],L)");

  bool in_gap = spec->member_correct(b) && !spec->member_complete(b);
  OracleVerdict c = judge_correctness(*spec, b, prog->signature());
  auto universe = spec->universe_for(prog->signature(), {call});
  RequiredSet req = spec->required_instances(call, universe);
  bool required = std::find(req.atoms.begin(), req.atoms.end(), b) != req.atoms.end();
  OracleVerdict m = judge_completeness(*spec, call, {}, OutcomeStatus::kExhausted, universe);

  // Oracle answers that do not depend on S minus S0 are unchanged when S
  // shrinks to S0.
  bool same = true;
  std::size_t queries = 0;
  auto compare = [&](const std::string& prog_name, TreeKind kind, const std::string& root) {
    AutoResult wide = auto_diagnose(program(prog_name), spec, kind, parse_term(root));
    AutoResult tight = auto_diagnose(program(prog_name), narrow, kind, parse_term(root));
    auto a = oracle_answers(wide);
    queries += a.size();
    same = same && wide.report && tight.report && a == oracle_answers(tight) &&
           wide.report->describe() == tight.report->describe();
    // No ground atom the oracle judged lies in the gap.
    if (wide.session)
      for (const auto& [node, value] : a) {
        const Term& atom = wide.session->tree().node(node).atom;
        if (atom.ground() && spec->member_correct(atom) && !spec->member_complete(atom)) same = false;
      }
  };
  compare("isort_buggy.pl", TreeKind::kIncorrectness, "isort([2,1],L)");
  compare("isort_missing_base.pl", TreeKind::kIncompleteness, "isort([1],L)");

  l.pass = in_gap && c.value == Verdict::kNotSymptom && !required && m.value != Verdict::kSymptom && same;
  l.detail = std::string("in S\\S0=") + (in_gap ? "yes" : "no") + ", correctness verdict " +
             std::string(verdict_name(c.value)) + ", required=" + (required ? "yes" : "no") +
             ", completeness verdict on insert(2,[3,1],L) " + std::string(verdict_name(m.value)) +
             ", case studies independent of S\\S0=" + (same ? "yes" : "no") + " (" + std::to_string(queries) +
             " oracle answers)";
  return l;
}

// ---------------------------------------------------------------------------
// Engine against the bounded least model

Line engine_vs_fixpoint() {
  Line l{"engine answers match the bounded fixpoint model"};
  struct Case {
    std::string file;
    std::vector<std::string> queries;
  };
  std::vector<Case> cases{
      {"app.pl", {"app(X,Y,[1,2])", "app([1],[2],Z)"}},
      {"family.pl", {"ancestor(tom,X)", "grandparent(X,Y)"}},
      {"isort.pl", {"isort([2,1],L)", "insert(1,[2],L)"}},
      {"len.pl", {"len([a,b],N)", "len([X],N)"}},
      {"member.pl", {"member(X,[a,b])", "member(X,[Y,Z])"}},
      {"plus.pl", {"plus(X,Y,s(s(0)))", "plus(s(0),s(0),Z)"}},
  };
  auto t0 = Clock::now();
  std::size_t programs = 0;
  std::size_t queries = 0;
  std::size_t atoms = 0;
  std::string mismatch;
  for (const Case& c : cases) {
    Program prog = parse_program(fixture_text(c.file));
    if (prog.has_blocks()) continue;
    ++programs;
    // One universe per program: its own symbols plus those of its queries.
    std::vector<Term> goals;
    for (const std::string& qs : c.queries) goals.push_back(parse_term(qs));
    FixpointOptions fo;
    fo.extra = signature_of_atoms(goals);
    FixpointModel model = fixpoint_model(prog, kFixpointBounds, fo);
    Signature sig = prog.signature();
    sig.merge(fo.extra);
    auto universe = std::make_shared<TermUniverse>(sig, kFixpointBounds);
    for (const Term& q : goals) {
      ++queries;
      std::string qs = to_string(q);
      Outcome out = solve(prog, {q}, {});
      std::set<std::string> engine;
      bool truncated = model.truncated() || out.status != OutcomeStatus::kExhausted;
      for (const PseudoAnswer& a : out.answers) {
        InstanceEnumerator it(a.answer.front(), universe, 1'000'000);
        while (auto g = it.next())
          if (within_bounds(*g, kFixpointBounds)) engine.insert(to_string(*g));
        truncated = truncated || it.truncated();
      }
      std::set<std::string> fix;
      for (const Term& t : model.instances_of(q)) fix.insert(to_string(t));
      atoms += fix.size();
      if (truncated || engine != fix || fix.empty())
        mismatch += " " + qs + (truncated ? " (truncated)" : "") + " engine=" + set_string(engine) +
                    " model=" + set_string(fix);
    }
  }
  double t = seconds_since(t0);
  l.pass = mismatch.empty() && programs >= kFixpointPrograms && t < kFixpointSeconds;
  l.detail = std::to_string(programs) + " programs, " + std::to_string(queries) + " queries, " +
             std::to_string(atoms) + " ground atoms, " + fmt_seconds(t) + " (limit " + fmt_seconds(kFixpointSeconds) +
             ")" + (mismatch.empty() ? "" : "; mismatches:" + mismatch);
  return l;
}

// ---------------------------------------------------------------------------
// Coroutining

Line coroutining() {
  Line l{"coroutining classification (case (i) and le)"};
  auto t0 = Clock::now();
  Program ci = parse_program(fixture_text("case_i.pl"));
  auto calls = top_level_calls(ci, parse_term("main(W)"), {}, SolveMode::kCoroutining);
  std::string sub_answer;
  bool flag_i = false;
  std::string generalized;
  for (const TopLevelCall& c : calls) {
    if (to_string(c.call) != "s(X,W)" || c.outcome.answers.empty()) continue;
    const PseudoAnswer& a = c.outcome.answers.front();
    sub_answer = format_goals(a.answer);
    flag_i = a.flag_i;
    generalized = to_string(generalize_pseudo_proof(extract_proof_tree(c.outcome, a), ci).root);
  }

  auto le = std::make_shared<const Program>(parse_program(fixture_text("le.pl")));
  SolveOptions co;
  co.mode = SolveMode::kCoroutining;
  Outcome o = solve(*le, {parse_term("p(X)")}, co);
  bool flag_ii = o.answers.size() == 1 && o.answers[0].flag_ii && o.answers[0].residual.size() == 1 &&
                 to_string(o.answers[0].residual[0]) == "le(X,s(0))";
  auto s = start_incompleteness(le, parse_term("p(X)"), {});
  ProbeOptions po;
  po.skip_plain = true;
  ProbeResult pr = s->probe(s->tree().root(), po);
  std::set<std::string> probed;
  for (const PseudoAnswer& a : s->tree().node(s->tree().root()).answers) probed.insert(format_goals(a.answer));
  double t = seconds_since(t0);

  l.pass = sub_answer == "s(a,done)" && flag_i && generalized == "s(a,W)" && flag_ii && pr.step == 3 &&
           probed == std::set<std::string>{"p(0)", "p(s(0))"} && t < kCoroutiningSeconds;
  l.detail = "s(X,W) -> " + sub_answer + (flag_i ? " [i]" : "") + ", generalized " + generalized +
             "; p(X) flag ii with residual=" + (flag_ii ? "yes" : "no") + ", probe step " +
             std::to_string(pr.step) + " -> " + set_string(probed) + ", " + fmt_seconds(t);
  return l;
}

// ---------------------------------------------------------------------------
// Mutation study

const std::set<std::string> kComparisons{"=<", "<", ">=", ">", "=:=", "=\\="};

// Every copy of `t` with exactly one subterm replaced by an element of f(subterm).
void one_point(const Term& t, const std::function<std::vector<Term>(const Term&)>& f, std::vector<Term>& out) {
  for (const Term& r : f(t)) out.push_back(r);
  if (!t.is_compound()) return;
  auto args = t.args();
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::vector<Term> sub;
    one_point(args[i], f, sub);
    for (const Term& s : sub) {
      std::vector<Term> copy(args.begin(), args.end());
      copy[i] = s;
      out.push_back(Term::compound(t.name(), copy));
    }
  }
}

void collect_vars(const Term& t, std::vector<Term>& vars) {
  if (t.is_var()) {
    if (std::find(vars.begin(), vars.end(), t) == vars.end()) vars.push_back(t);
  } else if (t.is_compound()) {
    for (const Term& a : t.args()) collect_vars(a, vars);
  }
}

void collect_constants(const Term& t, std::set<std::string>& names) {
  if (t.is_atom())
    names.insert(std::string(t.name().str()));
  else if (t.is_compound())
    for (const Term& a : t.args()) collect_constants(a, names);
}

std::string program_text(const std::vector<Clause>& clauses) {
  std::string s;
  for (const Clause& c : clauses) s += to_string(c) + "\n";
  return s;
}

// Single-clause mutants: clause or body-goal deletion, flipped comparisons,
// shifted integers, swapped head arguments, and one variable or constant
// occurrence replaced by another of the same clause or program.
std::vector<std::string> mutants(const Program& prog) {
  std::set<std::string> constants;
  for (const Clause& c : prog.clauses()) {
    for (const Term& a : c.head.args()) collect_constants(a, constants);
    for (const Term& b : c.body)
      for (const Term& a : b.args()) collect_constants(a, constants);
  }
  std::string original = program_text(prog.clauses());
  std::set<std::string> seen{original};
  std::vector<std::string> out;
  auto emit = [&](std::vector<Clause> clauses) {
    std::string text = program_text(clauses);
    if (seen.insert(text).second) out.push_back(text);
  };
  const auto& cls = prog.clauses();
  for (std::size_t i = 0; i < cls.size(); ++i) {
    const Clause& c = cls[i];
    auto with = [&](Clause replacement) {
      std::vector<Clause> v = cls;
      v[i] = std::move(replacement);
      emit(std::move(v));
    };
    std::vector<Clause> dropped = cls;
    dropped.erase(dropped.begin() + static_cast<std::ptrdiff_t>(i));
    emit(dropped);
    for (std::size_t g = 0; g < c.body.size(); ++g) {
      Clause d = c;
      d.body.erase(d.body.begin() + static_cast<std::ptrdiff_t>(g));
      with(d);
    }
    std::vector<Term> vars;
    collect_vars(c.head, vars);
    for (const Term& b : c.body) collect_vars(b, vars);
    auto point = [&](const Term& t) {
      std::vector<Term> r;
      if (t.is_compound() && t.arity() == 2 && kComparisons.contains(std::string(t.name().str())))
        for (const std::string& op : kComparisons)
          if (op != t.name().str()) r.push_back(Term::compound(op, {t.args()[0], t.args()[1]}));
      if (t.is_int()) {
        r.push_back(Term::integer(t.int_value() + 1));
        r.push_back(Term::integer(t.int_value() - 1));
      }
      if (t.is_var())
        for (const Term& v : vars)
          if (!(v == t)) r.push_back(v);
      if (t.is_atom())
        for (const std::string& k : constants)
          if (k != t.name().str()) r.push_back(Term::atom(k));
      return r;
    };
    auto mutate_args = [&](const Term& atom) {
      // Mutate below the predicate symbol, or the whole goal for comparisons.
      std::vector<Term> r;
      if (is_builtin_atom(atom)) {
        one_point(atom, point, r);
        return r;
      }
      for (std::size_t k = 0; k < atom.arity(); ++k) {
        std::vector<Term> sub;
        one_point(atom.args()[k], point, sub);
        for (const Term& s : sub) {
          std::vector<Term> copy(atom.args().begin(), atom.args().end());
          copy[k] = s;
          r.push_back(Term::compound(atom.name(), copy));
        }
      }
      return r;
    };
    for (const Term& h : mutate_args(c.head)) {
      Clause d = c;
      d.head = h;
      with(d);
    }
    for (std::size_t g = 0; g < c.body.size(); ++g)
      for (const Term& b : mutate_args(c.body[g])) {
        Clause d = c;
        d.body[g] = b;
        with(d);
      }
    for (std::size_t a = 0; a < c.head.arity(); ++a)
      for (std::size_t b = a + 1; b < c.head.arity(); ++b) {
        std::vector<Term> args(c.head.args().begin(), c.head.args().end());
        std::swap(args[a], args[b]);
        Clause d = c;
        d.head = Term::compound(c.head.name(), args);
        with(d);
      }
  }
  return out;
}

struct Subject {
  std::string program;
  std::string spec;
  std::string bounds;  // replaces the spec's bounds line when not empty
};

std::string soundness_problem(const Program& prog, const ApproximateSpec& spec, const ErrorReport& e) {
  if (e.kind == ErrorReport::Kind::kIncorrectClauseInstance) {
    const Clause& c = prog.clause(e.clause);
    if (c.body.size() != e.body.size()) return "body length differs from clause";
    std::vector<Term> inst_args{e.head};
    std::vector<Term> clause_args{c.head};
    inst_args.insert(inst_args.end(), e.body.begin(), e.body.end());
    clause_args.insert(clause_args.end(), c.body.begin(), c.body.end());
    if (!is_instance_of(Term::compound("cl", inst_args), Term::compound("cl", clause_args)))
      return "not an instance of the clause";
    // A non-ground atom is in S when all its instances within bounds are.
    auto in_s = [&](const Term& a) {
      if (a.ground()) return spec.member_correct(a);
      return judge_correctness(spec, a, prog.signature()).value == Verdict::kNotSymptom;
    };
    bool head_outside = e.head.ground()
                            ? !spec.member_correct(e.head)
                            : judge_correctness(spec, e.head, prog.signature()).value == Verdict::kSymptom;
    if (!head_outside) return "head " + to_string(e.head) + " is not shown outside S";
    for (const Term& b : e.body) {
      if (is_builtin_atom(b)) {
        if (eval_builtin(b).status != BuiltinStatus::kSuccess) return "builtin " + to_string(b) + " is false";
      } else if (!in_s(b)) {
        return "body atom " + to_string(b) + " is not in S";
      }
    }
    return "";
  }
  if (!e.atom) return "uncovered atom missing";
  if (!is_instance_of(*e.atom, e.call)) return "atom is not an instance of the call";
  if (!spec.member_complete(*e.atom)) return to_string(*e.atom) + " is not in S0";
  CoverageResult cov = find_covering_instance(prog, spec, *e.atom, spec.universe_for(prog.signature(), {*e.atom}));
  if (cov.value == Coverage::kCovered) return "covered by clause " + std::to_string(cov.clause);
  if (cov.value == Coverage::kUndecided) return "coverage undecided";
  return "";
}

Line mutation_study() {
  Line l{"target existence over randomized mutations"};
  std::vector<Subject> subjects{{"isort.pl", "insert.spec", "depth=3 int=[-2,2]"},
                                {"app.pl", "app.spec", ""},
                                {"plus.pl", "plus.spec", ""},
                                {"len.pl", "len.spec", ""},
                                {"member.pl", "member.spec", ""}};
  struct Candidate {
    std::size_t subject;
    std::string text;
  };
  std::vector<Candidate> pool;
  std::vector<std::shared_ptr<const ApproximateSpec>> specs;
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    std::string text = fixture_text(subjects[i].spec);
    if (!subjects[i].bounds.empty())
      text = std::regex_replace(text, std::regex("%% bounds [^\n]*"), "%% bounds " + subjects[i].bounds);
    specs.push_back(ApproximateSpec::load(text));
    for (std::string& m : mutants(parse_program(fixture_text(subjects[i].program))))
      pool.push_back({i, std::move(m)});
  }
  std::mt19937 rng(kMutationSeed);
  std::shuffle(pool.begin(), pool.end(), rng);

  auto t0 = Clock::now();
  std::size_t used = 0;
  std::size_t undetected = 0;
  std::size_t incorrect = 0;
  std::size_t incomplete = 0;
  std::vector<std::string> failures;
  SolveOptions run;
  run.limits = Limits{10000, 500, 1};
  for (const Candidate& cand : pool) {
    if (used == kMutants) break;
    const auto& spec = specs[cand.subject];
    std::shared_ptr<const Program> prog;
    try {
      prog = std::make_shared<const Program>(parse_program(cand.text));
    } catch (const Error&) {
      continue;
    }
    // A symptom the spec detects and the engine exhibits: a computed answer
    // outside S, or a terminating call missing an atom of S0.
    std::optional<std::pair<TreeKind, Term>> root;
    try {
      FixpointModel model = fixpoint_model(*prog, spec->bounds());
      CheckResult wrong = check_correctness(model, *spec);
      for (std::size_t k = 0; k < wrong.violations.size() && k < 20 && !root; ++k) {
        Outcome o = solve(*prog, {wrong.violations[k]}, run);
        if (!o.answers.empty()) root = {TreeKind::kIncorrectness, wrong.violations[k]};
      }
      if (!root) {
        CheckResult missing = check_completeness(*prog, model, *spec, spec->bounds());
        for (std::size_t k = 0; k < missing.violations.size() && k < 20 && !root; ++k) {
          Outcome o = solve(*prog, {missing.violations[k]}, run);
          if (o.status == OutcomeStatus::kExhausted && o.answers.empty())
            root = {TreeKind::kIncompleteness, missing.violations[k]};
        }
      }
    } catch (const Error&) {
      root.reset();
    }
    if (!root) {
      ++undetected;
      continue;
    }
    ++used;
    (root->first == TreeKind::kIncorrectness ? incorrect : incomplete)++;
    std::string clauses = cand.text;
    std::replace(clauses.begin(), clauses.end(), '\n', ' ');
    std::string where = subjects[cand.subject].program + " mutant [" + clauses + "], root " + to_string(root->second);
    try {
      AutoOptions o;
      if (root->first == TreeKind::kIncorrectness) o.answer = root->second;
      AutoResult r = auto_diagnose(prog, spec, root->first, root->second, o);
      if (!r.report) {
        failures.push_back(where + ": no report (" + std::string(session_status_name(r.status)) + ": " + r.detail +
                           ")");
        continue;
      }
      std::string problem = soundness_problem(*prog, *spec, *r.report);
      if (!problem.empty()) failures.push_back(where + ": " + r.report->describe() + ": " + problem);
    } catch (const Error& e) {
      failures.push_back(where + ": " + std::string(error_code_name(e.code())) + ": " + e.detail());
    }
  }
  double t = seconds_since(t0);
  l.pass = used == kMutants && failures.empty();
  l.detail = std::to_string(used) + " mutants with symptoms (" + std::to_string(incorrect) + " wrong answer, " +
             std::to_string(incomplete) + " missing answer) from a pool of " + std::to_string(pool.size()) + ", " +
             std::to_string(undetected) + " skipped without symptom, " + std::to_string(failures.size()) +
             " violations, " + fmt_seconds(t);
  for (std::size_t i = 0; i < failures.size() && i < 10; ++i) l.detail += "\n    " + failures[i];
  return l;
}

// ---------------------------------------------------------------------------
// Search on a chain

// c(s^n(0)) proved by n+1 uses of the same two clauses: a chain of n+1 nodes.
std::unique_ptr<DiagnosisSession> chain_session(std::size_t nodes, Strategy strategy) {
  auto p = std::make_shared<const Program>(parse_program("c(s(X)) :- c(X). c(0)."));
  Term t = Term::integer(0);
  for (std::size_t i = 1; i < nodes; ++i) t = Term::compound("s", {t});
  SessionOptions o;
  o.strategy = strategy;
  Term goal = Term::compound("c", {t});
  return start_incorrectness(p, goal, goal, o);
}

// Oracle for a single planted error at `planted`: the nodes on the path to it
// are symptoms.
std::size_t judgments_until_target(Strategy strategy, NodeId planted, bool* found) {
  auto s = chain_session(kChainLength, strategy);
  std::size_t n = 0;
  while (auto q = s->next_query()) {
    s->submit(*q, *q <= planted ? JudgmentValue::kSymptom : JudgmentValue::kNotSymptom);
    ++n;
  }
  *found = s->state().target == planted;
  return n;
}

Line divide_and_query() {
  Line l{"divide-and-query on a 64-node chain"};
  std::size_t worst_dq = 0;
  std::size_t worst_td = 0;
  bool all_found = chain_session(kChainLength, Strategy::kTopDown)->tree().size() == kChainLength;
  for (NodeId planted = 1; planted <= kChainLength; ++planted) {
    bool found = false;
    worst_dq = std::max(worst_dq, judgments_until_target(Strategy::kDivideAndQuery, planted, &found));
    all_found = all_found && found;
    worst_td = std::max(worst_td, judgments_until_target(Strategy::kTopDown, planted, &found));
    all_found = all_found && found;
  }
  l.pass = all_found && worst_dq <= kMaxDivideAndQueryJudgments && worst_td < kChainLength;
  l.detail = "worst case over all 64 planted positions: divide-and-query " + std::to_string(worst_dq) +
             " judgments (limit " + std::to_string(kMaxDivideAndQueryJudgments) + "), top-down " +
             std::to_string(worst_td) + "; every target found=" + (all_found ? "yes" : "no");
  return l;
}

Line revision_semantics() {
  Line l{"revision script agrees with recomputation"};
  enum class Op { kSubmit, kRevise, kAssume, kWithdraw };
  constexpr auto S = JudgmentValue::kSymptom;
  constexpr auto N = JudgmentValue::kNotSymptom;
  struct Step {
    Op op;
    NodeId node;
    JudgmentValue value;
  };
  const std::vector<Step> script{
      {Op::kSubmit, 33, S},   {Op::kSubmit, 49, N}, {Op::kSubmit, 41, N}, {Op::kSubmit, 37, S},
      {Op::kRevise, 41, S},   {Op::kAssume, 45, N}, {Op::kSubmit, 39, S}, {Op::kWithdraw, 45, N},
      {Op::kRevise, 49, S},   {Op::kSubmit, 57, N}, {Op::kAssume, 53, S}, {Op::kRevise, 37, N},
      {Op::kWithdraw, 53, N}, {Op::kSubmit, 35, S}, {Op::kRevise, 39, N}, {Op::kAssume, 36, S},
      {Op::kSubmit, 60, N},   {Op::kWithdraw, 36, N}, {Op::kRevise, 57, S}, {Op::kSubmit, 61, N},
  };
  std::size_t revisions = 0;
  std::size_t pairs = 0;
  for (const Step& st : script) {
    revisions += st.op == Op::kRevise;
    pairs += st.op == Op::kWithdraw;
  }
  auto s = chain_session(kChainLength, Strategy::kDivideAndQuery);
  bool ok = true;
  std::string problem;
  std::size_t step = 0;
  for (const Step& st : script) {
    ++step;
    try {
      switch (st.op) {
        case Op::kSubmit: s->submit(st.node, st.value); break;
        case Op::kRevise: s->revise(st.node, st.value); break;
        case Op::kAssume: s->assume(st.node, st.value); break;
        case Op::kWithdraw: s->withdraw(st.node); break;
      }
    } catch (const Error& e) {
      ok = false;
      problem = "step " + std::to_string(step) + " raised " + std::string(error_code_name(e.code()));
      break;
    }
    SearchState now = s->state();
    SearchState fresh = compute_search_state(s->tree(), s->judgments().active_set());
    if (now.status != fresh.status || now.target != fresh.target || now.suspect_region != fresh.suspect_region) {
      ok = false;
      problem = "state differs from recomputation after step " + std::to_string(step);
      break;
    }
  }
  // A new session given only the final active judgments reaches the same state.
  auto replay = chain_session(kChainLength, Strategy::kDivideAndQuery);
  for (const auto& [node, value] : s->judgments().active_set())
    if (!replay->judgments().active(node)) replay->submit(node, value);
  SearchState a = s->state();
  SearchState b = replay->state();
  bool same = a.status == b.status && a.target == b.target && a.suspect_region == b.suspect_region;
  l.pass = ok && same && script.size() == 20 && revisions == 5 && pairs == 3;
  l.detail = std::to_string(script.size()) + " judgments, " + std::to_string(revisions) + " revisions, " +
             std::to_string(pairs) + " assume/withdraw pairs; final status " +
             std::string(session_status_name(a.status)) +
             (a.target ? ", target " + std::to_string(*a.target) : "") + "; replay identical=" +
             (same ? "yes" : "no") + (problem.empty() ? "" : "; " + problem);
  return l;
}

}  // namespace

// With arguments, runs only the criteria with those 1-based positions.
int main(int argc, char** argv) {
  std::vector<std::function<Line()>> criteria{buggy_isort,   missing_base,  intended_model_regression,
                                              engine_vs_fixpoint, coroutining, mutation_study,
                                              divide_and_query,   revision_semantics};
  std::set<std::size_t> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoul(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.contains(i + 1)) continue;
    const auto& run = criteria[i];
    Line l;
    try {
      l = run();
    } catch (const std::exception& e) {
      l.detail = std::string("exception: ") + e.what();
    }
    std::cout << (l.pass ? "PASS " : "FAIL ") << l.name << ": " << l.detail << std::endl;
    failed += !l.pass;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
