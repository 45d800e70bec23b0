// lpdiag: run logic programs, check them against approximate specifications,
// and diagnose wrong or missing answers.
//
// Exit codes: 0 success, 1 parse or usage error, 2 a resource limit was hit,
// 3 the computation floundered, 4 violations found, 5 diagnosis ended
// without a target.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "lpdiag/diagnosis.hpp"
#include "lpdiag/error.hpp"
#include "lpdiag/export.hpp"
#include "lpdiag/parser.hpp"
#include "lpdiag/service.hpp"
#include "lpdiag/unify.hpp"

namespace {

using namespace lpdiag;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitLimit = 2;
constexpr int kExitFloundered = 3;
constexpr int kExitViolations = 4;
constexpr int kExitNoTarget = 5;

struct Config {
  std::string program_path;
  std::string spec_path;
  std::string query;
  std::string answer;
  std::string mode = "coroutining";
  std::string kind = "incorrectness";
  std::string strategy = "top-down";
  std::string format = "text";
  std::string host = "127.0.0.1";
  std::uint64_t depth = 10000;
  std::int64_t time_ms = 2000;
  std::size_t answers = 256;
  bool occurs_check = true;
  bool auto_mode = false;
  bool trace = false;
  bool lenient = false;
  int port = 8080;
  int expand_depth = 1;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Limits limits_of(const Config& c) {
  Limits l{c.depth, c.time_ms, c.answers};
  l.validate();
  return l;
}

SolveMode mode_of(const Config& c) { return c.mode == "plain" ? SolveMode::kPlain : SolveMode::kCoroutining; }

std::shared_ptr<const Program> load_program(const Config& c) {
  return std::make_shared<const Program>(parse_program(read_file(c.program_path)));
}

std::shared_ptr<const ApproximateSpec> load_spec(const Config& c) {
  if (c.spec_path.empty()) return nullptr;
  return ApproximateSpec::load(read_file(c.spec_path));
}

Term single_goal(const std::string& text) {
  ParsedQuery q = parse_query(text);
  if (q.goals.size() != 1) throw Error(ErrorCode::kInvalidArgument, "expected a single atom, got '" + text + "'");
  return q.goals.front();
}

SessionOptions session_options(const Config& c) {
  SessionOptions o;
  o.strategy = parse_strategy(c.strategy);
  o.limits = limits_of(c);
  o.mode = mode_of(c);
  o.occurs_check = c.occurs_check;
  o.strict = !c.lenient;
  return o;
}

int status_exit(OutcomeStatus s) {
  switch (s) {
    case OutcomeStatus::kExhausted: return kExitOk;
    case OutcomeStatus::kFloundered: return kExitFloundered;
    default: return kExitLimit;
  }
}

// ---------------------------------------------------------------------------

int cmd_run(const Config& c) {
  auto prog = load_program(c);
  ParsedQuery q = parse_query(c.query);
  SolveOptions opts;
  opts.mode = mode_of(c);
  opts.limits = limits_of(c);
  opts.occurs_check = c.occurs_check;
  opts.record_trace = c.trace;
  Outcome o = solve(*prog, q.goals, opts);
  if (c.format == "json") {
    json out{{"status", status_name(o.status)}, {"steps", o.steps}};
    json answers = json::array();
    for (const PseudoAnswer& a : o.answers) {
      json bindings = json::object();
      for (const auto& [name, value] : answer_bindings(q.variables, q.goals, a.answer)) bindings[name] = to_string(value);
      json residual = json::array();
      for (const Term& r : a.residual) residual.push_back(to_string(r));
      answers.push_back(json{{"answer", format_goals(a.answer)},
                             {"bindings", bindings},
                             {"residual", residual},
                             {"flags", {{"i", a.flag_i}, {"ii", a.flag_ii}}}});
    }
    out["answers"] = answers;
    json errors = json::array();
    for (const EngineError& e : o.errors) errors.push_back(json{{"error", error_code_name(e.code)}, {"detail", e.message}});
    out["errors"] = errors;
    std::cout << out.dump(2) << '\n';
  } else {
    for (const PseudoAnswer& a : o.answers) {
      std::cout << format_answer(a) << '\n';
      auto bindings = answer_bindings(q.variables, q.goals, a.answer);
      for (std::size_t i = 0; i < bindings.size(); ++i)
        std::cout << (i ? ", " : "  ") << bindings[i].first << " = " << to_string(bindings[i].second)
                  << (i + 1 == bindings.size() ? "\n" : "");
    }
    if (o.answers.empty()) std::cout << "no answers\n";
    for (const EngineError& e : o.errors) std::cout << "error: " << e.message << '\n';
    std::cout << "status: " << status_name(o.status) << " (" << o.answers.size() << " answers, " << o.steps
              << " steps)\n";
    if (c.trace) std::cout << export_trace(o.trace);
  }
  return status_exit(o.status);
}

int cmd_check(const Config& c) {
  auto prog = load_program(c);
  auto spec = load_spec(c);
  Bounds b = spec->bounds();
  FixpointModel model = fixpoint_model(*prog, b);
  CheckResult wrong = check_correctness(model, *spec);
  CheckResult missing = check_completeness(*prog, model, *spec, b);
  if (c.format == "json") {
    auto strings = [](const std::vector<Term>& ts) {
      json a = json::array();
      for (const Term& t : ts) a.push_back(to_string(t));
      return a;
    };
    json out{{"correctness", {{"violations", strings(wrong.violations)}, {"truncated", wrong.truncated}}},
             {"completeness", {{"violations", strings(missing.violations)}, {"truncated", missing.truncated}}}};
    std::cout << out.dump(2) << '\n';
  } else {
    for (const Term& t : wrong.violations) std::cout << "correctness violation: " << to_string(t) << '\n';
    for (const Term& t : missing.violations) std::cout << "completeness violation: " << to_string(t) << '\n';
    if (wrong.truncated || missing.truncated) std::cout << "note: enumeration was truncated\n";
    if (wrong.violations.empty() && missing.violations.empty()) std::cout << "no violations\n";
  }
  return wrong.violations.empty() && missing.violations.empty() ? kExitOk : kExitViolations;
}

TreeKind kind_of(const Config& c) {
  if (c.kind == "incorrectness") return TreeKind::kIncorrectness;
  if (c.kind == "incompleteness") return TreeKind::kIncompleteness;
  throw Error(ErrorCode::kInvalidArgument, "kind must be incorrectness or incompleteness");
}

void print_report(const ErrorReport& r, const std::string& format) {
  if (format == "json")
    std::cout << json::parse(error_report_json(r)).dump(2) << '\n';
  else
    std::cout << r.describe() << '\n';
}

void print_node(const DiagnosisSession& s, NodeId id) {
  const DDNode& n = s.tree().node(id);
  std::cout << "  [" << id << "] " << to_string(n.atom);
  if (auto v = s.judgments().value(id)) std::cout << "  {" << judgment_value_name(*v) << "}";
  std::cout << '\n';
  if (s.kind() == TreeKind::kIncompleteness) {
    if (n.answers.empty()) std::cout << "      no answers\n";
    for (const PseudoAnswer& a : n.answers) std::cout << "      " << format_answer(a) << '\n';
    std::cout << "      status: " << status_name(n.status) << '\n';
  }
}

std::unique_ptr<DiagnosisSession> open_session(const Config& c, std::shared_ptr<const Program> prog,
                                               std::shared_ptr<const ApproximateSpec> spec) {
  SessionOptions o = session_options(c);
  Term root = single_goal(c.query);
  if (kind_of(c) == TreeKind::kIncompleteness) return start_incompleteness(prog, root, o, spec);
  SolveOptions so;
  so.mode = o.mode;
  so.limits = o.limits;
  so.occurs_check = o.occurs_check;
  so.record_trace = false;
  Outcome out = solve(*prog, {root}, so);
  if (c.answer.empty()) {
    std::cout << "answers of " << to_string(root) << ":\n";
    for (const PseudoAnswer& a : out.answers) std::cout << "  " << a.index + 1 << ". " << format_answer(a) << '\n';
    throw Error(ErrorCode::kInvalidArgument, "name the wrong answer with --answer");
  }
  return start_incorrectness(prog, out, single_goal(c.answer), o, spec);
}

const char* kHelp =
    "commands:\n"
    "  y | n                 judge the suggested node symptom / not-symptom\n"
    "  judge N y|n           judge node N\n"
    "  revise N y|n          replace the judgment of node N\n"
    "  assume N y|n          temporary judgment of node N\n"
    "  withdraw N            drop the assumption on node N\n"
    "  postpone [N]          ask about node N (default: the suggestion) later\n"
    "  show [N]              print node N and its children (default: root)\n"
    "  expand N | probe N    grow or upgrade a completeness node\n"
    "  strategy top-down|dq|free\n"
    "  tree | report | help | quit\n";

int interactive(DiagnosisSession& s, const std::string& format) {
  std::string line;
  std::optional<NodeId> suggested;
  auto prompt = [&] {
    SessionStatus st = s.status();
    if (st == SessionStatus::kTargetFound) return false;
    suggested = s.next_query();
    if (suggested) {
      std::cout << "? is this a symptom (y/n)?\n";
      print_node(s, *suggested);
    } else {
      std::cout << "status: " << session_status_name(st) << "; judge any node (help for commands)\n";
    }
    std::cout << "> " << std::flush;
    return true;
  };
  auto value = [](const std::string& v) { return parse_judgment_value(v == "y" ? "yes" : v == "n" ? "no" : v); };
  while (prompt() && std::getline(std::cin, line)) {
    std::istringstream in(line);
    std::string cmd;
    in >> cmd;
    try {
      if (cmd.empty()) continue;
      if (cmd == "quit" || cmd == "q") break;
      if (cmd == "help") {
        std::cout << kHelp;
      } else if (cmd == "y" || cmd == "n" || cmd == "yes" || cmd == "no") {
        if (!suggested) throw Error(ErrorCode::kInvalidArgument, "nothing suggested; use judge N");
        s.submit(*suggested, value(cmd));
      } else if (cmd == "judge" || cmd == "revise" || cmd == "assume") {
        NodeId n = 0;
        std::string v;
        if (!(in >> n >> v)) throw Error(ErrorCode::kInvalidArgument, "usage: " + cmd + " N y|n");
        if (cmd == "judge") s.submit(n, value(v));
        if (cmd == "revise") s.revise(n, value(v));
        if (cmd == "assume") s.assume(n, value(v));
      } else if (cmd == "withdraw") {
        NodeId n = 0;
        in >> n;
        s.withdraw(n);
      } else if (cmd == "postpone") {
        NodeId n = suggested.value_or(0);
        in >> n;
        s.postpone(n);
      } else if (cmd == "show") {
        NodeId n = s.tree().root();
        in >> n;
        print_node(s, n);
        for (NodeId k : s.tree().node(n).children) print_node(s, k);
      } else if (cmd == "expand") {
        NodeId n = 0;
        in >> n;
        for (NodeId k : s.expand(n)) print_node(s, k);
      } else if (cmd == "probe") {
        NodeId n = 0;
        in >> n;
        ProbeResult r = s.probe(n);
        std::cout << "probe step " << r.step << ": " << r.note << '\n';
        print_node(s, n);
      } else if (cmd == "strategy") {
        std::string name;
        in >> name;
        s.set_strategy(parse_strategy(name));
      } else if (cmd == "tree") {
        std::cout << export_text(s.tree());
      } else if (cmd == "report") {
        SearchState st = s.state();
        std::cout << "status: " << session_status_name(st.status) << ", suspect region " << st.suspect_region.size()
                  << " node(s)\n";
      } else {
        std::cout << "unknown command '" << cmd << "' (help lists commands)\n";
      }
    } catch (const Error& e) {
      std::cout << "error: " << e.detail() << '\n';
    }
  }
  if (s.status() == SessionStatus::kTargetFound) {
    std::cout << "target found\n";
    print_report(s.derive_error(), format);
    return kExitOk;
  }
  std::cout << "\nstatus: " << session_status_name(s.status()) << '\n';
  return kExitNoTarget;
}

int cmd_diagnose(const Config& c) {
  auto prog = load_program(c);
  auto spec = load_spec(c);
  if (!c.auto_mode) {
    auto s = open_session(c, prog, spec);
    return interactive(*s, c.format);
  }
  if (!spec) throw Error(ErrorCode::kInvalidArgument, "--auto needs --spec");
  AutoOptions o;
  o.session = session_options(c);
  if (!c.answer.empty()) o.answer = single_goal(c.answer);
  AutoResult r = auto_diagnose(prog, spec, kind_of(c), single_goal(c.query), o);
  if (r.report) {
    print_report(*r.report, c.format);
    if (c.format != "json") std::cout << "oracle queries: " << r.oracle_queries << ", probes: " << r.probes << '\n';
    return kExitOk;
  }
  if (c.format == "json")
    std::cout << json{{"status", session_status_name(r.status)}, {"detail", r.detail}}.dump(2) << '\n';
  else
    std::cout << "no target (" << session_status_name(r.status) << "): " << r.detail << '\n';
  return kExitNoTarget;
}

int cmd_export(const Config& c) {
  auto prog = load_program(c);
  ExportFormat f = parse_export_format(c.format);
  if (kind_of(c) == TreeKind::kIncorrectness && !c.answer.empty()) {
    SolveOptions so;
    so.mode = mode_of(c);
    so.limits = limits_of(c);
    so.occurs_check = c.occurs_check;
    so.record_trace = false;
    Term root = single_goal(c.query);
    Outcome o = solve(*prog, {root}, so);
    Term wanted = single_goal(c.answer);
    for (const PseudoAnswer& a : o.answers)
      if (is_variant(a.answer.front(), wanted)) {
        ProofTree t = extract_proof_tree(o, a);
        if (t.complete())
          std::cout << export_tree(build_incorrectness_tree(t, prog), f);
        else
          std::cout << export_tree(t, f);
        return kExitOk;
      }
    throw Error(ErrorCode::kAnswerNotFound, c.answer + " is not a computed answer");
  }
  Config lenient = c;
  lenient.lenient = true;
  lenient.kind = "incompleteness";
  SessionOptions o = session_options(lenient);
  DDTree tree = build_incompleteness_root(prog, single_goal(c.query), o.limits, o.mode, false, o.occurs_check);
  std::vector<NodeId> frontier{tree.root()};
  for (int d = 0; d < c.expand_depth; ++d) {
    std::vector<NodeId> next;
    for (NodeId n : frontier)
      for (NodeId k : tree.expand(n)) next.push_back(k);
    frontier = std::move(next);
  }
  std::cout << export_tree(tree, f);
  return kExitOk;
}

int cmd_serve(const Config& c) {
  SessionService service;
  HttpServer server(service);
  int port = server.bind(c.host, c.port);
  std::cout << "listening on http://" << c.host << ':' << port << std::endl;
  server.listen();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Declarative diagnosis workbench for logic programs"};
  app.require_subcommand(1);
  Config c;

  auto add_engine = [&](CLI::App* sub) {
    sub->add_option("--mode", c.mode, "plain or coroutining")->check(CLI::IsMember({"plain", "coroutining"}));
    sub->add_option("--depth", c.depth, "resolution steps per derivation")->check(CLI::PositiveNumber);
    sub->add_option("--time-ms", c.time_ms, "time limit in milliseconds")->check(CLI::PositiveNumber);
    sub->add_option("--answers", c.answers, "stop after this many answers")->check(CLI::PositiveNumber);
    sub->add_flag("--occurs-check,!--no-occurs-check", c.occurs_check, "unify with the occurs check (default on)");
  };
  auto add_program = [&](CLI::App* sub) {
    sub->add_option("--program", c.program_path, "program file")->required()->check(CLI::ExistingFile);
  };

  CLI::App* run = app.add_subcommand("run", "run a query and print its answers");
  add_program(run);
  run->add_option("--query", c.query, "query text")->required();
  run->add_option("--format", c.format)->check(CLI::IsMember({"text", "json"}));
  run->add_flag("--trace", c.trace, "print the execution trace");
  add_engine(run);

  CLI::App* check = app.add_subcommand("check", "compare a program with a specification");
  add_program(check);
  check->add_option("--spec", c.spec_path, "specification file")->required()->check(CLI::ExistingFile);
  check->add_option("--format", c.format)->check(CLI::IsMember({"text", "json"}));

  CLI::App* diagnose = app.add_subcommand("diagnose", "locate the error behind a wrong or missing answer");
  add_program(diagnose);
  diagnose->add_option("--spec", c.spec_path, "specification file (acts as oracle with --auto)")
      ->check(CLI::ExistingFile);
  diagnose->add_option("--query", c.query, "the query (incorrectness) or call (incompleteness)")->required();
  diagnose->add_option("--answer", c.answer, "the wrong answer (incorrectness)");
  diagnose->add_option("--kind", c.kind)->check(CLI::IsMember({"incorrectness", "incompleteness"}));
  diagnose->add_option("--strategy", c.strategy)->check(CLI::IsMember({"top-down", "dq", "free"}));
  diagnose->add_option("--format", c.format)->check(CLI::IsMember({"text", "json"}));
  diagnose->add_flag("--auto", c.auto_mode, "let the specification answer every query");
  diagnose->add_flag("--lenient", c.lenient, "accept symptoms on calls that hit a limit");
  add_engine(diagnose);

  CLI::App* serve = app.add_subcommand("serve", "serve diagnosis sessions over HTTP");
  serve->add_option("--host", c.host);
  serve->add_option("--port", c.port)->check(CLI::Range(0, 65535));

  CLI::App* exp = app.add_subcommand("export", "write a proof tree or DD tree");
  add_program(exp);
  exp->add_option("--query", c.query)->required();
  exp->add_option("--answer", c.answer, "answer whose proof tree to export");
  exp->add_option("--kind", c.kind)->check(CLI::IsMember({"incorrectness", "incompleteness"}));
  exp->add_option("--format", c.format)->check(CLI::IsMember({"text", "json", "graph", "dot"}));
  exp->add_option("--expand-depth", c.expand_depth, "levels of a completeness tree to expand")
      ->check(CLI::NonNegativeNumber);
  add_engine(exp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitParse;
  }

  try {
    if (*run) return cmd_run(c);
    if (*check) return cmd_check(c);
    if (*diagnose) return cmd_diagnose(c);
    if (*serve) return cmd_serve(c);
    if (*exp) return cmd_export(c);
  } catch (const Error& e) {
    std::cerr << "lpdiag: " << error_code_name(e.code()) << ": " << e.what() << '\n';
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "lpdiag: " << e.what() << '\n';
    return kExitParse;
  }
  return kExitParse;
}
