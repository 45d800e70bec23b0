#include "lpdiag/specs.hpp"

#include <algorithm>
#include <random>
#include <regex>
#include <sstream>
#include <unordered_set>

#include "lpdiag/error.hpp"
#include "lpdiag/parser.hpp"
#include "lpdiag/unify.hpp"

namespace lpdiag {

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kNotSymptom:
      return "not-symptom";
    case Verdict::kSymptom:
      return "symptom";
    case Verdict::kUnknown:
      break;
  }
  return "unknown";
}

namespace {

Term with_functor(const std::string& name, const Term& atom) {
  std::vector<Term> args(atom.args().begin(), atom.args().end());
  return Term::compound(Symbol(name), std::move(args));
}

Term most_general(const PredicateKey& pred) {
  std::vector<Term> args;
  for (std::uint32_t i = 0; i < pred.arity; ++i) args.push_back(Term::fresh_variable());
  return Term::compound(pred.name, std::move(args));
}

PredicateKey parse_indicator(const std::string& text) {
  auto slash = text.rfind('/');
  if (slash == std::string::npos || slash == 0)
    throw Error(ErrorCode::kSyntax, "expected name/arity in spec directive, got '" + text + "'");
  int arity = 0;
  try {
    arity = std::stoi(text.substr(slash + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::kSyntax, "bad arity in '" + text + "'");
  }
  if (arity < 0) throw Error(ErrorCode::kSyntax, "bad arity in '" + text + "'");
  return PredicateKey{Symbol(text.substr(0, slash)), static_cast<std::uint32_t>(arity)};
}

}  // namespace

std::shared_ptr<const ApproximateSpec> ApproximateSpec::load(std::string_view text, SpecOptions options) {
  std::shared_ptr<ApproximateSpec> spec(new ApproximateSpec());
  spec->options_ = options;
  spec->checker_ = parse_program(text);

  static const std::regex spec_re(R"(^\s*%%\s*spec\s+for\s+(.+?)\s*$)");
  static const std::regex bounds_re(R"(^\s*%%\s*bounds\b(.*)$)");
  static const std::regex depth_re(R"(depth\s*=\s*(\d+))");
  static const std::regex int_re(R"(int\s*=\s*\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\])");
  std::vector<PredicateKey> declared;
  std::istringstream lines{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    std::smatch m;
    if (std::regex_match(line, m, spec_re)) {
      std::string list = m[1];
      std::replace(list.begin(), list.end(), ',', ' ');
      std::istringstream items(list);
      std::string item;
      while (items >> item) declared.push_back(parse_indicator(item));
    } else if (std::regex_match(line, m, bounds_re)) {
      std::string rest = m[1];
      std::smatch v;
      if (std::regex_search(rest, v, depth_re)) spec->bounds_.depth = static_cast<std::uint32_t>(std::stoul(v[1]));
      if (std::regex_search(rest, v, int_re)) {
        spec->bounds_.int_lo = std::stoll(v[1]);
        spec->bounds_.int_hi = std::stoll(v[2]);
      }
      if (spec->bounds_.depth == 0 || spec->bounds_.int_lo > spec->bounds_.int_hi)
        throw Error(ErrorCode::kSyntax, "invalid bounds directive", SourcePos{lineno, 1});
    }
  }

  auto add_entry = [&](const PredicateKey& p) {
    if (spec->entry(p)) return;
    SpecEntry e{p, false, false};
    e.has_correct = spec->checker_.defines(PredicateKey{Symbol("correct_" + p.name.str()), p.arity});
    e.has_complete = spec->checker_.defines(PredicateKey{Symbol("complete_" + p.name.str()), p.arity});
    spec->entries_.push_back(e);
  };
  for (const PredicateKey& p : declared) add_entry(p);
  for (const PredicateKey& k : spec->checker_.predicates()) {
    const std::string& n = k.name.str();
    for (std::string_view prefix : {"correct_", "complete_"})
      if (n.size() > prefix.size() && n.compare(0, prefix.size(), prefix) == 0)
        add_entry(PredicateKey{Symbol(n.substr(prefix.size())), k.arity});
  }
  if (options.check_well_formedness) spec->check_well_formedness();
  return spec;
}

const SpecEntry* ApproximateSpec::entry(const PredicateKey& pred) const {
  for (const SpecEntry& e : entries_)
    if (e.pred == pred) return &e;
  return nullptr;
}

bool ApproximateSpec::run_checker(const std::string& prefix, const Term& atom) const {
  SolveOptions opts;
  opts.mode = SolveMode::kPlain;
  opts.limits = options_.checker_limits;
  opts.record_trace = false;
  Term goal = with_functor(prefix + atom.name().str(), atom);
  Outcome out = solve(checker_, {goal}, opts);
  if (!out.answers.empty()) return true;
  if (!out.errors.empty())
    throw Error(ErrorCode::kSpecDivergence,
                "checker " + to_string(goal) + " raised " + out.errors.front().message);
  if (out.status != OutcomeStatus::kExhausted)
    throw Error(ErrorCode::kSpecDivergence,
                "checker " + to_string(goal) + " stopped with " + std::string(status_name(out.status)));
  return false;
}

bool ApproximateSpec::member_correct(const Term& a) const {
  if (!a.ground()) throw Error(ErrorCode::kInvalidArgument, "membership needs a ground atom");
  const SpecEntry* e = entry(PredicateKey::of(a));
  if (!e || !e->has_correct) return true;
  {
    std::lock_guard lock(memo_mutex_);
    if (auto it = correct_memo_.find(a); it != correct_memo_.end()) return it->second;
  }
  bool v = run_checker("correct_", a);
  std::lock_guard lock(memo_mutex_);
  correct_memo_.emplace(a, v);
  return v;
}

bool ApproximateSpec::member_complete(const Term& a) const {
  if (!a.ground()) throw Error(ErrorCode::kInvalidArgument, "membership needs a ground atom");
  const SpecEntry* e = entry(PredicateKey::of(a));
  if (!e || !e->has_complete) return false;
  {
    std::lock_guard lock(memo_mutex_);
    if (auto it = complete_memo_.find(a); it != complete_memo_.end()) return it->second;
  }
  bool v = run_checker("complete_", a);
  std::lock_guard lock(memo_mutex_);
  complete_memo_.emplace(a, v);
  return v;
}

std::shared_ptr<TermUniverse> ApproximateSpec::universe_for(const Signature& program_signature,
                                                            const std::vector<Term>& extra) const {
  Signature s = program_signature;
  s.merge(checker_.signature());
  if (!extra.empty()) s.merge(signature_of_atoms(extra));
  return std::make_shared<TermUniverse>(std::move(s), bounds_);
}

RequiredSet ApproximateSpec::required_instances(const Term& call,
                                                std::shared_ptr<TermUniverse> universe) const {
  RequiredSet out;
  const SpecEntry* e = entry(PredicateKey::of(call));
  if (!e || !e->has_complete) return out;
  const Bounds& b = universe->bounds();
  std::unordered_set<Term, TermHash> seen;
  auto keep = [&](const Term& a) {
    if (within_bounds(a, b) && seen.insert(a).second) out.atoms.push_back(a);
  };

  // The checker itself enumerates S0 when its builtins range over the universe.
  SolveOptions opts;
  opts.mode = SolveMode::kPlain;
  opts.limits = options_.generator_limits;
  opts.record_trace = false;
  opts.generation = GenerationBounds{universe};
  Outcome gen = solve(checker_, {with_functor("complete_" + call.name().str(), call)}, opts);
  bool exhaustive = gen.status == OutcomeStatus::kExhausted && gen.errors.empty();
  for (const PseudoAnswer& pa : gen.answers) {
    Term a = with_functor(call.name().str(), pa.answer.front());
    if (a.ground()) {
      keep(a);
      continue;
    }
    InstanceEnumerator it(a, universe, options_.enumeration_cap);
    while (auto g = it.next()) keep(*g);
    if (it.truncated()) exhaustive = false;
  }

  if (!exhaustive) {
    // Fall back to testing the call's instances one by one.
    InstanceEnumerator it(call, universe, options_.enumeration_cap);
    while (auto g = it.next())
      if (within_bounds(*g, b) && !seen.contains(*g) && member_complete(*g)) keep(*g);
    exhaustive = it.exhausted();
  }
  out.exhaustive = exhaustive;
  std::sort(out.atoms.begin(), out.atoms.end(), enumeration_less);
  return out;
}

void ApproximateSpec::check_well_formedness() const {
  // A sample, so a shallower slice than the oracle bounds keeps loading fast.
  Bounds sample_bounds = bounds_;
  sample_bounds.depth = std::min<std::uint32_t>(sample_bounds.depth, 3);
  auto universe = std::make_shared<TermUniverse>(checker_.signature(), sample_bounds);
  auto violation = [](const Term& a) {
    return Error(ErrorCode::kWellFormednessViolation,
                 to_string(a) + " is required (complete) but not allowed (correct)");
  };
  std::mt19937_64 rng(options_.seed);
  for (const SpecEntry& e : entries_) {
    if (!e.has_complete || !e.has_correct) continue;
    Term pattern = most_general(e.pred);
    for (const Term& a : required_instances(pattern, universe).atoms)
      if (!member_correct(a)) throw violation(a);

    // Atoms in enumeration order, then random ones from a shallow level.
    InstanceEnumerator it(pattern, universe, options_.sample_size);
    while (auto a = it.next())
      if (member_complete(*a) && !member_correct(*a)) throw violation(*a);
    const std::vector<Term>* pool = nullptr;
    for (std::uint32_t d = sample_bounds.depth; d >= 1 && !pool; --d)
      pool = universe->up_to(d);
    if (!pool || pool->empty() || e.pred.arity == 0) continue;
    std::uniform_int_distribution<std::size_t> pick(0, pool->size() - 1);
    for (std::size_t s = 0; s < options_.sample_size; ++s) {
      std::vector<Term> args;
      for (std::uint32_t i = 0; i < e.pred.arity; ++i) args.push_back((*pool)[pick(rng)]);
      Term a = Term::compound(e.pred.name, std::move(args));
      if (member_complete(a) && !member_correct(a)) throw violation(a);
    }
  }
}

OracleVerdict judge_correctness(const ApproximateSpec& spec, const Term& atom,
                                std::shared_ptr<TermUniverse> universe) {
  OracleVerdict v;
  const SpecEntry* e = spec.entry(PredicateKey::of(atom));
  if (!e || !e->has_correct) {
    v.value = Verdict::kNotSymptom;
    v.reason = "no correctness specification for " + PredicateKey::of(atom).str();
    return v;
  }
  if (atom.ground()) {
    bool in = spec.member_correct(atom);
    v.value = in ? Verdict::kNotSymptom : Verdict::kSymptom;
    if (!in) v.witness = atom;
    v.reason = in ? "in S" : "not in S";
    return v;
  }
  for (const auto& [var, lim] : variable_depth_limits(atom, universe->bounds().depth)) {
    if (lim == 0) {
      v.confidence = Confidence::kTruncated;
      v.reason = "no instance fits the depth bound";
      return v;
    }
  }
  InstanceEnumerator it(atom, universe, spec.options().enumeration_cap);
  while (auto g = it.next()) {
    if (!spec.member_correct(*g)) {
      v.value = Verdict::kSymptom;
      v.witness = *g;
      v.reason = "instance " + to_string(*g) + " not in S";
      return v;
    }
  }
  if (it.truncated()) {
    v.confidence = Confidence::kTruncated;
    v.reason = "instance enumeration truncated";
    return v;
  }
  v.value = Verdict::kNotSymptom;
  v.reason = "all " + std::to_string(it.produced()) + " instances within bounds are in S";
  return v;
}

OracleVerdict judge_correctness(const ApproximateSpec& spec, const Term& atom,
                                const Signature& program_signature) {
  return judge_correctness(spec, atom, spec.universe_for(program_signature, {atom}));
}

OracleVerdict judge_completeness(const ApproximateSpec& spec, const Term& call,
                                 const std::vector<PseudoAnswer>& answers, OutcomeStatus status,
                                 std::shared_ptr<TermUniverse> universe) {
  OracleVerdict v;
  RequiredSet req = spec.required_instances(call, universe);
  bool any_i = std::any_of(answers.begin(), answers.end(), [](const PseudoAnswer& a) { return a.flag_i; });
  bool terminated = status == OutcomeStatus::kExhausted || status == OutcomeStatus::kFloundered;
  std::optional<Term> uncovered;
  bool all_covered_by_sure = true;
  for (const Term& r : req.atoms) {
    bool covered = false;
    bool covered_sure = false;
    for (const PseudoAnswer& a : answers) {
      if (!is_instance_of(r, a.answer.front())) continue;
      covered = true;
      if (!a.flag_ii) covered_sure = true;
    }
    if (!covered && !uncovered) uncovered = r;
    if (!covered_sure) all_covered_by_sure = false;
  }
  if (uncovered) {
    v.witness = uncovered;
    if (!any_i && terminated) {
      v.value = Verdict::kSymptom;
      v.reason = "required " + to_string(*uncovered) + " is not an instance of any answer";
    } else {
      v.reason = any_i ? "required " + to_string(*uncovered) + " missing, but an answer may be too specific (i)"
                       : "required " + to_string(*uncovered) + " missing, but the call did not terminate";
    }
    return v;
  }
  if (!req.exhaustive) {
    v.confidence = Confidence::kTruncated;
    v.reason = "required instances could not be enumerated completely";
    return v;
  }
  if (all_covered_by_sure) {
    v.value = Verdict::kNotSymptom;
    v.reason = req.atoms.empty() ? "no required instances"
                                 : "all " + std::to_string(req.atoms.size()) + " required instances produced";
    return v;
  }
  v.reason = "required atoms are covered only by answers that may be too general (ii)";
  return v;
}

OracleVerdict judge_completeness(const ApproximateSpec& spec, const Term& call,
                                 const std::vector<PseudoAnswer>& answers, OutcomeStatus status,
                                 const Signature& program_signature) {
  return judge_completeness(spec, call, answers, status, spec.universe_for(program_signature, {call}));
}

CheckResult check_correctness(const FixpointModel& model, const ApproximateSpec& spec) {
  CheckResult r;
  r.truncated = model.truncated();
  for (const Term& a : model.atoms())
    if (!spec.member_correct(a)) r.violations.push_back(a);
  return r;
}

CheckResult check_correctness(const Program& prog, const ApproximateSpec& spec, const Bounds& bounds) {
  return check_correctness(fixpoint_model(prog, bounds), spec);
}

CheckResult check_completeness(const Program& prog, const FixpointModel& model,
                               const ApproximateSpec& spec, const Bounds& bounds) {
  CheckResult r;
  r.truncated = model.truncated();
  Signature s = prog.signature();
  s.merge(spec.checker().signature());
  auto universe = std::make_shared<TermUniverse>(std::move(s), bounds);
  for (const SpecEntry& e : spec.entries()) {
    if (!e.has_complete) continue;
    RequiredSet req = spec.required_instances(most_general(e.pred), universe);
    if (!req.exhaustive) r.truncated = true;
    for (const Term& a : req.atoms)
      if (!model.contains(a)) r.violations.push_back(a);
  }
  return r;
}

CheckResult check_completeness(const Program& prog, const ApproximateSpec& spec, const Bounds& bounds) {
  return check_completeness(prog, fixpoint_model(prog, bounds), spec, bounds);
}

}  // namespace lpdiag
