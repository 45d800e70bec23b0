#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lpdiag/program.hpp"
#include "lpdiag/term.hpp"

namespace lpdiag {

/// Parses the Edinburgh-style subset: facts, rules, `:- block` directives,
/// lists, integers, `%` and `/* */` comments, and the infix operators
/// `= \= < =< > >= is + - * // mod`. Throws Error(kSyntax) with a position.
Program parse_program(std::string_view text);

struct ParsedQuery {
  std::vector<Term> goals;
  /// Named variables in order of first occurrence.
  std::vector<std::pair<std::string, Term>> variables;
};

/// Parses `goal1, ..., goaln` with an optional leading `?-` and trailing `.`.
/// An empty (or `true`) query yields no goals.
ParsedQuery parse_query(std::string_view text);

/// Parses a single term (no trailing `.` required).
Term parse_term(std::string_view text);

std::string to_string(const Term& t);
std::string to_string(const Clause& c);
/// Unparses declarations then clauses, one per line.
std::string to_string(const Program& p);
/// Comma-separated goals; "true" when empty.
std::string format_goals(std::span<const Term> goals);

}  // namespace lpdiag
