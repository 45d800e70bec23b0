#include <cctype>
#include <sstream>
#include <string>

#include "lpdiag/parser.hpp"

namespace lpdiag {

namespace {

struct OpInfo {
  int prec;
  int left_max;
  int right_max;
  bool alpha;
};

std::optional<OpInfo> writer_op(const Term& t) {
  if (!t.is_compound() || t.arity() != 2) return std::nullopt;
  const std::string& n = t.name().str();
  if (n == "=" || n == "\\=" || n == "<" || n == "=<" || n == ">" || n == ">=")
    return OpInfo{700, 699, 699, false};
  if (n == "is") return OpInfo{700, 699, 699, true};
  if (n == "+" || n == "-") return OpInfo{500, 500, 499, false};
  if (n == "*" || n == "//") return OpInfo{400, 400, 399, false};
  if (n == "mod") return OpInfo{400, 400, 399, true};
  if (n == ",") return OpInfo{1000, 999, 1000, false};
  return std::nullopt;
}

bool plain_name(const std::string& s) {
  if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

bool symbol_name(const std::string& s) {
  static constexpr std::string_view chars = "+-*/\\^<>=~:.?@#&$";
  if (s.empty()) return false;
  for (char c : s)
    if (chars.find(c) == std::string_view::npos) return false;
  return true;
}

std::string atom_text(const std::string& s) {
  if (s == "[]" || plain_name(s) || symbol_name(s)) return s;
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "''";
    else out += c;
  }
  return out + "'";
}

void write(std::ostringstream& os, const Term& t, int max_prec);

void write_operand(std::ostringstream& os, const Term& t, int max_prec) {
  std::ostringstream inner;
  write(inner, t, max_prec);
  os << inner.str();
}

void write(std::ostringstream& os, const Term& t, int max_prec) {
  switch (t.kind()) {
    case TermKind::kVariable:
      if (t.name().empty()) os << "_G" << t.var_id();
      else os << t.name().str();
      return;
    case TermKind::kInteger:
      os << t.int_value();
      return;
    case TermKind::kAtom:
      os << atom_text(t.name().str());
      return;
    case TermKind::kCompound:
      break;
  }
  if (t.is_cons()) {
    os << '[';
    Term cur = t;
    bool first = true;
    while (cur.is_cons()) {
      if (!first) os << ',';
      write(os, cur.arg(0), 999);
      first = false;
      cur = cur.arg(1);
    }
    if (!cur.is_nil()) {
      os << '|';
      write(os, cur, 999);
    }
    os << ']';
    return;
  }
  if (auto op = writer_op(t)) {
    bool paren = op->prec > max_prec;
    if (paren) os << '(';
    std::ostringstream left, right;
    write(left, t.arg(0), op->left_max);
    write(right, t.arg(1), op->right_max);
    std::string r = right.str();
    os << left.str();
    if (op->alpha) {
      os << ' ' << t.name().str() << ' ';
    } else if (t.name().str() == ",") {
      os << ", ";
    } else {
      os << t.name().str();
      if (!r.empty() && symbol_name(std::string(1, r[0]))) os << ' ';
    }
    os << r;
    if (paren) os << ')';
    return;
  }
  if (t.arity() == 1 && t.name().str() == "-") {
    bool paren = 200 > max_prec;
    if (paren) os << '(';
    os << '-';
    std::ostringstream operand;
    write(operand, t.arg(0), 200);
    std::string o = operand.str();
    if (!o.empty() && (std::isdigit(static_cast<unsigned char>(o[0])) || o[0] == '-')) os << ' ';
    os << o;
    if (paren) os << ')';
    return;
  }
  os << atom_text(t.name().str()) << '(';
  for (std::size_t i = 0; i < t.arity(); ++i) {
    if (i) os << ',';
    write_operand(os, t.arg(i), 999);
  }
  os << ')';
}

}  // namespace

std::string to_string(const Term& t) {
  std::ostringstream os;
  write(os, t, 1200);
  return os.str();
}

std::string format_goals(std::span<const Term> goals) {
  if (goals.empty()) return "true";
  std::string out;
  for (std::size_t i = 0; i < goals.size(); ++i) {
    if (i) out += ", ";
    std::ostringstream os;
    write(os, goals[i], 999);
    out += os.str();
  }
  return out;
}

std::string to_string(const Clause& c) {
  std::string out = to_string(c.head);
  if (!c.body.empty()) out += " :- " + format_goals(c.body);
  return out + ".";
}

std::string to_string(const Program& p) {
  std::string out;
  for (const BlockSpec& b : p.blocks()) {
    out += ":- block " + atom_text(b.pred.name.str()) + "(";
    for (std::size_t i = 0; i < b.mask.size(); ++i) {
      if (i) out += ",";
      out += b.mask[i] == BlockArg::kMustBind ? "-" : "?";
    }
    out += ").\n";
  }
  for (const Clause& c : p.clauses()) out += to_string(c) + "\n";
  return out;
}

}  // namespace lpdiag
