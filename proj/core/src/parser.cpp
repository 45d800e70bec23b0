#include "lpdiag/parser.hpp"

#include <cctype>
#include <charconv>
#include <limits>
#include <optional>
#include <unordered_map>

#include "lpdiag/error.hpp"

namespace lpdiag {

namespace {

enum class Tok { kName, kVar, kInt, kPunct, kSymbol, kQuoted, kEnd, kEof };

struct Token {
  Tok kind;
  std::string text;
  SourcePos pos;
  bool layout_before = false;
};

constexpr std::string_view kSymbolChars = "+-*/\\^<>=~:.?@#&$";

bool is_symbol_char(char c) { return kSymbolChars.find(c) != std::string_view::npos; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    bool layout = skip_layout();
    Token t;
    t.pos = {line_, col_};
    t.layout_before = layout;
    if (i_ >= text_.size()) {
      t.kind = Tok::kEof;
      return t;
    }
    char c = text_[i_];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      t.kind = Tok::kInt;
      while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_])))
        t.text += advance();
      return t;
    }
    if (std::islower(static_cast<unsigned char>(c))) {
      t.kind = Tok::kName;
      while (i_ < text_.size() && is_alnum(text_[i_])) t.text += advance();
      return t;
    }
    if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
      t.kind = Tok::kVar;
      while (i_ < text_.size() && is_alnum(text_[i_])) t.text += advance();
      return t;
    }
    if (c == '\'') {
      t.kind = Tok::kQuoted;
      advance();
      for (;;) {
        if (i_ >= text_.size()) throw Error(ErrorCode::kSyntax, "unterminated quoted atom", t.pos);
        char q = advance();
        if (q == '\'') {
          if (i_ < text_.size() && text_[i_] == '\'') {
            t.text += advance();
            continue;
          }
          break;
        }
        t.text += q;
      }
      return t;
    }
    if (c == '(' || c == ')' || c == '[' || c == ']' || c == '|' || c == ',') {
      t.kind = Tok::kPunct;
      t.text = std::string(1, advance());
      return t;
    }
    if (c == '.' && (i_ + 1 >= text_.size() || std::isspace(static_cast<unsigned char>(text_[i_ + 1])) ||
                     text_[i_ + 1] == '%')) {
      advance();
      t.kind = Tok::kEnd;
      t.text = ".";
      return t;
    }
    if (is_symbol_char(c)) {
      t.kind = Tok::kSymbol;
      while (i_ < text_.size() && is_symbol_char(text_[i_])) {
        // A '.' that ends the clause is not part of the symbol.
        if (text_[i_] == '.' && !t.text.empty() &&
            (i_ + 1 >= text_.size() || std::isspace(static_cast<unsigned char>(text_[i_ + 1])) ||
             text_[i_ + 1] == '%'))
          break;
        t.text += advance();
      }
      return t;
    }
    throw Error(ErrorCode::kSyntax, std::string("unexpected character '") + c + "'", t.pos);
  }

 private:
  char advance() {
    char c = text_[i_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  bool skip_layout() {
    bool any = false;
    while (i_ < text_.size()) {
      char c = text_[i_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        any = true;
      } else if (c == '%') {
        while (i_ < text_.size() && text_[i_] != '\n') advance();
        any = true;
      } else if (c == '/' && i_ + 1 < text_.size() && text_[i_ + 1] == '*') {
        SourcePos start{line_, col_};
        advance();
        advance();
        while (i_ + 1 < text_.size() && !(text_[i_] == '*' && text_[i_ + 1] == '/')) advance();
        if (i_ + 1 >= text_.size()) throw Error(ErrorCode::kSyntax, "unterminated comment", start);
        advance();
        advance();
        any = true;
      } else {
        break;
      }
    }
    return any;
  }

  std::string_view text_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct InfixOp {
  int prec;
  int left_max;
  int right_max;
};

std::optional<InfixOp> infix_op(const std::string& name) {
  static const std::unordered_map<std::string, InfixOp> table = {
      {":-", {1200, 1199, 1199}}, {",", {1000, 999, 1000}},  {"=", {700, 699, 699}},
      {"\\=", {700, 699, 699}},   {"<", {700, 699, 699}},    {"=<", {700, 699, 699}},
      {">", {700, 699, 699}},     {">=", {700, 699, 699}},   {"is", {700, 699, 699}},
      {"+", {500, 500, 499}},     {"-", {500, 500, 499}},    {"*", {400, 400, 399}},
      {"//", {400, 400, 399}},    {"mod", {400, 400, 399}},
  };
  auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { shift(); }

  bool at_eof() const { return tok_.kind == Tok::kEof; }
  const Token& peek() const { return tok_; }

  void reset_scope() { vars_.clear(); var_order_.clear(); }
  const std::vector<std::pair<std::string, Term>>& var_order() const { return var_order_; }

  Term parse(int max_prec) {
    auto [left, left_prec] = parse_primary(max_prec);
    for (;;) {
      std::string op;
      if (tok_.kind == Tok::kSymbol || tok_.kind == Tok::kName) op = tok_.text;
      else if (tok_.kind == Tok::kPunct && tok_.text == ",") op = ",";
      else break;
      auto info = infix_op(op);
      if (!info || info->prec > max_prec || left_prec > info->left_max) break;
      shift();
      Term right = parse(info->right_max);
      left = Term::compound(op, {left, right});
      left_prec = info->prec;
    }
    return left;
  }

  void expect_end() {
    if (tok_.kind != Tok::kEnd) fail("expected '.'");
    shift();
  }

  void expect_punct(const char* p) {
    if (tok_.kind != Tok::kPunct || tok_.text != p) fail(std::string("expected '") + p + "'");
    shift();
  }

  [[noreturn]] void fail(const std::string& what) const {
    std::string found;
    switch (tok_.kind) {
      case Tok::kEof: found = "end of input"; break;
      case Tok::kEnd: found = "'.'"; break;
      default: found = "'" + tok_.text + "'";
    }
    throw Error(ErrorCode::kSyntax, what + ", found " + found, tok_.pos);
  }

  void shift() { tok_ = lexer_.next(); }

 private:
  bool starts_term() const {
    switch (tok_.kind) {
      case Tok::kName:
      case Tok::kVar:
      case Tok::kInt:
      case Tok::kQuoted:
      case Tok::kSymbol:
        return true;
      case Tok::kPunct:
        return tok_.text == "(" || tok_.text == "[";
      default:
        return false;
    }
  }

  Term variable(const std::string& name) {
    if (name == "_") return Term::fresh_variable(Symbol("_"));
    auto it = vars_.find(name);
    if (it != vars_.end()) return it->second;
    Term v = Term::fresh_variable(Symbol(name));
    vars_.emplace(name, v);
    var_order_.emplace_back(name, v);
    return v;
  }

  std::vector<Term> parse_args() {
    std::vector<Term> args;
    expect_punct("(");
    args.push_back(parse(999));
    while (tok_.kind == Tok::kPunct && tok_.text == ",") {
      shift();
      args.push_back(parse(999));
    }
    expect_punct(")");
    return args;
  }

  std::pair<Term, int> parse_primary(int max_prec) {
    Token t = tok_;
    switch (t.kind) {
      case Tok::kInt: {
        shift();
        return {make_int(t.text, false, t.pos), 0};
      }
      case Tok::kVar:
        shift();
        return {variable(t.text), 0};
      case Tok::kName:
      case Tok::kQuoted: {
        shift();
        if (tok_.kind == Tok::kPunct && tok_.text == "(" && !tok_.layout_before)
          return {Term::compound(t.text, parse_args()), 0};
        return {Term::atom(t.text), 0};
      }
      case Tok::kSymbol: {
        shift();
        if (t.text == "-" && tok_.kind == Tok::kInt && !tok_.layout_before) {
          Token num = tok_;
          shift();
          return {make_int(num.text, true, t.pos), 0};
        }
        if (tok_.kind == Tok::kPunct && tok_.text == "(" && !tok_.layout_before)
          return {Term::compound(t.text, parse_args()), 0};
        if (t.text == "-" && starts_term() && max_prec >= 200) {
          Term operand = parse(200);
          return {Term::compound("-", {operand}), 200};
        }
        return {Term::atom(t.text), 0};
      }
      case Tok::kPunct:
        if (t.text == "(") {
          shift();
          Term inner = parse(1200);
          expect_punct(")");
          return {inner, 0};
        }
        if (t.text == "[") {
          shift();
          if (tok_.kind == Tok::kPunct && tok_.text == "]") {
            shift();
            return {Term::nil(), 0};
          }
          std::vector<Term> items;
          items.push_back(parse(999));
          while (tok_.kind == Tok::kPunct && tok_.text == ",") {
            shift();
            items.push_back(parse(999));
          }
          std::optional<Term> tail;
          if (tok_.kind == Tok::kPunct && tok_.text == "|") {
            shift();
            tail = parse(999);
          }
          expect_punct("]");
          return {Term::list(items, tail), 0};
        }
        break;
      default:
        break;
    }
    fail("expected a term");
  }

  Term make_int(const std::string& digits, bool negative, SourcePos pos) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc() || ptr != digits.data() + digits.size())
      throw Error(ErrorCode::kSyntax, "integer out of range", pos);
    return Term::integer(negative ? -value : value);
  }

  Lexer lexer_;
  Token tok_;
  std::unordered_map<std::string, Term> vars_;
  std::vector<std::pair<std::string, Term>> var_order_;
};

void flatten_conjunction(const Term& t, std::vector<Term>& out) {
  if (t.is_compound() && t.arity() == 2 && t.name().str() == ",") {
    flatten_conjunction(t.arg(0), out);
    flatten_conjunction(t.arg(1), out);
    return;
  }
  out.push_back(t);
}

void check_callable(const Term& t, SourcePos pos, const char* what) {
  if (t.is_var() || t.is_int())
    throw Error(ErrorCode::kSyntax, std::string(what) + " is not callable", pos);
}

std::vector<BlockSpec> parse_block_directive(Parser& p, SourcePos pos) {
  std::vector<BlockSpec> out;
  Term specs = p.parse(1199);
  std::vector<Term> items;
  flatten_conjunction(specs, items);
  for (const Term& item : items) {
    if (!item.is_compound())
      throw Error(ErrorCode::kSyntax, "block declaration expects p(m1,...,mk)", pos);
    BlockSpec spec;
    spec.pred = PredicateKey::of(item);
    spec.pos = pos;
    for (const Term& m : item.args()) {
      if (m.is_atom() && m.name().str() == "-") spec.mask.push_back(BlockArg::kMustBind);
      else if (m.is_atom() && m.name().str() == "?") spec.mask.push_back(BlockArg::kAny);
      else throw Error(ErrorCode::kSyntax, "block mask entries must be '-' or '?'", pos);
    }
    out.push_back(std::move(spec));
  }
  return out;
}

}  // namespace

Program parse_program(std::string_view text) {
  Parser p(text);
  std::vector<Clause> clauses;
  std::vector<BlockSpec> blocks;
  while (!p.at_eof()) {
    p.reset_scope();
    SourcePos pos = p.peek().pos;
    if (p.peek().kind == Tok::kSymbol && p.peek().text == ":-") {
      p.shift();
      if (p.peek().kind != Tok::kName || p.peek().text != "block")
        p.fail("expected 'block' directive");
      p.shift();
      auto specs = parse_block_directive(p, pos);
      blocks.insert(blocks.end(), specs.begin(), specs.end());
      p.expect_end();
      continue;
    }
    Term t = p.parse(1200);
    p.expect_end();
    Clause c{t, {}, 0, pos};
    if (t.is_compound() && t.arity() == 2 && t.name().str() == ":-") {
      c.head = t.arg(0);
      flatten_conjunction(t.arg(1), c.body);
    }
    check_callable(c.head, pos, "clause head");
    for (const Term& b : c.body) check_callable(b, pos, "body goal");
    clauses.push_back(std::move(c));
  }
  return Program(std::move(clauses), std::move(blocks));
}

ParsedQuery parse_query(std::string_view text) {
  Parser p(text);
  ParsedQuery q;
  if (p.peek().kind == Tok::kSymbol && p.peek().text == "?-") p.shift();
  if (p.at_eof()) return q;
  SourcePos pos = p.peek().pos;
  Term t = p.parse(1200);
  if (p.peek().kind == Tok::kEnd) p.shift();
  if (!p.at_eof()) p.fail("unexpected trailing input");
  std::vector<Term> goals;
  flatten_conjunction(t, goals);
  for (const Term& g : goals) {
    check_callable(g, pos, "query goal");
    if (g.is_atom() && g.name().str() == "true") continue;
    q.goals.push_back(g);
  }
  q.variables = p.var_order();
  return q;
}

Term parse_term(std::string_view text) {
  Parser p(text);
  Term t = p.parse(1200);
  if (p.peek().kind == Tok::kEnd) p.shift();
  if (!p.at_eof()) p.fail("unexpected trailing input");
  return t;
}

}  // namespace lpdiag
