#include "scenelogic/parser.hpp"

#include <cctype>
#include <sstream>
#include <vector>

#include "scenelogic/errors.hpp"

namespace scenelogic {

Formula Formula::make_atom(Atom a) {
  Formula f;
  f.op = Op::atom;
  f.pos = a.pos;
  f.atom = std::move(a);
  return f;
}

Formula Formula::make_conj(std::vector<Formula> parts, SourcePos pos) {
  Formula f;
  f.op = Op::conj;
  f.children = std::move(parts);
  f.pos = pos;
  return f;
}

Formula Formula::make_disj(std::vector<Formula> parts, SourcePos pos) {
  Formula f;
  f.op = Op::disj;
  f.children = std::move(parts);
  f.pos = pos;
  return f;
}

Formula Formula::make_not(Formula inner, SourcePos pos) {
  Formula f;
  f.op = Op::negation;
  f.children.push_back(std::move(inner));
  f.pos = pos;
  return f;
}

Formula Formula::make_exists(std::vector<std::string> vars, Formula body, SourcePos pos) {
  Formula f;
  f.op = Op::exists;
  f.vars = std::move(vars);
  f.children.push_back(std::move(body));
  f.pos = pos;
  return f;
}

std::string QueryDef::subject() const {
  if (body.op == Formula::Op::exists && !body.vars.empty()) return body.vars.front();
  return {};
}

const RuleDef* Program::find_rule(const std::string& name) const {
  for (const auto& r : rules)
    if (r.name == name) return &r;
  return nullptr;
}

const QueryDef* Program::find_query(const std::string& name) const {
  for (const auto& q : queries)
    if (q.name == name) return &q;
  return nullptr;
}

bool is_fact_predicate(const std::string& name) { return name == "object" || name == "segment"; }

bool is_spatial_builtin(const std::string& name) {
  return name == "left" || name == "right" || name == "above" || name == "below" || name == "neighbor";
}

bool is_builtin(const std::string& name) { return is_fact_predicate(name) || is_spatial_builtin(name); }

namespace {

enum class Tok { name, variable, string, lparen, rparen, comma, colon, define, period, end };

struct Token {
  Tok kind;
  std::string text;
  SourcePos pos;
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::name: return "identifier";
    case Tok::variable: return "variable";
    case Tok::string: return "string literal";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::comma: return "','";
    case Tok::colon: return "':'";
    case Tok::define: return "':='";
    case Tok::period: return "'.'";
    case Tok::end: return "end of input";
  }
  return "token";
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      SourcePos pos{line_, col_};
      if (at_end()) {
        out.push_back({Tok::end, {}, pos});
        return out;
      }
      char c = peek();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string word;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) word += advance();
        Tok kind = std::isupper(static_cast<unsigned char>(word[0])) ? Tok::variable : Tok::name;
        out.push_back({kind, std::move(word), pos});
      } else if (c == '"') {
        out.push_back({Tok::string, read_string(pos), pos});
      } else if (c == ':') {
        advance();
        if (!at_end() && peek() == '=') {
          advance();
          out.push_back({Tok::define, ":=", pos});
        } else {
          out.push_back({Tok::colon, ":", pos});
        }
      } else {
        Tok kind;
        switch (c) {
          case '(': kind = Tok::lparen; break;
          case ')': kind = Tok::rparen; break;
          case ',': kind = Tok::comma; break;
          case '.': kind = Tok::period; break;
          default: throw SyntaxError(std::string("unexpected character '") + c + "'", pos.line, pos.column);
        }
        advance();
        out.push_back({kind, std::string(1, c), pos});
      }
    }
  }

 private:
  bool at_end() const { return i_ >= text_.size(); }
  char peek() const { return text_[i_]; }

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

  void skip_space() {
    while (!at_end()) {
      char c = peek();
      if (c == '#') {
        while (!at_end() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  std::string read_string(SourcePos start) {
    advance();  // opening quote
    std::string out;
    for (;;) {
      if (at_end() || peek() == '\n') throw SyntaxError("unterminated string literal", start.line, start.column);
      SourcePos here{line_, col_};
      char c = advance();
      if (c == '"') return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (at_end()) throw SyntaxError("unterminated string literal", start.line, start.column);
      char e = advance();
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: throw SyntaxError(std::string("unknown escape '\\") + e + "' in string literal", here.line, here.column);
      }
    }
  }

  std::string_view text_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Program program() {
    Program p;
    while (cur().kind != Tok::end) {
      if (is_keyword("pred")) {
        p.rules.push_back(ruledef());
      } else if (is_keyword("query")) {
        p.queries.push_back(querydef());
      } else {
        fail("expected 'pred' or 'query'");
      }
    }
    return p;
  }

  Formula formula_only() {
    Formula f = formula();
    expect(Tok::end);
    return f;
  }

 private:
  const Token& cur() const { return toks_[i_]; }

  bool is_keyword(const char* kw) const { return cur().kind == Tok::name && cur().text == kw; }

  [[noreturn]] void fail(const std::string& what) const {
    std::string found = cur().kind == Tok::end ? "end of input" : "'" + cur().text + "'";
    throw SyntaxError(what + ", found " + found, cur().pos.line, cur().pos.column);
  }

  Token expect(Tok kind) {
    if (cur().kind != kind) fail(std::string("expected ") + describe(kind));
    return toks_[i_++];
  }

  void expect_keyword(const char* kw) {
    if (!is_keyword(kw)) fail(std::string("expected '") + kw + "'");
    ++i_;
  }

  std::string name() {
    if (cur().kind != Tok::name || is_reserved(cur().text)) fail("expected a lowercase name");
    return toks_[i_++].text;
  }

  static bool is_reserved(const std::string& w) {
    return w == "pred" || w == "query" || w == "exists" || w == "and" || w == "or" || w == "not";
  }

  std::vector<std::string> vars() {
    std::vector<std::string> out;
    out.push_back(expect(Tok::variable).text);
    while (cur().kind == Tok::comma) {
      ++i_;
      out.push_back(expect(Tok::variable).text);
    }
    return out;
  }

  RuleDef ruledef() {
    RuleDef r;
    r.pos = cur().pos;
    expect_keyword("pred");
    r.name = name();
    expect(Tok::lparen);
    r.params = vars();
    expect(Tok::rparen);
    expect(Tok::define);
    r.body = formula();
    expect(Tok::period);
    return r;
  }

  QueryDef querydef() {
    QueryDef q;
    q.pos = cur().pos;
    expect_keyword("query");
    q.name = name();
    expect(Tok::define);
    q.body = formula();
    expect(Tok::period);
    return q;
  }

  Formula formula() { return disj(); }

  Formula disj() {
    SourcePos pos = cur().pos;
    std::vector<Formula> parts;
    parts.push_back(conj());
    while (is_keyword("or")) {
      ++i_;
      parts.push_back(conj());
    }
    if (parts.size() == 1) return std::move(parts.front());
    return Formula::make_disj(std::move(parts), pos);
  }

  Formula conj() {
    SourcePos pos = cur().pos;
    std::vector<Formula> parts;
    parts.push_back(unary());
    while (is_keyword("and")) {
      ++i_;
      parts.push_back(unary());
    }
    if (parts.size() == 1) return std::move(parts.front());
    return Formula::make_conj(std::move(parts), pos);
  }

  Formula unary() {
    SourcePos pos = cur().pos;
    if (is_keyword("not")) {
      ++i_;
      return Formula::make_not(unary(), pos);
    }
    if (is_keyword("exists")) {
      ++i_;
      auto vs = vars();
      expect(Tok::colon);
      return Formula::make_exists(std::move(vs), unary(), pos);
    }
    if (cur().kind == Tok::lparen) {
      ++i_;
      Formula f = formula();
      expect(Tok::rparen);
      return f;
    }
    return Formula::make_atom(atom());
  }

  Atom atom() {
    Atom a;
    a.pos = cur().pos;
    a.predicate = name();
    expect(Tok::lparen);
    a.args.push_back(term());
    while (cur().kind == Tok::comma) {
      ++i_;
      a.args.push_back(term());
    }
    expect(Tok::rparen);
    return a;
  }

  Term term() {
    if (cur().kind == Tok::variable) {
      const Token& t = toks_[i_++];
      return Term::variable(t.text, t.pos);
    }
    if (cur().kind == Tok::string) {
      const Token& t = toks_[i_++];
      return Term::symbol(t.text, t.pos);
    }
    fail("expected a variable or string literal");
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

void print_vars(std::ostream& os, const std::vector<std::string>& vars) {
  for (std::size_t i = 0; i < vars.size(); ++i) os << (i ? ", " : "") << vars[i];
}

void print(std::ostream& os, const Formula& f);

// Operands of `not`/`exists` and of n-ary operators are printed with
// parentheses whenever re-parsing would otherwise regroup them.
void print_unary(std::ostream& os, const Formula& f) {
  if (f.op == Formula::Op::conj || f.op == Formula::Op::disj) {
    os << '(';
    print(os, f);
    os << ')';
  } else {
    print(os, f);
  }
}

void print(std::ostream& os, const Formula& f) {
  switch (f.op) {
    case Formula::Op::atom:
      os << f.atom.predicate << '(';
      for (std::size_t i = 0; i < f.atom.args.size(); ++i) {
        const Term& t = f.atom.args[i];
        os << (i ? ", " : "") << (t.is_variable() ? t.text : quote(t.text));
      }
      os << ')';
      break;
    case Formula::Op::conj:
    case Formula::Op::disj: {
      const char* sep = f.op == Formula::Op::conj ? " and " : " or ";
      for (std::size_t i = 0; i < f.children.size(); ++i) {
        if (i) os << sep;
        const Formula& c = f.children[i];
        // A nested operand of either n-ary kind would flatten or rebind.
        if (c.op == Formula::Op::conj || c.op == Formula::Op::disj) {
          os << '(';
          print(os, c);
          os << ')';
        } else {
          print(os, c);
        }
      }
      break;
    }
    case Formula::Op::negation:
      os << "not ";
      print_unary(os, f.operand());
      break;
    case Formula::Op::exists:
      os << "exists ";
      print_vars(os, f.vars);
      os << ": ";
      print_unary(os, f.operand());
      break;
  }
}

}  // namespace

Program parse_program(std::string_view text) { return Parser(Lexer(text).run()).program(); }

Formula parse_formula(std::string_view text) { return Parser(Lexer(text).run()).formula_only(); }

std::string print_formula(const Formula& formula) {
  std::ostringstream os;
  print(os, formula);
  return os.str();
}

std::string print_program(const Program& program) {
  std::ostringstream os;
  for (const auto& r : program.rules) {
    os << "pred " << r.name << '(';
    print_vars(os, r.params);
    os << ") := ";
    print(os, r.body);
    os << ".\n";
  }
  for (const auto& q : program.queries) {
    os << "query " << q.name << " := ";
    print(os, q.body);
    os << ".\n";
  }
  return os.str();
}

}  // namespace scenelogic
