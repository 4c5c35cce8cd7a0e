#include "cqtsim/script.hpp"

#include <charconv>
#include <cmath>
#include <set>

namespace cqt::script {

namespace {

// ---------------------------------------------------------------- lexing

enum class Tok {
  ident,
  number,
  param,
  lparen,
  rparen,
  lbracket,
  rbracket,
  comma,
  eq,
  ge,
  plus,
  minus,
  star,
  slash,
  end,
};

struct Token {
  Tok kind;
  std::string text;
  double value = 0.0;
  int line = 0;
  int col = 0;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return ident_start(c) || std::isdigit(static_cast<unsigned char>(c)); }

std::vector<Token> lex_line(std::string_view text, int line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto col = [&] { return static_cast<int>(i) + 1; };
  while (i < text.size()) {
    const char c = text[i];
    if (c == '#') break;
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    const int start_col = col();
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      out.push_back({Tok::ident, std::string(text.substr(i, j - i)), 0.0, line_no, start_col});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j < text.size() && text[j] == '.') {
        ++j;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k >= text.size() || !std::isdigit(static_cast<unsigned char>(text[k])))
          throw ParseError("malformed exponent in number", line_no, start_col);
        while (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) ++k;
        j = k;
      }
      const std::string_view digits = text.substr(i, j - i);
      double value = 0.0;
      const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), value);
      if (res.ec != std::errc{})
        throw ParseError("malformed number literal", line_no, start_col);
      out.push_back({Tok::number, std::string(digits), value, line_no, start_col});
      i = j;
      continue;
    }
    if (c == '$') {
      if (i + 1 >= text.size() || text[i + 1] != '{')
        throw ParseError("expected '{' after '$'", line_no, start_col);
      std::size_t j = i + 2;
      if (j >= text.size() || !ident_start(text[j]))
        throw ParseError("expected parameter name after '${'", line_no, start_col);
      std::size_t k = j;
      while (k < text.size() && ident_char(text[k])) ++k;
      if (k >= text.size() || text[k] != '}')
        throw ParseError("unterminated parameter reference", line_no, start_col);
      out.push_back({Tok::param, std::string(text.substr(j, k - j)), 0.0, line_no, start_col});
      i = k + 1;
      continue;
    }
    if (c == '>') {
      if (i + 1 >= text.size() || text[i + 1] != '=')
        throw ParseError("expected '=' after '>'", line_no, start_col);
      out.push_back({Tok::ge, ">=", 0.0, line_no, start_col});
      i += 2;
      continue;
    }
    Tok kind;
    switch (c) {
      case '(': kind = Tok::lparen; break;
      case ')': kind = Tok::rparen; break;
      case '[': kind = Tok::lbracket; break;
      case ']': kind = Tok::rbracket; break;
      case ',': kind = Tok::comma; break;
      case '=': kind = Tok::eq; break;
      case '+': kind = Tok::plus; break;
      case '-': kind = Tok::minus; break;
      case '*': kind = Tok::star; break;
      case '/': kind = Tok::slash; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line_no, start_col);
    }
    out.push_back({kind, std::string(1, c), 0.0, line_no, start_col});
    ++i;
  }
  out.push_back({Tok::end, "", 0.0, line_no, static_cast<int>(text.size()) + 1});
  return out;
}

// ---------------------------------------------------------------- expressions

ExprPtr make_const(double v, SourceLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::constant;
  e->value = v;
  e->loc = loc;
  return e;
}

bool is_const(const ExprPtr& e) { return e->kind == Expr::Kind::constant; }

ExprPtr make_unary(Expr::Kind kind, ExprPtr child, SourceLoc loc) {
  if (is_const(child)) {
    const double v = child->value;
    return make_const(kind == Expr::Kind::neg ? -v : std::sqrt(v), loc);
  }
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->lhs = std::move(child);
  e->loc = loc;
  return e;
}

ExprPtr make_binary(Expr::Kind kind, ExprPtr lhs, ExprPtr rhs, SourceLoc loc) {
  if (is_const(lhs) && is_const(rhs)) {
    const double a = lhs->value;
    const double b = rhs->value;
    double v = 0.0;
    switch (kind) {
      case Expr::Kind::add: v = a + b; break;
      case Expr::Kind::sub: v = a - b; break;
      case Expr::Kind::mul: v = a * b; break;
      case Expr::Kind::div: v = a / b; break;
      default: break;
    }
    return make_const(v, loc);
  }
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->lhs = std::move(lhs);
  e->rhs = std::move(rhs);
  e->loc = loc;
  return e;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

int precedence(Expr::Kind k) {
  switch (k) {
    case Expr::Kind::add:
    case Expr::Kind::sub: return 1;
    case Expr::Kind::mul:
    case Expr::Kind::div: return 2;
    case Expr::Kind::neg: return 3;
    default: return 4;
  }
}

}  // namespace

double eval_expr(const Expr& e, const std::map<std::string, double>& params) {
  switch (e.kind) {
    case Expr::Kind::constant: return e.value;
    case Expr::Kind::param: {
      auto it = params.find(e.param);
      if (it == params.end()) throw Error("unbound parameter '${" + e.param + "}'");
      return it->second;
    }
    case Expr::Kind::neg: return -eval_expr(*e.lhs, params);
    case Expr::Kind::sqrt_fn: return std::sqrt(eval_expr(*e.lhs, params));
    case Expr::Kind::add: return eval_expr(*e.lhs, params) + eval_expr(*e.rhs, params);
    case Expr::Kind::sub: return eval_expr(*e.lhs, params) - eval_expr(*e.rhs, params);
    case Expr::Kind::mul: return eval_expr(*e.lhs, params) * eval_expr(*e.rhs, params);
    case Expr::Kind::div: return eval_expr(*e.lhs, params) / eval_expr(*e.rhs, params);
  }
  return 0.0;
}

void collect_params(const Expr& e, std::vector<std::string>& out) {
  switch (e.kind) {
    case Expr::Kind::param: out.push_back(e.param); return;
    case Expr::Kind::constant: return;
    default:
      if (e.lhs) collect_params(*e.lhs, out);
      if (e.rhs) collect_params(*e.rhs, out);
  }
}

std::string print_expr(const Expr& e) {
  const auto wrap = [&](const Expr& child, bool tighten) {
    const std::string s = print_expr(child);
    if (precedence(child.kind) < precedence(e.kind) ||
        (tighten && precedence(child.kind) == precedence(e.kind)))
      return "(" + s + ")";
    return s;
  };
  switch (e.kind) {
    case Expr::Kind::constant: return format_double(e.value);
    case Expr::Kind::param: return "${" + e.param + "}";
    case Expr::Kind::neg: {
      const std::string s = print_expr(*e.lhs);
      if (precedence(e.lhs->kind) < precedence(e.kind)) return "-(" + s + ")";
      return "-" + s;
    }
    case Expr::Kind::sqrt_fn: return "sqrt(" + print_expr(*e.lhs) + ")";
    case Expr::Kind::add: return wrap(*e.lhs, false) + "+" + wrap(*e.rhs, true);
    case Expr::Kind::sub: return wrap(*e.lhs, false) + "-" + wrap(*e.rhs, true);
    case Expr::Kind::mul: return wrap(*e.lhs, false) + "*" + wrap(*e.rhs, true);
    case Expr::Kind::div: return wrap(*e.lhs, false) + "/" + wrap(*e.rhs, true);
  }
  return "";
}

namespace {

// ---------------------------------------------------------------- parsing

class LineParser {
 public:
  LineParser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  const Token& peek() const { return toks_[pos_]; }
  bool at_end() const { return peek().kind == Tok::end; }

  Token expect(Tok kind, const char* what) {
    const Token& t = peek();
    if (t.kind != kind) throw ParseError(std::string("expected ") + what, t.line, t.col);
    ++pos_;
    return t;
  }

  bool accept(Tok kind) {
    if (peek().kind == kind) {
      ++pos_;
      return true;
    }
    return false;
  }

  Token expect_ident(const char* what) { return expect(Tok::ident, what); }

  Token expect_keyword(const char* kw) {
    const Token& t = peek();
    if (t.kind != Tok::ident || t.text != kw)
      throw ParseError(std::string("expected '") + kw + "'", t.line, t.col);
    ++pos_;
    return t;
  }

  void expect_done() {
    const Token& t = peek();
    if (t.kind != Tok::end)
      throw ParseError("unexpected trailing input '" + t.text + "'", t.line, t.col);
  }

  ExprPtr parse_expr() {
    ExprPtr lhs = parse_term();
    while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
      const Token op = peek();
      ++pos_;
      ExprPtr rhs = parse_term();
      lhs = make_binary(op.kind == Tok::plus ? Expr::Kind::add : Expr::Kind::sub, std::move(lhs),
                        std::move(rhs), {op.line, op.col});
    }
    return lhs;
  }

 private:
  ExprPtr parse_term() {
    ExprPtr lhs = parse_factor();
    while (peek().kind == Tok::star || peek().kind == Tok::slash) {
      const Token op = peek();
      ++pos_;
      ExprPtr rhs = parse_factor();
      lhs = make_binary(op.kind == Tok::star ? Expr::Kind::mul : Expr::Kind::div, std::move(lhs),
                        std::move(rhs), {op.line, op.col});
    }
    return lhs;
  }

  ExprPtr parse_factor() {
    const Token t = peek();
    switch (t.kind) {
      case Tok::minus:
        ++pos_;
        return make_unary(Expr::Kind::neg, parse_factor(), {t.line, t.col});
      case Tok::number:
        ++pos_;
        return make_const(t.value, {t.line, t.col});
      case Tok::param: {
        ++pos_;
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::param;
        e->param = t.text;
        e->loc = {t.line, t.col};
        return e;
      }
      case Tok::lparen: {
        ++pos_;
        ExprPtr inner = parse_expr();
        expect(Tok::rparen, "')'");
        return inner;
      }
      case Tok::ident:
        if (t.text == "pi") {
          ++pos_;
          return make_const(kPi, {t.line, t.col});
        }
        if (t.text == "sqrt") {
          ++pos_;
          expect(Tok::lparen, "'(' after sqrt");
          ExprPtr inner = parse_expr();
          expect(Tok::rparen, "')'");
          return make_unary(Expr::Kind::sqrt_fn, std::move(inner), {t.line, t.col});
        }
        throw ParseError("unknown identifier '" + t.text + "' in expression", t.line, t.col);
      default:
        throw ParseError("expected expression", t.line, t.col);
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

struct ParseState {
  std::map<std::string, AtomBasis> atoms;
  std::set<std::string> vars;
  bool cavity_declared = false;
  bool report_seen = false;
};

AtomBasis parse_levels(LineParser& p) {
  p.expect(Tok::lparen, "'('");
  const Token first = p.expect_ident("level name");
  p.expect(Tok::comma, "','");
  const Token second = p.expect_ident("level name");
  p.expect(Tok::rparen, "')'");
  if (first.text == "f" && second.text == "g") return AtomBasis::fg;
  if (first.text == "f" && second.text == "e") return AtomBasis::fe;
  throw ParseError("levels must be (f,g) or (f,e)", first.line, first.col);
}

std::string parse_declared_atom(LineParser& p, const ParseState& st) {
  const Token t = p.expect_ident("atom label");
  if (!st.atoms.count(t.text))
    throw ParseError("undeclared atom label '" + t.text + "'", t.line, t.col);
  return t.text;
}

void check_level_for(const ParseState& st, const std::string& atom, const Token& level) {
  const AtomBasis basis = st.atoms.at(atom);
  const AtomSite probe{atom, basis};
  if (probe.level_index(level.text) < 0)
    throw ParseError("atom '" + atom + "' has no level '" + level.text + "'", level.line,
                     level.col);
}

BellKind parse_bell_token(LineParser& p) {
  const Token name = p.expect_ident("bell state name (phi or psi)");
  const bool plus = p.accept(Tok::plus);
  if (!plus) p.expect(Tok::minus, "'+' or '-'");
  if (name.text == "phi") return plus ? BellKind::phi_plus : BellKind::phi_minus;
  if (name.text == "psi") return plus ? BellKind::psi_plus : BellKind::psi_minus;
  throw ParseError("bell state must be phi+/phi-/psi+/psi-", name.line, name.col);
}

Statement parse_statement(LineParser& p, ParseState& st) {
  Statement stmt;
  const Token head = p.expect_ident("statement keyword");
  stmt.loc = {head.line, head.col};

  if (st.report_seen)
    throw ParseError("no statements are allowed after 'report'", head.line, head.col);

  const auto require_cavity = [&] {
    if (!st.cavity_declared)
      throw ParseError("cavity has not been declared", head.line, head.col);
  };

  if (head.text == "cavity") {
    if (st.cavity_declared)
      throw ParseError("duplicate cavity declaration", head.line, head.col);
    p.expect_keyword("coherent");
    stmt.kind = StmtKind::cavity;
    stmt.value = p.parse_expr();
    st.cavity_declared = true;
  } else if (head.text == "reset") {
    p.expect_keyword("cavity");
    p.expect_keyword("coherent");
    require_cavity();
    stmt.kind = StmtKind::reset_cavity;
    stmt.value = p.parse_expr();
  } else if (head.text == "atom") {
    stmt.kind = StmtKind::atom;
    const Token label = p.expect_ident("atom label");
    if (st.atoms.count(label.text))
      throw ParseError("duplicate atom label '" + label.text + "'", label.line, label.col);
    stmt.label = label.text;
    p.expect_keyword("levels");
    stmt.basis = parse_levels(p);
    p.expect_keyword("init");
    const Token level = p.expect_ident("initial level");
    st.atoms.emplace(stmt.label, stmt.basis);
    check_level_for(st, stmt.label, level);
    stmt.init_level = level.text;
  } else if (head.text == "rotate") {
    stmt.kind = StmtKind::rotate;
    stmt.label = parse_declared_atom(p, st);
    if (p.peek().kind == Tok::lbracket) {
      MatrixLiteral lit;
      p.expect(Tok::lbracket, "'['");
      for (int row = 0; row < 2; ++row) {
        p.expect(Tok::lbracket, "'['");
        lit.entries[row * 2] = p.parse_expr();
        p.expect(Tok::comma, "','");
        lit.entries[row * 2 + 1] = p.parse_expr();
        p.expect(Tok::rbracket, "']'");
        if (row == 0) p.expect(Tok::comma, "','");
      }
      p.expect(Tok::rbracket, "']'");
      bool constant = true;
      std::array<cplx, 4> m;
      for (int i = 0; i < 4; ++i) {
        constant = constant && is_const(lit.entries[i]);
        if (constant) m[i] = cplx{lit.entries[i]->value, 0.0};
      }
      if (constant && !Gate2::custom(m).is_unitary())
        throw ParseError("rotation matrix is not unitary", head.line, head.col);
      stmt.matrix = std::move(lit);
    } else {
      const Token preset = p.expect_ident("rotation preset or matrix literal");
      static const std::set<std::string> presets{"R_H",    "K",      "R5",      "Z_CORR",
                                                 "X_CORR", "XZ_CORR", "IDENTITY"};
      if (!presets.count(preset.text))
        throw ParseError("unknown rotation preset '" + preset.text + "'", preset.line,
                         preset.col);
      stmt.preset = preset.text;
    }
  } else if (head.text == "dispersive") {
    stmt.kind = StmtKind::dispersive;
    stmt.label = parse_declared_atom(p, st);
    if (st.atoms.at(stmt.label) != AtomBasis::fg)
      throw ParseError("dispersive pass requires a (f,g) atom", head.line, head.col);
    require_cavity();
    p.expect_keyword("phi");
    p.expect(Tok::eq, "'='");
    stmt.value = p.parse_expr();
  } else if (head.text == "inject") {
    stmt.kind = StmtKind::inject;
    require_cavity();
    stmt.value = p.parse_expr();
  } else if (head.text == "jc") {
    stmt.kind = StmtKind::jc;
    stmt.label = parse_declared_atom(p, st);
    if (st.atoms.at(stmt.label) != AtomBasis::fe)
      throw ParseError("resonant evolution requires a (f,e) atom", head.line, head.col);
    require_cavity();
    p.expect_keyword("gt");
    p.expect(Tok::eq, "'='");
    stmt.value = p.parse_expr();
  } else if (head.text == "measure") {
    stmt.kind = StmtKind::measure;
    stmt.label = parse_declared_atom(p, st);
    p.expect_keyword("as");
    const Token var = p.expect_ident("variable name");
    if (st.vars.count(var.text))
      throw ParseError("duplicate variable '" + var.text + "'", var.line, var.col);
    st.vars.insert(var.text);
    stmt.var = var.text;
  } else if (head.text == "postselect") {
    stmt.kind = StmtKind::postselect;
    stmt.label = parse_declared_atom(p, st);
    const Token level = p.expect_ident("level name");
    check_level_for(st, stmt.label, level);
    stmt.level = level.text;
  } else if (head.text == "correct") {
    stmt.kind = StmtKind::correct;
    stmt.label = parse_declared_atom(p, st);
    p.expect_keyword("from");
    for (int i = 0; i < 2; ++i) {
      const Token var = p.expect_ident("variable name");
      if (!st.vars.count(var.text))
        throw ParseError("undeclared variable '" + var.text + "'", var.line, var.col);
      stmt.vars.push_back(var.text);
      p.expect(Tok::comma, "','");
    }
    const Token sign = p.expect_ident("'plus' or 'minus'");
    const auto parsed = parse_injection(sign.text);
    if (!parsed) throw ParseError("injection sign must be plus or minus", sign.line, sign.col);
    stmt.sign = *parsed;
  } else if (head.text == "expect") {
    stmt.kind = StmtKind::expect;
    p.expect_keyword("fidelity");
    const Token what = p.expect_ident("'bell' or 'qubit'");
    BraSpec bra;
    if (what.text == "bell") {
      bra.kind = BraSpec::Kind::bell;
      p.expect(Tok::lparen, "'('");
      bra.atom1 = parse_declared_atom(p, st);
      p.expect(Tok::comma, "','");
      bra.atom2 = parse_declared_atom(p, st);
      p.expect(Tok::comma, "','");
      bra.bell = parse_bell_token(p);
      p.expect(Tok::rparen, "')'");
      for (const auto& atom : {bra.atom1, bra.atom2}) {
        if (st.atoms.at(atom) != AtomBasis::fg)
          throw ParseError("bell fidelity requires (f,g) atoms", what.line, what.col);
      }
    } else if (what.text == "qubit") {
      bra.kind = BraSpec::Kind::qubit;
      p.expect(Tok::lparen, "'('");
      bra.atom1 = parse_declared_atom(p, st);
      p.expect(Tok::comma, "','");
      bra.zeta = p.parse_expr();
      p.expect(Tok::comma, "','");
      bra.xi = p.parse_expr();
      p.expect(Tok::rparen, "')'");
    } else {
      throw ParseError("expected 'bell' or 'qubit'", what.line, what.col);
    }
    stmt.bra = std::move(bra);
    p.expect(Tok::ge, "'>='");
    stmt.value = p.parse_expr();
  } else if (head.text == "report") {
    stmt.kind = StmtKind::report;
    for (;;) {
      const Token var = p.expect_ident("variable name");
      if (!st.vars.count(var.text))
        throw ParseError("undeclared variable '" + var.text + "'", var.line, var.col);
      stmt.vars.push_back(var.text);
      if (!p.accept(Tok::comma)) break;
    }
    st.report_seen = true;
  } else {
    throw ParseError("unknown statement '" + head.text + "'", head.line, head.col);
  }

  p.expect_done();
  return stmt;
}

}  // namespace

ProtocolScript parse_script(std::string_view text) {
  ProtocolScript script;
  ParseState st;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    const std::string_view line =
        text.substr(start, nl == std::string_view::npos ? text.size() - start : nl - start);
    ++line_no;
    std::vector<Token> toks = lex_line(line, line_no);
    if (toks.size() > 1) {  // more than the end marker
      LineParser p(std::move(toks));
      script.statements.push_back(parse_statement(p, st));
    }
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return script;
}

namespace {

std::string print_statement(const Statement& s) {
  switch (s.kind) {
    case StmtKind::cavity:
      return "cavity coherent " + print_expr(*s.value);
    case StmtKind::reset_cavity:
      return "reset cavity coherent " + print_expr(*s.value);
    case StmtKind::atom:
      return "atom " + s.label + " levels " +
             (s.basis == AtomBasis::fg ? "(f,g)" : "(f,e)") + " init " + s.init_level;
    case StmtKind::rotate:
      if (s.matrix) {
        const auto& e = s.matrix->entries;
        return "rotate " + s.label + " [[" + print_expr(*e[0]) + "," + print_expr(*e[1]) +
               "],[" + print_expr(*e[2]) + "," + print_expr(*e[3]) + "]]";
      }
      return "rotate " + s.label + " " + s.preset;
    case StmtKind::dispersive:
      return "dispersive " + s.label + " phi=" + print_expr(*s.value);
    case StmtKind::inject:
      return "inject " + print_expr(*s.value);
    case StmtKind::jc:
      return "jc " + s.label + " gt=" + print_expr(*s.value);
    case StmtKind::measure:
      return "measure " + s.label + " as " + s.var;
    case StmtKind::postselect:
      return "postselect " + s.label + " " + s.level;
    case StmtKind::correct:
      return "correct " + s.label + " from " + s.vars[0] + "," + s.vars[1] + "," +
             to_string(s.sign);
    case StmtKind::expect: {
      std::string bra;
      if (s.bra->kind == BraSpec::Kind::bell) {
        bra = "bell(" + s.bra->atom1 + "," + s.bra->atom2 + "," + to_string(s.bra->bell) + ")";
      } else {
        bra = "qubit(" + s.bra->atom1 + "," + print_expr(*s.bra->zeta) + "," +
              print_expr(*s.bra->xi) + ")";
      }
      return "expect fidelity " + bra + " >= " + print_expr(*s.value);
    }
    case StmtKind::report: {
      std::string out = "report ";
      for (std::size_t i = 0; i < s.vars.size(); ++i) {
        if (i) out += ",";
        out += s.vars[i];
      }
      return out;
    }
  }
  return "";
}

}  // namespace

std::string print_script(const ProtocolScript& script) {
  std::string out;
  for (const auto& s : script.statements) {
    out += print_statement(s);
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json RunReport::to_json() const {
  nlohmann::ordered_json j;
  nlohmann::ordered_json measured_obj = nlohmann::ordered_json::object();
  for (const auto& [var, level] : measured) measured_obj[var] = level;
  j["measured"] = std::move(measured_obj);
  j["events"] = nlohmann::ordered_json::array();
  for (const auto& e : events) {
    j["events"].push_back({{"line", e.line},
                           {"kind", e.kind},
                           {"atom", e.atom},
                           {"outcome", e.outcome},
                           {"probability", e.probability}});
  }
  j["expects"] = nlohmann::ordered_json::array();
  for (const auto& e : expects) {
    j["expects"].push_back({{"line", e.line},
                            {"spec", e.spec},
                            {"threshold", e.threshold},
                            {"achieved", e.achieved},
                            {"pass", e.pass}});
  }
  j["reported"] = reported;
  j["failed"] = failed;
  j["final_state"] = {{"sites", site_labels},
                      {"dim", dim},
                      {"norm", norm},
                      {"cavity_top_mass", cavity_top_mass}};
  return j;
}

std::vector<std::pair<std::string, int>> unbound_params(
    const ProtocolScript& script, const std::map<std::string, double>& params) {
  std::vector<std::pair<std::string, int>> missing;
  std::set<std::string> seen;
  for (const auto& s : script.statements) {
    std::vector<std::string> needed;
    if (s.value) collect_params(*s.value, needed);
    if (s.matrix) {
      for (const auto& entry : s.matrix->entries) collect_params(*entry, needed);
    }
    if (s.bra && s.bra->kind == BraSpec::Kind::qubit) {
      collect_params(*s.bra->zeta, needed);
      collect_params(*s.bra->xi, needed);
    }
    for (const auto& name : needed) {
      if (!params.count(name) && seen.insert(name).second)
        missing.emplace_back(name, s.loc.line);
    }
  }
  return missing;
}

RunReport execute_script(const ProtocolScript& script,
                         const std::map<std::string, double>& params, std::uint64_t seed) {
  // Every ${name} must be bound before anything runs.
  if (const auto missing = unbound_params(script, params); !missing.empty())
    throw ScriptRuntimeError("unbound parameter '${" + missing.front().first + "}'",
                             missing.front().second);

  int n_max = 64;
  if (auto it = params.find("nmax"); it != params.end()) {
    if (it->second < 1.0 || it->second != std::floor(it->second))
      throw Error("parameter 'nmax' must be a positive integer");
    n_max = static_cast<int>(it->second);
  }

  Rng rng(seed);
  RunReport report;
  CompositeState state = CompositeState::ground({}, std::nullopt);
  std::map<std::string, std::string> measured;

  for (const auto& s : script.statements) {
    try {
      switch (s.kind) {
        case StmtKind::atom: {
          const AtomSite site{s.label, s.basis};
          std::array<cplx, 2> amp{cplx{0, 0}, cplx{0, 0}};
          amp[static_cast<std::size_t>(site.level_index(s.init_level))] = cplx{1, 0};
          state = extend_with_atom(state, site, amp);
          break;
        }
        case StmtKind::cavity: {
          const FockCutoff cutoff(n_max);
          CoherentVector cav = coherent_state(cplx{eval_expr(*s.value, params), 0.0}, cutoff);
          if (cav.tail_mass > 1e-12)
            throw TruncationError("coherent state does not fit the cutoff", cav.tail_mass);
          state = attach_cavity(state, cav.amp, cutoff);
          break;
        }
        case StmtKind::reset_cavity: {
          const FockCutoff cutoff(n_max);
          CoherentVector cav = coherent_state(cplx{eval_expr(*s.value, params), 0.0}, cutoff);
          if (cav.tail_mass > 1e-12)
            throw TruncationError("coherent state does not fit the cutoff", cav.tail_mass);
          state = reset_cavity(state, cav.amp);
          break;
        }
        case StmtKind::rotate: {
          Gate2 gate = Gate2::identity();
          if (s.matrix) {
            std::array<cplx, 4> m;
            for (int i = 0; i < 4; ++i)
              m[static_cast<std::size_t>(i)] =
                  cplx{eval_expr(*s.matrix->entries[static_cast<std::size_t>(i)], params), 0.0};
            gate = Gate2::custom(m);
          } else if (s.preset == "R_H") gate = Gate2::r_h();
          else if (s.preset == "K") gate = Gate2::k();
          else if (s.preset == "R5") gate = Gate2::r5();
          else if (s.preset == "Z_CORR") gate = Gate2::z_corr();
          else if (s.preset == "X_CORR") gate = Gate2::x_corr();
          else if (s.preset == "XZ_CORR") gate = Gate2::xz_corr();
          state = apply_gate(state, s.label, gate);
          break;
        }
        case StmtKind::dispersive:
          state = dispersive_gate(state, s.label, eval_expr(*s.value, params));
          break;
        case StmtKind::inject:
          state = displace(state, cplx{eval_expr(*s.value, params), 0.0});
          break;
        case StmtKind::jc:
          state = jc_evolve(state, s.label, eval_expr(*s.value, params));
          break;
        case StmtKind::measure: {
          MeasurementOutcome m = measure_atom(state, s.label, rng);
          state = std::move(m.post_state);
          measured[s.var] = m.level;
          report.measured.emplace_back(s.var, m.level);
          report.events.push_back({s.loc.line, "measure", s.label, m.level, m.probability});
          break;
        }
        case StmtKind::postselect: {
          auto [prob, post] = postselect(state, s.label, s.level);
          state = std::move(post);
          report.events.push_back({s.loc.line, "postselect", s.label, s.level, prob});
          break;
        }
        case StmtKind::correct: {
          const ClassicalMessage msg{s.sign, measured.at(s.vars[0]), measured.at(s.vars[1])};
          state = apply_gate(state, s.label, bob_correction(msg));
          break;
        }
        case StmtKind::expect: {
          double achieved = 0.0;
          std::string spec_str;
          if (s.bra->kind == BraSpec::Kind::bell) {
            const std::array<std::string, 2> labels{s.bra->atom1, s.bra->atom2};
            achieved = subsystem_fidelity(state, labels, bell_amplitudes(s.bra->bell));
            spec_str = "bell(" + s.bra->atom1 + "," + s.bra->atom2 + "," +
                       to_string(s.bra->bell) + ")";
          } else {
            const cplx zeta{eval_expr(*s.bra->zeta, params), 0.0};
            const cplx xi{eval_expr(*s.bra->xi, params), 0.0};
            if (std::abs(std::norm(zeta) + std::norm(xi) - 1.0) > 1e-10)
              throw UsageError("qubit fidelity target is not normalized");
            const std::array<std::string, 1> labels{s.bra->atom1};
            const std::array<cplx, 2> target{zeta, xi};
            achieved = subsystem_fidelity(state, labels, target);
            spec_str = "qubit(" + s.bra->atom1 + ",...)";
          }
          const double threshold = eval_expr(*s.value, params);
          const bool pass = achieved >= threshold;
          report.expects.push_back({s.loc.line, spec_str, threshold, achieved, pass});
          if (!pass) report.failed = true;
          break;
        }
        case StmtKind::report:
          report.reported = s.vars;
          break;
      }
    } catch (const ScriptRuntimeError&) {
      throw;
    } catch (const Error& e) {
      throw ScriptRuntimeError(e.what(), s.loc.line);
    }
  }

  for (const auto& site : state.sites()) report.site_labels.push_back(site.label);
  report.dim = state.dim();
  report.norm = std::sqrt(state.norm_sqr());
  report.cavity_top_mass = top_level_mass(state);
  report.final_state = std::move(state);
  return report;
}

}  // namespace cqt::script
