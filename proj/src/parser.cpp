#include "esl/parser.hpp"

#include <cctype>

#include "esl/eval.hpp"
#include "esl/proof.hpp"

namespace esl {

namespace {

enum class Tok {
  End, Ident, Nat, String,
  LParen, RParen, LBracket, RBracket, LBrace, RBrace,
  Comma, Semi, Dot, Colon, Assign,
  Plus, Minus, Star, Eq, EqEq, Neq, Lt, Le, Gt, Ge,
  PlusPlus, Bar, MapsTo, Hash, At,
  Or, AndA, Implies, Iff
};

struct Token {
  Tok kind;
  std::string text;
  uint64_t nat = 0;
  int line = 1;
};

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1;
  size_t i = 0;
  auto push = [&](Tok k, std::string t = "") {
    out.push_back({k, std::move(t), 0, line});
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (isdigit(static_cast<unsigned char>(c))) {
      uint64_t n = 0;
      while (i < src.size() && isdigit(static_cast<unsigned char>(src[i]))) {
        n = n * 10 + (src[i] - '0');
        ++i;
      }
      Token t{Tok::Nat, "", n, line};
      out.push_back(t);
      continue;
    }
    if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = i;
      while (i < src.size() &&
             (isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_' ||
              src[i] == '\'')) {
        ++i;
      }
      push(Tok::Ident, src.substr(start, i - start));
      continue;
    }
    if (c == '"') {
      size_t start = ++i;
      while (i < src.size() && src[i] != '"') ++i;
      if (i >= src.size()) throw ParseError("unterminated string", line);
      push(Tok::String, src.substr(start, i - start));
      ++i;
      continue;
    }
    auto two = [&](char a, char b) {
      return c == a && i + 1 < src.size() && src[i + 1] == b;
    };
    if (c == '|' && i + 2 < src.size() && src[i + 1] == '-' && src[i + 2] == '>') {
      push(Tok::MapsTo);
      i += 3;
      continue;
    }
    if (two(':', '=')) { push(Tok::Assign); i += 2; continue; }
    if (two('=', '=')) { push(Tok::EqEq); i += 2; continue; }
    if (two('=', '>')) { push(Tok::Implies); i += 2; continue; }
    if (two('!', '=')) { push(Tok::Neq); i += 2; continue; }
    if (two('<', '=')) {
      if (i + 2 < src.size() && src[i + 2] == '>') {
        push(Tok::Iff);
        i += 3;
      } else {
        push(Tok::Le);
        i += 2;
      }
      continue;
    }
    if (two('>', '=')) { push(Tok::Ge); i += 2; continue; }
    if (two('+', '+')) { push(Tok::PlusPlus); i += 2; continue; }
    if (two('\\', '/')) { push(Tok::Or); i += 2; continue; }
    if (two('/', '\\')) { push(Tok::AndA); i += 2; continue; }
    switch (c) {
      case '(': push(Tok::LParen); break;
      case ')': push(Tok::RParen); break;
      case '[': push(Tok::LBracket); break;
      case ']': push(Tok::RBracket); break;
      case '{': push(Tok::LBrace); break;
      case '}': push(Tok::RBrace); break;
      case ',': push(Tok::Comma); break;
      case ';': push(Tok::Semi); break;
      case '.': push(Tok::Dot); break;
      case ':': push(Tok::Colon); break;
      case '+': push(Tok::Plus); break;
      case '-': push(Tok::Minus); break;
      case '*': push(Tok::Star); break;
      case '=': push(Tok::Eq); break;
      case '<': push(Tok::Lt); break;
      case '>': push(Tok::Gt); break;
      case '|': push(Tok::Bar); break;
      case '#': push(Tok::Hash); break;
      case '@': push(Tok::At); break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line);
    }
    ++i;
  }
  out.push_back({Tok::End, "", 0, line});
  return out;
}

struct Parser {
  std::vector<Token> toks;
  size_t pos = 0;
  bool logic_vars = false;  // plain identifiers are logical variables
  std::set<std::string> preds;

  const Token& peek(size_t k = 0) const {
    return toks[std::min(pos + k, toks.size() - 1)];
  }
  const Token& cur() const { return toks[pos]; }
  int line() const { return cur().line; }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_kw(const char* kw) const {
    return cur().kind == Tok::Ident && cur().text == kw;
  }
  Token take() { return toks[pos++]; }
  void expect(Tok k, const char* what) {
    if (!at(k)) throw ParseError(std::string("expected ") + what, line());
    ++pos;
  }
  bool accept(Tok k) {
    if (at(k)) {
      ++pos;
      return true;
    }
    return false;
  }
  bool accept_kw(const char* kw) {
    if (at_kw(kw)) {
      ++pos;
      return true;
    }
    return false;
  }
  std::string expect_ident(const char* what) {
    if (!at(Tok::Ident)) throw ParseError(std::string("expected ") + what, line());
    return take().text;
  }
  void expect_kw(const char* kw) {
    if (!accept_kw(kw))
      throw ParseError(std::string("expected '") + kw + "'", line());
  }

  // ----- expressions ---------------------------------------------------

  ExprPtr expr() { return or_expr(); }

  ExprPtr or_expr() {
    ExprPtr e = and_expr();
    while (at_kw("or")) {
      ++pos;
      ExprPtr r = and_expr();
      // a or b  ==  not (not a and not b)
      e = mk_not(mk_binary(BinOp::And, mk_not(e), mk_not(r)));
    }
    return e;
  }

  ExprPtr and_expr() {
    ExprPtr e = cmp_expr();
    while (at_kw("and")) {
      ++pos;
      e = mk_binary(BinOp::And, e, cmp_expr());
    }
    return e;
  }

  std::optional<Carrier> carrier_name(const std::string& s) {
    if (s == "Val") return Carrier::Val;
    if (s == "Nat") return Carrier::Nat;
    if (s == "Bool") return Carrier::Bool;
    if (s == "Str") return Carrier::Str;
    if (s == "List") return Carrier::List;
    return std::nullopt;
  }

  ExprPtr cmp_expr() {
    ExprPtr e = cat_expr();
    switch (cur().kind) {
      case Tok::Eq:
      case Tok::EqEq:
        ++pos;
        return mk_eq(e, cat_expr());
      case Tok::Neq:
        ++pos;
        return mk_not(mk_eq(e, cat_expr()));
      case Tok::Lt:
        ++pos;
        return mk_binary(BinOp::Lt, e, cat_expr());
      case Tok::Gt:
        ++pos;
        return mk_binary(BinOp::Lt, cat_expr(), e);
      case Tok::Le: {
        ++pos;
        ExprPtr r = cat_expr();
        auto lt = mk_binary(BinOp::Lt, e, r);
        auto eq = mk_eq(e, r);
        return mk_not(mk_binary(BinOp::And, mk_not(lt), mk_not(eq)));
      }
      case Tok::Ge: {
        ++pos;
        ExprPtr r = cat_expr();
        auto lt = mk_binary(BinOp::Lt, r, e);
        auto eq = mk_eq(r, e);
        return mk_not(mk_binary(BinOp::And, mk_not(lt), mk_not(eq)));
      }
      default:
        break;
    }
    if (at_kw("in")) {
      ++pos;
      std::string name = expect_ident("carrier set");
      auto c = carrier_name(name);
      if (!c) throw ParseError("unknown carrier set '" + name + "'", line());
      return mk_inset(e, *c);
    }
    return e;
  }

  ExprPtr cat_expr() {
    ExprPtr e = add_expr();
    if (at(Tok::Colon)) {
      ++pos;
      return mk_binary(BinOp::Cons, e, cat_expr());
    }
    if (at(Tok::PlusPlus)) {
      ++pos;
      return mk_binary(BinOp::Concat, e, cat_expr());
    }
    return e;
  }

  ExprPtr add_expr() {
    ExprPtr e = mul_expr();
    for (;;) {
      if (at(Tok::Plus)) {
        ++pos;
        e = mk_add(e, mul_expr());
      } else if (at(Tok::Minus)) {
        ++pos;
        e = mk_sub(e, mul_expr());
      } else {
        return e;
      }
    }
  }

  ExprPtr mul_expr() {
    ExprPtr e = un_expr();
    while (at_kw("mod")) {
      ++pos;
      e = mk_binary(BinOp::Mod, e, un_expr());
    }
    return e;
  }

  ExprPtr un_expr() {
    if (accept_kw("not")) return mk_not(un_expr());
    return atom_expr();
  }

  ExprPtr atom_expr() {
    if (at(Tok::Nat)) return mk_nat(take().nat);
    if (at(Tok::String)) return mk_str(take().text);
    if (accept(Tok::LParen)) {
      ExprPtr e = expr();
      expect(Tok::RParen, "')'");
      return e;
    }
    if (accept(Tok::LBracket)) {
      std::vector<ExprPtr> elems;
      if (!at(Tok::RBracket)) {
        elems.push_back(expr());
        while (accept(Tok::Comma)) elems.push_back(expr());
      }
      expect(Tok::RBracket, "']'");
      return mk_list(std::move(elems));
    }
    if (accept(Tok::Bar)) {
      ExprPtr e = expr();
      expect(Tok::Bar, "'|'");
      return mk_unary(UnOp::Len, e);
    }
    if (accept(Tok::At)) {
      if (!logic_vars)
        throw ParseError("'@' is only used in assertions", line());
      return mk_pvar(expect_ident("program variable"));
    }
    if (at(Tok::Ident)) {
      const std::string& name = cur().text;
      if (name == "true") { ++pos; return mk_bool(true); }
      if (name == "false") { ++pos; return mk_bool(false); }
      if (name == "nil") { ++pos; return mk_nil(); }
      if (is_mathfn(name) && peek(1).kind == Tok::LParen) {
        ++pos;
        ++pos;
        std::vector<ExprPtr> args;
        if (!at(Tok::RParen)) {
          args.push_back(expr());
          while (accept(Tok::Comma)) args.push_back(expr());
        }
        expect(Tok::RParen, "')'");
        return mk_mathapp(name, std::move(args));
      }
      std::string id = take().text;
      return logic_vars ? mk_lvar(id) : mk_pvar(id);
    }
    throw ParseError("expected an expression", line());
  }

  // ----- assertions ----------------------------------------------------

  AssertionPtr assertion() {
    if (accept_kw("exists")) {
      std::vector<std::string> vars;
      vars.push_back(expect_ident("variable"));
      while (accept(Tok::Comma)) vars.push_back(expect_ident("variable"));
      expect(Tok::Dot, "'.'");
      return mk_exists_many(vars, assertion());
    }
    return impl_assert();
  }

  AssertionPtr impl_assert() {
    AssertionPtr a = disj_assert();
    if (accept(Tok::Implies)) return mk_implies(a, impl_assert());
    return a;
  }

  AssertionPtr disj_assert() {
    AssertionPtr a = conj_assert();
    std::vector<AssertionPtr> parts{a};
    while (accept(Tok::Or)) parts.push_back(conj_assert());
    if (parts.size() == 1) return a;
    return mk_or_many(parts);
  }

  AssertionPtr conj_assert() {
    AssertionPtr a = star_assert();
    while (accept(Tok::AndA)) a = mk_and(a, star_assert());
    return a;
  }

  AssertionPtr star_assert() {
    std::vector<AssertionPtr> parts{atom_assert()};
    while (at(Tok::Star)) {
      ++pos;
      parts.push_back(atom_assert());
    }
    if (parts.size() == 1) return parts.front();
    return mk_star_many(std::move(parts));
  }

  AssertionPtr cell_tail(ExprPtr addr) {
    // after '|->': '#' or expr, comma-separated for consecutive cells
    std::vector<AssertionPtr> cells;
    uint64_t offset = 0;
    for (;;) {
      ExprPtr at_addr =
          offset == 0 ? addr : mk_add(addr, mk_nat(offset));
      if (accept(Tok::Hash)) {
        cells.push_back(mk_freed(at_addr));
      } else {
        cells.push_back(mk_cell(at_addr, expr()));
      }
      ++offset;
      if (!accept(Tok::Comma)) break;
    }
    return mk_star_many(cells);
  }

  AssertionPtr atom_assert() {
    if (accept_kw("emp")) return mk_emp();
    if (accept_kw("False")) return mk_false();
    if (accept_kw("True")) return mk_trueassert();
    if (at_kw("exists")) return assertion();
    if (accept_kw("bigstar")) {
      std::string var = expect_ident("index variable");
      expect_kw("in");
      expect(Tok::LBracket, "'['");
      ExprPtr lo = expr();
      expect(Tok::Comma, "','");
      ExprPtr hi = expr();
      expect(Tok::RParen, "')'");
      expect(Tok::Dot, "'.'");
      return mk_iterstar(var, lo, hi, atom_assert());
    }
    if (at(Tok::LParen)) {
      // Could be a parenthesised assertion or a parenthesised expression.
      size_t save = pos;
      try {
        ++pos;
        AssertionPtr a = assertion();
        expect(Tok::RParen, "')'");
        // If an expression operator follows, this was an expression paren.
        switch (cur().kind) {
          case Tok::Plus: case Tok::Minus: case Tok::Eq: case Tok::EqEq:
          case Tok::Neq: case Tok::Lt: case Tok::Le: case Tok::Gt:
          case Tok::Ge: case Tok::Colon: case Tok::PlusPlus: case Tok::MapsTo:
            pos = save;
            break;
          default:
            if (at_kw("in") || at_kw("and") || at_kw("or") || at_kw("mod")) {
              pos = save;
              break;
            }
            return a;
        }
      } catch (const ParseError&) {
        pos = save;
      }
    }
    if (at(Tok::Ident) && preds.count(cur().text) &&
        peek(1).kind == Tok::LParen) {
      std::string name = take().text;
      expect(Tok::LParen, "'('");
      std::vector<ExprPtr> args;
      if (!at(Tok::RParen)) {
        args.push_back(expr());
        while (accept(Tok::Comma)) args.push_back(expr());
      }
      expect(Tok::RParen, "')'");
      return mk_pred(name, std::move(args));
    }
    ExprPtr e = expr();
    if (accept(Tok::MapsTo)) return cell_tail(e);
    return mk_boolassert(e);
  }

  // ----- commands --------------------------------------------------------

  bool command_stops() {
    return at(Tok::End) || at(Tok::RBrace) || at_kw("return");
  }

  CommandPtr simple_command() {
    bool was_logic = logic_vars;
    logic_vars = false;
    auto restore = [&]() { logic_vars = was_logic; };
    try {
      CommandPtr c = simple_command_inner();
      restore();
      return c;
    } catch (...) {
      restore();
      throw;
    }
  }

  CommandPtr simple_command_inner() {
    if (accept_kw("skip")) return mk_skip();
    if (accept_kw("if")) {
      expect(Tok::LParen, "'('");
      ExprPtr cond = expr();
      expect(Tok::RParen, "')'");
      expect(Tok::LBrace, "'{'");
      CommandPtr t = command();
      expect(Tok::RBrace, "'}'");
      expect_kw("else");
      expect(Tok::LBrace, "'{'");
      CommandPtr e = command();
      expect(Tok::RBrace, "'}'");
      return mk_if(cond, t, e);
    }
    if (accept_kw("while")) {
      expect(Tok::LParen, "'('");
      ExprPtr cond = expr();
      expect(Tok::RParen, "')'");
      expect(Tok::LBrace, "'{'");
      CommandPtr body = command();
      expect(Tok::RBrace, "'}'");
      return mk_while(cond, body);
    }
    if (accept_kw("free")) {
      expect(Tok::LParen, "'('");
      ExprPtr e = expr();
      expect(Tok::RParen, "')'");
      return mk_free(e);
    }
    if (accept_kw("error")) {
      expect(Tok::LParen, "'('");
      ExprPtr e = expr();
      expect(Tok::RParen, "')'");
      return mk_error(e);
    }
    if (accept(Tok::LBracket)) {
      ExprPtr addr = expr();
      expect(Tok::RBracket, "']'");
      expect(Tok::Assign, "':='");
      return mk_mutate(addr, expr());
    }
    if (at(Tok::Ident)) {
      std::string target = take().text;
      expect(Tok::Assign, "':='");
      if (accept_kw("nondet")) return mk_nondet(target);
      if (accept_kw("new")) {
        expect(Tok::LParen, "'('");
        ExprPtr e = expr();
        expect(Tok::RParen, "')'");
        return mk_alloc(target, e);
      }
      if (at(Tok::LBracket)) {
        ++pos;
        ExprPtr addr = expr();
        expect(Tok::RBracket, "']'");
        return mk_lookup(target, addr);
      }
      if (at(Tok::Ident) && !is_mathfn(cur().text) &&
          peek(1).kind == Tok::LParen && cur().text != "true" &&
          cur().text != "false" && cur().text != "nil" &&
          cur().text != "not") {
        std::string fun = take().text;
        expect(Tok::LParen, "'('");
        std::vector<ExprPtr> args;
        if (!at(Tok::RParen)) {
          args.push_back(expr());
          while (accept(Tok::Comma)) args.push_back(expr());
        }
        expect(Tok::RParen, "')'");
        return mk_funcall(target, fun, args);
      }
      return mk_assign(target, expr());
    }
    throw ParseError("expected a command", line());
  }

  CommandPtr command() {
    CommandPtr c = simple_command();
    if (at(Tok::Semi)) {
      ++pos;
      if (command_stops()) return c;
      return mk_seq(c, command());
    }
    return c;
  }

  // ----- programs --------------------------------------------------------

  FunctionDef fndef() {
    expect_kw("fn");
    FunctionDef def;
    def.name = expect_ident("function name");
    expect(Tok::LParen, "'('");
    if (!at(Tok::RParen)) {
      def.params.push_back(expect_ident("parameter"));
      while (accept(Tok::Comma)) def.params.push_back(expect_ident("parameter"));
    }
    expect(Tok::RParen, "')'");
    expect(Tok::LBrace, "'{'");
    if (at_kw("return")) {
      def.body = mk_skip();
    } else {
      def.body = command();
      accept(Tok::Semi);
    }
    expect_kw("return");
    bool was = logic_vars;
    logic_vars = false;
    def.return_expr = expr();
    logic_vars = was;
    expect(Tok::RBrace, "'}'");
    return def;
  }

  Program program() {
    Program out;
    while (!at(Tok::End)) {
      if (at_kw("fn")) {
        out.funcs.add(fndef());
      } else if (accept_kw("main")) {
        expect(Tok::LBrace, "'{'");
        out.main = command();
        expect(Tok::RBrace, "'}'");
      } else {
        throw ParseError("expected 'fn' or 'main'", line());
      }
    }
    return out;
  }

  // ----- predicate definitions -------------------------------------------

  PredDef preddef() {
    expect_kw("pred");
    PredDef def;
    def.name = expect_ident("predicate name");
    expect(Tok::LParen, "'('");
    if (!at(Tok::RParen)) {
      def.params.push_back(expect_ident("parameter"));
      while (accept(Tok::Comma)) def.params.push_back(expect_ident("parameter"));
    }
    expect(Tok::RParen, "')'");
    expect(Tok::Assign, "':='");
    def.body = assertion();
    expect(Tok::Semi, "';'");
    return def;
  }

  // Pre-scan for declared predicate names so bodies may reference them in
  // any order.
  void scan_pred_names() {
    for (size_t i = 0; i + 1 < toks.size(); ++i) {
      if (toks[i].kind == Tok::Ident && toks[i].text == "pred" &&
          toks[i + 1].kind == Tok::Ident) {
        preds.insert(toks[i + 1].text);
      }
    }
  }

  AssertionPtr post_or_false(const char* kw) {
    if (accept_kw(kw)) {
      expect(Tok::LBrace, "'{'");
      AssertionPtr a = assertion();
      expect(Tok::RBrace, "'}'");
      return a;
    }
    return mk_false();
  }

  // ----- spec files --------------------------------------------------------

  SpecFile spec_file() {
    SpecFile out;
    while (!at(Tok::End)) {
      if (at_kw("pred")) {
        out.preds.push_back(preddef());
        continue;
      }
      expect_kw("spec");
      SpecItem item;
      item.name = expect_ident("spec name");
      expect_kw("for");
      if (accept_kw("cmd")) {
        expect(Tok::LBrace, "'{'");
        item.target_cmd = command();
        expect(Tok::RBrace, "'}'");
      } else {
        accept_kw("fn");
        item.target_fun = expect_ident("function name");
      }
      expect(Tok::LBrace, "'{'");
      expect_kw("pre");
      expect(Tok::LBrace, "'{'");
      item.pre = assertion();
      expect(Tok::RBrace, "'}'");
      item.post_ok = post_or_false("ok");
      item.post_err = post_or_false("err");
      expect(Tok::RBrace, "'}'");
      out.specs.push_back(std::move(item));
    }
    return out;
  }

  // ----- proof scripts ------------------------------------------------------

  ProofBody proof_body() {
    ProofBody body;
    while (!at(Tok::RBrace) && !at(Tok::End)) {
      ProofElem el;
      el.line = line();
      if (accept(Tok::LBrace)) {
        el.kind = ProofElem::Kind::Assert;
        el.assert_ = assertion();
        expect(Tok::RBrace, "'}'");
        body.push_back(std::move(el));
        continue;
      }
      if (at_kw("return")) {
        ++pos;
        el.kind = ProofElem::Kind::Return;
        bool was = logic_vars;
        logic_vars = false;
        el.ret_expr = expr();
        logic_vars = was;
        body.push_back(std::move(el));
        continue;
      }
      if (at_kw("if")) {
        ++pos;
        el.kind = ProofElem::Kind::IfElse;
        expect(Tok::LParen, "'('");
        bool was = logic_vars;
        logic_vars = false;
        el.cond = expr();
        logic_vars = was;
        expect(Tok::RParen, "')'");
        expect(Tok::LBrace, "'{'");
        el.then_body = std::make_shared<ProofBody>(proof_body());
        expect(Tok::RBrace, "'}'");
        expect_kw("else");
        expect(Tok::LBrace, "'{'");
        el.else_body = std::make_shared<ProofBody>(proof_body());
        expect(Tok::RBrace, "'}'");
        body.push_back(std::move(el));
        continue;
      }
      if (at_kw("while")) {
        ++pos;
        el.kind = ProofElem::Kind::WhileLoop;
        expect(Tok::LParen, "'('");
        bool was = logic_vars;
        logic_vars = false;
        el.cond = expr();
        logic_vars = was;
        expect(Tok::RParen, "')'");
        if (accept_kw("err_val")) {
          el.rule = "while-err-val";
          if (!at(Tok::Nat)) throw ParseError("expected the faulting index", line());
          el.line = el.line;  // keep
          el.call.inst.emplace("#j", mk_nat(take().nat));
        } else if (accept_kw("err_type")) {
          el.rule = "while-err-type";
          if (!at(Tok::Nat)) throw ParseError("expected the faulting index", line());
          el.call.inst.emplace("#j", mk_nat(take().nat));
        }
        expect_kw("families");
        expect(Tok::LParen, "'('");
        WhileFamilies fam;
        fam.index_var = expect_ident("index variable");
        expect(Tok::RParen, "')'");
        expect(Tok::LBrace, "'{'");
        expect_kw("P");
        expect(Tok::LBrace, "'{'");
        fam.p_family = assertion();
        expect(Tok::RBrace, "'}'");
        if (accept_kw("Q")) {
          expect(Tok::LBrace, "'{'");
          fam.q_family = assertion();
          expect(Tok::RBrace, "'}'");
        } else {
          fam.q_family = mk_false();
        }
        expect_kw("body");
        expect(Tok::LBrace, "'{'");
        fam.body = proof_body();
        expect(Tok::RBrace, "'}'");
        expect(Tok::RBrace, "'}'");
        el.families = std::make_shared<WhileFamilies>(std::move(fam));
        body.push_back(std::move(el));
        continue;
      }
      if (accept_kw("if_err")) {
        // A faulting conditional: the guard itself is at fault, no branch
        // runs. Checked against the if-err-val / if-err-type rules.
        el.kind = ProofElem::Kind::Basic;
        expect(Tok::LParen, "'('");
        bool was = logic_vars;
        logic_vars = false;
        ExprPtr cond = expr();
        logic_vars = was;
        expect(Tok::RParen, "')'");
        el.cmd = mk_if(cond, mk_skip(), mk_skip());
        el.rule = "if-err-val";
        if (accept(Tok::LBracket)) {
          expect_kw("rule");
          el.rule = expect_ident("rule name");
          while (accept(Tok::Minus)) el.rule += "-" + expect_ident("rule name");
          expect(Tok::RBracket, "']'");
        }
        expect(Tok::Semi, "';'");
        body.push_back(std::move(el));
        continue;
      }
      // A basic command or a call, with an optional hint block.
      CommandPtr c = simple_command();
      bool is_call = std::holds_alternative<Command::FunCall>(c->node);
      el.kind = is_call ? ProofElem::Kind::Call : ProofElem::Kind::Basic;
      el.cmd = c;
      if (accept(Tok::LBracket)) {
        for (;;) {
          if (accept_kw("rule")) {
            el.rule = expect_ident("rule name");
            if (accept(Tok::Minus)) {
              // allow hyphenated rule names: lookup-err-type etc.
              el.rule += "-" + expect_ident("rule name");
              while (accept(Tok::Minus)) el.rule += "-" + expect_ident("rule name");
            }
          } else if (accept_kw("use")) {
            el.call.use = expect_ident("spec name");
            if (accept_kw("nt")) el.call.use_nt = true;
          } else if (accept_kw("inst")) {
            expect(Tok::LParen, "'('");
            if (!at(Tok::RParen)) {
              for (;;) {
                std::string v = expect_ident("logical variable");
                expect(Tok::Colon, "':'");
                el.call.inst.emplace(v, expr());
                if (!accept(Tok::Comma)) break;
              }
            }
            expect(Tok::RParen, "')'");
          } else if (accept_kw("frame")) {
            expect(Tok::LParen, "'('");
            el.call.frame = assertion();
            expect(Tok::RParen, "')'");
          } else if (accept_kw("old")) {
            el.call.old_target = expr();
          } else {
            throw ParseError("unknown hint", line());
          }
          if (!accept(Tok::Comma)) break;
        }
        expect(Tok::RBracket, "']'");
      }
      expect(Tok::Semi, "';'");
      body.push_back(std::move(el));
    }
    return body;
  }

  ProofScript proof_script() {
    ProofScript out;
    scan_pred_names();
    while (!at(Tok::End)) {
      if (at_kw("pred")) {
        out.preds.push_back(preddef());
        continue;
      }
      if (at_kw("lemma")) {
        ++pos;
        LemmaDecl lem;
        lem.line = line();
        lem.name = expect_ident("lemma name");
        expect(Tok::Colon, "':'");
        lem.lhs = assertion();
        expect(Tok::Iff, "'<=>'");
        lem.rhs = assertion();
        expect(Tok::Semi, "';'");
        out.items.emplace_back(std::move(lem));
        continue;
      }
      if (at_kw("derive")) {
        ++pos;
        DeriveDecl d;
        d.line = line();
        d.name = expect_ident("derived spec name");
        expect_kw("from");
        d.from = expect_ident("source spec");
        if (accept_kw("nt")) d.from_nt = true;
        expect(Tok::LBrace, "'{'");
        while (!at(Tok::RBrace)) {
          AdmStep step;
          step.line = line();
          std::string kw = expect_ident("admissibility step");
          if (kw == "adm_exists") {
            step.kind = AdmStep::Kind::Exists;
            step.var = expect_ident("variable");
          } else if (kw == "adm_frame") {
            step.kind = AdmStep::Kind::Frame;
            expect(Tok::LParen, "'('");
            step.frame = assertion();
            expect(Tok::RParen, "')'");
          } else if (kw == "adm_equiv") {
            step.kind = AdmStep::Kind::Equiv;
            expect(Tok::LBrace, "'{'");
            expect_kw("pre");
            expect(Tok::LBrace, "'{'");
            step.eq_pre = assertion();
            expect(Tok::RBrace, "'}'");
            step.eq_ok = post_or_false("ok");
            step.eq_err = post_or_false("err");
            expect(Tok::RBrace, "'}'");
          } else if (kw == "adm_disj") {
            step.kind = AdmStep::Kind::Disj;
            step.other = expect_ident("other derived spec");
          } else if (kw == "adm_alpha_equiv") {
            step.kind = AdmStep::Kind::AlphaEquiv;
            expect(Tok::LParen, "'('");
            for (;;) {
              std::string from = expect_ident("variable");
              expect(Tok::Colon, "':'");
              std::string to = expect_ident("variable");
              step.renames.emplace_back(from, to);
              if (!accept(Tok::Comma)) break;
            }
            expect(Tok::RParen, "')'");
          } else {
            throw ParseError("unknown admissibility step '" + kw + "'", line());
          }
          expect(Tok::Semi, "';'");
          d.steps.push_back(std::move(step));
        }
        expect(Tok::RBrace, "'}'");
        out.items.emplace_back(std::move(d));
        continue;
      }
      if (at_kw("block")) {
        ++pos;
        EnvBlock block;
        block.line = line();
        if (accept_kw("alpha_max")) {
          if (!at(Tok::Nat)) throw ParseError("expected a number", line());
          block.alpha_max = take().nat;
        }
        expect(Tok::LBrace, "'{'");
        while (!at(Tok::RBrace)) {
          if (at_kw("fn")) {
            block.funcs.push_back(fndef());
            continue;
          }
          if (at_kw("spec")) {
            ++pos;
            ExternalSpecDecl spec;
            spec.fun = expect_ident("function name");
            if (accept_kw("nonterminating")) spec.kind = SpecKind::NT;
            if (accept_kw("measure")) spec.measure = expr();
            expect(Tok::LBrace, "'{'");
            expect_kw("pre");
            expect(Tok::LBrace, "'{'");
            spec.pre = assertion();
            expect(Tok::RBrace, "'}'");
            spec.post_ok = post_or_false("ok");
            spec.post_err = post_or_false("err");
            expect(Tok::RBrace, "'}'");
            block.specs.push_back(std::move(spec));
            continue;
          }
          if (at_kw("proof")) {
            ++pos;
            ProofDecl p;
            p.line = line();
            p.fun = expect_ident("function name");
            if (accept_kw("nt")) p.nt = true;
            if (accept_kw("case")) {
              expect(Tok::LBrace, "'{'");
              expect_kw("pre");
              expect(Tok::LBrace, "'{'");
              p.case_pre = assertion();
              expect(Tok::RBrace, "'}'");
              p.case_ok = post_or_false("ok");
              p.case_err = post_or_false("err");
              expect(Tok::RBrace, "'}'");
            }
            expect(Tok::LBrace, "'{'");
            p.body = proof_body();
            expect(Tok::RBrace, "'}'");
            block.proofs.push_back(std::move(p));
            continue;
          }
          throw ParseError("expected 'fn', 'spec' or 'proof'", line());
        }
        expect(Tok::RBrace, "'}'");
        out.items.emplace_back(std::move(block));
        continue;
      }
      throw ParseError("expected 'pred', 'lemma', 'derive' or 'block'", line());
    }
    return out;
  }
};

Parser make_parser(const std::string& text, bool logic,
                   const std::set<std::string>& preds) {
  Parser p;
  p.toks = lex(text);
  p.logic_vars = logic;
  p.preds = preds;
  return p;
}

}  // namespace

Program parse_program(const std::string& text) {
  Parser p = make_parser(text, false, {});
  return p.program();
}

ExprPtr parse_pexpr(const std::string& text) {
  Parser p = make_parser(text, false, {});
  ExprPtr e = p.expr();
  p.expect(Tok::End, "end of input");
  return e;
}

ExprPtr parse_lexpr(const std::string& text) {
  Parser p = make_parser(text, true, {});
  ExprPtr e = p.expr();
  p.expect(Tok::End, "end of input");
  return e;
}

CommandPtr parse_command(const std::string& text) {
  Parser p = make_parser(text, false, {});
  CommandPtr c = p.command();
  p.expect(Tok::End, "end of input");
  return c;
}

AssertionPtr parse_assertion(const std::string& text,
                             const std::set<std::string>& pred_names) {
  Parser p = make_parser(text, true, pred_names);
  AssertionPtr a = p.assertion();
  p.expect(Tok::End, "end of input");
  return a;
}

std::vector<PredDef> parse_pred_file(const std::string& text,
                                     const std::set<std::string>& known) {
  Parser p = make_parser(text, true, known);
  p.scan_pred_names();
  std::vector<PredDef> out;
  while (!p.at(Tok::End)) out.push_back(p.preddef());
  return out;
}

SpecFile parse_spec_file(const std::string& text,
                         const std::set<std::string>& builtin_preds) {
  Parser p = make_parser(text, true, builtin_preds);
  p.scan_pred_names();
  return p.spec_file();
}

ProofScript parse_proof_script(const std::string& text,
                               const std::set<std::string>& builtin_preds) {
  Parser p = make_parser(text, true, builtin_preds);
  return p.proof_script();
}

}  // namespace esl
