#include "mlq/surface.hpp"

#include <cctype>
#include <optional>
#include <set>

#include "mlq/substitution.hpp"

namespace mlq {

ParseError::ParseError(SourcePos pos, std::vector<std::string> expected, const std::string& message)
    : Error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message),
      pos_(pos),
      expected_(std::move(expected)),
      detail_(message) {}

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok {
  Int, Var, FunId, Hole,
  Fun, Letrec, Let, In, Case, Of, Then, Else, Apply,
  LParen, RParen, LBrack, RBrack, Bar, Comma, Plus, Eq, Arrow, Semi,
  End
};

struct Token {
  Tok kind;
  std::string text;  // identifier, digits, or the lexeme
  std::size_t arity = 0;
  SourcePos pos;
};

std::string describe(Tok t) {
  switch (t) {
    case Tok::Int: return "integer";
    case Tok::Var: return "variable";
    case Tok::FunId: return "function identifier";
    case Tok::Hole: return "'□'";
    case Tok::Fun: return "'fun'";
    case Tok::Letrec: return "'letrec'";
    case Tok::Let: return "'let'";
    case Tok::In: return "'in'";
    case Tok::Case: return "'case'";
    case Tok::Of: return "'of'";
    case Tok::Then: return "'then'";
    case Tok::Else: return "'else'";
    case Tok::Apply: return "'apply'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrack: return "'['";
    case Tok::RBrack: return "']'";
    case Tok::Bar: return "'|'";
    case Tok::Comma: return "','";
    case Tok::Plus: return "'+'";
    case Tok::Eq: return "'='";
    case Tok::Arrow: return "'->'";
    case Tok::Semi: return "';'";
    case Tok::End: return "end of input";
  }
  return "?";
}

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      SourcePos at = pos_;
      if (i_ >= src_.size()) {
        out.push_back({Tok::End, "", 0, at});
        return out;
      }
      out.push_back(next(at));
    }
  }

 private:
  void bump(std::size_t n = 1) {
    for (std::size_t k = 0; k < n && i_ < src_.size(); ++k, ++i_) {
      unsigned char c = static_cast<unsigned char>(src_[i_]);
      if (c == '\n') {
        ++pos_.line;
        pos_.column = 1;
      } else if ((c & 0xC0) != 0x80) {
        ++pos_.column;
      }
    }
  }

  void skip_space() {
    while (i_ < src_.size()) {
      char c = src_[i_];
      if (c == '%') {
        while (i_ < src_.size() && src_[i_] != '\n') bump();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else {
        return;
      }
    }
  }

  bool at(std::string_view s) const { return src_.substr(i_, s.size()) == s; }

  Token next(SourcePos at_pos) {
    static constexpr std::string_view kBox = "\xE2\x96\xA1";  // □
    char c = src_[i_];
    auto single = [&](Tok t, std::size_t n) {
      Token tok{t, std::string(src_.substr(i_, n)), 0, at_pos};
      bump(n);
      return tok;
    };
    if (at(kBox)) return single(Tok::Hole, kBox.size());
    if (at("->")) return single(Tok::Arrow, 2);
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && i_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
      std::size_t j = i_ + 1;
      while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
      return single(Tok::Int, j - i_);
    }
    if (c == '_' && (i_ + 1 >= src_.size() || !ident_char(src_[i_ + 1]))) return single(Tok::Hole, 1);
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i_ + 1;
      while (j < src_.size() && ident_char(src_[j])) ++j;
      std::string word(src_.substr(i_, j - i_));
      if (std::isupper(static_cast<unsigned char>(c))) return single(Tok::Var, j - i_);
      static const std::pair<const char*, Tok> kKeywords[] = {
          {"fun", Tok::Fun},   {"letrec", Tok::Letrec}, {"let", Tok::Let},   {"in", Tok::In},
          {"case", Tok::Case}, {"of", Tok::Of},         {"then", Tok::Then}, {"else", Tok::Else},
          {"apply", Tok::Apply}};
      for (auto [kw, t] : kKeywords) {
        if (word == kw) return single(t, j - i_);
      }
      if (j < src_.size() && src_[j] == '/') {
        std::size_t d = j + 1;
        while (d < src_.size() && std::isdigit(static_cast<unsigned char>(src_[d]))) ++d;
        if (d > j + 1) {
          Token tok{Tok::FunId, word, std::stoul(std::string(src_.substr(j + 1, d - j - 1))), at_pos};
          bump(d - i_);
          return tok;
        }
      }
      throw ParseError(at_pos, {"function identifier f/k"},
                       "lowercase identifier '" + word + "' needs an arity, as in " + word + "/1");
    }
    switch (c) {
      case '(': return single(Tok::LParen, 1);
      case ')': return single(Tok::RParen, 1);
      case '[': return single(Tok::LBrack, 1);
      case ']': return single(Tok::RBrack, 1);
      case '|': return single(Tok::Bar, 1);
      case ',': return single(Tok::Comma, 1);
      case '+': return single(Tok::Plus, 1);
      case '=': return single(Tok::Eq, 1);
      case ';': return single(Tok::Semi, 1);
      default: break;
    }
    throw ParseError(at_pos, {}, "unexpected character '" + std::string(1, c) + "'");
  }

  std::string_view src_;
  std::size_t i_ = 0;
  SourcePos pos_;
};

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  Parser(std::vector<Token> toks, bool holes) : toks_(std::move(toks)), holes_(holes) {}

  NamedExpr whole_expr() {
    Expr e = expr();
    expect(Tok::End);
    return NamedExpr{e};
  }

  Pattern whole_pattern() {
    std::set<std::string> seen;
    Pattern p = pattern(seen);
    expect(Tok::End);
    return p;
  }

  Expr expr() {
    Expr lhs = term();
    while (peek().kind == Tok::Plus) {
      advance();
      lhs = Expr::add(lhs, term());
    }
    return lhs;
  }

  const Token& peek() const { return toks_[i_]; }
  std::size_t holes_seen() const { return hole_count_; }

  [[noreturn]] void fail(std::vector<Tok> expected) const {
    std::vector<std::string> names;
    std::string msg = "expected ";
    for (std::size_t k = 0; k < expected.size(); ++k) {
      names.push_back(describe(expected[k]));
      if (k) msg += k + 1 == expected.size() ? " or " : ", ";
      msg += names.back();
    }
    const Token& t = peek();
    msg += ", found " + (t.kind == Tok::End ? std::string("end of input") : "'" + t.text + "'");
    throw ParseError(t.pos, names, msg);
  }

 private:
  Token advance() { return toks_[i_++]; }

  Token expect(Tok t) {
    if (peek().kind != t) fail({t});
    return advance();
  }

  Name fun_id_token() {
    Token t = expect(Tok::FunId);
    return Name::fun_id(t.text, t.arity);
  }

  std::vector<std::string> params(const Token& self_tok, std::size_t arity) {
    expect(Tok::LParen);
    std::vector<std::string> ps;
    std::set<std::string> seen;
    if (peek().kind != Tok::RParen) {
      for (;;) {
        Token v = expect(Tok::Var);
        if (!seen.insert(v.text).second) {
          throw ParseError(v.pos, {}, "parameter " + v.text + " occurs twice");
        }
        ps.push_back(v.text);
        if (peek().kind != Tok::Comma) break;
        advance();
      }
    }
    expect(Tok::RParen);
    if (ps.size() != arity) {
      throw ParseError(self_tok.pos, {},
                       "arity mismatch: " + self_tok.text + "/" + std::to_string(arity) +
                           " declared with " + std::to_string(ps.size()) + " parameter(s)");
    }
    return ps;
  }

  Expr term() {
    switch (peek().kind) {
      case Tok::Fun: {
        advance();
        Token self = peek();
        Name f = fun_id_token();
        auto ps = params(self, f.arity());
        expect(Tok::Arrow);
        return Expr::fun(f, std::move(ps), expr());
      }
      case Tok::Letrec: {
        advance();
        Token self = peek();
        Name f = fun_id_token();
        auto ps = params(self, f.arity());
        expect(Tok::Eq);
        Expr body = expr();
        expect(Tok::In);
        return Expr::letrec(f, std::move(ps), body, expr());
      }
      case Tok::Let: {
        advance();
        std::string x = expect(Tok::Var).text;
        expect(Tok::Eq);
        Expr bound = expr();
        expect(Tok::In);
        return Expr::let(x, bound, expr());
      }
      case Tok::Case: {
        advance();
        Expr scrut = expr();
        expect(Tok::Of);
        std::set<std::string> seen;
        Pattern p = pattern(seen);
        expect(Tok::Then);
        Expr t = expr();
        expect(Tok::Else);
        return Expr::case_of(scrut, p, t, expr());
      }
      default: return application();
    }
  }

  Expr application() {
    if (peek().kind != Tok::Apply) return atom();
    advance();
    Expr fn = application();
    expect(Tok::LParen);
    std::vector<Expr> args;
    if (peek().kind != Tok::RParen) {
      for (;;) {
        args.push_back(expr());
        if (peek().kind != Tok::Comma) break;
        advance();
      }
    }
    expect(Tok::RParen);
    return Expr::apply(fn, std::move(args));
  }

  Expr atom() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Int: return Expr::lit(Integer(advance().text));
      case Tok::Var: return Expr::var(advance().text);
      case Tok::FunId: {
        Token f = advance();
        return Expr::fun_id(f.text, f.arity);
      }
      case Tok::Hole:
        if (!holes_) throw ParseError(t.pos, {}, "'□' is only allowed in frames and contexts");
        advance();
        ++hole_count_;
        return Expr::hole();
      case Tok::LBrack: {
        advance();
        if (peek().kind == Tok::RBrack) {
          advance();
          return Expr::nil();
        }
        Expr h = expr();
        expect(Tok::Bar);
        Expr tl = expr();
        expect(Tok::RBrack);
        return Expr::cons(h, tl);
      }
      case Tok::LParen: {
        advance();
        Expr e = expr();
        expect(Tok::RParen);
        return e;
      }
      default:
        fail({Tok::Int, Tok::Var, Tok::FunId, Tok::LBrack, Tok::LParen, Tok::Fun, Tok::Let,
              Tok::Letrec, Tok::Case, Tok::Apply});
    }
  }

  Pattern pattern(std::set<std::string>& seen) {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Int: return Pattern::lit(Integer(advance().text));
      case Tok::Var: {
        Token v = advance();
        if (!seen.insert(v.text).second) {
          throw ParseError(v.pos, {}, "pattern variable " + v.text + " occurs twice");
        }
        return Pattern::var(v.text);
      }
      case Tok::LBrack: {
        advance();
        if (peek().kind == Tok::RBrack) {
          advance();
          return Pattern::nil();
        }
        Pattern h = pattern(seen);
        expect(Tok::Bar);
        Pattern tl = pattern(seen);
        expect(Tok::RBrack);
        return Pattern::cons(std::move(h), std::move(tl));
      }
      default: fail({Tok::Int, Tok::Var, Tok::LBrack});
    }
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  bool holes_;
  std::size_t hole_count_ = 0;
};

// ---------------------------------------------------------------------------
// Frames

bool is_hole(const Expr& e) { return e.kind() == Kind::Hole; }

Expr core_of(const Expr& named, std::span<const Name> slots = {}) {
  return to_core(NamedExpr{named}, slots);
}

// Interprets a named term with one hole as a frame, or explains why not.
std::optional<Frame> as_frame(const Expr& e, std::string& why) {
  auto value_closed = [](const Expr& x) { return x.is_value() && !x.has_hole(); };
  switch (e.kind()) {
    case Kind::Apply: {
      auto* a = e.as<node::Apply>();
      if (is_hole(a->fn)) {
        std::vector<Expr> args;
        for (const auto& x : a->args) args.push_back(core_of(x));
        return Frame(frame::AppFn{std::move(args)});
      }
      for (std::size_t i = 0; i < a->args.size(); ++i) {
        if (!is_hole(a->args[i])) continue;
        if (!value_closed(a->fn)) {
          why = "the applied function must be a value when the hole is an argument";
          return std::nullopt;
        }
        std::vector<Expr> done, rest;
        for (std::size_t j = 0; j < i; ++j) {
          if (!value_closed(a->args[j])) {
            why = "arguments before the hole must be values";
            return std::nullopt;
          }
          done.push_back(core_of(a->args[j]));
        }
        for (std::size_t j = i + 1; j < a->args.size(); ++j) rest.push_back(core_of(a->args[j]));
        return Frame(frame::AppArg{core_of(a->fn), std::move(done), std::move(rest)});
      }
      break;
    }
    case Kind::Let: {
      auto* l = e.as<node::Let>();
      if (!is_hole(l->bound)) break;
      Name x = Name::var(l->binder);
      return Frame(frame::LetF{l->binder, core_of(l->body, std::span<const Name>(&x, 1))});
    }
    case Kind::Add: {
      auto* a = e.as<node::Add>();
      if (is_hole(a->lhs)) return Frame(frame::AddL{core_of(a->rhs)});
      if (is_hole(a->rhs) && value_closed(a->lhs)) return Frame(frame::AddR{core_of(a->lhs)});
      if (is_hole(a->rhs)) {
        why = "the left operand of v + □ must be a value";
        return std::nullopt;
      }
      break;
    }
    case Kind::Case: {
      auto* c = e.as<node::Case>();
      if (!is_hole(c->scrutinee)) break;
      auto vars = pattern_vars(c->pattern);
      return Frame(frame::CaseF{c->pattern, core_of(c->then_branch, vars), core_of(c->else_branch)});
    }
    case Kind::Cons: {
      auto* c = e.as<node::Cons>();
      if (is_hole(c->tail)) return Frame(frame::ConsTail{core_of(c->head)});
      if (is_hole(c->head) && value_closed(c->tail)) return Frame(frame::ConsHead{core_of(c->tail)});
      if (is_hole(c->head)) {
        why = "the tail of [□|v] must be a value";
        return std::nullopt;
      }
      break;
    }
    default: break;
  }
  if (why.empty()) why = "□ is not in a frame position";
  return std::nullopt;
}

Frame frame_from_tokens(std::vector<Token> toks) {
  SourcePos start = toks.front().pos;
  Parser p(std::move(toks), true);
  Expr e = p.expr();
  if (p.peek().kind != Tok::End) p.fail({Tok::Semi, Tok::Plus});
  if (p.holes_seen() != 1) {
    throw ParseError(start, {"□"}, "a frame needs exactly one □, found " + std::to_string(p.holes_seen()));
  }
  std::string why;
  if (auto f = as_frame(e, why)) return *f;
  throw ParseError(start, {}, why);
}

}  // namespace

NamedExpr parse_expr(std::string_view src) {
  return Parser(Lexer(src).run(), false).whole_expr();
}

Pattern parse_pattern(std::string_view src) {
  return Parser(Lexer(src).run(), false).whole_pattern();
}

NamedExpr parse_context(std::string_view src) {
  Parser p(Lexer(src).run(), true);
  NamedExpr e = p.whole_expr();
  if (p.holes_seen() != 1) {
    throw ParseError({}, {"□"}, "a context needs exactly one □, found " + std::to_string(p.holes_seen()));
  }
  return e;
}

Frame parse_frame(std::string_view src) {
  auto toks = Lexer(src).run();
  for (const auto& t : toks) {
    if (t.kind == Tok::Semi) throw ParseError(t.pos, {}, "expected a single frame");
  }
  return frame_from_tokens(std::move(toks));
}

FrameStack parse_framestack(std::string_view src) {
  auto toks = Lexer(src).run();
  std::vector<Frame> frames;
  std::vector<Token> cur;
  bool any = false;
  for (auto& t : toks) {
    if (t.kind == Tok::Semi || t.kind == Tok::End) {
      if (cur.empty()) {
        // "id" is spelt as an empty file; stray separators are errors
        if (t.kind == Tok::Semi || any) throw ParseError(t.pos, {"frame"}, "empty frame");
        break;
      }
      cur.push_back({Tok::End, "", 0, t.pos});
      frames.push_back(frame_from_tokens(std::move(cur)));
      cur.clear();
      any = true;
      if (t.kind == Tok::End) break;
    } else {
      cur.push_back(std::move(t));
    }
  }
  return FrameStack::from_frames(frames);
}

// ---------------------------------------------------------------------------
// Printer

namespace {

bool open_ended(const Expr& e) {
  switch (e.kind()) {
    case Kind::Fun:
    case Kind::Let:
    case Kind::Letrec:
    case Kind::Case: return true;
    default: return false;
  }
}

void print_pattern(const Pattern& p, std::string& out) {
  if (auto* l = p.as<Pattern::Lit>()) {
    out += l->value.str();
  } else if (auto* v = p.as<Pattern::Var>()) {
    out += v->name;
  } else if (p.as<Pattern::Nil>()) {
    out += "[]";
  } else {
    auto* c = p.as<Pattern::Cons>();
    out += '[';
    print_pattern(*c->head, out);
    out += '|';
    print_pattern(*c->tail, out);
    out += ']';
  }
}

void print(const Expr& e, std::string& out);

void print_parens(const Expr& e, bool parens, std::string& out) {
  if (parens) out += '(';
  print(e, out);
  if (parens) out += ')';
}

void print_params(const Name& self, const std::vector<std::string>& ps, std::string& out) {
  out += self.str();
  out += '(';
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) out += ", ";
    out += ps[i];
  }
  out += ')';
}

void print(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case Kind::Lit: out += e.as<node::Lit>()->value.str(); return;
    case Kind::Var: out += e.as<node::Var>()->name.str(); return;
    case Kind::BVar: out += "#" + std::to_string(e.as<node::BVar>()->index + 1); return;
    case Kind::Nil: out += "[]"; return;
    case Kind::Hole: out += "\xE2\x96\xA1"; return;
    case Kind::Cons: {
      auto* c = e.as<node::Cons>();
      out += '[';
      print(c->head, out);
      out += '|';
      print(c->tail, out);
      out += ']';
      return;
    }
    case Kind::Fun: {
      auto* f = e.as<node::Fun>();
      out += "fun ";
      print_params(f->self, f->params, out);
      out += " -> ";
      print(f->body, out);
      return;
    }
    case Kind::Apply: {
      auto* a = e.as<node::Apply>();
      out += "apply ";
      print_parens(a->fn, open_ended(a->fn) || a->fn.kind() == Kind::Add, out);
      out += '(';
      for (std::size_t i = 0; i < a->args.size(); ++i) {
        if (i) out += ", ";
        print(a->args[i], out);
      }
      out += ')';
      return;
    }
    case Kind::Case: {
      auto* c = e.as<node::Case>();
      out += "case ";
      print(c->scrutinee, out);
      out += " of ";
      print_pattern(c->pattern, out);
      out += " then ";
      print(c->then_branch, out);
      out += " else ";
      print(c->else_branch, out);
      return;
    }
    case Kind::Let: {
      auto* l = e.as<node::Let>();
      out += "let " + l->binder + " = ";
      print(l->bound, out);
      out += " in ";
      print(l->body, out);
      return;
    }
    case Kind::Letrec: {
      auto* l = e.as<node::Letrec>();
      out += "letrec ";
      print_params(l->self, l->params, out);
      out += " = ";
      print(l->fbody, out);
      out += " in ";
      print(l->cont, out);
      return;
    }
    case Kind::Add: {
      auto* a = e.as<node::Add>();
      print_parens(a->lhs, open_ended(a->lhs), out);
      out += " + ";
      print_parens(a->rhs, open_ended(a->rhs) || a->rhs.kind() == Kind::Add, out);
      return;
    }
  }
}

}  // namespace

std::string pretty(const NamedExpr& e) {
  std::string out;
  print(e.term, out);
  return out;
}

std::string pretty(const Pattern& p) {
  std::string out;
  print_pattern(p, out);
  return out;
}

std::string pretty_core(const Expr& e) { return pretty(from_core(e)); }

std::string pretty(const Frame& f) { return pretty_core(plug_frame(f, Expr::hole())); }

std::string pretty(const FrameStack& k) {
  if (k.empty()) return "id";
  std::string out;
  bool first = true;
  for (const auto& f : k.frames()) {
    if (!first) out += " ; ";
    out += pretty(f);
    first = false;
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const Pattern& p) {
  using nlohmann::json;
  if (auto* l = p.as<Pattern::Lit>()) return json{{"kind", "plit"}, {"value", l->value.str()}};
  if (auto* v = p.as<Pattern::Var>()) return json{{"kind", "pvar"}, {"name", v->name}};
  if (p.as<Pattern::Nil>()) return json{{"kind", "pnil"}};
  auto* c = p.as<Pattern::Cons>();
  return json{{"kind", "pcons"}, {"head", to_json(*c->head)}, {"tail", to_json(*c->tail)}};
}

namespace {

nlohmann::json name_json(const Name& n) {
  return nlohmann::json{{"name", n.id()}, {"arity", n.arity()}};
}

}  // namespace

nlohmann::json to_json(const Expr& e) {
  using nlohmann::json;
  switch (e.kind()) {
    case Kind::Lit: return json{{"kind", "lit"}, {"value", e.as<node::Lit>()->value.str()}};
    case Kind::Var: {
      const Name& n = e.as<node::Var>()->name;
      if (n.is_fun_id()) return json{{"kind", "funid"}, {"name", n.id()}, {"arity", n.arity()}};
      return json{{"kind", "var"}, {"name", n.id()}};
    }
    case Kind::BVar: return json{{"kind", "bvar"}, {"index", e.as<node::BVar>()->index}};
    case Kind::Nil: return json{{"kind", "nil"}};
    case Kind::Hole: return json{{"kind", "hole"}};
    case Kind::Cons: {
      auto* c = e.as<node::Cons>();
      return json{{"kind", "cons"}, {"head", to_json(c->head)}, {"tail", to_json(c->tail)}};
    }
    case Kind::Fun: {
      auto* f = e.as<node::Fun>();
      return json{{"kind", "fun"}, {"self", name_json(f->self)}, {"params", f->params},
                  {"body", to_json(f->body)}};
    }
    case Kind::Apply: {
      auto* a = e.as<node::Apply>();
      json args = json::array();
      for (const auto& x : a->args) args.push_back(to_json(x));
      return json{{"kind", "apply"}, {"fn", to_json(a->fn)}, {"args", args}};
    }
    case Kind::Case: {
      auto* c = e.as<node::Case>();
      return json{{"kind", "case"}, {"scrutinee", to_json(c->scrutinee)},
                  {"pattern", to_json(c->pattern)}, {"then", to_json(c->then_branch)},
                  {"else", to_json(c->else_branch)}};
    }
    case Kind::Let: {
      auto* l = e.as<node::Let>();
      return json{{"kind", "let"}, {"binder", l->binder}, {"bound", to_json(l->bound)},
                  {"body", to_json(l->body)}};
    }
    case Kind::Letrec: {
      auto* l = e.as<node::Letrec>();
      return json{{"kind", "letrec"}, {"self", name_json(l->self)}, {"params", l->params},
                  {"fbody", to_json(l->fbody)}, {"cont", to_json(l->cont)}};
    }
    case Kind::Add: {
      auto* a = e.as<node::Add>();
      return json{{"kind", "add"}, {"lhs", to_json(a->lhs)}, {"rhs", to_json(a->rhs)}};
    }
  }
  return json{};
}

}  // namespace mlq
