#include "mlq/syntax.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <utility>

namespace mlq {

namespace detail {
struct ExprAccess {
  static Expr wrap(std::shared_ptr<const Node> n) { return Expr(std::move(n)); }
  static const std::shared_ptr<const Node>& ptr(const Expr& e) { return e.node_; }
};
}  // namespace detail

namespace {

inline std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::size_t hash_integer(const Integer& v) {
  if (v >= std::numeric_limits<long long>::min() && v <= std::numeric_limits<long long>::max()) {
    return std::hash<long long>{}(v.convert_to<long long>());
  }
  return std::hash<std::string>{}(v.str());
}

std::size_t hash_name(const Name& n) {
  return mix(mix(std::hash<std::string>{}(n.id()), n.arity()), n.is_fun_id() ? 1 : 0);
}

std::uint32_t under(std::uint32_t loose, std::size_t slots) {
  return loose > slots ? static_cast<std::uint32_t>(loose - slots) : 0;
}

void check_arity(const Name& self, std::size_t params, const char* what) {
  if (!self.is_fun_id() || self.arity() != params) {
    throw Error(std::string(what) + " " + self.str() + " declares " + std::to_string(params) +
                " parameter(s)");
  }
}

Expr build(Node::Data d) {
  auto n = std::make_shared<Node>();
  n->data = std::move(d);
  Node& r = *n;
  std::size_t h = (r.data.index() + 1) * 0x100000001b3ULL;
  auto child = [&](const Expr& c, std::size_t slots) {
    h = mix(h, c.hash());
    r.size += c.size();
    r.loose = std::max(r.loose, under(c.loose(), slots));
    r.names = r.names || c.has_names();
    r.hole = r.hole || c.has_hole();
  };
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, node::Lit>) {
          h = mix(h, hash_integer(x.value));
          r.value = true;
        } else if constexpr (std::is_same_v<T, node::Var>) {
          h = mix(h, hash_name(x.name));
          r.value = true;
          r.names = true;
        } else if constexpr (std::is_same_v<T, node::BVar>) {
          h = mix(h, x.index);
          r.loose = x.index + 1;
          r.value = true;
        } else if constexpr (std::is_same_v<T, node::Nil>) {
          r.value = true;
        } else if constexpr (std::is_same_v<T, node::Cons>) {
          child(x.head, 0);
          child(x.tail, 0);
          r.value = x.head.is_value() && x.tail.is_value();
        } else if constexpr (std::is_same_v<T, node::Fun>) {
          check_arity(x.self, x.params.size(), "fun");
          h = mix(h, x.self.arity());
          child(x.body, x.params.size() + 1);
          r.value = true;
        } else if constexpr (std::is_same_v<T, node::Apply>) {
          child(x.fn, 0);
          h = mix(h, x.args.size());
          for (const auto& a : x.args) child(a, 0);
        } else if constexpr (std::is_same_v<T, node::Case>) {
          child(x.scrutinee, 0);
          h = mix(h, x.pattern.hash());
          child(x.then_branch, x.pattern.var_count());
          child(x.else_branch, 0);
        } else if constexpr (std::is_same_v<T, node::Let>) {
          child(x.bound, 0);
          child(x.body, 1);
        } else if constexpr (std::is_same_v<T, node::Letrec>) {
          check_arity(x.self, x.params.size(), "letrec");
          h = mix(h, x.self.arity());
          child(x.fbody, x.params.size() + 1);
          child(x.cont, 1);
        } else if constexpr (std::is_same_v<T, node::Add>) {
          child(x.lhs, 0);
          child(x.rhs, 0);
        } else {
          r.hole = true;
        }
      },
      r.data);
  r.hash = h;
  return detail::ExprAccess::wrap(std::move(n));
}

}  // namespace

// ---------------------------------------------------------------------------
// Name

Name::Name(std::string id, bool fun, std::size_t arity)
    : fun_(fun), id_(std::move(id)), arity_(arity) {
  if (id_.empty()) throw Error("empty identifier");
}

Name Name::var(std::string id) { return Name(std::move(id), false, 0); }

Name Name::fun_id(std::string id, std::size_t arity) { return Name(std::move(id), true, arity); }

std::string Name::str() const { return fun_ ? id_ + "/" + std::to_string(arity_) : id_; }

std::string to_string(const ScopeCtx& gamma) {
  std::string out = "{";
  bool first = true;
  for (const auto& n : gamma) {
    if (!first) out += ", ";
    out += n.str();
    first = false;
  }
  return out + "}";
}

// ---------------------------------------------------------------------------
// Pattern

Pattern::Pattern(Data d) : data_(std::make_shared<const Data>(std::move(d))) {
  std::visit(
      [this](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Lit>) {
          hash_ = mix(11, hash_integer(p.value));
        } else if constexpr (std::is_same_v<T, Var>) {
          vars_ = 1;
          hash_ = 13;
        } else if constexpr (std::is_same_v<T, Nil>) {
          hash_ = 17;
        } else {
          vars_ = p.head->vars_ + p.tail->vars_;
          hash_ = mix(mix(19, p.head->hash_), p.tail->hash_);
        }
      },
      *data_);
}

Pattern Pattern::lit(Integer v) { return Pattern(Lit{std::move(v)}); }
Pattern Pattern::var(std::string name) { return Pattern(Var{std::move(name)}); }
Pattern Pattern::nil() { return Pattern(Nil{}); }
Pattern Pattern::cons(Pattern head, Pattern tail) {
  return Pattern(Cons{std::make_shared<const Pattern>(std::move(head)),
                      std::make_shared<const Pattern>(std::move(tail))});
}

namespace {

bool pattern_eq(const Pattern& a, const Pattern& b, bool names) {
  if (a.hash() != b.hash() || a.data().index() != b.data().index()) return false;
  if (auto* l = a.as<Pattern::Lit>()) return l->value == b.as<Pattern::Lit>()->value;
  if (auto* v = a.as<Pattern::Var>()) return !names || v->name == b.as<Pattern::Var>()->name;
  if (a.as<Pattern::Nil>()) return true;
  auto* c = a.as<Pattern::Cons>();
  auto* d = b.as<Pattern::Cons>();
  return pattern_eq(*c->head, *d->head, names) && pattern_eq(*c->tail, *d->tail, names);
}

}  // namespace

bool operator==(const Pattern& a, const Pattern& b) { return pattern_eq(a, b, false); }
bool same_names(const Pattern& a, const Pattern& b) { return pattern_eq(a, b, true); }

// ---------------------------------------------------------------------------
// Expr

Expr::Expr() : Expr(lit(0)) {}

Expr Expr::lit(Integer v) { return build(node::Lit{std::move(v)}); }
Expr Expr::var(Name n) { return build(node::Var{std::move(n)}); }
Expr Expr::bvar(std::uint32_t index) { return build(node::BVar{index}); }
Expr Expr::nil() { return build(node::Nil{}); }
Expr Expr::cons(Expr head, Expr tail) { return build(node::Cons{std::move(head), std::move(tail)}); }
Expr Expr::fun(Name self, std::vector<std::string> params, Expr body) {
  return build(node::Fun{std::move(self), std::move(params), std::move(body)});
}
Expr Expr::apply(Expr fn, std::vector<Expr> args) {
  return build(node::Apply{std::move(fn), std::move(args)});
}
Expr Expr::case_of(Expr scrutinee, Pattern pat, Expr then_branch, Expr else_branch) {
  return build(node::Case{std::move(scrutinee), std::move(pat), std::move(then_branch),
                          std::move(else_branch)});
}
Expr Expr::let(std::string binder, Expr bound, Expr body) {
  return build(node::Let{std::move(binder), std::move(bound), std::move(body)});
}
Expr Expr::letrec(Name self, std::vector<std::string> params, Expr fbody, Expr cont) {
  return build(node::Letrec{std::move(self), std::move(params), std::move(fbody), std::move(cont)});
}
Expr Expr::add(Expr lhs, Expr rhs) { return build(node::Add{std::move(lhs), std::move(rhs)}); }
Expr Expr::hole() { return build(node::Hole{}); }

Kind Expr::kind() const { return static_cast<Kind>(node_->data.index()); }
bool Expr::is_value() const { return node_->value; }
std::uint32_t Expr::loose() const { return node_->loose; }
bool Expr::has_names() const { return node_->names; }
bool Expr::has_hole() const { return node_->hole; }
std::size_t Expr::hash() const { return node_->hash; }
std::size_t Expr::size() const { return node_->size; }

namespace {

bool all_eq(const std::vector<Expr>& a, const std::vector<Expr>& b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
}

}  // namespace

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash() || a.kind() != b.kind() || a.size() != b.size()) return false;
  switch (a.kind()) {
    case Kind::Lit: return a.as<node::Lit>()->value == b.as<node::Lit>()->value;
    case Kind::Var: return a.as<node::Var>()->name == b.as<node::Var>()->name;
    case Kind::BVar: return a.as<node::BVar>()->index == b.as<node::BVar>()->index;
    case Kind::Nil:
    case Kind::Hole: return true;
    case Kind::Cons: {
      auto* x = a.as<node::Cons>();
      auto* y = b.as<node::Cons>();
      return x->head == y->head && x->tail == y->tail;
    }
    case Kind::Fun: {
      auto* x = a.as<node::Fun>();
      auto* y = b.as<node::Fun>();
      return x->self.arity() == y->self.arity() && x->body == y->body;
    }
    case Kind::Apply: {
      auto* x = a.as<node::Apply>();
      auto* y = b.as<node::Apply>();
      return x->fn == y->fn && all_eq(x->args, y->args);
    }
    case Kind::Case: {
      auto* x = a.as<node::Case>();
      auto* y = b.as<node::Case>();
      return x->pattern == y->pattern && x->scrutinee == y->scrutinee &&
             x->then_branch == y->then_branch && x->else_branch == y->else_branch;
    }
    case Kind::Let: {
      auto* x = a.as<node::Let>();
      auto* y = b.as<node::Let>();
      return x->bound == y->bound && x->body == y->body;
    }
    case Kind::Letrec: {
      auto* x = a.as<node::Letrec>();
      auto* y = b.as<node::Letrec>();
      return x->self.arity() == y->self.arity() && x->fbody == y->fbody && x->cont == y->cont;
    }
    case Kind::Add: {
      auto* x = a.as<node::Add>();
      auto* y = b.as<node::Add>();
      return x->lhs == y->lhs && x->rhs == y->rhs;
    }
  }
  return false;
}

bool is_value(const Expr& e) { return e.is_value(); }

namespace {

void collect_names(const Expr& e, ScopeCtx& out) {
  if (!e.has_names()) return;
  switch (e.kind()) {
    case Kind::Var: out.insert(e.as<node::Var>()->name); return;
    case Kind::Cons: {
      auto* c = e.as<node::Cons>();
      collect_names(c->head, out);
      collect_names(c->tail, out);
      return;
    }
    case Kind::Fun: collect_names(e.as<node::Fun>()->body, out); return;
    case Kind::Apply: {
      auto* a = e.as<node::Apply>();
      collect_names(a->fn, out);
      for (const auto& x : a->args) collect_names(x, out);
      return;
    }
    case Kind::Case: {
      auto* c = e.as<node::Case>();
      collect_names(c->scrutinee, out);
      collect_names(c->then_branch, out);
      collect_names(c->else_branch, out);
      return;
    }
    case Kind::Let: {
      auto* l = e.as<node::Let>();
      collect_names(l->bound, out);
      collect_names(l->body, out);
      return;
    }
    case Kind::Letrec: {
      auto* l = e.as<node::Letrec>();
      collect_names(l->fbody, out);
      collect_names(l->cont, out);
      return;
    }
    case Kind::Add: {
      auto* a = e.as<node::Add>();
      collect_names(a->lhs, out);
      collect_names(a->rhs, out);
      return;
    }
    default: return;
  }
}

// ---------------------------------------------------------------------------
// Named <-> core conversion

void pattern_names(const Pattern& p, std::vector<std::string>& out) {
  if (auto* v = p.as<Pattern::Var>()) {
    out.push_back(v->name);
  } else if (auto* c = p.as<Pattern::Cons>()) {
    pattern_names(*c->head, out);
    pattern_names(*c->tail, out);
  }
}

class ToCore {
 public:
  explicit ToCore(std::span<const Name> free_slots) : free_(free_slots) {}

  Expr run(const Expr& e) {
    switch (e.kind()) {
      case Kind::Lit:
      case Kind::Nil:
      case Kind::Hole:
      case Kind::BVar: return e;
      case Kind::Var: return resolve(e.as<node::Var>()->name, e);
      case Kind::Cons: {
        auto* c = e.as<node::Cons>();
        return Expr::cons(run(c->head), run(c->tail));
      }
      case Kind::Fun: {
        auto* f = e.as<node::Fun>();
        auto body = scoped(slots_of(f->self, f->params), f->body);
        return Expr::fun(f->self, f->params, std::move(body));
      }
      case Kind::Apply: {
        auto* a = e.as<node::Apply>();
        std::vector<Expr> args;
        args.reserve(a->args.size());
        for (const auto& x : a->args) args.push_back(run(x));
        return Expr::apply(run(a->fn), std::move(args));
      }
      case Kind::Case: {
        auto* c = e.as<node::Case>();
        std::vector<std::string> vars;
        pattern_names(c->pattern, vars);
        std::vector<Name> slots;
        for (auto& v : vars) slots.push_back(Name::var(v));
        auto then_branch = scoped(std::move(slots), c->then_branch);
        return Expr::case_of(run(c->scrutinee), c->pattern, std::move(then_branch),
                             run(c->else_branch));
      }
      case Kind::Let: {
        auto* l = e.as<node::Let>();
        auto body = scoped({Name::var(l->binder)}, l->body);
        return Expr::let(l->binder, run(l->bound), std::move(body));
      }
      case Kind::Letrec: {
        auto* l = e.as<node::Letrec>();
        auto fbody = scoped(slots_of(l->self, l->params), l->fbody);
        auto cont = scoped({l->self}, l->cont);
        return Expr::letrec(l->self, l->params, std::move(fbody), std::move(cont));
      }
      case Kind::Add: {
        auto* a = e.as<node::Add>();
        return Expr::add(run(a->lhs), run(a->rhs));
      }
    }
    return e;
  }

 private:
  static std::vector<Name> slots_of(const Name& self, const std::vector<std::string>& params) {
    std::vector<Name> s{self};
    for (const auto& p : params) s.push_back(Name::var(p));
    return s;
  }

  Expr scoped(std::vector<Name> slots, const Expr& body) {
    depth_ += slots.size();
    frames_.push_back(std::move(slots));
    auto r = run(body);
    depth_ -= frames_.back().size();
    frames_.pop_back();
    return r;
  }

  Expr resolve(const Name& n, const Expr& original) {
    std::size_t offset = 0;
    for (auto f = frames_.rbegin(); f != frames_.rend(); ++f) {
      // Within one binder block the last equal name wins (a parameter that
      // repeats a name shadows the earlier one).
      for (std::size_t i = f->size(); i-- > 0;) {
        if ((*f)[i] == n) return Expr::bvar(static_cast<std::uint32_t>(offset + i));
      }
      offset += f->size();
    }
    for (std::size_t i = 0; i < free_.size(); ++i) {
      if (free_[i] == n) return Expr::bvar(static_cast<std::uint32_t>(depth_ + i));
    }
    return original;
  }

  std::span<const Name> free_;
  std::vector<std::vector<Name>> frames_;
  std::size_t depth_ = 0;
};

class FromCore {
 public:
  FromCore(const Expr& root, std::span<const Name> free_env) : free_(free_env) {
    collect_names(root, avoid_);
    for (const auto& n : free_env) avoid_.insert(n);
  }

  Expr run(const Expr& e) {
    switch (e.kind()) {
      case Kind::Lit:
      case Kind::Nil:
      case Kind::Hole:
      case Kind::Var: return e;
      case Kind::BVar: return Expr::var(lookup(e.as<node::BVar>()->index));
      case Kind::Cons: {
        auto* c = e.as<node::Cons>();
        return Expr::cons(run(c->head), run(c->tail));
      }
      case Kind::Fun: {
        auto* f = e.as<node::Fun>();
        auto slots = fresh_block(f->self, f->params);
        auto body = scoped(slots, f->body);
        release(slots);
        return Expr::fun(slots[0], param_ids(slots), std::move(body));
      }
      case Kind::Apply: {
        auto* a = e.as<node::Apply>();
        std::vector<Expr> args;
        for (const auto& x : a->args) args.push_back(run(x));
        return Expr::apply(run(a->fn), std::move(args));
      }
      case Kind::Case: {
        auto* c = e.as<node::Case>();
        std::vector<Name> slots;
        auto pat = rename_pattern(c->pattern, slots);
        auto scrut = run(c->scrutinee);
        auto then_branch = scoped(slots, c->then_branch);
        release(slots);
        return Expr::case_of(std::move(scrut), std::move(pat), std::move(then_branch),
                             run(c->else_branch));
      }
      case Kind::Let: {
        auto* l = e.as<node::Let>();
        auto bound = run(l->bound);
        Name x = fresh(Name::var(l->binder));
        auto body = scoped({x}, l->body);
        release({x});
        return Expr::let(x.id(), std::move(bound), std::move(body));
      }
      case Kind::Letrec: {
        auto* l = e.as<node::Letrec>();
        auto slots = fresh_block(l->self, l->params);
        auto fbody = scoped(slots, l->fbody);
        std::vector<Name> params(slots.begin() + 1, slots.end());
        release(params);
        auto cont = scoped({slots[0]}, l->cont);
        release({slots[0]});
        return Expr::letrec(slots[0], param_ids(slots), std::move(fbody), std::move(cont));
      }
      case Kind::Add: {
        auto* a = e.as<node::Add>();
        return Expr::add(run(a->lhs), run(a->rhs));
      }
    }
    return e;
  }

 private:
  static std::vector<std::string> param_ids(const std::vector<Name>& slots) {
    std::vector<std::string> ids;
    for (std::size_t i = 1; i < slots.size(); ++i) ids.push_back(slots[i].id());
    return ids;
  }

  std::vector<Name> fresh_block(const Name& self, const std::vector<std::string>& params) {
    std::vector<Name> slots{fresh(self)};
    for (const auto& p : params) slots.push_back(fresh(Name::var(p)));
    return slots;
  }

  Pattern rename_pattern(const Pattern& p, std::vector<Name>& slots) {
    if (auto* v = p.as<Pattern::Var>()) {
      Name n = fresh(Name::var(v->name));
      slots.push_back(n);
      return Pattern::var(n.id());
    }
    if (auto* c = p.as<Pattern::Cons>()) {
      auto h = rename_pattern(*c->head, slots);
      auto t = rename_pattern(*c->tail, slots);
      return Pattern::cons(std::move(h), std::move(t));
    }
    return p;
  }

  // Reserves a name not used by any free name or any binder in scope.
  Name fresh(const Name& hint) {
    Name candidate = hint;
    for (std::size_t i = 1; avoid_.count(candidate) || taken_.count(candidate); ++i) {
      std::string id = hint.id() + std::to_string(i);
      candidate = hint.is_fun_id() ? Name::fun_id(id, hint.arity()) : Name::var(id);
    }
    taken_.insert(candidate);
    return candidate;
  }

  void release(const std::vector<Name>& names) {
    for (const auto& n : names) taken_.erase(n);
  }

  Expr scoped(const std::vector<Name>& slots, const Expr& body) {
    frames_.push_back(slots);
    auto r = run(body);
    frames_.pop_back();
    return r;
  }

  Name lookup(std::uint32_t index) const {
    std::size_t i = index;
    for (auto f = frames_.rbegin(); f != frames_.rend(); ++f) {
      if (i < f->size()) return (*f)[i];
      i -= f->size();
    }
    if (i < free_.size()) return free_[i];
    throw Error("dangling index #" + std::to_string(index) + " exceeds the free-name environment");
  }

  std::span<const Name> free_;
  ScopeCtx avoid_;
  ScopeCtx taken_;
  std::vector<std::vector<Name>> frames_;
};

}  // namespace

ScopeCtx free_names(const Expr& e) {
  ScopeCtx out;
  collect_names(e, out);
  return out;
}

ScopeCtx free_names(const NamedExpr& e) { return free_names(to_core(e)); }

Expr to_core(const NamedExpr& named, std::span<const Name> free_slots) {
  return ToCore(free_slots).run(named.term);
}

NamedExpr from_core(const Expr& core, std::span<const Name> free_env) {
  FromCore conv(core, free_env);
  return NamedExpr{conv.run(core)};
}

bool alpha_eq(const NamedExpr& a, const NamedExpr& b) { return to_core(a) == to_core(b); }

namespace {

bool names_eq(const std::vector<std::string>& a, const std::vector<std::string>& b) { return a == b; }

bool syn_eq(const Expr& a, const Expr& b);

bool syn_all(const std::vector<Expr>& a, const std::vector<Expr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!syn_eq(a[i], b[i])) return false;
  }
  return true;
}

bool syn_eq(const Expr& a, const Expr& b) {
  if (!(a == b)) return false;  // structure first, then binder names
  switch (a.kind()) {
    case Kind::Cons: {
      auto* x = a.as<node::Cons>();
      auto* y = b.as<node::Cons>();
      return syn_eq(x->head, y->head) && syn_eq(x->tail, y->tail);
    }
    case Kind::Fun: {
      auto* x = a.as<node::Fun>();
      auto* y = b.as<node::Fun>();
      return x->self == y->self && names_eq(x->params, y->params) && syn_eq(x->body, y->body);
    }
    case Kind::Apply: {
      auto* x = a.as<node::Apply>();
      auto* y = b.as<node::Apply>();
      return syn_eq(x->fn, y->fn) && syn_all(x->args, y->args);
    }
    case Kind::Case: {
      auto* x = a.as<node::Case>();
      auto* y = b.as<node::Case>();
      return same_names(x->pattern, y->pattern) && syn_eq(x->scrutinee, y->scrutinee) &&
             syn_eq(x->then_branch, y->then_branch) && syn_eq(x->else_branch, y->else_branch);
    }
    case Kind::Let: {
      auto* x = a.as<node::Let>();
      auto* y = b.as<node::Let>();
      return x->binder == y->binder && syn_eq(x->bound, y->bound) && syn_eq(x->body, y->body);
    }
    case Kind::Letrec: {
      auto* x = a.as<node::Letrec>();
      auto* y = b.as<node::Letrec>();
      return x->self == y->self && names_eq(x->params, y->params) &&
             syn_eq(x->fbody, y->fbody) && syn_eq(x->cont, y->cont);
    }
    case Kind::Add: {
      auto* x = a.as<node::Add>();
      auto* y = b.as<node::Add>();
      return syn_eq(x->lhs, y->lhs) && syn_eq(x->rhs, y->rhs);
    }
    default: return true;
  }
}

}  // namespace

bool syntactic_eq(const NamedExpr& a, const NamedExpr& b) { return syn_eq(a.term, b.term); }

Expr omega() {
  static const Expr w = [] {
    auto self = Name::fun_id("f", 0);
    auto f = Expr::fun(self, {}, Expr::apply(Expr::bvar(0), {}));
    return Expr::apply(f, {});
  }();
  return w;
}

}  // namespace mlq
