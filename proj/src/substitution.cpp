#include "mlq/substitution.hpp"

#include <functional>

namespace mlq {

bool operator==(const SubstImage& a, const SubstImage& b) {
  if (a.index() != b.index()) return false;
  if (auto* x = std::get_if<ExprImage>(&a)) return x->expr == std::get<ExprImage>(b).expr;
  return std::get<NameImage>(a).name == std::get<NameImage>(b).name;
}

SubstImage Subst::operator()(const Name& n) const {
  auto it = bindings_.find(n);
  if (it == bindings_.end()) return NameImage{n};
  return it->second;
}

Subst id_subst() { return Subst{}; }

Subst update(const Subst& sigma, const Name& x, Expr e) {
  if (e.loose() != 0) throw Error("substitution image for " + x.str() + " is not locally closed");
  Subst r = sigma;
  r.bindings_.insert_or_assign(x, ExprImage{std::move(e)});
  return r;
}

Subst update(const Subst& sigma, std::span<const std::pair<Name, Expr>> bindings) {
  ScopeCtx seen;
  for (const auto& [x, _] : bindings) {
    if (!seen.insert(x).second) throw Error("duplicate name " + x.str() + " in multi-update");
  }
  Subst r = sigma;
  for (const auto& [x, e] : bindings) r = update(r, x, e);
  return r;
}

Subst rename(const Subst& sigma, const Name& x, const Name& y) {
  Subst r = sigma;
  if (x == y) {
    r.bindings_.erase(x);
  } else {
    r.bindings_.insert_or_assign(x, NameImage{y});
  }
  return r;
}

Subst restrict(const Subst& sigma, const ScopeCtx& names) {
  Subst r = sigma;
  for (const auto& n : names) r.bindings_.erase(n);
  return r;
}

namespace {

// Generic structural rebuild; `leaf` decides the replacement for Var/BVar
// nodes given the number of binder slots crossed so far, and `skip` lets a
// subtree through untouched.
template <class Leaf, class Skip>
Expr rebuild(const Expr& e, std::size_t depth, const Leaf& leaf, const Skip& skip) {
  if (skip(e, depth)) return e;
  auto go = [&](const Expr& c, std::size_t slots) { return rebuild(c, depth + slots, leaf, skip); };
  switch (e.kind()) {
    case Kind::Var:
    case Kind::BVar: return leaf(e, depth);
    case Kind::Lit:
    case Kind::Nil:
    case Kind::Hole: return e;
    case Kind::Cons: {
      auto* c = e.as<node::Cons>();
      return Expr::cons(go(c->head, 0), go(c->tail, 0));
    }
    case Kind::Fun: {
      auto* f = e.as<node::Fun>();
      return Expr::fun(f->self, f->params, go(f->body, f->params.size() + 1));
    }
    case Kind::Apply: {
      auto* a = e.as<node::Apply>();
      std::vector<Expr> args;
      args.reserve(a->args.size());
      for (const auto& x : a->args) args.push_back(go(x, 0));
      return Expr::apply(go(a->fn, 0), std::move(args));
    }
    case Kind::Case: {
      auto* c = e.as<node::Case>();
      return Expr::case_of(go(c->scrutinee, 0), c->pattern,
                           go(c->then_branch, c->pattern.var_count()), go(c->else_branch, 0));
    }
    case Kind::Let: {
      auto* l = e.as<node::Let>();
      return Expr::let(l->binder, go(l->bound, 0), go(l->body, 1));
    }
    case Kind::Letrec: {
      auto* l = e.as<node::Letrec>();
      return Expr::letrec(l->self, l->params, go(l->fbody, l->params.size() + 1),
                          go(l->cont, 1));
    }
    case Kind::Add: {
      auto* a = e.as<node::Add>();
      return Expr::add(go(a->lhs, 0), go(a->rhs, 0));
    }
  }
  return e;
}

}  // namespace

Expr apply_subst(const Expr& e, const Subst& sigma) {
  if (sigma.is_identity()) return e;
  return rebuild(
      e, 0,
      [&](const Expr& leaf, std::size_t) {
        auto* v = leaf.as<node::Var>();
        if (!v) return leaf;
        auto img = sigma(v->name);
        if (auto* x = std::get_if<ExprImage>(&img)) return x->expr;
        auto& n = std::get<NameImage>(img).name;
        return n == v->name ? leaf : Expr::var(n);
      },
      [](const Expr& x, std::size_t) { return !x.has_names(); });
}

Expr instantiate(const Expr& body, std::span<const Expr> images) {
  const std::size_t n = images.size();
  for (const auto& img : images) {
    if (img.loose() != 0) throw Error("instantiate: image is not locally closed");
  }
  return rebuild(
      body, 0,
      [&](const Expr& leaf, std::size_t depth) {
        auto* b = leaf.as<node::BVar>();
        if (!b || b->index < depth) return leaf;
        std::size_t rel = b->index - depth;
        if (rel < n) return images[rel];
        return Expr::bvar(static_cast<std::uint32_t>(b->index - n));
      },
      [](const Expr& x, std::size_t depth) { return x.loose() <= depth; });
}

Expr abstract(const Expr& e, std::span<const Name> names) {
  const std::size_t n = names.size();
  return rebuild(
      e, 0,
      [&](const Expr& leaf, std::size_t depth) {
        if (auto* b = leaf.as<node::BVar>()) {
          // indices escaping e now also skip the new block
          if (b->index >= depth) return Expr::bvar(static_cast<std::uint32_t>(b->index + n));
          return leaf;
        }
        auto& name = leaf.as<node::Var>()->name;
        for (std::size_t i = n; i-- > 0;) {
          if (names[i] == name) return Expr::bvar(static_cast<std::uint32_t>(depth + i));
        }
        return leaf;
      },
      [](const Expr& x, std::size_t depth) { return !x.has_names() && x.loose() <= depth; });
}

namespace {

void vars_of(const Pattern& p, std::vector<Name>& out) {
  if (auto* v = p.as<Pattern::Var>()) {
    out.push_back(Name::var(v->name));
  } else if (auto* c = p.as<Pattern::Cons>()) {
    vars_of(*c->head, out);
    vars_of(*c->tail, out);
  }
}

bool match_into(const Pattern& p, const Expr& v, std::vector<Expr>* out) {
  if (auto* l = p.as<Pattern::Lit>()) {
    auto* x = v.as<node::Lit>();
    return x && x->value == l->value;
  }
  if (p.as<Pattern::Var>()) {
    if (out) out->push_back(v);
    return true;
  }
  if (p.as<Pattern::Nil>()) return v.kind() == Kind::Nil;
  auto* c = p.as<Pattern::Cons>();
  auto* x = v.as<node::Cons>();
  return x && match_into(*c->head, x->head, out) && match_into(*c->tail, x->tail, out);
}

}  // namespace

std::vector<Name> pattern_vars(const Pattern& p) {
  std::vector<Name> out;
  vars_of(p, out);
  return out;
}

bool is_match(const Pattern& p, const Expr& v) {
  if (!v.is_value()) throw Error("is_match: scrutinee is not a value");
  return match_into(p, v, nullptr);
}

std::optional<std::vector<Expr>> match_values(const Pattern& p, const Expr& v) {
  std::vector<Expr> out;
  out.reserve(p.var_count());
  if (!match_into(p, v, &out)) return std::nullopt;
  return out;
}

Subst match_subst(const Pattern& p, const Expr& v) {
  if (!is_match(p, v)) throw Error("match_subst: value does not match the pattern");
  auto values = *match_values(p, v);
  auto vars = pattern_vars(p);
  Subst s = id_subst();
  for (std::size_t i = 0; i < vars.size(); ++i) s = update(s, vars[i], values[i]);
  return s;
}

}  // namespace mlq
