#include "mlq/context.hpp"

namespace mlq {

namespace {

std::size_t count_holes(const Expr& e) {
  if (!e.has_hole()) return 0;
  switch (e.kind()) {
    case Kind::Hole: return 1;
    case Kind::Cons: {
      auto* c = e.as<node::Cons>();
      return count_holes(c->head) + count_holes(c->tail);
    }
    case Kind::Fun: return count_holes(e.as<node::Fun>()->body);
    case Kind::Apply: {
      auto* a = e.as<node::Apply>();
      std::size_t n = count_holes(a->fn);
      for (const auto& x : a->args) n += count_holes(x);
      return n;
    }
    case Kind::Case: {
      auto* c = e.as<node::Case>();
      return count_holes(c->scrutinee) + count_holes(c->then_branch) + count_holes(c->else_branch);
    }
    case Kind::Let: {
      auto* l = e.as<node::Let>();
      return count_holes(l->bound) + count_holes(l->body);
    }
    case Kind::Letrec: {
      auto* l = e.as<node::Letrec>();
      return count_holes(l->fbody) + count_holes(l->cont);
    }
    case Kind::Add: {
      auto* a = e.as<node::Add>();
      return count_holes(a->lhs) + count_holes(a->rhs);
    }
    default: return 0;
  }
}

// Named terms carry binder names on the nodes and free occurrences as Var,
// so replacing the hole textually is exactly capture.
Expr fill(const Expr& c, const Expr& e) {
  if (!c.has_hole()) return c;
  switch (c.kind()) {
    case Kind::Hole: return e;
    case Kind::Cons: {
      auto* x = c.as<node::Cons>();
      return Expr::cons(fill(x->head, e), fill(x->tail, e));
    }
    case Kind::Fun: {
      auto* f = c.as<node::Fun>();
      return Expr::fun(f->self, f->params, fill(f->body, e));
    }
    case Kind::Apply: {
      auto* a = c.as<node::Apply>();
      std::vector<Expr> args;
      for (const auto& x : a->args) args.push_back(fill(x, e));
      return Expr::apply(fill(a->fn, e), std::move(args));
    }
    case Kind::Case: {
      auto* x = c.as<node::Case>();
      return Expr::case_of(fill(x->scrutinee, e), x->pattern, fill(x->then_branch, e),
                           fill(x->else_branch, e));
    }
    case Kind::Let: {
      auto* l = c.as<node::Let>();
      return Expr::let(l->binder, fill(l->bound, e), fill(l->body, e));
    }
    case Kind::Letrec: {
      auto* l = c.as<node::Letrec>();
      return Expr::letrec(l->self, l->params, fill(l->fbody, e), fill(l->cont, e));
    }
    case Kind::Add: {
      auto* a = c.as<node::Add>();
      return Expr::add(fill(a->lhs, e), fill(a->rhs, e));
    }
    default: return c;
  }
}

}  // namespace

Context make_context(NamedExpr c) {
  auto n = count_holes(c.term);
  if (n != 1) throw Error("a context needs exactly one hole, found " + std::to_string(n));
  return Context{std::move(c)};
}

NamedExpr plug_context(const Context& c, const NamedExpr& e) { return NamedExpr{fill(c.term.term, e.term)}; }

Expr plug_context(const Context& c, const Expr& e) { return to_core(plug_context(c, from_core(e))); }

Context hole_context() { return Context{NamedExpr{Expr::hole()}}; }

}  // namespace mlq
