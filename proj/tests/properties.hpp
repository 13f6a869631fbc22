#pragma once

// Property checks shared by the unit tests (small counts) and the
// acceptance binary (full counts). Each returns how many instances were
// checked and the first violation found, if any.

#include <functional>
#include <sstream>
#include <string>

#include "oracles.hpp"

#include "mlq/generators.hpp"
#include "mlq/machine.hpp"
#include "mlq/scoping.hpp"
#include "mlq/substitution.hpp"
#include "mlq/surface.hpp"

namespace prop {

using namespace mlq;

struct Result {
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::string first;

  void fail(const std::string& what) {
    if (violations++ == 0) first = what;
  }
  bool ok() const { return violations == 0; }
};

inline GenSpec small_spec() {
  GenSpec s;
  s.max_arity = 2;
  return s;
}

inline Expr closed_expr(Rng& rng, std::size_t depth) { return to_core(random_expr(rng, {}, depth, small_spec())); }

inline Configuration closed_config(Rng& rng) {
  std::size_t depth = 1 + rng.below(3);
  return {random_stack(rng, 3, small_spec()), closed_expr(rng, depth)};
}

// Reduction rules whose left-hand side matches c, counted independently of
// step(): one push rule per compound non-value, and at most one rule for
// a value against the top frame.
inline int applicable_rules(const Configuration& c) {
  const Expr& e = c.expr;
  if (!is_value(e)) {
    switch (e.kind()) {
      case Kind::Apply:
      case Kind::Let:
      case Kind::Letrec:
      case Kind::Add:
      case Kind::Case:
      case Kind::Cons: return 1;
      default: return 0;
    }
  }
  if (c.stack.empty()) return 0;
  const Frame& f = c.stack.top();
  auto fun_arity = [&](std::size_t k) {
    auto* fn = e.as<node::Fun>();
    return fn && fn->params.size() == k;
  };
  if (auto* a = f.as<frame::AppFn>()) return a->args.empty() ? (fun_arity(0) ? 1 : 0) : 1;
  if (auto* a = f.as<frame::AppArg>()) {
    if (!a->rest.empty()) return 1;
    auto* fn = a->fn.as<node::Fun>();
    return fn && fn->params.size() == a->done.size() + 1 ? 1 : 0;
  }
  if (f.as<frame::AddL>()) return 1;
  if (auto* a = f.as<frame::AddR>()) return a->lhs.kind() == Kind::Lit && e.kind() == Kind::Lit ? 1 : 0;
  // case frames: the then- and else-rule have complementary premises.
  return 1;
}

// Determinism and preservation along generated runs.
inline Result determinism_preservation(std::uint64_t seed, std::size_t want) {
  Rng rng(seed);
  Result r;
  while (r.checked < want) {
    Configuration c = closed_config(rng);
    for (int i = 0; i < 40 && r.checked < want; ++i) {
      ++r.checked;
      if (!config_closed(c)) {
        r.fail("generated an open configuration: " + pretty_core(c.expr));
        break;
      }
      StepResult s1 = step(c), s2 = step(c);
      int rules = applicable_rules(c);
      bool progressed = std::holds_alternative<Configuration>(s1);
      bool final = std::holds_alternative<Final>(s1);
      if (rules > 1) r.fail("two rules apply to " + pretty_core(c.expr));
      if (progressed != (rules == 1)) r.fail("step disagrees with the rule count at " + pretty_core(c.expr));
      if (final && !(c.stack.empty() && is_value(c.expr))) r.fail("final without a value at the empty stack");
      if (s1.index() != s2.index()) r.fail("step is not a function");
      if (!progressed) break;
      const auto& next = std::get<Configuration>(s1);
      if (!(next == std::get<Configuration>(s2))) r.fail("step is not a function");
      if (!config_closed(next)) r.fail("step opened " + pretty_core(c.expr));
      c = next;
    }
  }
  return r;
}

// ⇓ⁿ agrees with the exact step count of eval, for all n.
inline Result terminations_coincide(std::uint64_t seed, std::size_t want, std::size_t max_n) {
  Rng rng(seed);
  Result r;
  while (r.checked < want) {
    Configuration c = closed_config(rng);
    ++r.checked;
    auto o = eval(c.expr, c.stack, max_n);
    std::optional<std::size_t> steps;
    if (auto* t = std::get_if<outcome::Terminated>(&o)) steps = t->steps;
    for (std::size_t n = 0; n <= max_n; ++n) {
      if (terminates_k(c, n) != (steps == n)) {
        r.fail("n = " + std::to_string(n) + " for " + pretty_core(c.expr));
        break;
      }
    }
  }
  return r;
}

inline bool terminates(const Configuration& c, std::size_t fuel) {
  return std::holds_alternative<outcome::Terminated>(eval(c.expr, c.stack, fuel));
}

// ⟨F::K, e⟩ terminates implies ⟨K, F[e]⟩ terminates.
inline Result remove_frame(std::uint64_t seed, std::size_t want) {
  Rng rng(seed);
  Result r;
  while (r.checked < want) {
    Frame f = random_frame(rng, small_spec());
    FrameStack k = random_stack(rng, 2, small_spec());
    Expr e = rng.chance(1, 2) ? random_value(rng, 1, small_spec()) : closed_expr(rng, 2);
    if (!terminates({k.push(f), e}, 5000)) continue;
    ++r.checked;
    if (!terminates({k, plug_frame(f, e)}, 20000)) r.fail(pretty(f) + " with " + pretty_core(e));
  }
  return r;
}

// ⟨K, F[e]⟩ terminates implies ⟨F::K, e⟩ terminates.
inline Result add_frame(std::uint64_t seed, std::size_t want) {
  Rng rng(seed);
  Result r;
  while (r.checked < want) {
    Frame f = random_frame(rng, small_spec());
    FrameStack k = random_stack(rng, 2, small_spec());
    Expr e = rng.chance(1, 2) ? random_value(rng, 1, small_spec()) : closed_expr(rng, 2);
    if (!frame_closed(f) || !closed(e)) continue;
    if (!terminates({k, plug_frame(f, e)}, 5000)) continue;
    ++r.checked;
    if (!terminates({k.push(f), e}, 20000)) r.fail(pretty(f) + " with " + pretty_core(e));
  }
  return r;
}

// every step of a run from ⟨K₁, e₁⟩ replays from ⟨K₁ ⧺ K′, e₁⟩.
inline Result extend_stack(std::uint64_t seed, std::size_t want) {
  Rng rng(seed);
  Result r;
  while (r.checked < want) {
    Configuration c = closed_config(rng);
    FrameStack extra = random_stack(rng, 3, small_spec());
    ++r.checked;
    std::vector<Configuration> trace;
    eval(c.expr, c.stack, 300, [&](std::size_t, const Configuration& x) { trace.push_back(x); });
    std::vector<Configuration> ext;
    eval(c.expr, c.stack.append(extra), 305, [&](std::size_t n, const Configuration& x) {
      if (n < trace.size()) ext.push_back(x);
    });
    // The original run's last traced configuration may be final; the
    // extended one continues past it.
    for (std::size_t i = 0; i < trace.size(); ++i) {
      if (i >= ext.size() || !(ext[i].expr == trace[i].expr) ||
          !(ext[i].stack == trace[i].stack.append(extra))) {
        r.fail("step " + std::to_string(i) + " of " + pretty_core(c.expr));
        break;
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Substitution and scoping

inline const std::vector<Name>& name_pool() {
  static const std::vector<Name> pool{Name::var("X"), Name::var("Y"), Name::var("Z"), Name::var("W"),
                                      Name::fun_id("f", 1), Name::fun_id("g", 0)};
  return pool;
}

inline ScopeCtx random_scope(Rng& rng) {
  ScopeCtx g;
  for (const auto& n : name_pool()) {
    if (rng.chance(1, 2)) g.insert(n);
  }
  return g;
}

inline Expr scoped_expr(Rng& rng, const ScopeCtx& g) {
  return to_core(random_expr(rng, g, 1 + rng.below(3), small_spec()));
}

// A substitution over the whole pool: closed values, values scoped in
// delta, names of delta, or identity.
inline Subst random_subst(Rng& rng, const ScopeCtx& delta) {
  Subst s = id_subst();
  std::vector<Name> dv(delta.begin(), delta.end());
  for (const auto& n : name_pool()) {
    switch (rng.below(4)) {
      case 0: s = update(s, n, random_value(rng, 2, small_spec())); break;
      case 1:
        if (!dv.empty()) s = update(s, n, Expr::var(rng.pick(dv)));
        break;
      case 2:
        if (!dv.empty()) s = rename(s, n, rng.pick(dv));
        break;
      default: break;
    }
  }
  return s;
}

inline ScopeCtx join(ScopeCtx a, const ScopeCtx& b) {
  a.insert(b.begin(), b.end());
  return a;
}

using Lemma = std::function<bool(Rng&, Result&)>;

// Runs a lemma until `want` instances satisfied its premises.
inline Result run_lemma(std::uint64_t seed, std::size_t want, const Lemma& lemma) {
  Rng rng(seed);
  Result r;
  std::size_t attempts = 0;
  while (r.checked < want && attempts < want * 200) {
    ++attempts;
    if (lemma(rng, r)) ++r.checked;
  }
  if (r.checked < want) r.fail("premises too rare: " + std::to_string(r.checked) + " instances");
  return r;
}

inline Result weakening(std::uint64_t seed, std::size_t want) {
  return run_lemma(seed, want, [](Rng& rng, Result& r) {
    ScopeCtx g = random_scope(rng), d = random_scope(rng);
    Expr e = scoped_expr(rng, g);
    Expr v = random_value(rng, 2, small_spec());
    if (!exp_scoped(g, e)) return false;
    if (!exp_scoped(join(g, d), e)) r.fail("exp " + pretty_core(e));
    if (val_scoped(g, v) && !val_scoped(join(g, d), v)) r.fail("val " + pretty_core(v));
    return true;
  });
}

inline Result extended_substitutions(std::uint64_t seed, std::size_t want) {
  return run_lemma(seed, want, [](Rng& rng, Result& r) {
    ScopeCtx g = random_scope(rng), d = random_scope(rng);
    Subst s = random_subst(rng, d);
    Name x = rng.pick(name_pool());
    Expr v = rng.chance(1, 2) ? random_value(rng, 2, small_spec()) : scoped_expr(rng, d);
    if (g.contains(x) || !val_scoped(d, v) || !subst_scoped(g, s, d)) return false;
    if (!subst_scoped(join(g, {x}), update(s, x, v), d)) r.fail("extending with " + x.str());
    return true;
  });
}

inline Result restricted_substitutions(std::uint64_t seed, std::size_t want) {
  return run_lemma(seed, want, [](Rng& rng, Result& r) {
    ScopeCtx g = random_scope(rng), d = random_scope(rng), xs = random_scope(rng);
    Subst s = random_subst(rng, d);
    if (!subst_scoped(g, s, d)) return false;
    if (!subst_scoped(join(g, xs), restrict(s, xs), join(d, xs))) r.fail("restricting " + to_string(xs));
    return true;
  });
}

inline Result restricted_identities(std::uint64_t seed, std::size_t want) {
  return run_lemma(seed, want, [](Rng& rng, Result& r) {
    ScopeCtx g = random_scope(rng), xs = random_scope(rng);
    Subst s = random_subst(rng, random_scope(rng));
    // make σ preserve Γ half of the time
    if (rng.chance(1, 2)) s = restrict(s, g);
    if (!preserves(g, s)) return false;
    if (!preserves(join(g, xs), restrict(s, xs))) r.fail("restricting " + to_string(xs));
    return true;
  });
}

inline Result preserving_is_identity(std::uint64_t seed, std::size_t want) {
  return run_lemma(seed, want, [](Rng& rng, Result& r) {
    ScopeCtx g = random_scope(rng);
    Expr e = scoped_expr(rng, g);
    Subst s = restrict(random_subst(rng, random_scope(rng)), g);
    if (!exp_scoped(g, e) || !preserves(g, s)) return false;
    if (!(apply_subst(e, s) == e)) r.fail(pretty_core(e));
    return true;
  });
}

inline Result closed_untouched(std::uint64_t seed, std::size_t want) {
  return run_lemma(seed, want, [](Rng& rng, Result& r) {
    Expr e = scoped_expr(rng, {});
    Subst s = random_subst(rng, random_scope(rng));
    if (!closed(e)) return false;
    if (!(apply_subst(e, s) == e)) r.fail(pretty_core(e));
    return true;
  });
}

inline Result substitution_preserves_scoping(std::uint64_t seed, std::size_t want) {
  return run_lemma(seed, want, [](Rng& rng, Result& r) {
    ScopeCtx g = random_scope(rng), d = random_scope(rng);
    Expr e = scoped_expr(rng, g);
    Subst s = random_subst(rng, d);
    if (!exp_scoped(g, e) || !subst_scoped(g, s, d)) return false;
    if (!exp_scoped(d, apply_subst(e, s))) r.fail(pretty_core(e));
    return true;
  });
}

// e[σ∖x][x ↦ vσ] = e[x ↦ v][σ] for closing σ.
inline Result beta1_decomposition(std::uint64_t seed, std::size_t want) {
  return run_lemma(seed, want, [](Rng& rng, Result& r) {
    ScopeCtx g = random_scope(rng);
    Name x = rng.pick(name_pool());
    if (g.contains(x)) return false;
    Expr e = scoped_expr(rng, join(g, {x}));
    Expr v = rng.chance(1, 2) ? random_value(rng, 2, small_spec()) : scoped_expr(rng, g);
    Subst s = id_subst();
    for (const auto& n : g) s = update(s, n, random_value(rng, 2, small_spec()));
    if (!val_scoped(g, v)) return false;
    Expr lhs = apply_subst(apply_subst(e, restrict(s, {x})), update(id_subst(), x, apply_subst(v, s)));
    Expr rhs = apply_subst(apply_subst(e, update(id_subst(), x, v)), s);
    if (!(lhs == rhs)) r.fail(pretty_core(e) + " with " + x.str() + " := " + pretty_core(v));
    return true;
  });
}

// Not scoped in Γ stays open after mapping every name of Γ to 0.
inline Result converse_scoping(std::uint64_t seed, std::size_t want) {
  return run_lemma(seed, want, [](Rng& rng, Result& r) {
    ScopeCtx g = random_scope(rng);
    Expr e = scoped_expr(rng, random_scope(rng));
    if (exp_scoped(g, e)) return false;
    Subst s0 = id_subst();
    for (const auto& n : g) s0 = update(s0, n, Expr::lit(0));
    if (closed(apply_subst(e, s0))) r.fail(pretty_core(e) + " in " + to_string(g));
    return true;
  });
}

// The nameless implementation against the named definition, closed images.
inline Result named_differential(std::uint64_t seed, std::size_t want) {
  return run_lemma(seed, want, [](Rng& rng, Result& r) {
    ScopeCtx g = random_scope(rng);
    NamedExpr e = random_expr(rng, g, 1 + rng.below(3), small_spec());
    Subst s = id_subst();
    oracle::NamedSubst ns;
    for (const auto& n : name_pool()) {
      if (rng.chance(1, 2)) {
        Expr v = random_value(rng, 2, small_spec());
        s = update(s, n, v);
        ns[n] = from_core(v).term;
      }
    }
    Expr mine = apply_subst(to_core(e), s);
    Expr theirs = to_core(NamedExpr{oracle::subst(e.term, ns)});
    if (!(mine == theirs)) r.fail(pretty(e));
    return true;
  });
}

// parse ∘ pretty is the identity up to alpha, and printing is stable.
inline Result parser_round_trip(std::uint64_t seed, std::size_t want) {
  Rng rng(seed);
  Result r;
  while (r.checked < want) {
    ScopeCtx g = random_scope(rng);
    NamedExpr e = random_expr(rng, g, 1 + rng.below(4), small_spec());
    ++r.checked;
    std::string text = pretty(e);
    if (text != pretty(e)) r.fail("pretty is not deterministic: " + text);
    try {
      NamedExpr back = parse_expr(text);
      if (!alpha_eq(back, e)) r.fail("round trip changed " + text);
      if (pretty(back) != text) r.fail("reprinting changed " + text);
    } catch (const ParseError& err) {
      r.fail(text + ": " + err.what());
    }
  }
  return r;
}

}  // namespace prop
