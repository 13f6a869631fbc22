#include "mlq/generators.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <unordered_set>

#include "mlq/scoping.hpp"
#include "mlq/surface.hpp"

namespace mlq {

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw Error("Rng::below(0)");
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t cut = max - max % n;
  std::uint64_t x;
  do {
    x = gen_();
  } while (x >= cut);
  return static_cast<std::size_t>(x % n);
}

namespace {

const std::vector<std::string> kVarPool{"X", "Y", "Z", "W"};

struct CoreHash {
  std::size_t operator()(const Expr& e) const { return e.hash(); }
};

// A lazy sequence.
template <class T>
using Stream = std::function<std::optional<T>()>;

// Index tuples over lists of the given sizes, ordered by their largest
// component, so every list advances before any one is exhausted.
class ShellTuples {
 public:
  explicit ShellTuples(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)), cur_(sizes_.size(), 0) {
    for (auto s : sizes_) {
      if (s == 0) done_ = true;
      max_shell_ = std::max(max_shell_, s == 0 ? 0 : s - 1);
    }
  }

  std::optional<std::vector<std::size_t>> next() {
    while (!done_) {
      if (!started_) {
        started_ = true;
        if (valid()) return cur_;
        continue;
      }
      if (!bump()) {
        if (++shell_ > max_shell_) {
          done_ = true;
          break;
        }
        std::fill(cur_.begin(), cur_.end(), 0);
        started_ = false;
        continue;
      }
      if (valid()) return cur_;
    }
    return std::nullopt;
  }

 private:
  bool valid() const {
    std::size_t m = 0;
    for (std::size_t i = 0; i < cur_.size(); ++i) {
      if (cur_[i] >= sizes_[i]) return false;
      m = std::max(m, cur_[i]);
    }
    return m == shell_;
  }

  // Odometer over [0, shell_]^k, last position fastest.
  bool bump() {
    for (std::size_t i = cur_.size(); i-- > 0;) {
      if (cur_[i] < std::min(shell_, sizes_[i] - 1)) {
        ++cur_[i];
        for (std::size_t j = i + 1; j < cur_.size(); ++j) cur_[j] = 0;
        return true;
      }
    }
    return false;
  }

  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> cur_;
  std::size_t shell_ = 0;
  std::size_t max_shell_ = 0;
  bool started_ = false;
  bool done_ = false;
};

template <class T, class F>
Stream<T> tuple_stream(std::vector<std::size_t> sizes, F build) {
  auto tuples = std::make_shared<ShellTuples>(std::move(sizes));
  return [tuples, build]() -> std::optional<T> {
    auto t = tuples->next();
    if (!t) return std::nullopt;
    return build(*t);
  };
}

// Takes one item from each live stream in turn.
template <class T, class Keep>
void round_robin(std::vector<Stream<T>> streams, std::size_t limit, Keep keep) {
  std::vector<bool> live(streams.size(), true);
  std::size_t alive = streams.size();
  while (alive > 0) {
    for (std::size_t i = 0; i < streams.size(); ++i) {
      if (!live[i]) continue;
      auto x = streams[i]();
      if (!x) {
        live[i] = false;
        --alive;
        continue;
      }
      if (!keep(std::move(*x))) return;
      if (limit == 0) return;
    }
  }
}

ScopeCtx extend(ScopeCtx g, std::initializer_list<Name> xs) {
  g.insert(xs.begin(), xs.end());
  return g;
}

std::vector<std::string> params_of(std::size_t k) {
  return {kVarPool.begin(), kVarPool.begin() + static_cast<std::ptrdiff_t>(std::min(k, kVarPool.size()))};
}

ScopeCtx with_params(ScopeCtx g, const Name& self, const std::vector<std::string>& ps) {
  g.insert(self);
  for (const auto& p : ps) g.insert(Name::var(p));
  return g;
}

std::vector<Pattern> small_patterns() {
  return {Pattern::lit(0), Pattern::var("X"), Pattern::nil(), Pattern::cons(Pattern::var("H"), Pattern::var("T"))};
}

ScopeCtx with_pattern(ScopeCtx g, const Pattern& p) {
  for (auto& v : pattern_vars(p)) g.insert(v);
  return g;
}

// Layered expression enumeration with memoised scopes.
class ExprEnum {
 public:
  explicit ExprEnum(const GenSpec& spec) : spec_(spec) {}

  const std::vector<NamedExpr>& all(const ScopeCtx& g, std::size_t d) {
    auto key = std::make_pair(g, d);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::vector<NamedExpr> out;
    std::unordered_set<Expr, CoreHash> seen;
    auto keep = [&](NamedExpr e) {
      if (out.size() >= spec_.limit) return false;
      if (seen.insert(to_core(e)).second) out.push_back(std::move(e));
      return out.size() < spec_.limit;
    };
    if (d == 0) {
      for (const auto& l : spec_.literal_pool) keep(NamedExpr{Expr::lit(l)});
      keep(NamedExpr{Expr::nil()});
      for (const auto& n : g) keep(NamedExpr{Expr::var(n)});
    } else {
      const auto prev = all(g, d - 1);  // copy: memo_ may rehash below
      for (const auto& e : prev) keep(e);
      round_robin<NamedExpr>(layer(g, d, prev), spec_.limit, keep);
    }
    return memo_.emplace(key, std::move(out)).first->second;
  }

 private:
  std::vector<Stream<NamedExpr>> layer(const ScopeCtx& g, std::size_t d, const std::vector<NamedExpr>& a) {
    using E = NamedExpr;
    std::vector<Stream<E>> s;
    auto sz = a.size();
    s.push_back(tuple_stream<E>({sz, sz}, [a](auto& t) { return E{Expr::cons(a[t[0]].term, a[t[1]].term)}; }));
    s.push_back(tuple_stream<E>({sz, sz}, [a](auto& t) { return E{Expr::add(a[t[0]].term, a[t[1]].term)}; }));
    {
      auto body = all(extend(g, {Name::var("X")}), d - 1);
      s.push_back(tuple_stream<E>({sz, body.size()}, [a, body](auto& t) {
        return E{Expr::let("X", a[t[0]].term, body[t[1]].term)};
      }));
    }
    for (std::size_t k = 0; k <= std::min<std::size_t>(spec_.max_arity, 2); ++k) {
      Name self = Name::fun_id("f", k);
      auto ps = params_of(k);
      auto body = all(with_params(g, self, ps), d - 1);
      s.push_back(tuple_stream<E>({body.size()}, [self, ps, body](auto& t) {
        return E{Expr::fun(self, ps, body[t[0]].term)};
      }));
    }
    s.push_back(tuple_stream<E>({sz}, [a](auto& t) { return E{Expr::apply(a[t[0]].term, {})}; }));
    s.push_back(tuple_stream<E>({sz, sz}, [a](auto& t) { return E{Expr::apply(a[t[0]].term, {a[t[1]].term})}; }));
    for (const auto& p : small_patterns()) {
      auto then_b = all(with_pattern(g, p), d - 1);
      s.push_back(tuple_stream<E>({sz, then_b.size(), sz}, [a, p, then_b](auto& t) {
        return E{Expr::case_of(a[t[0]].term, p, then_b[t[1]].term, a[t[2]].term)};
      }));
    }
    {
      Name self = Name::fun_id("f", 1);
      auto fb = all(with_params(g, self, {"X"}), d - 1);
      auto cont = all(extend(g, {self}), d - 1);
      s.push_back(tuple_stream<E>({fb.size(), cont.size()}, [self, fb, cont](auto& t) {
        return E{Expr::letrec(self, {"X"}, fb[t[0]].term, cont[t[1]].term)};
      }));
    }
    return s;
  }

  const GenSpec& spec_;
  std::map<std::pair<ScopeCtx, std::size_t>, std::vector<NamedExpr>> memo_;
};

Expr lit(long long v) { return Expr::lit(v); }

Expr identity_fun() { return Expr::fun(Name::fun_id("f", 1), {"X"}, Expr::bvar(1)); }
Expr const_fun() { return Expr::fun(Name::fun_id("f", 0), {}, lit(0)); }

}  // namespace

// ---------------------------------------------------------------------------

std::vector<NamedExpr> gen_exprs(const ScopeCtx& gamma, const GenSpec& spec) {
  ExprEnum en(spec);
  return en.all(gamma, spec.depth);
}

std::vector<Expr> gen_values(const GenSpec& spec) {
  std::vector<Expr> out;
  std::unordered_set<Expr, CoreHash> seen;
  auto keep = [&](Expr v) {
    if (out.size() >= spec.limit) return false;
    if (seen.insert(v).second) out.push_back(std::move(v));
    return out.size() < spec.limit;
  };
  for (const auto& l : spec.literal_pool) keep(Expr::lit(l));
  keep(Expr::nil());
  ExprEnum en(spec);
  for (std::size_t d = 1; d <= spec.depth && out.size() < spec.limit; ++d) {
    const auto prev = out;
    std::vector<Stream<Expr>> s;
    s.push_back(tuple_stream<Expr>({prev.size(), prev.size()},
                                   [prev](auto& t) { return Expr::cons(prev[t[0]], prev[t[1]]); }));
    for (std::size_t k = 0; k <= std::min<std::size_t>(spec.max_arity, 2); ++k) {
      Name self = Name::fun_id("f", k);
      auto ps = params_of(k);
      auto body = en.all(with_params({}, self, ps), d - 1);
      s.push_back(tuple_stream<Expr>({body.size()}, [self, ps, body](auto& t) {
        return to_core(NamedExpr{Expr::fun(self, ps, body[t[0]].term)});
      }));
    }
    round_robin<Expr>(std::move(s), spec.limit, keep);
  }
  return out;
}

std::vector<std::vector<Expr>> arg_tuples(std::size_t arity, const GenSpec& spec) {
  std::vector<std::vector<Expr>> out;
  if (arity == 0) return {{}};
  if (arity == 1) {
    for (const auto& l : spec.literal_pool) out.push_back({Expr::lit(l)});
    out.push_back({Expr::nil()});
    out.push_back({Expr::cons(lit(0), Expr::nil())});
    out.push_back({identity_fun()});
    out.push_back({const_fun()});
    return out;
  }
  if (arity == 2) {
    const std::vector<Expr> small{lit(0), lit(1), Expr::nil()};
    for (const auto& a : small) {
      for (const auto& b : small) out.push_back({a, b});
    }
    return out;
  }
  std::vector<Expr> zeros(arity, lit(0)), ones(arity, lit(1)), nils(arity, Expr::nil()), count;
  for (std::size_t i = 0; i < arity; ++i) count.push_back(Expr::lit(static_cast<long long>(i)));
  return {zeros, ones, nils, count};
}

std::vector<Frame> gen_frames(const GenSpec& spec) {
  std::vector<Frame> out;
  const Expr om = omega();
  for (const auto& l : spec.literal_pool) out.push_back(frame::CaseF{Pattern::lit(l), lit(0), om});
  auto ht = Pattern::cons(Pattern::var("H"), Pattern::var("T"));
  out.push_back(frame::CaseF{Pattern::nil(), lit(0), om});
  out.push_back(frame::CaseF{ht, lit(0), om});
  out.push_back(frame::CaseF{ht, Expr::bvar(0), lit(0)});  // head
  out.push_back(frame::CaseF{ht, Expr::bvar(1), lit(0)});  // tail
  for (std::size_t k = 0; k <= spec.max_arity; ++k) {
    for (auto& args : arg_tuples(k, spec)) out.push_back(frame::AppFn{std::move(args)});
  }
  out.push_back(frame::AddL{lit(0)});
  out.push_back(frame::AddL{lit(1)});
  out.push_back(frame::AddR{lit(0)});
  out.push_back(frame::AddR{lit(1)});
  out.push_back(frame::ConsTail{lit(0)});
  out.push_back(frame::ConsHead{Expr::nil()});
  out.push_back(frame::LetF{"X", Expr::bvar(0)});
  return out;
}

std::vector<FrameStack> gen_stacks(const GenSpec& spec) {
  const auto alphabet = gen_frames(spec);
  std::vector<FrameStack> out{FrameStack{}};
  std::vector<FrameStack> layer{FrameStack{}};
  for (std::size_t len = 1; len <= spec.depth && out.size() < spec.limit; ++len) {
    std::vector<FrameStack> next;
    // innermost frame most significant: extend the previous layer outwards
    for (const auto& inner : alphabet) {
      for (const auto& k : layer) {
        if (out.size() >= spec.limit) break;
        std::vector<Frame> s{inner};
        auto rest = k.frames();
        s.insert(s.end(), rest.begin(), rest.end());
        auto stack = FrameStack::from_frames(s);
        out.push_back(stack);
        next.push_back(stack);
      }
    }
    layer = std::move(next);
  }
  return out;
}

namespace {

std::vector<Expr> leaves(const ScopeCtx& g, const GenSpec& spec) {
  std::vector<Expr> out;
  for (const auto& l : spec.literal_pool) out.push_back(Expr::lit(l));
  out.push_back(Expr::nil());
  for (const auto& n : g) out.push_back(Expr::var(n));
  return out;
}

// One layer of context formers around `inner`, which lives under the
// binders listed in `hole_scope` (used to pick leaves that are in scope).
void wrap_contexts(const Expr& inner, const GenSpec& spec, const std::function<bool(Expr)>& emit) {
  const Name f0 = Name::fun_id("f", 0), f1 = Name::fun_id("f", 1);
  const auto closed_leaves = leaves({}, spec);
  auto x_leaves = leaves({Name::var("X")}, spec);
  auto f_leaves = leaves({f1}, spec);
  auto ht = Pattern::cons(Pattern::var("H"), Pattern::var("T"));
  for (const auto& e : closed_leaves) {
    if (!emit(Expr::add(inner, e))) return;
    if (!emit(Expr::add(e, inner))) return;
    if (!emit(Expr::cons(inner, e))) return;
    if (!emit(Expr::cons(e, inner))) return;
    if (!emit(Expr::let("X", e, inner))) return;
    if (!emit(Expr::apply(inner, {e}))) return;
    if (!emit(Expr::apply(e, {inner}))) return;
    if (!emit(Expr::case_of(inner, Pattern::lit(0), e, lit(0)))) return;
    if (!emit(Expr::case_of(e, ht, inner, lit(0)))) return;
    if (!emit(Expr::case_of(e, Pattern::lit(0), lit(0), inner))) return;
    if (!emit(Expr::letrec(f1, {"X"}, inner, Expr::apply(Expr::var(f1), {e})))) return;
  }
  for (const auto& e : x_leaves) {
    if (!emit(Expr::let("X", inner, e))) return;
  }
  for (const auto& e : f_leaves) {
    if (!emit(Expr::letrec(f1, {"X"}, e, inner))) return;
  }
  if (!emit(Expr::fun(f1, {"X"}, inner))) return;
  if (!emit(Expr::fun(f0, {}, inner))) return;
  emit(Expr::apply(inner, {}));
}

}  // namespace

std::vector<Context> gen_contexts(const GenSpec& spec) {
  std::vector<Context> out{hole_context()};
  std::vector<Expr> layer{Expr::hole()};
  for (std::size_t d = 1; d <= spec.depth && out.size() < spec.limit; ++d) {
    std::vector<Expr> next;
    for (const auto& inner : layer) {
      bool more = true;
      wrap_contexts(inner, spec, [&](Expr c) {
        if (out.size() >= spec.limit) return more = false;
        out.push_back(Context{NamedExpr{c}});
        next.push_back(std::move(c));
        return true;
      });
      if (!more) break;
    }
    layer = std::move(next);
  }
  return out;
}

std::vector<Subst> gen_closing_substs(const ScopeCtx& gamma, const GenSpec& spec) {
  if (gamma.empty()) return {id_subst()};
  const auto values = gen_values(spec);
  std::vector<Name> names(gamma.begin(), gamma.end());
  std::vector<Subst> out;
  ShellTuples tuples(std::vector<std::size_t>(names.size(), values.size()));
  while (out.size() < spec.limit) {
    auto t = tuples.next();
    if (!t) break;
    Subst s = id_subst();
    for (std::size_t i = 0; i < names.size(); ++i) s = update(s, names[i], values[(*t)[i]]);
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random sampling

Pattern random_pattern(Rng& rng, std::size_t depth, const GenSpec& spec) {
  std::vector<std::string> unused = {"H", "T", "A", "B", "C", "D"};
  std::function<Pattern(std::size_t)> go = [&](std::size_t d) -> Pattern {
    std::size_t choice = rng.below(d == 0 ? 3 : 4);
    switch (choice) {
      case 0: return Pattern::lit(rng.pick(spec.literal_pool));
      case 1:
        if (!unused.empty()) {
          std::string v = unused.front();
          unused.erase(unused.begin());
          return Pattern::var(v);
        }
        return Pattern::nil();
      case 2: return Pattern::nil();
      default: {
        Pattern h = go(d - 1);
        return Pattern::cons(h, go(d - 1));
      }
    }
  };
  return go(depth);
}

namespace {

class RandomExpr {
 public:
  RandomExpr(Rng& rng, const GenSpec& spec) : rng_(rng), spec_(spec) {}

  Expr gen(const ScopeCtx& g, std::size_t depth) {
    if (depth == 0 || rng_.chance(1, 5)) return leaf(g);
    switch (rng_.below(9)) {
      case 0: return Expr::cons(gen(g, depth - 1), gen(g, depth - 1));
      case 1: return Expr::add(operand(g, depth - 1), operand(g, depth - 1));
      case 2: {
        std::string x = rng_.pick(kVarPool);
        Expr bound = gen(g, depth - 1);
        return Expr::let(x, bound, gen(extend(g, {Name::var(x)}), depth - 1));
      }
      case 3:
      case 4: return fun(g, depth - 1);
      case 5: return application(g, depth);
      case 6: {
        Expr scrut = gen(g, depth - 1);
        Pattern p = random_pattern(rng_, 1, spec_);
        Expr t = gen(with_pattern(g, p), depth - 1);
        return Expr::case_of(scrut, p, t, gen(g, depth - 1));
      }
      case 7: {
        std::size_t k = rng_.below(std::min<std::size_t>(spec_.max_arity, 2) + 1);
        Name self = Name::fun_id(rng_.chance(1, 2) ? "f" : "g", k);
        auto ps = params(k);
        Expr fb = gen(with_params(g, self, ps), depth - 1);
        return Expr::letrec(self, ps, fb, gen(extend(g, {self}), depth - 1));
      }
      default: return leaf(g);
    }
  }

  Expr fun(const ScopeCtx& g, std::size_t depth) {
    std::size_t k = rng_.below(spec_.max_arity + 1);
    Name self = Name::fun_id(rng_.chance(1, 2) ? "f" : "g", k);
    auto ps = params(k);
    return Expr::fun(self, ps, gen(with_params(g, self, ps), depth));
  }

 private:
  Expr leaf(const ScopeCtx& g) {
    std::size_t r = rng_.below(g.empty() ? 4 : 7);
    if (r < 3) return Expr::lit(rng_.pick(spec_.literal_pool));
    if (r == 3) return Expr::nil();
    std::vector<Name> names(g.begin(), g.end());
    return Expr::var(rng_.pick(names));
  }

  // Additions mostly see literals so that they do not all get stuck.
  Expr operand(const ScopeCtx& g, std::size_t depth) {
    if (rng_.chance(1, 2)) return Expr::lit(rng_.pick(spec_.literal_pool));
    return gen(g, depth);
  }

  Expr application(const ScopeCtx& g, std::size_t depth) {
    Expr fn;
    std::size_t k;
    if (rng_.chance(2, 3)) {
      fn = fun(g, depth - 1);
      k = fn.as<node::Fun>()->params.size();
      if (rng_.chance(1, 10)) k = rng_.below(spec_.max_arity + 1);
    } else {
      fn = gen(g, depth - 1);
      k = rng_.below(std::min<std::size_t>(spec_.max_arity, 2) + 1);
    }
    std::vector<Expr> args;
    for (std::size_t i = 0; i < k; ++i) args.push_back(gen(g, depth - 1));
    return Expr::apply(fn, std::move(args));
  }

  std::vector<std::string> params(std::size_t k) {
    auto pool = kVarPool;
    std::vector<std::string> out;
    for (std::size_t i = 0; i < k && !pool.empty(); ++i) {
      std::size_t j = rng_.below(pool.size());
      out.push_back(pool[j]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(j));
    }
    return out;
  }

  Rng& rng_;
  const GenSpec& spec_;
};

}  // namespace

NamedExpr random_expr(Rng& rng, const ScopeCtx& gamma, std::size_t depth, const GenSpec& spec) {
  return NamedExpr{RandomExpr(rng, spec).gen(gamma, depth)};
}

Expr random_value(Rng& rng, std::size_t depth, const GenSpec& spec) {
  RandomExpr gen(rng, spec);
  std::function<Expr(std::size_t)> go = [&](std::size_t d) -> Expr {
    std::size_t r = rng.below(d == 0 ? 2 : 4);
    if (r == 0) return Expr::lit(rng.pick(spec.literal_pool));
    if (r == 1) return Expr::nil();
    if (r == 2) {
      Expr h = go(d - 1);
      return Expr::cons(h, go(d - 1));
    }
    return to_core(NamedExpr{gen.fun({}, d - 1)});
  };
  return go(depth);
}

Frame random_frame(Rng& rng, const GenSpec& spec) {
  RandomExpr gen(rng, spec);
  auto closed_expr = [&]() { return to_core(NamedExpr{gen.gen({}, 1)}); };
  switch (rng.below(8)) {
    case 0: {
      std::vector<Expr> args;
      std::size_t k = rng.below(spec.max_arity + 1);
      for (std::size_t i = 0; i < k; ++i) args.push_back(random_value(rng, 1, spec));
      return frame::AppFn{std::move(args)};
    }
    case 1: {
      std::size_t k = 1 + rng.below(spec.max_arity);
      std::size_t at = rng.below(k);
      Expr fn = rng.chance(3, 4) ? to_core(NamedExpr{gen.fun({}, 1)}) : random_value(rng, 1, spec);
      std::vector<Expr> done, rest;
      for (std::size_t i = 0; i < at; ++i) done.push_back(random_value(rng, 1, spec));
      for (std::size_t i = at + 1; i < k; ++i) rest.push_back(closed_expr());
      return frame::AppArg{fn, std::move(done), std::move(rest)};
    }
    case 2: {
      Name x = Name::var("X");
      Expr body = to_core(NamedExpr{gen.gen({x}, 1)}, std::span<const Name>(&x, 1));
      return frame::LetF{"X", body};
    }
    case 3: return frame::AddL{rng.chance(3, 4) ? Expr::lit(rng.pick(spec.literal_pool)) : closed_expr()};
    case 4: return frame::AddR{rng.chance(3, 4) ? Expr::lit(rng.pick(spec.literal_pool)) : random_value(rng, 1, spec)};
    case 5: {
      Pattern p = random_pattern(rng, 1, spec);
      auto vars = pattern_vars(p);
      ScopeCtx g = with_pattern({}, p);
      Expr t = to_core(NamedExpr{gen.gen(g, 1)}, vars);
      Expr e = rng.chance(1, 4) ? omega() : closed_expr();
      return frame::CaseF{p, t, e};
    }
    case 6: return frame::ConsTail{closed_expr()};
    default: return frame::ConsHead{random_value(rng, 1, spec)};
  }
}

FrameStack random_stack(Rng& rng, std::size_t max_len, const GenSpec& spec) {
  std::size_t len = rng.below(max_len + 1);
  std::vector<Frame> fs;
  for (std::size_t i = 0; i < len; ++i) fs.push_back(random_frame(rng, spec));
  return FrameStack::from_frames(fs);
}

FrameStack random_alphabet_stack(Rng& rng, std::size_t len, const GenSpec& spec) {
  static thread_local std::vector<Frame> cache;
  static thread_local std::size_t cache_key = 0;
  std::size_t key = spec.max_arity * 1000003u + spec.literal_pool.size();
  for (const auto& l : spec.literal_pool) key = key * 31 + static_cast<std::size_t>(l.convert_to<long long>());
  if (cache.empty() || cache_key != key) {
    cache = gen_frames(spec);
    cache_key = key;
  }
  std::vector<Frame> fs;
  for (std::size_t i = 0; i < len; ++i) fs.push_back(rng.pick(cache));
  return FrameStack::from_frames(fs);
}

Subst random_closing(Rng& rng, const ScopeCtx& gamma, const GenSpec& spec) {
  Subst s = id_subst();
  for (const auto& n : gamma) s = update(s, n, random_value(rng, 2, spec));
  return s;
}

// ---------------------------------------------------------------------------
// Corpus

std::string to_string(Expected e) {
  switch (e) {
    case Expected::Consistent: return "consistent";
    case Expected::Counterexample: return "counterexample";
    case Expected::Inconclusive: return "inconclusive";
  }
  return "?";
}

Expected expected_from_string(const std::string& s) {
  if (s == "consistent") return Expected::Consistent;
  if (s == "counterexample") return Expected::Counterexample;
  if (s == "inconclusive") return Expected::Inconclusive;
  throw Error("unknown verdict '" + s + "'");
}

Expected CorpusEntry::expected_for(const std::string& method) const {
  auto it = expected_by_method.find(method);
  return it == expected_by_method.end() ? expected : it->second;
}

ScopeCtx parse_gamma(const std::string& text) {
  ScopeCtx g;
  std::size_t i = 0;
  while (i <= text.size()) {
    std::size_t j = text.find(',', i);
    if (j == std::string::npos) j = text.size();
    std::string item = text.substr(i, j - i);
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    item = b == std::string::npos ? "" : item.substr(b, e - b + 1);
    if (!item.empty()) {
      auto slash = item.find('/');
      auto ident_ok = [](const std::string& id, bool upper) {
        if (id.empty() || !(upper ? std::isupper(static_cast<unsigned char>(id[0]))
                                  : std::islower(static_cast<unsigned char>(id[0]))))
          return false;
        return std::all_of(id.begin(), id.end(),
                           [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
      };
      if (slash == std::string::npos) {
        if (!ident_ok(item, true)) throw Error("bad variable '" + item + "' in scope list");
        g.insert(Name::var(item));
      } else {
        std::string id = item.substr(0, slash), ar = item.substr(slash + 1);
        if (!ident_ok(id, false) || ar.empty() ||
            !std::all_of(ar.begin(), ar.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
          throw Error("bad function identifier '" + item + "' in scope list");
        g.insert(Name::fun_id(id, std::stoul(ar)));
      }
    } else if (j < text.size()) {
      throw Error("empty item in scope list");
    }
    i = j + 1;
  }
  return g;
}

std::string gamma_to_string(const ScopeCtx& gamma) {
  std::string out;
  for (const auto& n : gamma) {
    if (!out.empty()) out += ",";
    out += n.str();
  }
  return out;
}

namespace {

CorpusEntry entry(std::string name, std::string description, std::string gamma, std::string lhs, std::string rhs,
                  Expected expected, std::map<std::string, Expected> by_method = {},
                  std::vector<SideCondition> side = {}) {
  CorpusEntry e;
  e.name = std::move(name);
  e.description = std::move(description);
  e.gamma = parse_gamma(gamma);
  e.lhs_src = std::move(lhs);
  e.rhs_src = std::move(rhs);
  e.lhs = to_core(parse_expr(e.lhs_src));
  e.rhs = to_core(parse_expr(e.rhs_src));
  e.side_conditions = std::move(side);
  e.expected = expected;
  e.expected_by_method = std::move(by_method);
  if (!exp_scoped(e.gamma, e.lhs) || !exp_scoped(e.gamma, e.rhs)) {
    throw Error("corpus entry " + e.name + " is not scoped in its gamma");
  }
  return e;
}

}  // namespace

std::vector<CorpusEntry> corpus() {
  using enum Expected;
  const std::string om = "apply (fun f/0() -> apply f/0())()";
  const std::string sum_fun = "fun f/1(X) -> case X of 0 then 0 else X + apply f/1(X + -1)";
  std::vector<CorpusEntry> c;
  c.push_back(entry("beta1", "e[x := v] vs let x = v in e, with e = X + 1 and v = 41", "", "41 + 1",
                    "let X = 41 in X + 1", Consistent));
  c.push_back(entry("beta1-fun", "beta1 with e = [X|X] and a function value", "",
                    "[fun f/0() -> 1|fun f/0() -> 1]", "let X = fun f/0() -> 1 in [X|X]", Consistent));
  c.push_back(entry("beta1-open", "beta1 over an open body, e = X + Y and v = 2", "Y", "2 + Y",
                    "let X = 2 in X + Y", Consistent));
  c.push_back(entry("beta2", "body with self and parameter substituted vs the application", "", "5 + 1",
                    "apply (fun f/1(X) -> X + 1)(5)", Consistent));
  c.push_back(entry("beta2-rec", "beta2 where the body calls itself", "",
                    "case 2 of 0 then 0 else 2 + apply (" + sum_fun + ")(2 + -1)", "apply (" + sum_fun + ")(2)",
                    Consistent));
  c.push_back(entry("beta3", "e vs applying a function that ignores its argument", "Y", "Y + 1",
                    "apply (fun f/1(X) -> Y + 1)(7)", Consistent));
  c.push_back(entry("add-comm", "commutativity of addition over open operands", "X,Y", "X + Y", "Y + X", Consistent));
  c.push_back(entry("add-comm-closed", "commutativity of addition over closed compound operands", "",
                    "(1 + 2) + (let X = 3 in X)", "(let X = 3 in X) + (1 + 2)", Consistent));
  c.push_back(entry("seq", "e2 vs let x = e1 in e2 for a terminating closed e1", "Y", "Y + 1",
                    "let X = 1 + 2 in Y + 1", Consistent, {}, {{"terminates", "1 + 2"}}));
  c.push_back(entry("seq-closed", "sequencing with a closed e2 and an applied e1", "", "[1|[]]",
                    "let X = apply (fun f/0() -> 0)() in [1|[]]", Consistent, {},
                    {{"terminates", "apply (fun f/0() -> 0)()"}}));
  c.push_back(entry("fun-pair", "X + 2 vs (X + 1) + 1 under a function binder", "", "fun f/1(X) -> X + 2",
                    "fun f/1(X) -> X + 1 + 1", Consistent, {{"naive", Counterexample}}));
  c.push_back(entry("add-lit", "an addition vs its result", "", "1 + 2", "3", Consistent));
  c.push_back(entry("letrec-sum", "a recursive list sum vs its result", "",
                    "letrec sum/1(L) = case L of [H|T] then H + apply sum/1(T) else 0 in "
                    "apply sum/1([1|[2|[3|[]]]])",
                    "6", Consistent));
  c.push_back(entry("stuck-stuck", "two different stuck programs", "", "[] + 1", "apply 0()", Consistent));
  c.push_back(entry("omega-omega", "the diverging term against itself", "", om, om, Consistent,
                    {{"discriminator", Inconclusive}}));
  c.push_back(entry("lit-neq", "distinct literals", "", "1", "2", Counterexample));
  c.push_back(entry("shape-neq", "a literal vs a list", "", "5", "[5|[]]", Counterexample));
  c.push_back(entry("head-neq", "lists with different heads", "", "[1|[]]", "[2|[]]", Counterexample));
  c.push_back(entry("tail-neq", "lists with different tails", "", "[1|[]]", "[1|[2|[]]]", Counterexample));
  c.push_back(entry("fun-neq", "identity vs a constant function", "", "fun f/1(X) -> X", "fun f/1(X) -> 0",
                    Counterexample));
  c.push_back(entry("stuck-fun", "identity vs X + 0, told apart by a non-literal argument", "",
                    "fun f/1(X) -> X", "fun f/1(X) -> X + 0", Counterexample));
  c.push_back(entry("omega-zero", "divergence vs a value", "", om, "0", Counterexample));
  c.push_back(entry("stuck-zero", "a stuck program vs a value", "", "[] + 1", "0", Counterexample));
  return c;
}

}  // namespace mlq
