#include "mlq/machine.hpp"

#include "mlq/scoping.hpp"
#include "mlq/substitution.hpp"

namespace mlq {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::size_t hash_all(std::size_t h, const std::vector<Expr>& xs) {
  h = mix(h, xs.size());
  for (const auto& x : xs) h = mix(h, x.hash());
  return h;
}

std::size_t frame_hash(const Frame::Data& d) {
  std::size_t h = mix(0xf4a3e, d.index());
  return std::visit(
      [&](const auto& f) -> std::size_t {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, frame::AppFn>) {
          return hash_all(h, f.args);
        } else if constexpr (std::is_same_v<T, frame::AppArg>) {
          return hash_all(hash_all(mix(h, f.fn.hash()), f.done), f.rest);
        } else if constexpr (std::is_same_v<T, frame::LetF>) {
          return mix(h, f.body.hash());
        } else if constexpr (std::is_same_v<T, frame::AddL>) {
          return mix(h, f.rhs.hash());
        } else if constexpr (std::is_same_v<T, frame::AddR>) {
          return mix(h, f.lhs.hash());
        } else if constexpr (std::is_same_v<T, frame::CaseF>) {
          return mix(mix(mix(h, f.pattern.hash()), f.then_branch.hash()), f.else_branch.hash());
        } else if constexpr (std::is_same_v<T, frame::ConsTail>) {
          return mix(h, f.head.hash());
        } else {
          return mix(h, f.tail.hash());
        }
      },
      d);
}

bool same(const std::vector<Expr>& a, const std::vector<Expr>& b) { return a == b; }

}  // namespace

Frame::Frame(Data d) : data_(std::move(d)), hash_(frame_hash(data_)) {}

bool operator==(const Frame& a, const Frame& b) {
  if (a.hash_ != b.hash_ || a.data_.index() != b.data_.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.data_);
        if constexpr (std::is_same_v<T, frame::AppFn>) {
          return same(x.args, y.args);
        } else if constexpr (std::is_same_v<T, frame::AppArg>) {
          return x.fn == y.fn && same(x.done, y.done) && same(x.rest, y.rest);
        } else if constexpr (std::is_same_v<T, frame::LetF>) {
          return x.body == y.body;
        } else if constexpr (std::is_same_v<T, frame::AddL>) {
          return x.rhs == y.rhs;
        } else if constexpr (std::is_same_v<T, frame::AddR>) {
          return x.lhs == y.lhs;
        } else if constexpr (std::is_same_v<T, frame::CaseF>) {
          return x.pattern == y.pattern && x.then_branch == y.then_branch &&
                 x.else_branch == y.else_branch;
        } else if constexpr (std::is_same_v<T, frame::ConsTail>) {
          return x.head == y.head;
        } else {
          return x.tail == y.tail;
        }
      },
      a.data_);
}

// ---------------------------------------------------------------------------

FrameStack FrameStack::push(Frame f) const {
  std::size_t h = mix(hash(), f.hash());
  return FrameStack(std::make_shared<const Cell>(Cell{std::move(f), top_, size() + 1, h}));
}

FrameStack FrameStack::from_frames(const std::vector<Frame>& innermost_first) {
  FrameStack k;
  for (auto it = innermost_first.rbegin(); it != innermost_first.rend(); ++it) k = k.push(*it);
  return k;
}

FrameStack FrameStack::append(const FrameStack& outer) const {
  auto mine = frames();
  FrameStack k = outer;
  for (auto it = mine.rbegin(); it != mine.rend(); ++it) k = k.push(*it);
  return k;
}

std::vector<Frame> FrameStack::frames() const {
  std::vector<Frame> out;
  out.reserve(size());
  for (auto c = top_.get(); c; c = c->next.get()) out.push_back(c->frame);
  return out;
}

bool operator==(const FrameStack& a, const FrameStack& b) {
  auto x = a.top_.get();
  auto y = b.top_.get();
  while (x && y) {
    if (x == y) return true;
    if (x->hash != y->hash || x->size != y->size || !(x->frame == y->frame)) return false;
    x = x->next.get();
    y = y->next.get();
  }
  return x == y;
}

std::size_t Configuration::hash() const { return mix(stack.hash(), expr.hash()); }

// ---------------------------------------------------------------------------
// One step

namespace {

std::vector<Expr> tail_of(const std::vector<Expr>& xs) { return {xs.begin() + 1, xs.end()}; }

StepResult apply_closure(const FrameStack& k, const Expr& fn, std::vector<Expr> args) {
  auto* f = fn.as<node::Fun>();
  if (!f) return Stuck{"applying a non-function value"};
  if (f->params.size() != args.size()) return Stuck{"arity mismatch"};
  args.insert(args.begin(), fn);
  return Configuration{k, instantiate(f->body, args)};
}

StepResult reduce_value(const FrameStack& stack, const Expr& v) {
  if (stack.empty()) return Final{v};
  const FrameStack k = stack.pop();
  return std::visit(
      [&](const auto& f) -> StepResult {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, frame::AppFn>) {
          if (f.args.empty()) return apply_closure(k, v, {});
          return Configuration{k.push(frame::AppArg{v, {}, tail_of(f.args)}), f.args.front()};
        } else if constexpr (std::is_same_v<T, frame::AppArg>) {
          auto done = f.done;
          done.push_back(v);
          if (f.rest.empty()) return apply_closure(k, f.fn, std::move(done));
          return Configuration{k.push(frame::AppArg{f.fn, std::move(done), tail_of(f.rest)}),
                               f.rest.front()};
        } else if constexpr (std::is_same_v<T, frame::LetF>) {
          return Configuration{k, instantiate(f.body, std::span<const Expr>(&v, 1))};
        } else if constexpr (std::is_same_v<T, frame::AddL>) {
          return Configuration{k.push(frame::AddR{v}), f.rhs};
        } else if constexpr (std::is_same_v<T, frame::AddR>) {
          auto* a = f.lhs.template as<node::Lit>();
          auto* b = v.as<node::Lit>();
          if (!a || !b) return Stuck{"adding non-literals"};
          return Configuration{k, Expr::lit(a->value + b->value)};
        } else if constexpr (std::is_same_v<T, frame::CaseF>) {
          if (auto m = match_values(f.pattern, v)) {
            return Configuration{k, instantiate(f.then_branch, *m)};
          }
          return Configuration{k, f.else_branch};
        } else if constexpr (std::is_same_v<T, frame::ConsTail>) {
          return Configuration{k.push(frame::ConsHead{v}), f.head};
        } else {
          return Configuration{k, Expr::cons(v, f.tail)};
        }
      },
      stack.top().data());
}

}  // namespace

StepResult step(const Configuration& c) {
  const Expr& e = c.expr;
  const FrameStack& k = c.stack;
  switch (e.kind()) {
    case Kind::Let: {
      auto* l = e.as<node::Let>();
      return Configuration{k.push(frame::LetF{l->binder, l->body}), l->bound};
    }
    case Kind::Cons:
      if (!e.is_value()) {
        auto* x = e.as<node::Cons>();
        return Configuration{k.push(frame::ConsTail{x->head}), x->tail};
      }
      break;
    case Kind::Apply: {
      auto* a = e.as<node::Apply>();
      return Configuration{k.push(frame::AppFn{a->args}), a->fn};
    }
    case Kind::Add: {
      auto* a = e.as<node::Add>();
      return Configuration{k.push(frame::AddL{a->rhs}), a->lhs};
    }
    case Kind::Letrec: {
      auto* l = e.as<node::Letrec>();
      Expr clo = Expr::fun(l->self, l->params, l->fbody);
      return Configuration{k, instantiate(l->cont, std::span<const Expr>(&clo, 1))};
    }
    case Kind::Case: {
      auto* x = e.as<node::Case>();
      return Configuration{k.push(frame::CaseF{x->pattern, x->then_branch, x->else_branch}),
                           x->scrutinee};
    }
    case Kind::Hole: return Stuck{"hole in program position"};
    case Kind::BVar: return Stuck{"dangling index"};
    default: break;
  }
  return reduce_value(k, e);
}

EvalOutcome eval(const Expr& e, const FrameStack& k0, std::size_t fuel, const TraceFn& trace) {
  Configuration c{k0, e};
  for (std::size_t n = 0;; ++n) {
    if (trace) trace(n, c);
    auto r = step(c);
    if (auto* f = std::get_if<Final>(&r)) return outcome::Terminated{f->value, n};
    if (auto* s = std::get_if<Stuck>(&r)) return outcome::Stuck{c, s->reason, n};
    if (n == fuel) return outcome::OutOfFuel{c};
    c = std::move(std::get<Configuration>(r));
  }
}

// ---------------------------------------------------------------------------
// Termination relation. Each clause below is one rule: given the conclusion
// ⟨K, e⟩ ⇓ 1+n it yields the configuration of the premise ⟨K', e'⟩ ⇓ n.
// The only axiom is ⟨𝓘d, v⟩ ⇓ 0.

namespace {

std::optional<Configuration> premise(const Configuration& c) {
  const FrameStack& k = c.stack;
  const Expr& e = c.expr;

  // Rules that decompose a non-value expression.
  if (auto* x = e.as<node::Let>()) return Configuration{k.push(frame::LetF{x->binder, x->body}), x->bound};
  if (auto* x = e.as<node::Apply>()) return Configuration{k.push(frame::AppFn{x->args}), x->fn};
  if (auto* x = e.as<node::Add>()) return Configuration{k.push(frame::AddL{x->rhs}), x->lhs};
  if (auto* x = e.as<node::Case>()) {
    return Configuration{k.push(frame::CaseF{x->pattern, x->then_branch, x->else_branch}),
                         x->scrutinee};
  }
  if (auto* x = e.as<node::Letrec>()) {
    std::vector<Expr> img{Expr::fun(x->self, x->params, x->fbody)};
    return Configuration{k, instantiate(x->cont, img)};
  }
  if (auto* x = e.as<node::Cons>(); x && !e.is_value()) {
    return Configuration{k.push(frame::ConsTail{x->head}), x->tail};
  }
  if (!e.is_value() || k.empty()) return std::nullopt;

  // Rules that consume the top frame with a value.
  const Frame& top = k.top();
  const FrameStack rest = k.pop();

  if (auto* f = top.as<frame::LetF>()) return Configuration{rest, instantiate(f->body, std::vector<Expr>{e})};
  if (auto* f = top.as<frame::ConsTail>()) return Configuration{rest.push(frame::ConsHead{e}), f->head};
  if (auto* f = top.as<frame::ConsHead>()) return Configuration{rest, Expr::cons(e, f->tail)};
  if (auto* f = top.as<frame::AddL>()) return Configuration{rest.push(frame::AddR{e}), f->rhs};
  if (auto* f = top.as<frame::AddR>()) {
    auto* l1 = f->lhs.as<node::Lit>();
    auto* l2 = e.as<node::Lit>();
    if (l1 && l2) return Configuration{rest, Expr::lit(l1->value + l2->value)};
    return std::nullopt;
  }
  if (auto* f = top.as<frame::CaseF>()) {
    if (!is_match(f->pattern, e)) return Configuration{rest, f->else_branch};
    auto m = match_subst(f->pattern, e);
    std::vector<Expr> vals;
    for (const auto& x : pattern_vars(f->pattern)) vals.push_back(std::get<ExprImage>(m(x)).expr);
    return Configuration{rest, instantiate(f->then_branch, vals)};
  }
  if (auto* f = top.as<frame::AppFn>()) {
    if (!f->args.empty()) {
      std::vector<Expr> later(f->args.begin() + 1, f->args.end());
      return Configuration{rest.push(frame::AppArg{e, {}, later}), f->args[0]};
    }
    auto* fn = e.as<node::Fun>();
    if (!fn || !fn->params.empty()) return std::nullopt;
    return Configuration{rest, instantiate(fn->body, std::vector<Expr>{e})};
  }
  auto* f = top.as<frame::AppArg>();
  if (!f->rest.empty()) {
    std::vector<Expr> done = f->done;
    done.push_back(e);
    std::vector<Expr> later(f->rest.begin() + 1, f->rest.end());
    return Configuration{rest.push(frame::AppArg{f->fn, done, later}), f->rest[0]};
  }
  auto* fn = f->fn.as<node::Fun>();
  if (!fn || fn->params.size() != f->done.size() + 1) return std::nullopt;
  std::vector<Expr> images{f->fn};
  images.insert(images.end(), f->done.begin(), f->done.end());
  images.push_back(e);
  return Configuration{rest, instantiate(fn->body, images)};
}

bool axiom(const Configuration& c) { return c.stack.empty() && c.expr.is_value(); }

}  // namespace

bool terminates_k(const Configuration& c0, std::size_t n) {
  Configuration c = c0;
  for (;;) {
    if (axiom(c)) return n == 0;
    if (n == 0) return false;
    auto p = premise(c);
    if (!p) return false;
    c = std::move(*p);
    --n;
  }
}

std::optional<std::size_t> termination_index(const Configuration& c0, std::size_t max) {
  Configuration c = c0;
  for (std::size_t m = 0; m <= max; ++m) {
    if (axiom(c)) return m;
    auto p = premise(c);
    if (!p) return std::nullopt;
    c = std::move(*p);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Divergence

namespace {

// Advances c by n steps; false if the machine halts or sticks earlier.
bool advance(Configuration& c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    auto r = step(c);
    auto* next = std::get_if<Configuration>(&r);
    if (!next) return false;
    c = std::move(*next);
  }
  return true;
}

}  // namespace

DivergenceResult detect_divergence(const Configuration& c, std::size_t fuel) {
  Configuration tortoise = c;
  Configuration hare = c;
  std::size_t power = 1, lambda = 0, steps = 0;
  for (;;) {
    auto r = step(hare);
    if (auto* f = std::get_if<Final>(&r)) return divergence::Terminates{f->value, steps};
    if (auto* s = std::get_if<Stuck>(&r)) return divergence::Unknown{s->reason, true};
    if (steps == fuel) return divergence::Unknown{"out of fuel", false};
    hare = std::move(std::get<Configuration>(r));
    ++steps;
    ++lambda;
    if (hare.hash() == tortoise.hash() && hare == tortoise) break;
    if (lambda == power) {
      tortoise = hare;
      power *= 2;
      lambda = 0;
    }
  }
  // Locate the start of the cycle.
  Configuration a = c, b = c;
  advance(b, lambda);
  std::size_t mu = 0;
  while (!(a.hash() == b.hash() && a == b)) {
    advance(a, 1);
    advance(b, 1);
    ++mu;
  }
  return divergence::Diverges{{mu, lambda}};
}

bool validate_cycle(const Configuration& c, const CycleCertificate& cert) {
  if (cert.lambda == 0) return false;
  Configuration a = c;
  if (!advance(a, cert.mu)) return false;
  Configuration b = a;
  if (!advance(b, cert.lambda)) return false;
  return a == b;
}

// ---------------------------------------------------------------------------

Expr plug_frame(const Frame& f, const Expr& e) {
  return std::visit(
      [&](const auto& x) -> Expr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, frame::AppFn>) {
          return Expr::apply(e, x.args);
        } else if constexpr (std::is_same_v<T, frame::AppArg>) {
          auto args = x.done;
          args.push_back(e);
          args.insert(args.end(), x.rest.begin(), x.rest.end());
          return Expr::apply(x.fn, std::move(args));
        } else if constexpr (std::is_same_v<T, frame::LetF>) {
          return Expr::let(x.binder, e, x.body);
        } else if constexpr (std::is_same_v<T, frame::AddL>) {
          return Expr::add(e, x.rhs);
        } else if constexpr (std::is_same_v<T, frame::AddR>) {
          return Expr::add(x.lhs, e);
        } else if constexpr (std::is_same_v<T, frame::CaseF>) {
          return Expr::case_of(e, x.pattern, x.then_branch, x.else_branch);
        } else if constexpr (std::is_same_v<T, frame::ConsTail>) {
          return Expr::cons(x.head, e);
        } else {
          return Expr::cons(e, x.tail);
        }
      },
      f.data());
}

Expr plug_stack(const FrameStack& k, const Expr& e) {
  Expr r = e;
  for (const auto& f : k.frames()) r = plug_frame(f, r);
  return r;
}

namespace {

// Γ ⊢ e where Γ consists of exactly `slots` bound names and nothing free.
bool scoped_in_slots(const Expr& e, std::size_t slots) {
  return !e.has_names() && !e.has_hole() && e.loose() <= slots;
}

bool all_closed(const std::vector<Expr>& xs, bool values) {
  for (const auto& x : xs) {
    if (!(values ? val_scoped({}, x) : closed(x))) return false;
  }
  return true;
}

}  // namespace

bool frame_closed(const Frame& f) {
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, frame::AppFn>) {
          return all_closed(x.args, false);
        } else if constexpr (std::is_same_v<T, frame::AppArg>) {
          return val_scoped({}, x.fn) && all_closed(x.done, true) && all_closed(x.rest, false);
        } else if constexpr (std::is_same_v<T, frame::LetF>) {
          return scoped_in_slots(x.body, 1);
        } else if constexpr (std::is_same_v<T, frame::AddL>) {
          return closed(x.rhs);
        } else if constexpr (std::is_same_v<T, frame::AddR>) {
          return val_scoped({}, x.lhs);
        } else if constexpr (std::is_same_v<T, frame::CaseF>) {
          return scoped_in_slots(x.then_branch, x.pattern.var_count()) && closed(x.else_branch);
        } else if constexpr (std::is_same_v<T, frame::ConsTail>) {
          return closed(x.head);
        } else {
          return val_scoped({}, x.tail);
        }
      },
      f.data());
}

bool frames_closed(const FrameStack& k) {
  for (const auto& f : k.frames()) {
    if (!frame_closed(f)) return false;
  }
  return true;
}

bool config_closed(const Configuration& c) { return frames_closed(c.stack) && closed(c.expr); }

}  // namespace mlq
