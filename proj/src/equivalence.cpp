#include "mlq/equivalence.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

#include "mlq/scoping.hpp"
#include "mlq/surface.hpp"

namespace mlq {

void Budget::validate() const {
  if (probe_fuel < fuel) throw PreconditionError("probe fuel must be at least the lhs fuel");
}

GenSpec Budget::gen_spec() const {
  GenSpec s;
  s.depth = depth;
  s.seed = seed;
  s.limit = std::max<std::size_t>(samples, 1);
  return s;
}

std::string to_string(Observation::Kind k) {
  switch (k) {
    case Observation::Kind::Terminated: return "terminated";
    case Observation::Kind::Diverges: return "diverges";
    case Observation::Kind::Stuck: return "stuck";
    case Observation::Kind::OutOfFuel: return "out_of_fuel";
    case Observation::Kind::NotRun: return "not_run";
  }
  return "?";
}

using nlohmann::json;

json to_json(const Budget& b) {
  return {{"fuel", b.fuel},       {"probe_fuel", b.probe_fuel}, {"depth", b.depth},
          {"samples", b.samples}, {"seed", b.seed},             {"accept_fuel_refutation", b.accept_fuel_refutation},
          {"closings", b.closings}};
}

json to_json(const Observation& o) {
  json j{{"kind", to_string(o.kind)}, {"steps", o.steps}};
  if (o.value) j["value"] = pretty_core(*o.value);
  if (o.cert) j["certificate"] = {{"mu", o.cert->mu}, {"lambda", o.cert->lambda}};
  if (!o.reason.empty()) j["reason"] = o.reason;
  return j;
}

json to_json(const Witness& w) {
  json j{{"direction", w.direction},
         {"stack", pretty(w.stack)},
         {"lhs_program", pretty_core(w.lhs_program)},
         {"rhs_program", pretty_core(w.rhs_program)},
         {"lhs", to_json(w.lhs)},
         {"rhs", to_json(w.rhs)},
         {"certification", w.certification},
         {"probe_index", w.probe_index}};
  if (w.context) j["context"] = pretty(*w.context);
  if (!w.closing.empty()) {
    json c = json::object();
    for (const auto& [n, v] : w.closing) c[n.str()] = pretty_core(v);
    j["closing"] = c;
  }
  return j;
}

json to_json(const Verdict& v) {
  json j{{"verdict", to_string(v.kind)}, {"probes", v.probes}};
  if (!v.reason.empty()) j["reason"] = v.reason;
  if (v.witness) j["witness"] = to_json(*v.witness);
  return j;
}

namespace {

struct ExprHash {
  std::size_t operator()(const Expr& e) const { return e.hash(); }
};
struct StackHash {
  std::size_t operator()(const FrameStack& k) const { return k.hash(); }
};

Observation from_eval(const EvalOutcome& o) {
  Observation obs;
  if (auto* t = std::get_if<outcome::Terminated>(&o)) {
    obs.kind = Observation::Kind::Terminated;
    obs.value = t->value;
    obs.steps = t->steps;
  } else if (auto* s = std::get_if<outcome::Stuck>(&o)) {
    obs.kind = Observation::Kind::Stuck;
    obs.steps = s->steps;
    obs.reason = s->reason;
  } else {
    obs.kind = Observation::Kind::OutOfFuel;
  }
  return obs;
}

Observation from_divergence(const DivergenceResult& r) {
  Observation obs;
  if (auto* t = std::get_if<divergence::Terminates>(&r)) {
    obs.kind = Observation::Kind::Terminated;
    obs.value = t->value;
    obs.steps = t->steps;
  } else if (auto* d = std::get_if<divergence::Diverges>(&r)) {
    obs.kind = Observation::Kind::Diverges;
    obs.cert = d->cert;
  } else {
    auto& u = std::get<divergence::Unknown>(r);
    obs.kind = u.stuck ? Observation::Kind::Stuck : Observation::Kind::OutOfFuel;
    obs.reason = u.reason;
  }
  return obs;
}

Observation observe(const FrameStack& k, const Expr& e, std::size_t fuel) {
  return from_divergence(detect_divergence(Configuration{k, e}, fuel));
}

bool terminated(const Observation& o) { return o.kind == Observation::Kind::Terminated; }
bool certainly_stopped(const Observation& o) {
  return o.kind == Observation::Kind::Diverges || o.kind == Observation::Kind::Stuck;
}

enum class Tri { False, Unknown, True };

Tri tri_and(Tri a, Tri b) { return std::min(a, b); }

// The behavioural preorder with a memo; Unknown records fuel exhaustion.
class Behav {
 public:
  explicit Behav(const Budget& b) : b_(b) {}

  Tri val(std::size_t n, const Expr& v1, const Expr& v2) {
    if (n == 0) return Tri::True;
    Key key{n, v1, v2};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Tri r = compute(n, v1, v2);
    memo_.emplace(std::move(key), r);
    return r;
  }

  Tri exp(std::size_t n, const Expr& e1, const Expr& e2) {
    auto l = observe({}, e1, b_.fuel);
    if (!terminated(l)) return Tri::True;
    auto r = observe({}, e2, b_.probe_fuel);
    if (terminated(r)) return val(n, *l.value, *r.value);
    return certainly_stopped(r) ? Tri::False : Tri::Unknown;
  }

 private:
  Tri compute(std::size_t n, const Expr& v1, const Expr& v2) {
    if (v1.kind() != v2.kind()) return Tri::False;
    switch (v1.kind()) {
      case Kind::Lit: return v1 == v2 ? Tri::True : Tri::False;
      case Kind::Nil: return Tri::True;
      case Kind::Cons: {
        auto* a = v1.as<node::Cons>();
        auto* c = v2.as<node::Cons>();
        Tri h = val(n - 1, a->head, c->head);
        if (h == Tri::False) return h;
        return tri_and(h, val(n - 1, a->tail, c->tail));
      }
      case Kind::Fun: {
        auto* f = v1.as<node::Fun>();
        auto* g = v2.as<node::Fun>();
        if (f->params.size() != g->params.size()) return Tri::False;
        Tri acc = Tri::True;
        for (const auto& args : arg_tuples(f->params.size(), b_.gen_spec())) {
          std::vector<Expr> i1{v1}, i2{v2};
          i1.insert(i1.end(), args.begin(), args.end());
          i2.insert(i2.end(), args.begin(), args.end());
          acc = tri_and(acc, exp(n - 1, instantiate(f->body, i1), instantiate(g->body, i2)));
          if (acc == Tri::False) break;
        }
        return acc;
      }
      default: return Tri::False;
    }
  }

  struct Key {
    std::size_t n;
    Expr a, b;
    bool operator==(const Key& o) const { return n == o.n && a == o.a && b == o.b; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const { return k.n * 0x9e3779b97f4a7c15ULL ^ k.a.hash() * 31 ^ k.b.hash(); }
  };

  const Budget& b_;
  std::unordered_map<Key, Tri, KeyHash> memo_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Probes

ProbeResult run_probe(const Probe& p, ProbeCheck check, const Budget& b) {
  ProbeResult r;
  switch (check) {
    case ProbeCheck::Indexed: {
      // A certified cycle or a stuck run admits no derivation at any index.
      auto quick = observe(p.stack, p.lhs, b.fuel);
      if (certainly_stopped(quick)) {
        r.lhs = quick;
        return r;
      }
      auto m = termination_index(Configuration{p.stack, p.lhs}, b.fuel);
      if (!m) {
        r.lhs.kind = Observation::Kind::NotRun;
        r.lhs.reason = "no termination derivation within fuel";
        return r;
      }
      r.lhs = from_eval(eval(p.lhs, p.stack, *m));
      break;
    }
    case ProbeCheck::ValueEq:
      r.lhs = observe(p.stack, p.lhs, b.fuel);
      if (r.lhs.kind == Observation::Kind::OutOfFuel) {
        r.status = ProbeStatus::Unknown;
        return r;
      }
      break;
    // A repeating configuration ends the lhs run early; Ω sits in most
    // discriminator frames.
    default: r.lhs = observe(p.stack, p.lhs, b.fuel); break;
  }
  if (!terminated(r.lhs)) return r;

  r.rhs = observe(p.stack, p.rhs, b.probe_fuel);
  switch (r.rhs.kind) {
    case Observation::Kind::Terminated:
      if (check == ProbeCheck::ValueEq && !(*r.lhs.value == *r.rhs.value)) {
        r.status = ProbeStatus::Fail;
        r.certification = "value";
      } else if (check == ProbeCheck::Behavioural) {
        Behav bh(b);
        Tri t = bh.val(b.depth + 1, *r.lhs.value, *r.rhs.value);
        if (t == Tri::False) {
          r.status = ProbeStatus::Fail;
          r.certification = "value";
        } else if (t == Tri::Unknown) {
          r.status = ProbeStatus::Unknown;
        }
      }
      break;
    case Observation::Kind::Diverges:
      r.status = ProbeStatus::Fail;
      r.certification = "divergence";
      break;
    case Observation::Kind::Stuck:
      r.status = ProbeStatus::Fail;
      r.certification = "stuck";
      break;
    default:
      if (b.accept_fuel_refutation) {
        r.status = ProbeStatus::Fail;
        r.certification = "fuel";
      } else {
        r.status = ProbeStatus::Unknown;
      }
  }
  return r;
}

namespace {

Verdict counterexample(const std::vector<Probe>& probes, std::size_t i, const ProbeResult& r) {
  const Probe& p = probes[i];
  Verdict v;
  v.kind = Expected::Counterexample;
  v.probes = probes.size();
  Witness w;
  w.direction = p.flipped ? "rhs<=lhs" : "lhs<=rhs";
  w.stack = p.stack;
  w.context = p.context;
  w.closing = p.closing;
  w.lhs_program = p.lhs;
  w.rhs_program = p.rhs;
  w.lhs = r.lhs;
  w.rhs = r.rhs;
  w.certification = r.certification;
  w.probe_index = i;
  v.witness = std::move(w);
  return v;
}

Verdict fold(const std::vector<Probe>& probes, std::optional<std::size_t> first_fail, const ProbeResult* fail,
             std::optional<std::size_t> first_unknown) {
  if (first_fail) return counterexample(probes, *first_fail, *fail);
  Verdict v;
  v.probes = probes.size();
  if (first_unknown) {
    v.kind = Expected::Inconclusive;
    v.reason = "probe " + std::to_string(*first_unknown) + " ran out of fuel";
  }
  return v;
}

}  // namespace

Verdict run_probes_serial(const std::vector<Probe>& probes, ProbeCheck check, const Budget& b) {
  std::optional<std::size_t> unknown;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    auto r = run_probe(probes[i], check, b);
    if (r.status == ProbeStatus::Fail) return fold(probes, i, &r, unknown);
    if (r.status == ProbeStatus::Unknown && !unknown) unknown = i;
  }
  return fold(probes, std::nullopt, nullptr, unknown);
}

Verdict run_probes_parallel(const std::vector<Probe>& probes, ProbeCheck check, const Budget& b) {
  const std::size_t n = probes.size();
  std::vector<ProbeResult> results(n);
  std::vector<char> ran(n, 0);
  std::atomic<std::size_t> first_fail{n};
  std::exception_ptr error;
  std::mutex error_mu;

  // Probes past the earliest known failure cannot change the verdict.
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(n); ++si) {
    auto i = static_cast<std::size_t>(si);
    if (i > first_fail.load(std::memory_order_relaxed)) continue;
    try {
      results[i] = run_probe(probes[i], check, b);
      ran[i] = 1;
      if (results[i].status == ProbeStatus::Fail) {
        std::size_t cur = first_fail.load();
        while (i < cur && !first_fail.compare_exchange_weak(cur, i)) {
        }
      }
    } catch (...) {
      std::lock_guard lock(error_mu);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  std::optional<std::size_t> unknown;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ran[i]) continue;
    if (results[i].status == ProbeStatus::Fail) return fold(probes, i, &results[i], unknown);
    if (results[i].status == ProbeStatus::Unknown && !unknown) unknown = i;
  }
  return fold(probes, std::nullopt, nullptr, unknown);
}

Verdict run_probes(const std::vector<Probe>& probes, ProbeCheck check, const Budget& b) {
  return b.parallel ? run_probes_parallel(probes, check, b) : run_probes_serial(probes, check, b);
}

// ---------------------------------------------------------------------------
// Probe material

namespace {

const Expr& omega_expr() {
  static const Expr om = omega();
  return om;
}

std::optional<Frame> discriminator(const Expr& v) {
  const Expr zero = Expr::lit(0);
  switch (v.kind()) {
    case Kind::Lit: return frame::CaseF{Pattern::lit(v.as<node::Lit>()->value), zero, omega_expr()};
    case Kind::Nil: return frame::CaseF{Pattern::nil(), zero, omega_expr()};
    case Kind::Cons:
      return frame::CaseF{Pattern::cons(Pattern::var("H"), Pattern::var("T")), zero, omega_expr()};
    default: return std::nullopt;
  }
}

Frame projection(bool head) {
  return frame::CaseF{Pattern::cons(Pattern::var("H"), Pattern::var("T")), Expr::bvar(head ? 0 : 1), Expr::lit(0)};
}

class ValueDirected {
 public:
  ValueDirected(const Budget& b) : b_(b), spec_(b.gen_spec()) {}

  void run(const Expr& v1, const Expr& v2, std::size_t depth, std::vector<Frame> prefix) {
    if (v1 == v2) return;
    if (out.size() >= b_.samples) {
      complete = false;
      return;
    }
    if (depth == 0) {
      complete = false;
      return;
    }
    const bool both_cons = v1.kind() == Kind::Cons && v2.kind() == Kind::Cons;
    const bool both_fun = v1.kind() == Kind::Fun && v2.kind() == Kind::Fun;
    if (both_cons) {
      auto* a = v1.as<node::Cons>();
      auto* c = v2.as<node::Cons>();
      auto ph = prefix;
      ph.push_back(projection(true));
      run(a->head, c->head, depth - 1, std::move(ph));
      prefix.push_back(projection(false));
      run(a->tail, c->tail, depth - 1, std::move(prefix));
      return;
    }
    if (both_fun) {
      funs(v1, v2, depth, std::move(prefix));
      return;
    }
    // Literal or constructor mismatch: one of the two discriminators fires
    // for one side only.
    for (const Expr* v : {&v1, &v2}) {
      if (auto f = discriminator(*v)) emit(prefix, *f);
    }
  }

  std::vector<FrameStack> out;
  bool complete = true;

 private:
  void emit(std::vector<Frame> prefix, Frame f) {
    if (out.size() >= b_.samples) {
      complete = false;
      return;
    }
    prefix.push_back(std::move(f));
    auto k = FrameStack::from_frames(prefix);
    if (seen_.insert(k).second) out.push_back(std::move(k));
  }

  void funs(const Expr& v1, const Expr& v2, std::size_t depth, const std::vector<Frame>& prefix) {
    auto* f = v1.as<node::Fun>();
    auto* g = v2.as<node::Fun>();
    const std::size_t k1 = f->params.size(), k2 = g->params.size();
    if (k1 != k2) {
      // Only one side can take each arity, so the application alone decides.
      for (std::size_t k : {k1, k2}) {
        if (k > spec_.max_arity) continue;
        for (auto& args : arg_tuples(k, spec_)) emit(prefix, frame::AppFn{std::move(args)});
      }
      return;
    }
    if (k1 > spec_.max_arity) return;
    for (const auto& args : arg_tuples(k1, spec_)) {
      std::vector<Expr> i1{v1}, i2{v2};
      i1.insert(i1.end(), args.begin(), args.end());
      i2.insert(i2.end(), args.begin(), args.end());
      auto r1 = observe({}, instantiate(f->body, i1), b_.probe_fuel);
      auto r2 = observe({}, instantiate(g->body, i2), b_.probe_fuel);
      if (r1.kind == Observation::Kind::OutOfFuel || r2.kind == Observation::Kind::OutOfFuel) {
        complete = false;
        if (terminated(r1) || terminated(r2)) emit(prefix, frame::AppFn{args});
        continue;
      }
      if (terminated(r1) && terminated(r2)) {
        auto p = prefix;
        p.push_back(frame::AppFn{args});
        run(*r1.value, *r2.value, depth - 1, std::move(p));
      } else if (terminated(r1) != terminated(r2)) {
        emit(prefix, frame::AppFn{args});
      }
    }
  }

  const Budget& b_;
  GenSpec spec_;
  std::unordered_set<FrameStack, StackHash> seen_;
};

// Stack prefixes are the same for every call with a given budget shape.
const std::vector<FrameStack>& base_stacks(const Budget& b) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, std::size_t>, std::vector<FrameStack>> cache;
  std::lock_guard lock(mu);
  auto key = std::make_pair(b.depth, b.samples);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, gen_stacks(b.gen_spec())).first;
  return it->second;
}

std::vector<FrameStack> random_stacks(const Budget& b) {
  Rng rng(b.seed);
  std::vector<FrameStack> out;
  auto spec = b.gen_spec();
  for (std::size_t i = 0; i < b.samples / 4; ++i) {
    out.push_back(random_alphabet_stack(rng, b.depth + 1 + rng.below(2), spec));
  }
  return out;
}

}  // namespace

std::vector<FrameStack> value_directed_stacks(const Expr& v1, const Expr& v2, const Budget& b, bool& complete) {
  ValueDirected vd(b);
  vd.run(v1, v2, b.depth + 2, {});
  complete = vd.complete;
  return vd.out;
}

std::vector<FrameStack> ciu_stacks(const Expr& e1, const Expr& e2, const Budget& b) {
  std::vector<FrameStack> out = base_stacks(b);
  std::unordered_set<FrameStack, StackHash> seen(out.begin(), out.end());
  auto r1 = observe({}, e1, b.fuel);
  auto r2 = observe({}, e2, b.fuel);
  if (terminated(r1) && terminated(r2)) {
    bool complete = true;
    for (auto& k : value_directed_stacks(*r1.value, *r2.value, b, complete)) {
      if (seen.insert(k).second) out.push_back(std::move(k));
    }
  }
  for (auto& k : random_stacks(b)) out.push_back(std::move(k));
  return out;
}

namespace {

// Values ordered so that a short prefix already mixes every shape: small
// literals first, then one of each constructor in turn.
std::vector<Expr> closing_values(const Budget& b) {
  GenSpec spec = b.gen_spec();
  spec.depth = 1;
  spec.limit = 200;
  auto vals = gen_values(spec);
  std::vector<Expr> lits, nils, conses, funs;
  for (auto& v : vals) {
    switch (v.kind()) {
      case Kind::Lit: lits.push_back(v); break;
      case Kind::Nil: nils.push_back(v); break;
      case Kind::Cons: conses.push_back(v); break;
      default: funs.push_back(v); break;
    }
  }
  std::stable_sort(lits.begin(), lits.end(), [](const Expr& a, const Expr& c) {
    const Integer& x = a.as<node::Lit>()->value;
    const Integer& y = c.as<node::Lit>()->value;
    auto ax = abs(x), ay = abs(y);
    return ax != ay ? ax < ay : x > y;
  });
  std::vector<Expr> out;
  std::vector<std::vector<Expr>*> groups{&lits, &nils, &conses, &funs};
  for (std::size_t i = 0;; ++i) {
    bool any = false;
    for (auto* g : groups) {
      if (i < g->size()) {
        out.push_back((*g)[i]);
        any = true;
      }
    }
    if (!any) break;
  }
  return out;
}

struct Instance {
  std::vector<std::pair<Name, Expr>> closing;
  Expr lhs, rhs;
};

std::vector<Instance> instances(const ScopeCtx& gamma, const Expr& e1, const Expr& e2, const Budget& b) {
  if (gamma.empty()) return {{{}, e1, e2}};
  std::vector<Instance> out;
  for (const auto& s : closings_for(gamma, b)) {
    Instance in;
    for (const auto& [n, img] : s.bindings()) in.closing.emplace_back(n, std::get<ExprImage>(img).expr);
    in.lhs = apply_subst(e1, s);
    in.rhs = apply_subst(e2, s);
    out.push_back(std::move(in));
  }
  return out;
}

void require_scoped(const ScopeCtx& gamma, const Expr& e1, const Expr& e2) {
  if (!exp_scoped(gamma, e1)) throw PreconditionError("lhs is not scoped in " + to_string(gamma));
  if (!exp_scoped(gamma, e2)) throw PreconditionError("rhs is not scoped in " + to_string(gamma));
}

void require_closed(const Expr& e1, const Expr& e2) {
  if (!closed(e1)) throw PreconditionError("lhs is not closed");
  if (!closed(e2)) throw PreconditionError("rhs is not closed");
}

Probe make_probe(const FrameStack& k, const Instance& in, bool flipped) {
  Probe p;
  p.stack = k;
  p.lhs = flipped ? in.rhs : in.lhs;
  p.rhs = flipped ? in.lhs : in.rhs;
  p.flipped = flipped;
  p.closing = in.closing;
  return p;
}

// Stack probes over closed instances; instance-major, direction outermost.
std::vector<Probe> stack_probes(const std::vector<Instance>& ins, const Budget& b, bool both) {
  std::vector<std::vector<FrameStack>> stacks;
  for (const auto& in : ins) stacks.push_back(ciu_stacks(in.lhs, in.rhs, b));
  std::vector<Probe> out;
  for (bool flipped : {false, true}) {
    if (flipped && !both) break;
    for (std::size_t i = 0; i < ins.size(); ++i) {
      for (const auto& k : stacks[i]) out.push_back(make_probe(k, ins[i], flipped));
    }
  }
  return out;
}

Expr hole_under(const NamedExpr& c, const Expr& e) { return to_core(plug_context(Context{c}, from_core(e))); }

// let X = v in ... □, or a letrec wrapper for function identifiers.
NamedExpr closing_context(const std::vector<std::pair<Name, Expr>>& closing) {
  Expr c = Expr::hole();
  for (auto it = closing.rbegin(); it != closing.rend(); ++it) {
    const auto& [n, v] = *it;
    Expr named_v = from_core(v).term;
    if (n.is_var()) {
      c = Expr::let(n.id(), named_v, c);
    } else {
      std::vector<std::string> ps;
      std::vector<Expr> args;
      for (std::size_t i = 0; i < n.arity(); ++i) {
        ps.push_back("A" + std::to_string(i));
        args.push_back(Expr::var(ps.back()));
      }
      c = Expr::letrec(n, ps, Expr::apply(named_v, args), c);
    }
  }
  return NamedExpr{c};
}

std::vector<Probe> context_probes(const ScopeCtx& gamma, const Expr& e1, const Expr& e2, const Budget& b,
                                  bool both) {
  auto ins = instances(gamma, e1, e2, b);
  std::vector<NamedExpr> contexts;
  std::unordered_set<Expr, ExprHash> seen;
  auto add = [&](NamedExpr c) {
    if (seen.insert(to_core(c)).second) contexts.push_back(std::move(c));
  };
  for (const auto& in : ins) {
    NamedExpr close = closing_context(in.closing);
    for (const auto& k : ciu_stacks(in.lhs, in.rhs, b)) {
      NamedExpr outer = from_core(plug_stack(k, Expr::hole()));
      add(plug_context(Context{outer}, close));
    }
  }
  GenSpec spec = b.gen_spec();
  spec.depth = 1;
  for (const auto& c : gen_contexts(spec)) add(c.term);

  std::vector<Probe> out;
  for (bool flipped : {false, true}) {
    if (flipped && !both) break;
    for (const auto& c : contexts) {
      Expr p1 = hole_under(c, e1), p2 = hole_under(c, e2);
      if (!closed(p1) || !closed(p2)) continue;
      Probe p;
      p.lhs = flipped ? p2 : p1;
      p.rhs = flipped ? p1 : p2;
      p.flipped = flipped;
      p.context = c;
      out.push_back(std::move(p));
    }
  }
  return out;
}

Verdict ciu_impl(const ScopeCtx& gamma, const Expr& e1, const Expr& e2, const Budget& b, bool both,
                 ProbeCheck check) {
  b.validate();
  require_scoped(gamma, e1, e2);
  return run_probes(stack_probes(instances(gamma, e1, e2, b), b, both), check, b);
}

Verdict naive_impl(const Expr& e1, const Expr& e2, const Budget& b, bool both) {
  b.validate();
  require_closed(e1, e2);
  Instance in{{}, e1, e2};
  std::vector<Probe> ps{make_probe({}, in, false)};
  if (both) ps.push_back(make_probe({}, in, true));
  return run_probes_serial(ps, ProbeCheck::ValueEq, b);
}

Verdict behav_impl(const Expr& e1, const Expr& e2, const Budget& b, bool both) {
  b.validate();
  require_closed(e1, e2);
  Instance in{{}, e1, e2};
  std::vector<Probe> ps;
  for (bool flipped : {false, true}) {
    if (flipped && !both) break;
    for (const auto& k : base_stacks(b)) ps.push_back(make_probe(k, in, flipped));
  }
  return run_probes(ps, ProbeCheck::Behavioural, b);
}

Verdict ctx_impl(const ScopeCtx& gamma, const Expr& e1, const Expr& e2, const Budget& b, bool both,
                 ProbeCheck check) {
  b.validate();
  require_scoped(gamma, e1, e2);
  return run_probes(context_probes(gamma, e1, e2, b, both), check, b);
}

}  // namespace

std::vector<Subst> closings_for(const ScopeCtx& gamma, const Budget& b) {
  if (gamma.empty()) return {id_subst()};
  auto values = closing_values(b);
  std::vector<Name> names(gamma.begin(), gamma.end());
  std::vector<Subst> out;
  // Diagonal order: the largest index grows slowly, so every name varies.
  for (std::size_t m = 0; out.size() < b.closings && m < values.size(); ++m) {
    std::vector<std::size_t> idx(names.size(), 0);
    while (out.size() < b.closings) {
      if (*std::max_element(idx.begin(), idx.end()) == m) {
        Subst s = id_subst();
        for (std::size_t i = 0; i < names.size(); ++i) s = update(s, names[i], values[idx[i]]);
        out.push_back(std::move(s));
      }
      std::size_t j = names.size();
      while (j > 0 && idx[j - 1] == m) idx[--j] = 0;
      if (j == 0) break;
      ++idx[j - 1];
    }
  }
  return out;
}

Verdict naive_behav_le(const Expr& e1, const Expr& e2, const Budget& b) { return naive_impl(e1, e2, b, false); }

Verdict ciu_le(const Expr& e1, const Expr& e2, const Budget& b) {
  require_closed(e1, e2);
  return ciu_impl({}, e1, e2, b, false, ProbeCheck::Termination);
}

Verdict ciu_le_open(const ScopeCtx& gamma, const Expr& e1, const Expr& e2, const Budget& b) {
  return ciu_impl(gamma, e1, e2, b, false, ProbeCheck::Termination);
}

Verdict behav_le(const Expr& e1, const Expr& e2, const Budget& b) { return behav_impl(e1, e2, b, false); }

Verdict ctx_le(const ScopeCtx& gamma, const Expr& e1, const Expr& e2, const Budget& b) {
  return ctx_impl(gamma, e1, e2, b, false, ProbeCheck::Termination);
}

Verdict naive_ctx_le(const ScopeCtx& gamma, const Expr& e1, const Expr& e2, const Budget& b) {
  return ctx_impl(gamma, e1, e2, b, false, ProbeCheck::ValueEq);
}

Verdict logrel_le(const ScopeCtx& gamma, const Expr& e1, const Expr& e2, const Budget& b) {
  return ciu_impl(gamma, e1, e2, b, false, ProbeCheck::Indexed);
}

// ---------------------------------------------------------------------------
// Logical relations

namespace {

bool rhs_terminates_or_unknown(const FrameStack& k, const Expr& e, const Budget& b) {
  auto r = observe(k, e, b.probe_fuel);
  return !certainly_stopped(r);
}

std::vector<Expr> related_values(const Budget& b) {
  GenSpec spec = b.gen_spec();
  spec.depth = 1;
  spec.limit = std::min<std::size_t>(b.samples, 64);
  return gen_values(spec);
}

}  // namespace

bool logrel_exp(std::size_t n, const Expr& e1, const Expr& e2, const Budget& b) {
  for (const auto& k : base_stacks(b)) {
    if (!termination_index(Configuration{k, e1}, n)) continue;
    if (!rhs_terminates_or_unknown(k, e2, b)) return false;
  }
  return true;
}

bool logrel_val(std::size_t n, const Expr& v1, const Expr& v2, const Budget& b) {
  if (!is_value(v1) || !is_value(v2) || v1.kind() != v2.kind()) return false;
  switch (v1.kind()) {
    case Kind::Lit: return v1 == v2;
    case Kind::Nil: return true;
    case Kind::Cons: {
      auto* a = v1.as<node::Cons>();
      auto* c = v2.as<node::Cons>();
      return logrel_val(n, a->head, c->head, b) && logrel_val(n, a->tail, c->tail, b);
    }
    case Kind::Fun: {
      auto* f = v1.as<node::Fun>();
      auto* g = v2.as<node::Fun>();
      if (f->params.size() != g->params.size()) return false;
      if (n == 0) return true;
      for (const auto& args : arg_tuples(f->params.size(), b.gen_spec())) {
        std::vector<Expr> i1{v1}, i2{v2};
        i1.insert(i1.end(), args.begin(), args.end());
        i2.insert(i2.end(), args.begin(), args.end());
        if (!logrel_exp(n - 1, instantiate(f->body, i1), instantiate(g->body, i2), b)) return false;
      }
      return true;
    }
    default: return false;
  }
}

bool logrel_stack(std::size_t n, const FrameStack& k1, const FrameStack& k2, const Budget& b) {
  for (const auto& v : related_values(b)) {
    if (!termination_index(Configuration{k1, v}, n)) continue;
    if (!rhs_terminates_or_unknown(k2, v, b)) return false;
  }
  return true;
}

bool logrel_gamma(std::size_t n, const ScopeCtx& gamma, const Subst& s1, const Subst& s2, const Budget& b) {
  for (const auto& x : gamma) {
    auto i1 = s1(x), i2 = s2(x);
    auto* x1 = std::get_if<ExprImage>(&i1);
    auto* x2 = std::get_if<ExprImage>(&i2);
    if (!x1 || !x2) return false;
    if (!closed(x1->expr) || !closed(x2->expr)) return false;
    if (!logrel_val(n, x1->expr, x2->expr, b)) return false;
  }
  return true;
}

bool logrel_open(const ScopeCtx& gamma, const Expr& e1, const Expr& e2, const Budget& b) {
  b.validate();
  require_scoped(gamma, e1, e2);
  for (const auto& s : closings_for(gamma, b)) {
    if (!logrel_gamma(b.depth, gamma, s, s, b)) continue;
    if (!logrel_exp(b.fuel, apply_subst(e1, s), apply_subst(e2, s), b)) return false;
  }
  return true;
}

bool behav_val_le(std::size_t n, const Expr& v1, const Expr& v2, const Budget& b) {
  Behav bh(b);
  return bh.val(n, v1, v2) != Tri::False;
}

// ---------------------------------------------------------------------------
// Discriminator search

Verdict discriminator_search(const Expr& e1, const Expr& e2, const Budget& b) {
  b.validate();
  require_closed(e1, e2);
  auto r1 = observe({}, e1, b.probe_fuel);
  auto r2 = observe({}, e2, b.probe_fuel);
  auto diverging = [](const Observation& o) {
    return o.kind == Observation::Kind::Diverges || o.kind == Observation::Kind::OutOfFuel;
  };
  if (diverging(r1) && diverging(r2)) {
    Verdict v;
    v.kind = Expected::Inconclusive;
    v.reason = "both sides diverge at the empty stack";
    return v;
  }
  std::vector<FrameStack> stacks{FrameStack{}};
  bool complete = true;
  if (terminated(r1) && terminated(r2)) {
    for (auto& k : value_directed_stacks(*r1.value, *r2.value, b, complete)) stacks.push_back(std::move(k));
  }
  Instance in{{}, e1, e2};
  std::vector<Probe> ps;
  for (bool flipped : {false, true}) {
    for (const auto& k : stacks) ps.push_back(make_probe(k, in, flipped));
  }
  Verdict v = run_probes(ps, ProbeCheck::Termination, b);
  if (v.kind != Expected::Consistent) return v;
  if (r1.kind == Observation::Kind::OutOfFuel || r2.kind == Observation::Kind::OutOfFuel) {
    v.kind = Expected::Inconclusive;
    v.reason = "one side ran out of fuel at the empty stack";
  } else if (!complete) {
    v.kind = Expected::Inconclusive;
    v.reason = "the values differ but no discriminating stack was found within the budget";
  }
  return v;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{"naive", "ciu", "logrel", "ctx", "behav", "discriminator"};
  return names;
}

bool closed_only(const std::string& method) {
  return method == "naive" || method == "behav" || method == "discriminator";
}

Verdict equivalence(const std::string& method, const ScopeCtx& gamma, const Expr& e1, const Expr& e2,
                    const Budget& b) {
  b.validate();
  require_scoped(gamma, e1, e2);
  if (closed_only(method)) require_closed(e1, e2);
  if (method == "naive") return naive_impl(e1, e2, b, true);
  if (method == "ciu") return ciu_impl(gamma, e1, e2, b, true, ProbeCheck::Termination);
  if (method == "logrel") return ciu_impl(gamma, e1, e2, b, true, ProbeCheck::Indexed);
  if (method == "ctx") return ctx_impl(gamma, e1, e2, b, true, ProbeCheck::Termination);
  if (method == "naive-ctx") return ctx_impl(gamma, e1, e2, b, true, ProbeCheck::ValueEq);
  if (method == "behav") return behav_impl(e1, e2, b, true);
  if (method == "discriminator") return discriminator_search(e1, e2, b);
  throw Error("unknown method '" + method + "'");
}

}  // namespace mlq
