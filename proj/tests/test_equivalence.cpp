#include "doctest.h"
#include "oracles.hpp"
#include "properties.hpp"

#include <omp.h>

#include "mlq/context.hpp"
#include "mlq/equivalence.hpp"
#include "mlq/scoping.hpp"
#include "mlq/surface.hpp"

using namespace mlq;
using oracle::core;

namespace {

const Budget defaults;

Budget small() {
  Budget b;
  b.depth = 2;
  b.samples = 100;
  b.fuel = 2000;
  b.probe_fuel = 10000;
  return b;
}

Expected verdict(const std::string& m, const char* a, const char* b, const Budget& bud = defaults,
                 const ScopeCtx& g = {}) {
  return equivalence(m, g, core(a), core(b), bud).kind;
}

const char* const omega_src = "apply (fun f/0() -> apply f/0())()";

}  // namespace

TEST_CASE("budgets") {
  Budget b;
  b.fuel = 10;
  b.probe_fuel = 5;
  CHECK_THROWS_AS(b.validate(), PreconditionError);
  b.probe_fuel = 10;
  CHECK_NOTHROW(b.validate());
  CHECK(b.gen_spec().depth == b.depth);
}

TEST_CASE("naive behavioural equivalence") {
  CHECK(verdict("naive", "1+2", "3") == Expected::Consistent);
  auto v = equivalence("naive", {}, core("fun f/1(X) -> X + 2"), core("fun f/1(X) -> (X + 1) + 1"), defaults);
  CHECK(v.kind == Expected::Counterexample);
  REQUIRE(v.witness);
  CHECK(v.witness->certification == "value");
  CHECK(verdict("naive", omega_src, omega_src) == Expected::Consistent);
}

TEST_CASE("ciu: beta instance and the literal discriminator") {
  CHECK(verdict("ciu", "41+1", "let X = 41 in X+1") == Expected::Consistent);
  auto v = equivalence("ciu", {}, Expr::lit(1), Expr::lit(2), defaults);
  REQUIRE(v.kind == Expected::Counterexample);
  REQUIRE(v.witness);
  const Witness& w = *v.witness;
  CHECK(w.certification == "divergence");
  CHECK(w.stack == parse_framestack(std::string("case □ of 1 then 0 else ") + omega_src));
  CHECK(w.lhs.kind == Observation::Kind::Terminated);
  CHECK(w.rhs.kind == Observation::Kind::Diverges);
  REQUIRE(w.rhs.cert);
  CHECK(validate_cycle({w.stack, w.rhs_program}, *w.rhs.cert));
}

TEST_CASE("ciu on open terms") {
  const ScopeCtx x{Name::var("X")};
  CHECK(ciu_le_open(x, core("X+1+1"), core("X+2"), defaults).kind == Expected::Consistent);
  // X+0 needs a literal, X does not: only one direction holds.
  CHECK(ciu_le_open(x, core("X+0"), core("X"), defaults).kind == Expected::Consistent);
  auto stuck = ciu_le_open(x, core("X"), core("X+0"), defaults);
  CHECK(stuck.kind == Expected::Counterexample);
  REQUIRE(stuck.witness);
  CHECK(stuck.witness->certification == "stuck");
  const ScopeCtx es{Name::var("E1"), Name::var("E2")};
  CHECK(verdict("ciu", "E1+E2", "E2+E1", defaults, es) == Expected::Consistent);
  auto v = ciu_le_open(x, core("X"), core("1"), defaults);
  CHECK(v.kind == Expected::Counterexample);
  REQUIRE(v.witness);
  CHECK(!v.witness->closing.empty());
}

TEST_CASE("closing substitutions are capped and closing") {
  Budget b;
  b.closings = 5;
  const ScopeCtx g{Name::var("X"), Name::fun_id("f", 1)};
  auto ss = closings_for(g, b);
  CHECK(ss.size() == 5);
  for (const auto& s : ss) CHECK(subst_scoped(g, s, {}));
}

TEST_CASE("logical relation") {
  CHECK(logrel_val(3, Expr::lit(5), Expr::lit(5), defaults));
  CHECK_FALSE(logrel_val(3, Expr::lit(5), Expr::lit(6), defaults));
  CHECK(logrel_val(3, Expr::nil(), Expr::nil(), defaults));
  CHECK(logrel_val(0, core("fun f/1(X) -> 0"), core(std::string("fun f/1(X) -> ") + omega_src), defaults));
  CHECK_FALSE(logrel_val(20, core("fun f/1(X) -> 0"), core(std::string("fun f/1(X) -> ") + omega_src), defaults));
  CHECK(logrel_stack(5, {}, {}, defaults));
  CHECK(logrel_exp(10, core("let X = 1 in [X|X]"), core("let X = 1 in [X|X]"), defaults));
  CHECK_FALSE(logrel_exp(10, Expr::lit(1), Expr::lit(2), defaults));
  CHECK(logrel_gamma(3, {}, id_subst(), update(id_subst(), Name::var("X"), Expr::lit(1)), defaults));
  auto five = update(id_subst(), Name::var("X"), Expr::lit(5));
  CHECK(logrel_gamma(3, {Name::var("X")}, five, five, defaults));
  CHECK_FALSE(logrel_gamma(3, {Name::var("X")}, five, update(id_subst(), Name::var("X"), Expr::lit(4)), defaults));
  CHECK(logrel_open({Name::var("X")}, core("X"), core("X"), defaults));
  CHECK(verdict("logrel", "1", "2") == Expected::Counterexample);
}

TEST_CASE("behavioural preorder") {
  CHECK(behav_val_le(0, Expr::lit(1), Expr::nil(), defaults));
  CHECK(behav_val_le(4, core("[1|[]]"), core("[1|[]]"), defaults));
  CHECK_FALSE(behav_val_le(4, core("[1|[]]"), core("[2|[]]"), defaults));
  CHECK(behav_le(core("fun f/1(X) -> X + 2"), core("fun f/1(X) -> (X + 1) + 1"), defaults).kind ==
        Expected::Consistent);
  CHECK(behav_le(core("fun f/1(X) -> X + 2"), core("fun f/1(X) -> X + 3"), defaults).kind ==
        Expected::Counterexample);
}

TEST_CASE("contexts") {
  CHECK(pretty(plug_context(make_context(parse_context("apply f/3(1, □, 3)")), oracle::named("2"))) ==
        "apply f/3(1, 2, 3)");
  CHECK(plug_context(hole_context(), core("1+2")) == core("1+2"));
  CHECK(plug_context(make_context(parse_context("fun f/1(X) -> □")), Expr::var("X")) == core("fun f/1(X) -> X"));
  CHECK_THROWS_AS(make_context(oracle::named("1")), Error);

  CHECK(verdict("ctx", "1+2", "3") == Expected::Consistent);
  auto v = equivalence("ctx", {}, Expr::lit(1), Expr::lit(2), defaults);
  REQUIRE(v.kind == Expected::Counterexample);
  REQUIRE(v.witness);
  REQUIRE(v.witness->context);
  CHECK(alpha_eq(*v.witness->context,
                 parse_context(std::string("case □ of 1 then 0 else ") + omega_src)));
  CHECK(verdict("ctx", "X + 1", "X + 1", defaults, {Name::var("X")}) == Expected::Consistent);
}

TEST_CASE("naive contextual equivalence is close to syntactic equality") {
  CHECK(verdict("naive-ctx", "fun f/0() -> 1 + 1", "fun f/0() -> 2") == Expected::Counterexample);
  // a context can put the term under a binder and return it unevaluated
  CHECK(verdict("naive-ctx", "1 + 1", "2") == Expected::Counterexample);
  CHECK(verdict("naive-ctx", "let X = 1 in X", "let Y = 1 in Y") == Expected::Consistent);
}

TEST_CASE("discriminator search") {
  auto shape = equivalence("discriminator", {}, Expr::lit(5), core("[5|[]]"), defaults);
  CHECK(shape.kind == Expected::Counterexample);
  REQUIRE(shape.witness);
  CHECK(shape.witness->stack.top().as<frame::CaseF>());

  auto head = equivalence("discriminator", {}, core("[1|[]]"), core("[2|[]]"), defaults);
  CHECK(head.kind == Expected::Counterexample);
  REQUIRE(head.witness);
  CHECK(head.witness->stack.size() >= 2);

  auto fun = equivalence("discriminator", {}, core("fun f/1(X) -> X"), core("fun f/1(X) -> X + 0"), defaults);
  CHECK(fun.kind == Expected::Counterexample);
  REQUIRE(fun.witness);
  CHECK(fun.witness->certification == "stuck");
  CHECK(fun.witness->stack.top().as<frame::AppFn>());

  CHECK(verdict("discriminator", omega_src, omega_src) == Expected::Inconclusive);
  CHECK(verdict("discriminator", "1+2", "3") == Expected::Consistent);
}

TEST_CASE("fuel exhaustion is inconclusive unless refutation is accepted") {
  // the rhs needs more than probe_fuel steps but terminates
  const char* slow = "letrec f/1(N) = case N of 0 then 0 else apply f/1(N + -1) in apply f/1(400)";
  Budget b;
  b.fuel = 100;
  b.probe_fuel = 200;
  b.depth = 1;
  b.samples = 20;
  auto v = ciu_le(Expr::lit(0), core(slow), b);
  CHECK(v.kind == Expected::Inconclusive);
  b.accept_fuel_refutation = true;
  auto w = ciu_le(Expr::lit(0), core(slow), b);
  CHECK(w.kind == Expected::Counterexample);
  REQUIRE(w.witness);
  CHECK(w.witness->certification == "fuel");
}

TEST_CASE("preconditions") {
  CHECK_THROWS_AS(equivalence("ciu", {}, core("X"), core("1"), defaults), PreconditionError);
  CHECK_THROWS_AS(equivalence("naive", {Name::var("X")}, core("X"), core("X"), defaults), PreconditionError);
  CHECK_THROWS_AS(equivalence("telepathy", {}, core("1"), core("1"), defaults), Error);
  for (const auto& m : method_names()) CHECK(closed_only(m) == (m == "naive" || m == "behav" || m == "discriminator"));
}

TEST_CASE("serial and parallel probe runs agree") {
  omp_set_num_threads(4);
  Rng rng(99);
  GenSpec spec;
  spec.max_arity = 2;
  Budget b = small();
  for (int i = 0; i < 25; ++i) {
    Expr e1 = prop::closed_expr(rng, 2), e2 = prop::closed_expr(rng, 2);
    std::vector<Probe> probes;
    for (const auto& k : ciu_stacks(e1, e2, b)) {
      Probe p;
      p.stack = k;
      p.lhs = e1;
      p.rhs = e2;
      probes.push_back(p);
    }
    for (auto check : {ProbeCheck::Termination, ProbeCheck::ValueEq}) {
      auto s = run_probes_serial(probes, check, b);
      auto p = run_probes_parallel(probes, check, b);
      CAPTURE(pretty_core(e1));
      CAPTURE(pretty_core(e2));
      CHECK(s.kind == p.kind);
      CHECK(s.reason == p.reason);
      CHECK(to_json(s).dump() == to_json(p).dump());
    }
  }
}

TEST_CASE("divergence witnesses replay") {
  Rng rng(5);
  Budget b = small();
  int certified = 0;
  for (int i = 0; i < 40; ++i) {
    Expr e1 = prop::closed_expr(rng, 2), e2 = prop::closed_expr(rng, 2);
    auto v = equivalence("ciu", {}, e1, e2, b);
    if (v.kind != Expected::Counterexample || v.witness->certification != "divergence") continue;
    ++certified;
    const Witness& w = *v.witness;
    REQUIRE(w.rhs.cert);
    CHECK(validate_cycle({w.stack, w.rhs_program}, *w.rhs.cert));
  }
  CHECK(certified > 0);
}

TEST_CASE("reflexivity and adequacy on generated terms") {
  Rng rng(17);
  Budget b = small();
  for (int i = 0; i < 30; ++i) {
    Expr e = prop::closed_expr(rng, 2);
    CAPTURE(pretty_core(e));
    CHECK(ciu_le(e, e, b).kind != Expected::Counterexample);
    CHECK(ctx_le({}, e, e, b).kind != Expected::Counterexample);
    CHECK(logrel_exp(10, e, e, b));
  }
  // adequacy: a consistent pair whose lhs terminates at id has a non-diverging rhs
  for (int i = 0; i < 30; ++i) {
    Expr e1 = prop::closed_expr(rng, 2);
    Expr e2 = rng.chance(1, 2) ? Expr::let("X", e1, Expr::bvar(0)) : prop::closed_expr(rng, 2);
    if (ciu_le(e1, e2, b).kind != Expected::Consistent) continue;
    if (!std::holds_alternative<outcome::Terminated>(eval(e1, {}, b.fuel))) continue;
    CHECK_FALSE(std::holds_alternative<divergence::Diverges>(detect_divergence({{}, e2}, b.probe_fuel)));
  }
}

TEST_CASE("compatibility: consistent parts give composites without certified refutations") {
  Budget b = small();
  std::vector<std::pair<const char*, const char*>> pairs{
      {"1+2", "3"}, {"let X = 41 in X+1", "42"}, {"[1|[]]", "let Y = [] in [1|Y]"},
      {"fun f/1(X) -> X + 2", "fun f/1(X) -> (X + 1) + 1"}};
  auto ok = [&](const Expr& a, const Expr& c) {
    auto v = ciu_le(a, c, b);
    return v.kind != Expected::Counterexample || v.witness->certification == "fuel";
  };
  for (auto [a1, c1] : pairs) {
    for (auto [a2, c2] : pairs) {
      Expr x = core(a1), y = core(c1), u = core(a2), w = core(c2);
      CAPTURE(a1);
      CAPTURE(a2);
      CHECK(ok(Expr::add(x, u), Expr::add(y, w)));
      CHECK(ok(Expr::cons(x, u), Expr::cons(y, w)));
      CHECK(ok(Expr::apply(x, {u}), Expr::apply(y, {w})));
      CHECK(ok(Expr::let("Z", x, u), Expr::let("Z", y, w)));
      CHECK(ok(Expr::case_of(x, Pattern::lit(3), u, x), Expr::case_of(y, Pattern::lit(3), w, y)));
    }
  }
}

TEST_CASE("verdicts serialise with the budget") {
  auto v = equivalence("ciu", {}, Expr::lit(1), Expr::lit(2), defaults);
  auto j = to_json(v);
  CHECK(j["verdict"] == "counterexample");
  CHECK(j["witness"]["rhs"]["kind"] == "diverges");
  CHECK(j["witness"]["stack"] == pretty(v.witness->stack));
  CHECK(to_json(defaults)["fuel"] == 10000);
}
