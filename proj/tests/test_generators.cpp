#include "doctest.h"
#include "oracles.hpp"

#include <algorithm>
#include <set>

#include "mlq/generators.hpp"
#include "mlq/scoping.hpp"
#include "mlq/surface.hpp"

using namespace mlq;
using oracle::core;

namespace {

GenSpec at_depth(std::size_t d) {
  GenSpec s;
  s.depth = d;
  return s;
}

bool contains(const std::vector<Expr>& xs, const Expr& e) { return std::find(xs.begin(), xs.end(), e) != xs.end(); }

std::vector<std::string> printed(const std::vector<FrameStack>& ks) {
  std::vector<std::string> out;
  for (const auto& k : ks) out.push_back(pretty(k));
  return out;
}

}  // namespace

TEST_CASE("values: the base layer is the literal pool and nil") {
  auto v0 = gen_values(at_depth(0));
  CHECK(v0.size() == 7);
  for (int i = -2; i <= 3; ++i) CHECK(contains(v0, Expr::lit(i)));
  CHECK(contains(v0, Expr::nil()));
  auto v1 = gen_values(at_depth(1));
  CHECK(contains(v1, core("[0|[]]")));
  CHECK(std::any_of(v1.begin(), v1.end(), [](const Expr& e) { return e.kind() == Kind::Fun; }));
  for (const auto& v : gen_values(at_depth(2))) {
    REQUIRE(val_scoped({}, v));
  }
}

TEST_CASE("enumerations are deterministic") {
  auto spec = at_depth(2);
  CHECK(gen_values(spec) == gen_values(spec));
  auto a = gen_exprs({Name::var("X")}, spec), b = gen_exprs({Name::var("X")}, spec);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(pretty(a[i]) == pretty(b[i]));
  CHECK(printed(gen_stacks(spec)) == printed(gen_stacks(spec)));
  CHECK(gen_frames(spec) == gen_frames(spec));
}

TEST_CASE("expressions: well scoped and covering every constructor") {
  const ScopeCtx g{Name::var("X"), Name::fun_id("f", 1)};
  auto es = gen_exprs(g, at_depth(2));
  std::set<Kind> kinds;
  for (const auto& e : es) {
    REQUIRE(exp_scoped(g, e));
    kinds.insert(e.term.kind());
  }
  for (Kind k : {Kind::Lit, Kind::Var, Kind::Nil, Kind::Cons, Kind::Fun, Kind::Apply, Kind::Case, Kind::Let,
                 Kind::Letrec, Kind::Add}) {
    CAPTURE(static_cast<int>(k));
    CHECK(kinds.contains(k));
  }
  CHECK(es.size() <= at_depth(2).limit);
}

TEST_CASE("stacks: closed, ordered by length, with the expected discriminators") {
  auto ks = gen_stacks(at_depth(1));
  REQUIRE(!ks.empty());
  CHECK(ks.front().empty());
  auto names = printed(ks);
  CHECK(std::find(names.begin(), names.end(), pretty(parse_framestack("□ + 0"))) != names.end());
  auto disc = parse_framestack("case □ of 0 then 0 else apply (fun f/0() -> apply f/0())()");
  CHECK(std::find(ks.begin(), ks.end(), disc) != ks.end());
  std::size_t last = 0;
  for (const auto& k : gen_stacks(at_depth(2))) {
    REQUIRE(frames_closed(k));
    CHECK(k.size() >= last);
    last = k.size();
  }
}

TEST_CASE("stacks respect the limit") {
  auto spec = at_depth(3);
  spec.limit = 40;
  CHECK(gen_stacks(spec).size() == 40);
}

TEST_CASE("contexts: closed and containing the let context") {
  auto cs = gen_contexts(at_depth(1));
  auto want = parse_context("let X = □ in X");
  bool found = false;
  for (const auto& c : cs) {
    REQUIRE(c.term.term.has_hole());
    REQUIRE(closed(plug_context(c, Expr::lit(0))));
    found = found || alpha_eq(c.term, want);
  }
  CHECK(found);
}

TEST_CASE("closing substitutions") {
  const ScopeCtx g{Name::var("X")};
  auto ss = gen_closing_substs(g, at_depth(0));
  CHECK(ss.size() == gen_values(at_depth(0)).size());
  const ScopeCtx g2{Name::var("X"), Name::var("Y"), Name::fun_id("f", 1)};
  for (const auto& s : gen_closing_substs(g2, at_depth(1))) REQUIRE(subst_scoped(g2, s, {}));
  CHECK(gen_closing_substs({}, at_depth(1)).size() == 1);
}

TEST_CASE("argument tuples have the requested arity and are closed") {
  GenSpec s;
  for (std::size_t k = 0; k <= 3; ++k) {
    auto ts = arg_tuples(k, s);
    REQUIRE(!ts.empty());
    for (const auto& t : ts) {
      REQUIRE(t.size() == k);
      for (const auto& v : t) REQUIRE(val_scoped({}, v));
    }
  }
  CHECK(arg_tuples(0, s).size() == 1);
}

TEST_CASE("samplers are seeded and well scoped") {
  GenSpec spec;
  const ScopeCtx g{Name::var("X"), Name::fun_id("g", 0)};
  Rng a(42), b(42);
  for (int i = 0; i < 300; ++i) {
    auto e1 = random_expr(a, g, 3, spec);
    auto e2 = random_expr(b, g, 3, spec);
    REQUIRE(pretty(e1) == pretty(e2));
    REQUIRE(exp_scoped(g, e1));
    REQUIRE(val_scoped({}, random_value(a, 2, spec)));
    random_value(b, 2, spec);
    REQUIRE(frames_closed(random_stack(a, 3, spec)));
    random_stack(b, 3, spec);
    REQUIRE(random_alphabet_stack(a, 2, spec).size() == 2);
    random_alphabet_stack(b, 2, spec);
    REQUIRE(subst_scoped(g, random_closing(a, g, spec), {}));
    random_closing(b, g, spec);
    auto p = random_pattern(a, 2, spec);
    auto vs = pattern_vars(p);
    REQUIRE(std::set<Name>(vs.begin(), vs.end()).size() == vs.size());
    random_pattern(b, 2, spec);
  }
}

TEST_CASE("bounded draws are uniform enough and reproducible") {
  Rng r(1);
  std::vector<int> hist(5);
  for (int i = 0; i < 5000; ++i) ++hist[r.below(5)];
  for (int h : hist) CHECK(h > 850);
  Rng x(3), y(3);
  for (int i = 0; i < 100; ++i) REQUIRE(x.next() == y.next());
}

TEST_CASE("corpus entries are well formed") {
  std::set<std::string> names;
  for (const auto& e : corpus()) {
    CAPTURE(e.name);
    CHECK(names.insert(e.name).second);
    CHECK(exp_scoped(e.gamma, e.lhs));
    CHECK(exp_scoped(e.gamma, e.rhs));
    CHECK(to_core(parse_expr(e.lhs_src)) == e.lhs);
    CHECK(to_core(parse_expr(e.rhs_src)) == e.rhs);
    for (const auto& sc : e.side_conditions) CHECK(sc.kind == "terminates");
  }
  for (const char* must : {"beta1", "beta2", "beta3", "add-comm", "seq", "fun-pair", "lit-neq", "shape-neq",
                           "head-neq", "tail-neq"}) {
    CHECK(names.contains(must));
  }
}

TEST_CASE("scope lists") {
  auto g = parse_gamma("X, f/1,Y");
  CHECK(g == ScopeCtx{Name::var("X"), Name::var("Y"), Name::fun_id("f", 1)});
  CHECK(parse_gamma(gamma_to_string(g)) == g);
  CHECK(parse_gamma("").empty());
  CHECK_THROWS_AS(parse_gamma("x"), Error);
}

TEST_CASE("expected verdict names") {
  for (auto e : {Expected::Consistent, Expected::Counterexample, Expected::Inconclusive}) {
    CHECK(expected_from_string(to_string(e)) == e);
  }
  CHECK_THROWS_AS(expected_from_string("maybe"), Error);
}
