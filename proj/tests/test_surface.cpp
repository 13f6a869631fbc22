#include "doctest.h"
#include "oracles.hpp"
#include "properties.hpp"

#include "mlq/surface.hpp"

using namespace mlq;
using oracle::core;
using oracle::named;

TEST_CASE("parsing reads the grammar directly") {
  auto e = named("let X = 1 in X + 2");
  auto* l = e.term.as<node::Let>();
  REQUIRE(l);
  CHECK(l->binder == "X");
  CHECK(l->bound == Expr::lit(1));
  CHECK(l->body == Expr::add(Expr::var("X"), Expr::lit(2)));

  CHECK(to_core(named("apply (fun f/0() -> apply f/0())()")) == omega());
  CHECK(named("1 + 2 + 3").term == Expr::add(Expr::add(Expr::lit(1), Expr::lit(2)), Expr::lit(3)));
  CHECK(named("[1|[]]").term == Expr::cons(Expr::lit(1), Expr::nil()));
  CHECK(named("-3 + 4").term == Expr::add(Expr::lit(-3), Expr::lit(4)));
  CHECK(named("123456789012345678901234567890").term ==
        Expr::lit(Integer("123456789012345678901234567890")));
  CHECK(named("% a comment\n 7 % trailing").term == Expr::lit(7));
}

TEST_CASE("binder forms extend to the right") {
  CHECK(named("fun f/1(X) -> X + 1").term ==
        Expr::fun(Name::fun_id("f", 1), {"X"}, Expr::add(Expr::var("X"), Expr::lit(1))));
  CHECK(named("1 + let X = 2 in X + 3").term ==
        Expr::add(Expr::lit(1), Expr::let("X", Expr::lit(2), Expr::add(Expr::var("X"), Expr::lit(3)))));
}

TEST_CASE("parse errors carry a position") {
  try {
    parse_expr("fun f/2(X) -> X");
    FAIL("expected a parse error");
  } catch (const ParseError& err) {
    CHECK(err.pos().line == 1);
    CHECK(err.pos().column == 5);
    CHECK(std::string(err.what()).find("arity") != std::string::npos);
  }
  try {
    parse_expr("let X = 1\nin");
    FAIL("expected a parse error");
  } catch (const ParseError& err) {
    CHECK(err.pos().line == 2);
    CHECK(err.pos().column == 3);
    CHECK_FALSE(err.expected().empty());
  }
  CHECK_THROWS_AS(parse_expr("case X of [A|A] then A else 0"), ParseError);
  CHECK_THROWS_AS(parse_expr("fun f/2(X, X) -> X"), ParseError);
  CHECK_THROWS_AS(parse_expr("f + 1"), ParseError);
  CHECK_THROWS_AS(parse_expr("1 + □"), ParseError);
  CHECK_THROWS_AS(parse_expr("(1"), ParseError);
  CHECK_THROWS_AS(parse_expr(""), ParseError);
  CHECK_THROWS_AS(parse_expr("1 2"), ParseError);
}

TEST_CASE("printing is canonical") {
  CHECK(pretty(NamedExpr{Expr::lit(5)}) == "5");
  CHECK(pretty(NamedExpr{Expr::cons(Expr::lit(1), Expr::nil())}) == "[1|[]]");
  CHECK(pretty(named("1 + (2 + 3)")) == "1 + (2 + 3)");
  CHECK(pretty(named("(1 + 2) + 3")) == "1 + 2 + 3");
  CHECK(pretty(named("(let X = 1 in X) + 2")) == "(let X = 1 in X) + 2");
  CHECK(pretty(named("apply (fun f/0() -> apply f/0())()")) == "apply (fun f/0() -> apply f/0())()");
  CHECK(pretty(named("case X of [H|T] then H else -1")) == "case X of [H|T] then H else -1");
  CHECK(pretty(named("letrec f/2(A,B) = A in apply f/2(1,2)")) == "letrec f/2(A, B) = A in apply f/2(1, 2)");
}

TEST_CASE("printing round-trips") {
  for (const char* src :
       {"apply apply f/0()(1)", "apply (1 + 2)(3)", "(case X of 1 then 2 else 3) + (fun f/0() -> 1)",
        "[let X = 1 in X|(fun g/1(Y) -> Y) + 2]", "1 + (2 + (3 + 4))",
        "let X = case 1 of Y then Y else 2 in X"}) {
    CAPTURE(src);
    auto e = named(src);
    auto text = pretty(e);
    CHECK(alpha_eq(named(text), e));
    CHECK(pretty(named(text)) == text);
  }
}

TEST_CASE("frame stacks") {
  auto k = parse_framestack("□ + 2");
  REQUIRE(k.size() == 1);
  REQUIRE(k.top().as<frame::AddL>());
  CHECK(k.top().as<frame::AddL>()->rhs == Expr::lit(2));

  auto disc = parse_framestack("case □ of 1 then 0 else apply (fun f/0() -> apply f/0())()");
  REQUIRE(disc.size() == 1);
  auto* c = disc.top().as<frame::CaseF>();
  REQUIRE(c);
  CHECK(c->pattern == Pattern::lit(1));
  CHECK(c->else_branch == omega());

  auto two = parse_framestack("let X = □ in X ; □ + 1");
  REQUIRE(two.size() == 2);
  CHECK(two.top().as<frame::LetF>()->body == Expr::bvar(0));
  CHECK(two.pop().top().as<frame::AddL>());

  CHECK(parse_framestack("").empty());
  CHECK(parse_framestack("_ + 1").top().as<frame::AddL>());
  CHECK(parse_framestack("apply (fun f/1(X) -> X)(□)").size() == 1);
  auto arg = parse_framestack("apply f/3(1, [], □, 2 + 2)");
  auto* a = arg.top().as<frame::AppArg>();
  REQUIRE(a);
  CHECK(a->done.size() == 2);
  CHECK(a->rest.size() == 1);
}

TEST_CASE("frame stack errors") {
  CHECK_THROWS_AS(parse_framestack("1 + 2"), ParseError);
  CHECK_THROWS_AS(parse_framestack("□ + □"), ParseError);
  CHECK_THROWS_AS(parse_framestack("fun f/1(X) -> □"), ParseError);
  CHECK_THROWS_AS(parse_framestack("let X = 1 in □"), ParseError);
  CHECK_THROWS_AS(parse_framestack("(1 + 1) + □"), ParseError);
  CHECK_THROWS_AS(parse_framestack("[□|1 + 1]"), ParseError);
  CHECK_THROWS_AS(parse_framestack("apply f/2(1 + 1, □)"), ParseError);
  CHECK_THROWS_AS(parse_framestack("□ + 1 ;"), ParseError);
  CHECK_THROWS_AS(parse_framestack("; □ + 1"), ParseError);
  CHECK_THROWS_AS(parse_framestack("□ + (□ + 1)"), ParseError);
}

TEST_CASE("frames print back to parseable text") {
  for (const char* src : {"let X = □ in X + Y", "case □ of [H|T] then T else 0", "[□|[]]", "[1 + 1|□]",
                          "apply □(1, 2)", "apply (fun f/1(X) -> X)(□)", "3 + □"}) {
    CAPTURE(src);
    auto f = parse_frame(src);
    CHECK(parse_frame(pretty(f)) == f);
  }
  CHECK(pretty(parse_framestack("let X = □ in X ; □ + 1")) == "let X = □ in X ; □ + 1");
  CHECK(pretty(FrameStack{}) == "id");
}

TEST_CASE("contexts allow holes under binders") {
  auto c = parse_context("fun f/1(X) -> □");
  CHECK(c.term.has_hole());
  CHECK_THROWS_AS(parse_context("1 + 2"), ParseError);
  CHECK_THROWS_AS(parse_context("□ + □"), ParseError);
}

TEST_CASE("json tree uses the frozen kind tags") {
  auto j = to_json(named("letrec f/1(X) = X in case apply f/1([1|[]]) of [H|T] then H + 1 else f/1").term);
  CHECK(j["kind"] == "letrec");
  CHECK(j["self"]["name"] == "f");
  CHECK(j["self"]["arity"] == 1);
  CHECK(j["params"][0] == "X");
  CHECK(j["cont"]["kind"] == "case");
  CHECK(j["cont"]["pattern"]["kind"] == "pcons");
  CHECK(j["cont"]["pattern"]["head"]["kind"] == "pvar");
  CHECK(j["cont"]["scrutinee"]["args"][0]["kind"] == "cons");
  CHECK(j["cont"]["then"]["rhs"]["value"] == "1");
  CHECK(j["cont"]["else"]["kind"] == "funid");
  CHECK(to_json(core("fun f/1(X) -> X"))["body"]["kind"] == "bvar");
}

TEST_CASE("generated terms round-trip through the printer") {
  auto r = prop::parser_round_trip(9, 1000);
  INFO(r.first);
  CHECK(r.violations == 0);
}
