#include <doctest.h>

#include "esl/parser.hpp"
#include "esl/printer.hpp"
#include "esl/proof.hpp"
#include "support/gen.hpp"

using namespace esl;

TEST_CASE("program expressions round-trip through the canonical printer") {
  for (uint64_t seed = 0; seed < 400; ++seed) {
    testgen::Rng r(seed);
    auto e = testgen::gen_expr(r, 3);
    std::string text = serialize_expr(*e);
    CAPTURE(text);
    auto back = parse_pexpr(text);
    CHECK(expr_equal(*e, *back));
    CHECK(serialize_expr(*back) == text);
  }
}

TEST_CASE("comparison sugar desugars into the core operator set") {
  auto gt = parse_pexpr("x > 0");
  CHECK(serialize_expr(*gt) == "0 < x");
  auto ne = parse_pexpr("x != nil");
  CHECK(serialize_expr(*ne) == "not (x = nil)");
  auto lists = parse_pexpr("1 : [2] ++ [3]");
  CHECK(eval_expr({}, *lists) ==
        Value::list({Value::nat(1), Value::nat(2), Value::nat(3)}));
  CHECK_THROWS_AS(parse_pexpr("x ? 2"), ParseError);
}

TEST_CASE("commands parse") {
  auto c = parse_command(
      "x := 5; if (x > 0) { y := 42 } else { y := 21 }; free(x); [x] := y + "
      "1; z := [x]; w := new(2); r := LLen(x); error(\"boom\"); skip");
  CHECK(show_command(*c).find("LLen") != std::string::npos);
  auto w = parse_command("while (x < 3) { x := x + 1 }");
  CHECK(std::holds_alternative<Command::While>(w->node));
}

TEST_CASE("programs with functions and main") {
  auto prog = parse_program(R"(
    fn LLen(x) {
      if (x = nil) { r := 0 } else {
        x := [x + 1];
        r := LLen(x);
        r := r + 1
      };
      return r
    }
    main { x := nil; n := LLen(x) }
  )");
  REQUIRE(prog.funcs.find("LLen"));
  CHECK(prog.funcs.find("LLen")->params == std::vector<std::string>{"x"});
  CHECK(validate_function(*prog.funcs.find("LLen")).empty());
  REQUIRE(prog.main);
}

TEST_CASE("assertions parse with predicates, cells and sugar") {
  std::set<std::string> preds{"list_n", "listptr"};
  auto a = parse_assertion("@x == x * list_n(x, n) * @r == nil", preds);
  auto vars = fv_assertion(*a);
  CHECK(vars.pvars == std::set<std::string>{"x", "r"});
  CHECK(vars.lvars == std::set<std::string>{"x", "n"});

  auto cell = parse_assertion("x |-> v, x' * listptr(x, xs)", preds);
  std::vector<std::string> dummy;
  CHECK(show_assertion(*cell).find("x + 1 |-> x'") != std::string::npos);

  auto freed = parse_assertion("x |-> #, #", preds);
  CHECK(show_assertion(*freed) == "x |-> # * x + 1 |-> #");

  auto ex = parse_assertion("exists v, x'. x |-> v, x' * True", preds);
  CHECK(std::holds_alternative<Assertion::Exists>(ex->node));

  auto disj = parse_assertion("(x == nil * n == 0) \\/ (0 < n)", preds);
  AssertionPtr l, r;
  CHECK(match_or(*disj, &l, &r));

  auto impl = parse_assertion("emp => emp", preds);
  CHECK(std::holds_alternative<Assertion::Implies>(impl->node));

  auto paren_expr = parse_assertion("(x + 1) = y", preds);
  CHECK(std::holds_alternative<Assertion::BoolA>(paren_expr->node));

  auto iter = parse_assertion("bigstar i in [0, n). (x + i |-> nil)", preds);
  CHECK(std::holds_alternative<Assertion::IterStar>(iter->node));
}

TEST_CASE("spec files") {
  auto sf = parse_spec_file(R"(
    spec llen_exact for fn LLen {
      pre { @x == x * list_n(x, n) }
      ok  { list_n(x, n) * @ret == n }
    }
    spec branchy for cmd { if (x > 0) { y := 42 } else { y := 21 } } {
      pre { @x in Nat }
      ok  { (0 < @x /\ @y == 42) \/ (@x == 0 /\ @y == 21) }
    }
  )", {"list_n"});
  REQUIRE(sf.specs.size() == 2);
  CHECK(sf.specs[0].target_fun == "LLen");
  CHECK(is_false(*sf.specs[0].post_err));
  REQUIRE(sf.specs[1].target_cmd);
}

TEST_CASE("proof scripts parse") {
  auto script = parse_proof_script(R"(
    pred twocells(x) := x |-> nil, nil;
    lemma fold_seg : llseg_n(x, nil, n) <=> list_n(x, n);
    block alpha_max 2 {
      fn LLen(x) {
        if (x = nil) { r := 0 } else {
          x := [x + 1];
          r := LLen(x);
          r := r + 1
        };
        return r
      }
      spec LLen measure n {
        pre { @x == x * list_n(x, n) }
        ok  { list_n(x, n) * @ret == n }
      }
      proof LLen {
        { @x == x * list_n(x, n) * alpha == n * @r == nil }
        if (x = nil) {
          { @x == x * list_n(x, n) * alpha == n * @r == nil * @x == nil }
          r := 0;
          { @x == x * list_n(x, n) * alpha == n * @r == 0 * @x == nil }
        } else {
          { @x == x * list_n(x, n) * alpha == n * @r == nil * @x != nil }
          x := [x + 1];
          { True }
          r := LLen(x) [use LLen, inst(x: x', n: n - 1), frame(x |-> v, x'), old nil];
          { True }
          r := r + 1;
          { True }
        }
        { True }
        return r
      }
    }
  )", {"list_n", "llseg_n"});
  CHECK(script.preds.size() == 1);
  REQUIRE(script.items.size() == 2);
  CHECK(std::holds_alternative<LemmaDecl>(script.items[0]));
  const auto& block = std::get<EnvBlock>(script.items[1]);
  CHECK(block.alpha_max == 2);
  REQUIRE(block.funcs.size() == 1);
  REQUIRE(block.specs.size() == 1);
  CHECK(block.specs[0].measure);
  REQUIRE(block.proofs.size() == 1);
  const auto& body = block.proofs[0].body;
  REQUIRE(body.size() >= 4);
  CHECK(body[0].kind == ProofElem::Kind::Assert);
  CHECK(body[1].kind == ProofElem::Kind::IfElse);
  const auto& els = *body[1].else_body;
  bool found_call = false;
  for (const auto& el : els) {
    if (el.kind == ProofElem::Kind::Call) {
      found_call = true;
      CHECK(el.call.use == "LLen");
      CHECK(el.call.inst.count("x"));
      CHECK(el.call.frame);
    }
  }
  CHECK(found_call);
  CHECK(body.back().kind == ProofElem::Kind::Return);
}

TEST_CASE("derive declarations parse") {
  auto script = parse_proof_script(R"(
    derive llen_abs from LLen {
      adm_exists vs;
      adm_equiv { pre { @x == x * list(x) } ok { exists n. list_n(x, n) * @ret == n } };
    }
  )", {"list", "list_n"});
  REQUIRE(script.items.size() == 1);
  const auto& d = std::get<DeriveDecl>(script.items[0]);
  CHECK(d.name == "llen_abs");
  CHECK(d.steps.size() == 2);
  CHECK(d.steps[0].kind == AdmStep::Kind::Exists);
  CHECK(d.steps[1].kind == AdmStep::Kind::Equiv);
}
