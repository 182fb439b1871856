#include <doctest.h>

#include "esl/eval.hpp"
#include "esl/printer.hpp"
#include "esl/syntax.hpp"

using namespace esl;

TEST_CASE("expression evaluation on defined naturals") {
  Store s{{"x", Value::nat(5)}};
  auto e = mk_add(mk_pvar("x"), mk_nat(1));
  auto v = eval_expr(s, *e);
  REQUIRE(v.has_value());
  CHECK(*v == Value::nat(6));
}

TEST_CASE("ill-typed and absent-variable evaluation is undefined") {
  Store s;
  CHECK_FALSE(eval_expr(s, *mk_add(mk_nil(), mk_nat(1))).has_value());
  CHECK_FALSE(eval_expr(s, *mk_pvar("x")).has_value());
  // natural subtraction is partial
  CHECK_FALSE(eval_expr(s, *mk_sub(mk_nat(0), mk_nat(1))).has_value());
  CHECK(eval_expr(s, *mk_sub(mk_nat(3), mk_nat(1))) == Value::nat(2));
}

TEST_CASE("equality is structural and total across tags") {
  Store s{{"x", Value::boolean(true)}};
  auto e = mk_eq(mk_pvar("x"), mk_nil());
  CHECK(eval_expr(s, *e) == Value::boolean(false));
  auto l1 = Value::list({Value::nat(1), Value::nil()});
  auto l2 = Value::list({Value::nat(1), Value::nil()});
  CHECK(l1 == l2);
}

TEST_CASE("list operators") {
  Store s;
  auto cons = mk_binary(BinOp::Cons, mk_nat(1), mk_list({mk_nat(2)}));
  CHECK(eval_expr(s, *cons) == Value::list({Value::nat(1), Value::nat(2)}));
  auto cat = mk_binary(BinOp::Concat, mk_list({mk_nat(1)}), mk_list({mk_nat(2)}));
  CHECK(eval_expr(s, *cat) == Value::list({Value::nat(1), Value::nat(2)}));
  auto len = mk_unary(UnOp::Len, mk_list({mk_nat(1), mk_nat(2), mk_nat(3)}));
  CHECK(eval_expr(s, *len) == Value::nat(3));
  auto m = mk_binary(BinOp::Mod, mk_nat(7), mk_nat(2));
  CHECK(eval_expr(s, *m) == Value::nat(1));
}

TEST_CASE("membership is total") {
  Store s;
  CHECK(eval_expr(s, *mk_inset(mk_pvar("zzz"), Carrier::Val)) ==
        Value::boolean(false));
  CHECK(eval_expr(s, *mk_inset(mk_nat(3), Carrier::Nat)) == Value::boolean(true));
  CHECK(eval_expr(s, *mk_inset(mk_nil(), Carrier::Bool)) == Value::boolean(false));
}

TEST_CASE("overloaded comparison against sets") {
  Store s;
  auto set = mk_list({mk_nat(1), mk_nat(2)});
  CHECK(eval_expr(s, *mk_binary(BinOp::Lt, set, mk_nat(5))) ==
        Value::boolean(true));
  CHECK(eval_expr(s, *mk_binary(BinOp::Lt, mk_nat(2), set)) ==
        Value::boolean(false));
  // empty set: vacuously below anything
  CHECK(eval_expr(s, *mk_binary(BinOp::Lt, mk_list({}), mk_nat(0))) ==
        Value::boolean(true));
}

TEST_CASE("mathematical functions") {
  Store s;
  auto r = mk_mathapp("rev", {mk_list({mk_nat(1), mk_nat(2)})});
  CHECK(eval_expr(s, *r) == Value::list({Value::nat(2), Value::nat(1)}));
  auto mn = mk_mathapp("min", {mk_list({mk_nat(4), mk_nat(2), mk_nat(9)})});
  CHECK(eval_expr(s, *mn) == Value::nat(2));
  auto up = mk_mathapp("uplus", {mk_list({mk_nat(1)}), mk_list({mk_nat(3)})});
  CHECK(eval_expr(s, *up) == Value::list({Value::nat(1), Value::nat(3)}));
  // overlap makes the disjoint union undefined
  auto bad = mk_mathapp("uplus", {mk_list({mk_nat(1)}), mk_list({mk_nat(1)})});
  CHECK_FALSE(eval_expr(s, *bad).has_value());

  // BSTInsert on the empty tree
  auto ins = mk_mathapp("bst_insert",
                        {mk_nil(), mk_list({mk_lvar("a"), mk_nat(5)})});
  Substitution th{{"a", Value::nat(0)}};
  auto got = eval_expr(th, s, *ins);
  REQUIRE(got.has_value());
  CHECK(*got == Value::list({Value::list({Value::nat(0), Value::nat(5)}),
                             Value::nil(), Value::nil()}));
}

TEST_CASE("pv and mods") {
  auto c = mk_seq(mk_lookup("x", mk_pvar("e")),
                  mk_funcall("y", "f", {mk_pvar("z")}));
  CHECK(mods(*c) == std::set<std::string>{"x", "y"});
  CHECK(pv(*c) == std::set<std::string>{"x", "e", "y", "z"});
  CHECK(mods(*mk_skip()).empty());
  auto a = mk_assign("x", mk_add(mk_pvar("y"), mk_nat(1)));
  CHECK(pv(*a) == std::set<std::string>{"x", "y"});
}

TEST_CASE("function validation") {
  FunctionDef dup{"f", {"x", "x"}, mk_skip(), mk_pvar("x")};
  auto errs = validate_function(dup);
  REQUIRE_FALSE(errs.empty());
  CHECK(errs.front().find("duplicate") != std::string::npos);

  FunctionDef bad_ret{"f", {"x"}, mk_skip(), mk_pvar("q")};
  CHECK_FALSE(validate_function(bad_ret).empty());

  FunctionDef assigns_ret{"f", {"x"}, mk_assign("ret", mk_nat(1)), mk_pvar("x")};
  CHECK_FALSE(validate_function(assigns_ret).empty());

  // LLen-style function: ok
  auto body = mk_if(
      mk_eq(mk_pvar("x"), mk_nil()), mk_assign("r", mk_nat(0)),
      mk_seq(mk_lookup("x", mk_add(mk_pvar("x"), mk_nat(1))),
             mk_seq(mk_funcall("r", "LLen", {mk_pvar("x")}),
                    mk_assign("r", mk_add(mk_pvar("r"), mk_nat(1))))));
  FunctionDef llen{"LLen", {"x"}, body, mk_pvar("r")};
  CHECK(validate_function(llen).empty());
}

TEST_CASE("canonical serialisation") {
  CHECK(serialize_expr(*mk_add(mk_pvar("x"), mk_nat(1))) == "x + 1");
  CHECK(serialize_expr(*mk_nil()) == "nil");
  auto e = mk_eq(mk_add(mk_pvar("x"), mk_nat(1)), mk_pvar("y"));
  CHECK(serialize_expr(*e) == "(x + 1) = y");
  CHECK(show_lexpr(*mk_eq(mk_pvar("x"), mk_lvar("x"))) == "@x = x");
}
