#include <doctest.h>

#include "esl/predicates.hpp"
#include "esl/sat.hpp"
#include "support/ref_sat.hpp"

using namespace esl;

namespace {
ModelBounds eq_bounds() {
  // the bounds used for the displayed predicate equivalences
  ModelBounds b;
  b.vmax = 1;
  b.amax = 4;
  return b;
}
}  // namespace

TEST_CASE("registration diagnostics") {
  PredRegistry reg;
  SUBCASE("unknown callee") {
    PredDef p{"p", {"x"}, mk_pred("q", {mk_lvar("x")})};
    auto errs = reg.register_def(p);
    REQUIRE_FALSE(errs.empty());
    CHECK(errs.front().find("unknown predicate 'q'") != std::string::npos);
  }
  SUBCASE("unbound body variable") {
    PredDef p{"p", {"x"}, mk_boolassert(mk_eq(mk_lvar("y"), mk_nat(0)))};
    CHECK_FALSE(reg.register_def(p).empty());
  }
  SUBCASE("duplicate names and arity mismatches") {
    PredDef p{"p", {"x"}, mk_emp()};
    CHECK(reg.register_def(p).empty());
    CHECK_FALSE(reg.register_def(p).empty());
    PredDef q{"q", {"x"}, mk_pred("p", {mk_lvar("x"), mk_lvar("x")})};
    auto errs = reg.register_def(q);
    REQUIRE_FALSE(errs.empty());
    CHECK(errs.front().find("expected 1") != std::string::npos);
  }
  SUBCASE("mutually recursive group registers together") {
    PredDef e{"ev", {"n"},
              mk_or(mk_boolassert(mk_eq(mk_lvar("n"), mk_nat(0))),
                    mk_pred("od", {mk_sub(mk_lvar("n"), mk_nat(1))}))};
    PredDef o{"od", {"n"},
              mk_or(mk_boolassert(mk_eq(mk_lvar("n"), mk_nat(1))),
                    mk_pred("ev", {mk_sub(mk_lvar("n"), mk_nat(1))}))};
    CHECK(reg.register_group({e, o}).empty());
  }
}

TEST_CASE("builtin corpus registers cleanly") {
  PredRegistry reg = builtin_corpus();
  CHECK(reg.find("list"));
  CHECK(reg.find("list_n"));
  CHECK(reg.find("list_v"));
  CHECK(reg.find("list_p"));
  CHECK(reg.find("list_pv"));
  CHECK(reg.find("list_nat"));
  CHECK(reg.find("llseg_n"));
  CHECK(reg.find("llseg_pv"));
  CHECK(reg.find("listptr"));
  CHECK(reg.find("freed"));
  CHECK(reg.find("even"));
  CHECK(reg.find("odd"));
  CHECK(reg.find("bst_k"));
  CHECK(reg.find("bst_t"));
  CHECK(reg.find("bst_root"));
}

TEST_CASE("unfolding") {
  PredRegistry reg = builtin_corpus();
  ModelBounds b = eq_bounds();
  SUBCASE("full unfolding of list_n(0, 2) matches a two-node heap") {
    auto u = unfold(reg, "list_n", {mk_nat(0), mk_nat(2)}, 3);
    Heap h{{0, Cell::value(Value::nat(1))},
           {1, Cell::value(Value::nat(3))},
           {3, Cell::value(Value::nat(9))},
           {4, Cell::value(Value::nil())}};
    CHECK(sat(reg, {}, {{}, h}, *u, b).holds);
    // and the instance itself agrees
    CHECK(sat(reg, {}, {{}, h}, *mk_pred("list_n", {mk_nat(0), mk_nat(2)}), b).holds);
  }
  SUBCASE("only the nil branch of list_n(x, 0) is satisfiable") {
    auto u = unfold(reg, "list_n", {mk_lvar("x"), mk_nat(0)}, 1);
    auto ms = enumerate_models(reg, *u, {"x"}, {}, b);
    REQUIRE(ms.models.size() == 1);
    CHECK(ms.models[0].theta.at("x") == Value::nil());
    CHECK(ms.models[0].state.heap.empty());
  }
  SUBCASE("llseg_n(x, y, 1) is a single node pointing at y") {
    Heap h{{2, Cell::value(Value::nat(0))}, {3, Cell::value(Value::nat(7))}};
    Substitution th{{"x", Value::nat(2)}, {"y", Value::nat(7)}};
    auto u = unfold(reg, "llseg_n", {mk_lvar("x"), mk_lvar("y"), mk_nat(1)}, 1);
    CHECK(sat(reg, th, {{}, h}, *u, b).holds);
  }
}

TEST_CASE("listptr and freed") {
  PredRegistry reg = builtin_corpus();
  ModelBounds b = eq_bounds();
  // listptr(nil, []) holds in the empty heap
  CHECK(sat(reg, {}, {{}, {}},
            *mk_pred("listptr", {mk_nil(), mk_list({})}), b)
            .holds);
  auto mf = enumerate_models(reg, *mk_pred("freed", {mk_list({mk_nat(1)})}), {},
                             {}, b);
  REQUIRE(mf.models.size() == 1);
  Heap want{{1, Cell::freed_cell()}, {2, Cell::freed_cell()}};
  CHECK(mf.models[0].state.heap == want);
}

TEST_CASE("frozen model count for list_n(x, 2) at amax=4, vmax=1") {
  // Independent brute force: a two-node list occupies two disjoint address
  // pairs {a, a+1}, {c, c+1} within 0..4, with x = a, the link cell holding
  // c, the last link nil, and the two value cells ranging over the bounded
  // cell universe. Heaps of any other shape cannot satisfy the unfolding.
  PredRegistry reg = builtin_corpus();
  ModelBounds b;
  b.vmax = 1;
  b.amax = 4;
  b.list_depth = 0;
  b.list_len = 0;
  auto uni = value_universe(b, 0);
  uint64_t expected = 0;
  for (uint64_t a = 0; a + 1 <= b.amax; ++a) {
    for (uint64_t c = 0; c + 1 <= b.amax; ++c) {
      bool overlap = a == c || a == c + 1 || a + 1 == c;
      if (!overlap) expected += uni.size() * uni.size();
    }
  }
  CHECK(expected == 384);  // frozen
  auto ms = enumerate_models(reg, *mk_pred("list_n", {mk_lvar("x"), mk_nat(2)}),
                             {"x"}, {}, b);
  CHECK(ms.models.size() == expected);
}

TEST_CASE("generic enumerator cross-check on a small list instance") {
  PredRegistry reg = builtin_corpus();
  ModelBounds b;
  b.vmax = 1;
  b.amax = 2;
  b.list_depth = 0;
  b.list_len = 0;
  b.unfold_depth = 6;
  auto p = mk_pred("list_n", {mk_lvar("x"), mk_nat(1)});
  auto ref = reftest::ref_enumerate(reg, *p, {"x"}, {}, b);
  auto prod = enumerate_models(reg, *p, {"x"}, {}, b);
  std::set<Model> prod_set(prod.models.begin(), prod.models.end());
  CHECK(ref.models == prod_set);
  CHECK(ref.models.size() == 2 * value_universe(b, 0).size());
}

TEST_CASE("displayed list predicate equivalences") {
  PredRegistry reg = builtin_corpus();
  ModelBounds b = eq_bounds();
  auto X = mk_lvar("x");

  SUBCASE("list(x) <=> exists n. list_n(x, n)") {
    auto lhs = mk_pred("list", {X});
    auto rhs = mk_exists("n", mk_pred("list_n", {X, mk_lvar("n")}));
    auto v = check_equiv(reg, *lhs, *rhs, {}, b);
    CHECK(v.valid);
  }
  SUBCASE("list(x) <=> exists vs. list_v(x, vs)") {
    auto lhs = mk_pred("list", {X});
    auto rhs = mk_exists("vs", mk_pred("list_v", {X, mk_lvar("vs")}));
    CHECK(check_equiv(reg, *lhs, *rhs, {}, b).valid);
  }
  SUBCASE("list(x) <=> exists xs, vs. list_pv(x, xs, vs)") {
    auto lhs = mk_pred("list", {X});
    auto rhs = mk_exists_many(
        {"xs", "vs"}, mk_pred("list_pv", {X, mk_lvar("xs"), mk_lvar("vs")}));
    CHECK(check_equiv(reg, *lhs, *rhs, {}, b).valid);
  }
  SUBCASE("list_n(x, n) <=> exists vs. list_v(x, vs) * |vs| = n") {
    auto lhs = mk_pred("list_n", {X, mk_lvar("n")});
    auto rhs = mk_exists(
        "vs",
        mk_star(mk_pred("list_v", {X, mk_lvar("vs")}),
                mk_boolassert(mk_eq(mk_unary(UnOp::Len, mk_lvar("vs")),
                                    mk_lvar("n")))));
    CHECK(check_equiv(reg, *lhs, *rhs, {}, b).valid);
  }
}

TEST_CASE("llseg identities") {
  PredRegistry reg = builtin_corpus();
  ModelBounds b = eq_bounds();
  SUBCASE("llseg_n(x, nil, n) <=> list_n(x, n)") {
    auto lhs = mk_pred("llseg_n", {mk_lvar("x"), mk_nil(), mk_lvar("n")});
    auto rhs = mk_pred("list_n", {mk_lvar("x"), mk_lvar("n")});
    CHECK(check_equiv(reg, *lhs, *rhs, {}, b).valid);
  }
  SUBCASE("llseg_n(x, y, n+1) <=> exists x', v. llseg_n(x, x', n) * x' |-> v, y") {
    auto lhs = mk_pred("llseg_n", {mk_lvar("x"), mk_lvar("y"),
                                   mk_add(mk_lvar("n"), mk_nat(1))});
    auto rhs = mk_exists_many(
        {"x'", "v"},
        mk_star_many(
            {mk_pred("llseg_n", {mk_lvar("x"), mk_lvar("x'"), mk_lvar("n")}),
             mk_cell(mk_lvar("x'"), mk_lvar("v")),
             mk_cell(mk_add(mk_lvar("x'"), mk_nat(1)), mk_lvar("y"))}));
    // n ranges over naturals only; constrain both sides identically
    auto nat_n = mk_boolassert(mk_inset(mk_lvar("n"), Carrier::Nat));
    CHECK(check_equiv(reg, *mk_star(lhs, nat_n), *mk_star(rhs, nat_n), {}, b)
              .valid);
  }
  SUBCASE("llseg_n(nil-terminated) unfolds from the left too") {
    auto lhs = mk_pred("list_n", {mk_lvar("x"), mk_nat(0)});
    auto rhs = mk_boolassert(mk_eq(mk_lvar("x"), mk_nil()));
    CHECK(check_equiv(reg, *lhs, *rhs, {}, b).valid);
  }
}

TEST_CASE("even/odd cover the naturals") {
  PredRegistry reg = builtin_corpus();
  ModelBounds b;
  b.vmax = 6;
  b.amax = 0;
  b.unfold_depth = 10;
  auto v = mk_lvar("v");
  auto lhs = mk_or(mk_pred("even", {v}), mk_pred("odd", {v}));
  auto rhs = mk_boolassert(mk_inset(v, Carrier::Nat));
  auto verdict = check_equiv(reg, *lhs, *rhs, {}, b);
  CHECK(verdict.valid);
}

TEST_CASE("fold/unfold model sets coincide") {
  PredRegistry reg = builtin_corpus();
  ModelBounds b;
  b.vmax = 1;
  b.amax = 3;
  struct CaseT {
    const char* name;
    std::vector<ExprPtr> args;
    std::set<std::string> lvars;
  };
  std::vector<CaseT> cases = {
      {"list", {mk_lvar("x")}, {"x"}},
      {"list_n", {mk_lvar("x"), mk_lvar("n")}, {"x", "n"}},
      {"listptr", {mk_lvar("x"), mk_lvar("xs")}, {"x", "xs"}},
      {"freed", {mk_lvar("xs")}, {"xs"}},
      {"even", {mk_lvar("n")}, {"n"}},
  };
  for (const auto& c : cases) {
    auto inst = mk_pred(c.name, c.args);
    auto unf = unfold(reg, c.name, c.args, 4);
    auto v = check_equiv(reg, *inst, *unf, {}, b);
    CHECK_MESSAGE(v.valid, c.name);
  }
}

TEST_CASE("bst predicates") {
  PredRegistry reg = builtin_corpus();
  ModelBounds b;
  b.vmax = 3;
  b.amax = 5;
  // One-node tree at address 0: key 2, children nil.
  Heap h{{0, Cell::value(Value::nat(2))},
         {1, Cell::value(Value::nil())},
         {2, Cell::value(Value::nil())}};
  Substitution th{{"x", Value::nat(0)},
                  {"K", Value::list({Value::nat(2)})}};
  CHECK(sat(reg, th, {{}, h}, *mk_pred("bst_k", {mk_lvar("x"), mk_lvar("K")}), b)
            .holds);
  // Set with the wrong key refuted.
  Substitution bad{{"x", Value::nat(0)}, {"K", Value::list({Value::nat(1)})}};
  CHECK_FALSE(
      sat(reg, bad, {{}, h}, *mk_pred("bst_k", {mk_lvar("x"), mk_lvar("K")}), b)
          .holds);
  // bst_t exposes the node structure.
  Value tree = Value::list({Value::list({Value::nat(0), Value::nat(2)}),
                            Value::nil(), Value::nil()});
  Substitution tht{{"x", Value::nat(0)}, {"t", tree}};
  CHECK(sat(reg, tht, {{}, h}, *mk_pred("bst_t", {mk_lvar("x"), mk_lvar("t")}), b)
            .holds);
  // bst_root relates the root address and the tree.
  CHECK(sat(reg, tht, {{}, {}}, *mk_pred("bst_root", {mk_lvar("x"), mk_lvar("t")}),
            b)
            .holds);
  // Empty tree.
  Substitution the{{"x", Value::nil()}, {"t", Value::nil()}};
  CHECK(sat(reg, the, {{}, {}}, *mk_pred("bst_t", {mk_lvar("x"), mk_lvar("t")}), b)
            .holds);
}
