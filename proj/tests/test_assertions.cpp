#include <doctest.h>

#include "esl/sat.hpp"
#include "support/gen.hpp"
#include "support/ref_sat.hpp"

using namespace esl;

namespace {
const PredRegistry kEmptyReg;

ModelBounds tiny() {
  ModelBounds b;
  b.vmax = 1;
  b.amax = 2;
  b.list_len = 2;
  return b;
}

bool sat1(const Substitution& th, const State& st, const AssertionPtr& p,
          const ModelBounds& b = {}) {
  return sat(kEmptyReg, th, st, *p, b).holds;
}
}  // namespace

TEST_CASE("boolean assertions demand the empty heap") {
  State empty{{}, {}};
  CHECK(sat1({}, empty, mk_emp()));
  auto five = mk_boolassert(mk_eq(mk_nat(5), mk_nat(5)));
  CHECK(sat1({}, empty, five));
  State one{{}, {{1, Cell::value(Value::nat(7))}}};
  CHECK_FALSE(sat1({}, one, five));
  CHECK_FALSE(sat1({}, one, mk_emp()));
}

TEST_CASE("cells demand singletons") {
  State st{{}, {{1, Cell::value(Value::nat(7))}}};
  CHECK(sat1({{"x", Value::nat(1)}}, st, mk_cell(mk_lvar("x"), mk_nat(7))));
  CHECK_FALSE(sat1({{"x", Value::nat(2)}}, st, mk_cell(mk_lvar("x"), mk_nat(7))));
  CHECK_FALSE(sat1({{"x", Value::nat(1)}}, st, mk_cell(mk_lvar("x"), mk_nat(8))));
  State freed{{}, {{1, Cell::freed_cell()}}};
  CHECK(sat1({}, freed, mk_freed(mk_nat(1))));
  CHECK_FALSE(sat1({}, freed, mk_cell(mk_nat(1), mk_nat(7))));
}

TEST_CASE("star splits and derived connectives") {
  Heap h{{1, Cell::value(Value::nat(7))}, {2, Cell::value(Value::nat(8))}};
  State st{{}, h};
  auto p = mk_star(mk_cell(mk_nat(2), mk_nat(8)), mk_cell(mk_nat(1), mk_nat(7)));
  CHECK(sat1({}, st, p));
  // True absorbs leftovers
  CHECK(sat1({}, st, mk_star(mk_cell(mk_nat(1), mk_nat(7)), mk_trueassert())));
  CHECK_FALSE(sat1({}, st, mk_cell(mk_nat(1), mk_nat(7))));
  // disjunction
  auto d = mk_or(mk_cell(mk_nat(9), mk_nat(0)),
                 mk_star(mk_cell(mk_nat(1), mk_nat(7)), mk_trueassert()));
  CHECK(sat1({}, st, d));
}

TEST_CASE("existentials bind through cells and equalities") {
  Heap h{{3, Cell::value(Value::nat(7))}, {4, Cell::value(Value::nil())}};
  State st{{}, h};
  // exists a, v. a |-> v, nil * v = 7
  auto p = mk_exists_many(
      {"a", "v"},
      mk_star_many({mk_cell(mk_lvar("a"), mk_lvar("v")),
                    mk_cell(mk_add(mk_lvar("a"), mk_nat(1)), mk_nil()),
                    mk_boolassert(mk_eq(mk_lvar("v"), mk_nat(7)))}));
  CHECK(sat1({}, st, p));
  auto bad = mk_exists_many(
      {"a", "v"},
      mk_star_many({mk_cell(mk_lvar("a"), mk_lvar("v")),
                    mk_cell(mk_add(mk_lvar("a"), mk_nat(1)), mk_nil()),
                    mk_boolassert(mk_eq(mk_lvar("v"), mk_nat(8)))}));
  CHECK_FALSE(sat1({}, st, bad));
}

TEST_CASE("enumerate_models basics") {
  ModelBounds b = tiny();
  SUBCASE("emp yields exactly the empty heap") {
    auto ms = enumerate_models(kEmptyReg, *mk_emp(), {}, {}, b);
    REQUIRE(ms.models.size() == 1);
    CHECK(ms.models[0].state.heap.empty());
  }
  SUBCASE("negative cell with amax=1") {
    ModelBounds b1 = tiny();
    b1.amax = 1;
    auto ms = enumerate_models(kEmptyReg, *mk_exists("a", mk_freed(mk_lvar("a"))),
                               {}, {}, b1);
    REQUIRE(ms.models.size() == 2);
    for (const auto& m : ms.models) {
      REQUIRE(m.state.heap.size() == 1);
      CHECK(m.state.heap.begin()->second.freed());
    }
  }
  SUBCASE("equations force values outside the universe") {
    auto ms = enumerate_models(kEmptyReg,
                               *mk_boolassert(mk_eq(mk_lvar("n"), mk_nat(42))),
                               {"n"}, {}, b);
    REQUIRE(ms.models.size() == 1);
    CHECK(ms.models[0].theta.at("n") == Value::nat(42));
  }
}

TEST_CASE("substitution lemma on enumerated models") {
  // sat(theta, st, P[v/x]) <=> sat(theta[x->v], st, P)
  ModelBounds b = tiny();
  auto p = mk_star(mk_cell(mk_lvar("x"), mk_lvar("y")),
                   mk_boolassert(mk_binary(BinOp::Lt, mk_lvar("y"), mk_nat(2))));
  auto ms = enumerate_models(kEmptyReg, *p, {"x", "y"}, {}, b);
  REQUIRE(ms.models.size() > 0);
  for (const auto& m : ms.models) {
    Value v = m.theta.at("x");
    VarSubst sub;
    sub.lvars.emplace("x", mk_const(v));
    auto p2 = subst_assertion(p, sub);
    Substitution reduced = m.theta;
    reduced.erase("x");
    CHECK(sat(kEmptyReg, reduced, m.state, *p2, b).holds);
    CHECK(sat(kEmptyReg, m.theta, m.state, *p, b).holds);
  }
}

TEST_CASE("star commutes at the model level") {
  ModelBounds b = tiny();
  auto l = mk_star(mk_cell(mk_lvar("x"), mk_nat(0)), mk_freed(mk_lvar("y")));
  auto r = mk_star(mk_freed(mk_lvar("y")), mk_cell(mk_lvar("x"), mk_nat(0)));
  auto v = check_equiv(kEmptyReg, *l, *r, {}, b);
  CHECK(v.valid);
}

TEST_CASE("check_valid") {
  ModelBounds b = tiny();
  SUBCASE("emp => emp") {
    auto v = check_valid(kEmptyReg, *mk_implies(mk_emp(), mk_emp()), {}, b);
    CHECK(v.valid);
  }
  SUBCASE("x |-> 1 => emp has a counterexample") {
    auto v = check_valid(
        kEmptyReg, *mk_implies(mk_exists("a", mk_cell(mk_lvar("a"), mk_nat(1))), mk_emp()),
        {}, b);
    REQUIRE_FALSE(v.valid);
    REQUIRE(v.counterexample.has_value());
    CHECK(v.counterexample->state.heap.size() == 1);
  }
  SUBCASE("pure implication over program variables") {
    // @x = 5 => @x in Nat
    auto lhs = mk_boolassert(mk_eq(mk_pvar("x"), mk_nat(5)));
    auto rhs = mk_star(mk_boolassert(mk_inset(mk_pvar("x"), Carrier::Nat)),
                       mk_trueassert());
    auto v = check_valid_implication(kEmptyReg, *lhs, *rhs, {"x"}, b);
    CHECK(v.valid);
  }
}

TEST_CASE("check_equiv counterexamples carry a direction") {
  ModelBounds b = tiny();
  auto one = mk_cell(mk_nat(1), mk_nat(1));
  auto two = mk_cell(mk_nat(1), mk_nat(2));
  auto v = check_equiv(kEmptyReg, *one, *two, {}, b);
  REQUIRE_FALSE(v.valid);
  CHECK(v.counterexample.has_value());
  CHECK((v.note == "left-to-right" || v.note == "right-to-left"));
}

TEST_CASE("production enumerator agrees with the naive reference") {
  ModelBounds b;
  b.vmax = 1;
  b.amax = 1;
  b.list_len = 1;
  b.list_depth = 1;
  std::vector<AssertionPtr> cases = {
      mk_emp(),
      mk_cell(mk_lvar("x"), mk_lvar("y")),
      mk_star(mk_freed(mk_lvar("x")), mk_boolassert(mk_eq(mk_lvar("y"), mk_nil()))),
      mk_or(mk_emp(), mk_cell(mk_nat(0), mk_lvar("y"))),
      mk_exists("z", mk_star(mk_cell(mk_lvar("x"), mk_lvar("z")),
                             mk_boolassert(mk_inset(mk_lvar("z"), Carrier::Nat)))),
      mk_implies(mk_boolassert(mk_eq(mk_lvar("x"), mk_nat(1))), mk_emp()),
  };
  for (const auto& p : cases) {
    auto fv = fv_assertion(*p);
    std::vector<std::string> lvars(fv.lvars.begin(), fv.lvars.end());
    auto ref = reftest::ref_enumerate(kEmptyReg, *p, lvars, {}, b);
    auto prod = enumerate_models(kEmptyReg, *p, fv.lvars, {}, b);
    // restrict production models to the reference's bounded space
    std::set<Model> prod_set(prod.models.begin(), prod.models.end());
    CHECK_MESSAGE(ref.models == prod_set, show_assertion(*p));
  }
}

TEST_CASE("iterated star") {
  // bigstar i in [0,3). (a+i |-> nil)
  auto p = mk_iterstar("i", mk_nat(0), mk_nat(3),
                       mk_cell(mk_add(mk_lvar("a"), mk_lvar("i")), mk_nil()));
  Heap h{{2, Cell::value(Value::nil())},
         {3, Cell::value(Value::nil())},
         {4, Cell::value(Value::nil())}};
  CHECK(sat(kEmptyReg, {{"a", Value::nat(2)}}, {{}, h}, *p, {}).holds);
  Heap h2 = h;
  h2.erase(4);
  CHECK_FALSE(sat(kEmptyReg, {{"a", Value::nat(2)}}, {{}, h2}, *p, {}).holds);
  // empty range over the empty heap
  auto p0 = mk_iterstar("i", mk_nat(1), mk_nat(1), mk_cell(mk_lvar("i"), mk_nil()));
  CHECK(sat(kEmptyReg, {}, {{}, {}}, *p0, {}).holds);
}
