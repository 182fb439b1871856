#include <doctest.h>

#include "esl/json_io.hpp"
#include "esl/oracle.hpp"
#include "esl/parser.hpp"

using namespace esl;

namespace {

std::set<std::string> preds() {
  static const PredRegistry reg = builtin_corpus();
  std::set<std::string> out;
  for (const auto& [name, def] : reg.all()) out.insert(name);
  return out;
}

AssertionPtr A(const std::string& s) { return parse_assertion(s, preds()); }

OracleConfig fast_cfg() {
  OracleConfig cfg;
  cfg.bounds.vmax = 2;
  cfg.bounds.amax = 2;
  cfg.frame_cap = 1;
  cfg.budget.vmax = 2;
  cfg.budget.amax = 2;
  cfg.budget.max_steps = 400;
  return cfg;
}

const PredRegistry kReg = builtin_corpus();

ImplContext llen_gamma() {
  auto prog = parse_program(R"(
    fn LLen(x) {
      if (x = nil) { r := 0 } else {
        x := [x + 1];
        r := LLen(x);
        r := r + 1
      };
      return r
    }
  )");
  return prog.funcs;
}

}  // namespace

TEST_CASE("external shape checks") {
  SUBCASE("the list-length spec is well shaped") {
    ExternalSpec out;
    auto errs = make_external_spec(
        "LLen", {"x"}, A("@x == x * list_n(x, n)"),
        A("list_n(x, n) * @ret == n"), mk_false(), &out);
    CHECK(errs.empty());
    CHECK(out.param_lvars == std::vector<std::string>{"x"});
    CHECK(show_assertion(*out.pre_rest).find("list_n") != std::string::npos);
  }
  SUBCASE("pre mentioning a local is rejected") {
    ExternalSpec out;
    auto errs = make_external_spec("f", {"x"}, A("@x == x * @r == nil"),
                                   mk_false(), mk_false(), &out);
    REQUIRE_FALSE(errs.empty());
    CHECK(errs.front().find("@r") != std::string::npos);
  }
  SUBCASE("success post mentioning a parameter is rejected") {
    ExternalSpec out;
    auto errs = make_external_spec("f", {"x"}, A("@x == x"), A("@x == 1"),
                                   mk_false(), &out);
    REQUIRE_FALSE(errs.empty());
  }
}

TEST_CASE("internalisation of a simple increment function") {
  auto prog = parse_program("fn inc(x) { r := x + 1; return r }");
  const FunctionDef& def = *prog.funcs.find("inc");
  ExternalSpec ext;
  REQUIRE(make_external_spec("inc", {"x"}, A("@x == x * x in Nat"),
                             A("x in Nat * @ret == x + 1"), mk_false(), &ext)
              .empty());
  ModelBounds b;
  b.vmax = 2;
  b.amax = 1;
  SUBCASE("the straightforward candidate holds") {
    Quadruple cand{A("@x == x * x in Nat * @r == nil"),
                   A("@x == x * x in Nat * @r == x + 1"), mk_false()};
    auto r = check_internalisation(kReg, def, ext, cand, Mode::ESL, b);
    CHECK_MESSAGE(r.ok, r.message);
  }
  SUBCASE("dropping the result conjunct breaks the equivalence") {
    Quadruple cand{A("@x == x * x in Nat * @r == nil"),
                   A("@x == x * x in Nat * @r in Nat"), mk_false()};
    auto r = check_internalisation(kReg, def, ext, cand, Mode::ESL, b);
    CHECK_FALSE(r.ok);
  }
  SUBCASE("a candidate pre without nil-locals is rejected") {
    Quadruple cand{A("@x == x * x in Nat"),
                   A("@x == x * x in Nat * @r == x + 1"), mk_false()};
    auto r = check_internalisation(kReg, def, ext, cand, Mode::ESL, b);
    CHECK_FALSE(r.ok);
  }
}

TEST_CASE("illustrative exactness demo") {
  // if (x > 0) y := 42 else y := 21, from x in Nat
  auto c = parse_command("if (x > 0) { y := 42 } else { y := 21 }");
  OracleConfig cfg = fast_cfg();
  ImplContext gamma;
  auto pre = A("@x in Nat");

  SUBCASE("the exact post is EX-valid") {
    Quadruple q{pre, A("(0 < @x /\\ @y == 42) \\/ (@x == 0 /\\ @y == 21)"),
                mk_false()};
    auto v = check_ex_valid(kReg, gamma, *c, q, cfg);
    CHECK(v.holds());
  }
  SUBCASE("the SL-weakened post fails UX with a concrete witness") {
    Quadruple q{pre, A("@x in Nat /\\ 0 < @y"), mk_false()};
    auto ox = check_ox_valid(kReg, gamma, *c, q, cfg);
    CHECK(ox.holds());
    auto ux = check_ux_valid(kReg, gamma, *c, q, cfg);
    REQUIRE(ux.kind == Verdict::Kind::UXCounterexample);
    REQUIRE(ux.post_state);
    // the witness picks a y no execution produces
    uint64_t y = ux.post_state->store.at("y").as_nat();
    CHECK(y != 42);
    CHECK(y != 21);
  }
  SUBCASE("the ISL path-cut post fails OX") {
    Quadruple q{pre, A("0 < @x /\\ @y == 42"), mk_false()};
    auto ox = check_ox_valid(kReg, gamma, *c, q, cfg);
    REQUIRE(ox.kind == Verdict::Kind::OXCounterexample);
    // replay: the recorded execution escapes the post-condition
    REQUIRE(ox.pre_state);
    REQUIRE(ox.end_state);
    State start{ox.pre_state->store, heap_union(ox.pre_state->heap, ox.frame)};
    auto res = exec_all(gamma, start, *c, cfg.budget);
    CHECK(res.results.count({*ox.outcome, *ox.end_state}) == 1);
    CHECK_FALSE(
        sat(kReg, ox.theta,
            State{ox.end_state->store, heap_minus(ox.end_state->heap, ox.frame)},
            *q.post_ok, cfg.bounds)
            .holds);
    // and UX of the cut triple holds: it is ISL-style
    auto ux = check_ux_valid(kReg, gamma, *c, q, cfg);
    CHECK(ux.holds());
  }
}

TEST_CASE("abstract list-length spec is OX-valid but not UX-valid") {
  ImplContext gamma = llen_gamma();
  OracleConfig cfg = fast_cfg();
  cfg.bounds.amax = 3;
  cfg.budget.amax = 3;
  cfg.frame_cap = 0;
  ExternalSpec ext;
  REQUIRE(make_external_spec("LLen", {"x"}, A("@x == x * list(x)"),
                             A("exists n. list(x) * @ret == n"), mk_false(),
                             &ext)
              .empty());
  auto call = canonical_call_spec(ext);
  auto ox = check_ox_valid(kReg, gamma, *call.cmd, call.quad, cfg);
  CHECK(ox.holds());
  auto ux = check_ux_valid(kReg, gamma, *call.cmd, call.quad, cfg);
  REQUIRE(ux.kind == Verdict::Kind::UXCounterexample);
  // The witness disconnects ret from the actual list length; replay shows
  // no execution from any pre-model reaches it.
  REQUIRE(ux.post_state);
  CHECK(ux.post_state->store.count("ret"));
}

TEST_CASE("exact list-length spec holds at small bounds") {
  ImplContext gamma = llen_gamma();
  OracleConfig cfg = fast_cfg();
  cfg.bounds.amax = 3;
  cfg.budget.amax = 3;
  cfg.frame_cap = 0;
  ExternalSpec ext;
  REQUIRE(make_external_spec("LLen", {"x"}, A("@x == x * list_n(x, n)"),
                             A("list_n(x, n) * @ret == n"), mk_false(), &ext)
              .empty());
  auto call = canonical_call_spec(ext);
  auto v = check_ex_valid(kReg, gamma, *call.cmd, call.quad, cfg);
  CHECK_MESSAGE(v.holds(), v.message);
}

TEST_CASE("missing resources force OX counterexamples") {
  auto c = parse_command("x := [0]");
  OracleConfig cfg = fast_cfg();
  Quadruple q{A("emp"), A("True"), A("True")};
  auto v = check_ox_valid(kReg, {}, *c, q, cfg);
  REQUIRE(v.kind == Verdict::Kind::OXCounterexample);
  CHECK(v.message.find("missing") != std::string::npos);
}

TEST_CASE("non-termination satisfies the all-False quadruple") {
  auto c = parse_command("while (true) { skip }");
  OracleConfig cfg = fast_cfg();
  Quadruple q{A("emp"), mk_false(), mk_false()};
  auto v = check_ex_valid(kReg, {}, *c, q, cfg);
  CHECK(v.holds());
  CHECK(v.bounded);  // divergence is only established within the budget
}

TEST_CASE("frame preservation is part of OX validity") {
  // A command whose footprint is fine but which writes outside it when the
  // frame provides the cell: mutating address 0 against an emp pre.
  auto c = parse_command("[0] := 1");
  OracleConfig cfg = fast_cfg();
  Quadruple q{A("emp"), A("True"), A("True")};
  auto v = check_ox_valid(kReg, {}, *c, q, cfg);
  // With the empty frame the mutation is a miss; with a frame holding 0 the
  // execution would overwrite it. Either way OX fails.
  CHECK(v.kind == Verdict::Kind::OXCounterexample);
}

TEST_CASE("environment validity") {
  OracleConfig cfg = fast_cfg();
  SUBCASE("the empty environment is valid") {
    auto report = check_env_valid(kReg, {}, {}, cfg);
    CHECK(report.empty());
  }
  SUBCASE("a correct simple function validates") {
    auto prog = parse_program("fn inc(x) { r := x + 1; return r }");
    ExternalSpec ext;
    REQUIRE(make_external_spec("inc", {"x"}, A("@x == x * x in Nat"),
                               A("x in Nat * @ret == x + 1"), mk_false(), &ext)
                .empty());
    SpecEnv env;
    env["inc"].push_back(
        {ext, Quadruple{A("@x == x * x in Nat * @r == nil"),
                        A("@x == x * x in Nat * @r == x + 1"), mk_false()}});
    auto report = check_env_valid(kReg, prog.funcs, env, cfg);
    REQUIRE(report.size() == 1);
    CHECK_MESSAGE(report[0].ok, report[0].message);
  }
  SUBCASE("a function without an implementation is flagged") {
    ExternalSpec ext;
    REQUIRE(make_external_spec("ghost", {}, A("emp"), A("@ret == nil"),
                               mk_false(), &ext)
                .empty());
    SpecEnv env;
    env["ghost"].push_back({ext, Quadruple{A("emp"), A("emp"), mk_false()}});
    auto report = check_env_valid(kReg, {}, env, cfg);
    REQUIRE(report.size() == 1);
    CHECK_FALSE(report[0].ok);
  }
}

TEST_CASE("verdicts serialise to JSON") {
  auto c = parse_command("if (x > 0) { y := 42 } else { y := 21 }");
  OracleConfig cfg = fast_cfg();
  Quadruple q{A("@x in Nat"), A("0 < @x /\\ @y == 42"), mk_false()};
  auto v = check_ox_valid(kReg, {}, *c, q, cfg);
  Json j = verdict_to_json(v);
  CHECK(j["verdict"] == "ox-counterexample");
  CHECK(j.contains("pre_state"));
  // byte-identical dumps for identical inputs
  auto v2 = check_ox_valid(kReg, {}, *c, q, cfg);
  CHECK(verdict_to_json(v2).dump() == j.dump());
}
