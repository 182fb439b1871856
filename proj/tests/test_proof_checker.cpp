#include <doctest.h>

#include "esl/json_io.hpp"
#include "esl/proof.hpp"

using namespace esl;

namespace {

std::set<std::string> preds() {
  static const PredRegistry reg = builtin_corpus();
  std::set<std::string> out;
  for (const auto& [name, def] : reg.all()) out.insert(name);
  return out;
}

ProofConfig small_cfg() {
  ProofConfig cfg;
  cfg.bounds.vmax = 1;
  cfg.bounds.amax = 4;
  cfg.imax = 3;
  cfg.alpha_max = 2;
  return cfg;
}

ProofReport run_script(const std::string& text, Mode mode = Mode::ESL) {
  auto script = parse_proof_script(text, preds());
  return check_proof(script, mode, small_cfg());
}

std::string first_failure(const ProofReport& r) {
  for (const auto& s : r.steps) {
    if (!s.ok) return s.where + ": " + s.message;
  }
  return "";
}

const char* kLLenScript = R"(
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
      { exists v, x'. @x == x * x |-> v, x' * list_n(x', n - 1) * alpha == n * @r == nil }
      x := [x + 1];
      { exists v, x'. @x == x' * x |-> v, x' * list_n(x', n - 1) * alpha == n * @r == nil }
      r := LLen(x) [use LLen, inst(x: x', n: n - 1), frame(x |-> v, x' * alpha == n), old nil];
      { exists v, x'. @x == x' * x |-> v, x' * list_n(x', n - 1) * alpha == n * @r == n - 1 }
      r := r + 1;
      { exists v, x'. @x == x' * x |-> v, x' * list_n(x', n - 1) * alpha == n * @r == n }
    }
    { (@x == x * list_n(x, n) * alpha == n * @r == 0 * @x == nil) \/
      (exists v, x'. @x == x' * x |-> v, x' * list_n(x', n - 1) * alpha == n * @r == n) }
    return r
  }
}
)";

}  // namespace

TEST_CASE("a one-assignment function checks end to end") {
  auto report = run_script(R"(
    block {
      fn zero() { r := 0; return r }
      spec zero { pre { emp } ok { @ret == 0 } }
      proof zero {
        { emp * @r == nil }
        r := 0;
        { @r == 0 }
        return r
      }
    }
  )");
  CHECK_MESSAGE(report.all_ok, first_failure(report));
}

TEST_CASE("recursive list-length proof checks in every mode") {
  for (Mode mode : {Mode::ESL, Mode::SL, Mode::ISL}) {
    auto report = run_script(kLLenScript, mode);
    CHECK_MESSAGE(report.all_ok, mode_name(mode), ": ", first_failure(report));
  }
}

TEST_CASE("dropping a conjunct is caught") {
  // The recursive call's post forgets the list; the following assertion
  // then fails the equivalence.
  std::string bad = kLLenScript;
  auto pos = bad.find("* @r == n - 1");
  REQUIRE(pos != std::string::npos);
  bad.replace(pos, 13, "* @r in Nat ");
  auto report = run_script(bad);
  CHECK_FALSE(report.all_ok);
}

TEST_CASE("swapping the cited rule is caught") {
  auto report = run_script(R"(
    block {
      fn zero() { r := 0; return r }
      spec zero { pre { emp } ok { @ret == 0 } }
      proof zero {
        { emp * @r == nil }
        r := 0 [rule assign-err];
        { @r == 0 }
        return r
      }
    }
  )");
  CHECK_FALSE(report.all_ok);
}

TEST_CASE("the conjunction rule is rejected") {
  auto report = run_script(R"(
    block {
      fn zero() { r := 0; return r }
      spec zero { pre { emp } ok { @ret == 0 } }
      proof zero {
        { emp * @r == nil }
        r := 0 [rule conj];
        { @r == 0 }
        return r
      }
    }
  )");
  CHECK_FALSE(report.all_ok);
  CHECK(first_failure(report).find("no sound conjunction") != std::string::npos);
}

TEST_CASE("measure discipline on the self-looping function") {
  // f() { r := f(); return r } accepts its NT specification...
  auto nt_ok = run_script(R"(
    block alpha_max 2 {
      fn f() { r := f(); return r }
      spec f nonterminating measure 0 { pre { emp } }
      proof f nt {
        { emp * alpha == 0 * @r == nil }
        r := f() [use f nt, old nil, frame(alpha == 0)];
        { False }
        return r
      }
    }
  )");
  CHECK_MESSAGE(nt_ok.all_ok, first_failure(nt_ok));

  // ...and rejects the terminating one: no decreasing measure exists.
  auto bad = run_script(R"(
    block alpha_max 2 {
      fn f() { r := f(); return r }
      spec f measure 0 { pre { emp } ok { @ret == 42 } }
      proof f {
        { emp * alpha == 0 * @r == nil }
        r := f() [use f, old nil, frame(alpha == 0)];
        { @r == 42 * alpha == 0 }
        return r
      }
    }
  )");
  CHECK_FALSE(bad.all_ok);
  CHECK(first_failure(bad).find("measure") != std::string::npos);
}

TEST_CASE("SL-only weakening is rejected in ESL mode") {
  const char* script = R"(
    block {
      fn pick(x) { r := x; return r }
      spec pick { pre { @x == x * x in Nat } ok { x in Nat * @ret in Nat } }
      proof pick {
        { @x == x * x in Nat * @r == nil }
        r := x;
        { @x == x * x in Nat * @r == x }
        { @x == x * x in Nat * @r in Nat }
        return r
      }
    }
  )";
  auto sl = run_script(script, Mode::SL);
  CHECK_MESSAGE(sl.all_ok, first_failure(sl));
  auto esl = run_script(script, Mode::ESL);
  CHECK_FALSE(esl.all_ok);
  CHECK(first_failure(esl).find("conseq") != std::string::npos);
  // ISL would need the reverse implication, which also fails here.
  auto isl = run_script(script, Mode::ISL);
  CHECK_FALSE(isl.all_ok);
}

TEST_CASE("error steps accumulate into the error post") {
  auto report = run_script(R"(
    block {
      fn boom(x) {
        if (x = nil) { error("empty") } else { r := x };
        return r
      }
      spec boom {
        pre { @x == x }
        ok  { (not (x == nil)) * @ret == x }
        err { x == nil * @err == ["Error", "empty"] }
      }
      proof boom {
        { @x == x * @r == nil }
        if (x = nil) {
          { @x == x * @r == nil * @x == nil }
          error("empty");
          { False }
        } else {
          { @x == x * @r == nil * @x != nil }
          r := x;
          { @x == x * @r == x * @x != nil }
        }
        { False \/ (@x == x * @r == x * @x != nil) }
        return r
      }
    }
  )");
  CHECK_MESSAGE(report.all_ok, first_failure(report));
}

TEST_CASE("while families: iterative countdown") {
  auto report = run_script(R"(
    block {
      fn burn(n) {
        while (0 < n) { n := n - 1 };
        return n
      }
      spec burn { pre { @n == n * n in Nat } ok { n in Nat * @ret == 0 } }
      proof burn {
        { @n == n * n in Nat }
        { @n == n - 0 * n in Nat * 0 <= n }
        while (0 < n) families (i) {
          P { @n == n - i * n in Nat * i <= n }
          body {
            { (@n == n - i * n in Nat * i <= n) * 0 < @n }
            n := n - 1;
            { @n == n - (i + 1) * n in Nat * i + 1 <= n }
          }
        }
        { not (0 < @n) * (exists i. i in Nat * (@n == n - i * n in Nat * i <= n)) }
        { @n == 0 * n in Nat }
        return n
      }
    }
  )");
  CHECK_MESSAGE(report.all_ok, first_failure(report));
}

TEST_CASE("lemmas are verified once") {
  auto good = run_script("lemma l1 : llseg_n(x, nil, n) <=> list_n(x, n);");
  CHECK(good.all_ok);
  auto bad = run_script("lemma l2 : list_n(x, n) <=> list(x);");
  CHECK_FALSE(bad.all_ok);
}

TEST_CASE("derivations: abstracting the list-length spec") {
  std::string text = std::string(kLLenScript) + R"(
    derive llen_len from LLen {
      adm_exists n;
      adm_equiv { pre { @x == x * list(x) } ok { exists n. list_n(x, n) * @ret == n } };
    }
  )";
  auto report = run_script(text);
  CHECK_MESSAGE(report.all_ok, first_failure(report));

  // an equivalence that loses the ret/length connection must fail
  std::string bad = std::string(kLLenScript) + R"(
    derive llen_bad from LLen {
      adm_exists n;
      adm_equiv { pre { @x == x * list(x) } ok { exists n. list(x) * @ret == n } };
    }
  )";
  auto report2 = run_script(bad);
  CHECK_FALSE(report2.all_ok);
}

TEST_CASE("adm-frame rejects program variables") {
  std::string text = std::string(kLLenScript) + R"(
    derive llen_f from LLen {
      adm_frame(@r == nil);
    }
  )";
  auto report = run_script(text);
  CHECK_FALSE(report.all_ok);
}

TEST_CASE("adm-alpha-equiv needs distinct names") {
  std::string text = std::string(kLLenScript) + R"(
    derive llen_a from LLen {
      adm_alpha_equiv(x: z, n: z);
    }
  )";
  auto report = run_script(text);
  CHECK_FALSE(report.all_ok);
}

TEST_CASE("proof reports serialise") {
  auto report = run_script(kLLenScript);
  Json j = proof_report_to_json(report);
  CHECK(j["all_ok"] == true);
  CHECK(j["steps"].size() > 4);
}
