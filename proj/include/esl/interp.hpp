#pragma once

#include <cstdint>
#include <set>
#include <utility>
#include <variant>

#include "esl/syntax.hpp"
#include "esl/value.hpp"

namespace esl {

enum class Outcome { Ok, Err, Miss };
const char* outcome_name(Outcome o);

// Enumeration bounds: derivation size, the nondet draw range {0..vmax}, and
// the alloc base range {0..amax}.
struct Budget {
  uint64_t max_steps = 10000;
  uint64_t vmax = 2;
  uint64_t amax = 5;
};

struct ExecResult {
  std::set<std::pair<Outcome, State>> results;
  bool exhausted = false;  // some branch was cut by max_steps
};

// All (outcome, state) pairs derivable in the big-step semantics with
// nondet and alloc choices enumerated within the budget. Total on valid
// inputs: the semantics does not get stuck.
ExecResult exec_all(const ImplContext& gamma, const State& st,
                    const Command& c, const Budget& b);

struct Diverged {};
using SeededResult = std::variant<std::pair<Outcome, State>, Diverged>;

// One deterministic run, resolving nondet from a seeded stream and alloc to
// the least fresh base.
SeededResult exec_seeded(const ImplContext& gamma, const State& st,
                         const Command& c, const Budget& b, uint64_t seed);

// The reserved error variable.
inline const std::string kErrVar = "err";
inline const std::string kRetVar = "ret";

// Error payload constructors, matching the semantics' error values.
Value err_expr_eval(const Expr& e);
Value err_type(const Expr& e, const Value& v, const std::string& expected);
Value err_missing_cell(const Expr& e, Addr n);
Value err_use_after_free(const Expr& e, Addr n);
Value err_error(const Value& v);
Value err_no_func(const std::string& f);
Value err_param_count(const std::string& f);

}  // namespace esl
