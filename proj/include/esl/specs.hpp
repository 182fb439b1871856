#pragma once

#include <optional>
#include <string>
#include <vector>

#include "esl/assertion.hpp"
#include "esl/sat.hpp"
#include "esl/syntax.hpp"

namespace esl {

// Pre-condition, success post-condition, faulting post-condition.
struct Quadruple {
  AssertionPtr pre, post_ok, post_err;
};

// Consequence discipline: ESL uses equivalence, SL forward implication, ISL
// backward implication.
enum class Mode { ESL, SL, ISL };
const char* mode_name(Mode m);

// An external function specification: the pre-condition pins each parameter
// to a distinct logical variable and otherwise mentions no program
// variables; the posts mention at most ret (success) or err (fault).
struct ExternalSpec {
  std::string fun;
  std::vector<std::string> params;       // program variables
  std::vector<std::string> param_lvars;  // their logical mirrors, in order
  AssertionPtr pre;                      // full pre, including the bindings
  AssertionPtr pre_rest;                 // the pre without the bindings
  AssertionPtr post_ok, post_err;
};

// Validates the external shape and splits the parameter bindings off the
// pre-condition. Diagnostics are returned; on success `out` is filled.
std::vector<std::string> make_external_spec(
    const std::string& fun, const std::vector<std::string>& params,
    const AssertionPtr& pre, const AssertionPtr& post_ok,
    const AssertionPtr& post_err, ExternalSpec* out);

struct CheckOutcome {
  bool ok = false;
  bool bounded = false;
  std::string message;
  std::optional<Model> counterexample;
};

// The internalisation conditions relating an external specification to a
// candidate internal one for the body of f: the internal pre extends the
// external one with nil-initialised locals; the return expression evaluates
// in every success post-model; and the external posts are equivalent to the
// internal ones with parameters and locals replaced by fresh existentially
// quantified logical variables.
CheckOutcome check_internalisation(const PredRegistry& reg,
                                   const FunctionDef& def,
                                   const ExternalSpec& ext,
                                   const Quadruple& candidate, Mode mode,
                                   const ModelBounds& b);

// Direction-aware assertion comparison used for consequence obligations:
// ESL checks equivalence, SL derived => declared, ISL declared => derived.
CheckOutcome mode_compare(const PredRegistry& reg, const AssertionPtr& derived,
                          const AssertionPtr& declared, Mode mode,
                          const std::set<std::string>& pvars,
                          const ModelBounds& b, ModelCache* cache = nullptr);

}  // namespace esl
