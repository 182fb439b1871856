#pragma once

#include <optional>

#include "esl/interp.hpp"
#include "esl/specs.hpp"

namespace esl {

struct OracleConfig {
  ModelBounds bounds;
  Budget budget;
  uint64_t frame_cap = 2;  // maximum number of cells in a quantified frame
};

// The oracle's answer: holds within bounds, or a replayable counterexample
// against the over-approximating or under-approximating clause.
struct Verdict {
  enum class Kind { Holds, OXCounterexample, UXCounterexample };
  Kind kind = Kind::Holds;
  bool bounded = false;
  std::string message;

  Substitution theta;
  Heap frame;
  // OX: a pre-model plus the offending execution result.
  std::optional<State> pre_state;
  std::optional<Outcome> outcome;
  std::optional<State> end_state;
  // UX: the unreachable post-model and its outcome.
  std::optional<State> post_state;

  bool holds() const { return kind == Kind::Holds; }
};

// Frame-preserving over-approximating validity: every execution from a
// framed pre-model lands, frame intact and outcome non-missing, in the
// matching post-condition.
Verdict check_ox_valid(const PredRegistry& reg, const ImplContext& gamma,
                       const Command& c, const Quadruple& q,
                       const OracleConfig& cfg);

// Frame-preserving under-approximating validity: every framed post-model is
// reached exactly by some execution from a pre-model.
Verdict check_ux_valid(const PredRegistry& reg, const ImplContext& gamma,
                       const Command& c, const Quadruple& q,
                       const OracleConfig& cfg);

// Exact validity: the conjunction of the two.
Verdict check_ex_valid(const PredRegistry& reg, const ImplContext& gamma,
                       const Command& c, const Quadruple& q,
                       const OracleConfig& cfg);

// The canonical call command `ret := f(params...)` used to check function
// specifications through the operational semantics, together with the
// quadruple the call rule concludes for it: the old value of ret is pinned
// to nil and the argument bindings persist into the posts, so no
// call-site information is lost.
struct CallSpec {
  CommandPtr cmd;
  Quadruple quad;
};
CallSpec canonical_call_spec(const ExternalSpec& spec);

struct EnvEntry {
  ExternalSpec ext;
  Quadruple internal_candidate;  // supplied, never synthesised
};
using SpecEnv = std::map<std::string, std::vector<EnvEntry>>;

struct EnvReportEntry {
  std::string fun;
  size_t index = 0;
  bool ok = false;
  bool bounded = false;
  std::string message;
};

// Environment validity: every specified function exists, every supplied
// internal candidate internalises its external spec and is valid for the
// function body.
std::vector<EnvReportEntry> check_env_valid(const PredRegistry& reg,
                                            const ImplContext& gamma,
                                            const SpecEnv& env,
                                            const OracleConfig& cfg);

}  // namespace esl
