#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "esl/assertion.hpp"
#include "esl/eval.hpp"
#include "esl/predicates.hpp"
#include "esl/value.hpp"

namespace esl {

// Bounds for the model universe: nondet values, heap addresses, the shape of
// enumerated list values, the string pool, predicate unfolding fuel, and a
// cap on raw enumeration work. Answers derived under a hit cap carry a
// bounded flag rather than being silently truncated.
struct ModelBounds {
  uint64_t vmax = 2;
  uint64_t amax = 5;
  uint64_t list_depth = 1;  // nesting depth of enumerated logical list values
  uint64_t list_len = 3;    // maximum length of enumerated list values
  uint64_t cell_depth = 0;  // nesting depth of enumerated heap-cell values
  std::vector<std::string> string_pool;
  uint64_t unfold_depth = 12;
  uint64_t max_enum = 4000000;
};

struct SatResult {
  bool holds = false;
  // True when an enumeration cap or the unfold fuel was hit before a
  // witness was found; the negative answer is then only bounded.
  bool bounded = false;
};

// Exact satisfiability per the assertion semantics: boolean assertions only
// in the empty heap, cells demand singletons, star splits the heap,
// existentials search the bounded value universe.
SatResult sat(const PredRegistry& reg, const Substitution& theta,
              const State& st, const Assertion& p, const ModelBounds& b);

struct Model {
  Substitution theta;
  State state;
  friend bool operator<(const Model& a, const Model& b) {
    if (a.theta != b.theta) return a.theta < b.theta;
    return a.state < b.state;
  }
  friend bool operator==(const Model& a, const Model& b) {
    return a.theta == b.theta && a.state == b.state;
  }
};

struct ModelSet {
  std::vector<Model> models;  // deduplicated, deterministic order
  bool bounded = false;
  uint64_t work = 0;  // enumeration effort, for diagnostics
};

// Optional cache for repeated enumerations of the same assertion under the
// same bounds; keyed by the printed assertion and the variable domains.
using ModelCache = std::map<std::string, ModelSet>;

// Every (theta, state) within bounds satisfying p, with theta over exactly
// `lvars` and the store over exactly `pvars`. Complete within bounds;
// narrowing may additionally produce models whose values lie outside the
// enumeration universe when the assertion forces them.
ModelSet enumerate_models(const PredRegistry& reg, const Assertion& p,
                          const std::set<std::string>& lvars,
                          const std::set<std::string>& pvars,
                          const ModelBounds& b, ModelCache* cache = nullptr);

struct BoundedVerdict {
  bool valid = false;
  bool bounded = false;
  std::optional<Model> counterexample;
  std::string note;  // direction of an equivalence counterexample etc.
};

// Validity of an implication lhs => rhs over the bounded model space; a
// counterexample is a model of lhs falsifying rhs.
BoundedVerdict check_valid_implication(const PredRegistry& reg,
                                       const Assertion& lhs,
                                       const Assertion& rhs,
                                       const std::set<std::string>& pvars,
                                       const ModelBounds& b,
                                       ModelCache* cache = nullptr);

// Validity of an arbitrary assertion (all bounded models satisfy it).
BoundedVerdict check_valid(const PredRegistry& reg, const Assertion& p,
                           const std::set<std::string>& pvars,
                           const ModelBounds& b);

// Model-set equivalence of p and q; a counterexample is tagged with the
// side that admits it.
BoundedVerdict check_equiv(const PredRegistry& reg, const Assertion& p,
                           const Assertion& q,
                           const std::set<std::string>& pvars,
                           const ModelBounds& b, ModelCache* cache = nullptr);

// Enumeration universes (exposed for the oracle and tests).
std::vector<Value> atom_universe(const ModelBounds& b);
std::vector<Value> value_universe(const ModelBounds& b, uint64_t depth);

}  // namespace esl
