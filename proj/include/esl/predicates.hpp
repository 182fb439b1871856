#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "esl/assertion.hpp"

namespace esl {

// A user-defined recursive predicate: name, logical-variable parameters, and
// a body assertion, typically a disjunction of guarded cases. Mutual
// recursion is allowed within a registration group.
struct PredDef {
  std::string name;
  std::vector<std::string> params;
  AssertionPtr body;
};

class PredRegistry {
 public:
  // Registers a group of definitions together, so members may refer to one
  // another. Returns diagnostics; on any error the registry is unchanged.
  std::vector<std::string> register_group(const std::vector<PredDef>& defs);
  std::vector<std::string> register_def(const PredDef& def);

  const PredDef* find(const std::string& name) const;
  const std::map<std::string, PredDef>& all() const { return defs_; }

 private:
  std::map<std::string, PredDef> defs_;
};

// Instance body with arguments substituted; recursive calls expanded to
// `depth`, remaining calls kept symbolic.
AssertionPtr unfold(const PredRegistry& reg, const std::string& name,
                    const std::vector<ExprPtr>& args, uint64_t depth);

// The paper's predicate corpus: list predicates at all abstraction levels,
// list segments, listptr, freed, the nat-list variant, even/odd, and the
// binary-search-tree predicates over key sets and over trees.
PredRegistry builtin_corpus();

}  // namespace esl
