#pragma once

#include <optional>

#include "esl/expr.hpp"
#include "esl/value.hpp"

namespace esl {

// Substitutions: finite maps from logical variables to values.
using Substitution = std::map<std::string, Value>;

// Evaluation of an expression against a store; nullopt is the dedicated
// undefined result, produced when a subterm is ill-typed or a variable is
// absent. Logical variables are resolved through theta when provided and
// are undefined otherwise.
std::optional<Value> eval_expr(const Store& store, const Expr& e);
std::optional<Value> eval_expr(const Substitution& theta, const Store& store,
                               const Expr& e);

// Variable resolution interface for callers with non-map environments.
struct EvalEnv {
  virtual ~EvalEnv() = default;
  virtual const Value* lvar(const std::string& name) const = 0;
  virtual const Value* pvar(const std::string& name) const = 0;
};
std::optional<Value> eval_expr(const EvalEnv& env, const Expr& e);

// The built-in mathematical functions (list reverse, set/tree helpers, the
// BST insertion model). Total on the shapes their callers produce, undefined
// elsewhere.
std::optional<Value> eval_mathfn(const std::string& name,
                                 const std::vector<Value>& args);
bool is_mathfn(const std::string& name);
std::vector<std::string> mathfn_names();

}  // namespace esl
