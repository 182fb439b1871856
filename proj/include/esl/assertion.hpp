#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "esl/expr.hpp"

namespace esl {

struct Assertion;
using AssertionPtr = std::shared_ptr<const Assertion>;

// The assertion language: boolean assertions (satisfiable only in the empty
// heap), falsity, implication, existentials over logical variables, empty
// heap, positive and negative (freed) cells, separating conjunction and its
// iteration, and named predicate instances resolved against a registry.
// Disjunction, conjunction and True are derived forms over Implies/False.
struct Assertion {
  struct BoolA {
    ExprPtr e;
  };
  struct FalseA {};
  struct Implies {
    AssertionPtr lhs, rhs;
  };
  struct Exists {
    std::string var;  // logical variable
    AssertionPtr body;
  };
  struct Emp {};
  struct Cell {
    ExprPtr addr, val;
  };
  struct FreedCell {
    ExprPtr addr;
  };
  struct Star {
    AssertionPtr lhs, rhs;
  };
  struct IterStar {
    std::string var;  // not free in the bounds
    ExprPtr lo, hi;
    AssertionPtr body;
  };
  struct Pred {
    std::string name;
    std::vector<ExprPtr> args;
  };

  using Node = std::variant<BoolA, FalseA, Implies, Exists, Emp, Cell,
                            FreedCell, Star, IterStar, Pred>;
  Node node;
};

AssertionPtr mk_boolassert(ExprPtr e);
AssertionPtr mk_false();
AssertionPtr mk_implies(AssertionPtr a, AssertionPtr b);
AssertionPtr mk_exists(std::string var, AssertionPtr body);
AssertionPtr mk_exists_many(const std::vector<std::string>& vars, AssertionPtr body);
AssertionPtr mk_emp();
AssertionPtr mk_cell(ExprPtr addr, ExprPtr val);
AssertionPtr mk_freed(ExprPtr addr);
AssertionPtr mk_star(AssertionPtr a, AssertionPtr b);
AssertionPtr mk_star_many(std::vector<AssertionPtr> parts);  // empty -> emp
AssertionPtr mk_iterstar(std::string var, ExprPtr lo, ExprPtr hi, AssertionPtr body);
AssertionPtr mk_pred(std::string name, std::vector<ExprPtr> args);

// Derived constructors, desugared over Implies/False.
AssertionPtr mk_or(AssertionPtr a, AssertionPtr b);
AssertionPtr mk_or_many(const std::vector<AssertionPtr>& disjuncts);  // empty -> False
AssertionPtr mk_and(AssertionPtr a, AssertionPtr b);
AssertionPtr mk_trueassert();

// Recognisers for the derived shapes.
bool match_or(const Assertion& a, AssertionPtr* lhs, AssertionPtr* rhs);
bool match_and(const Assertion& a, AssertionPtr* lhs, AssertionPtr* rhs);
bool match_true(const Assertion& a);
bool is_false(const Assertion& a);

struct AssertVars {
  std::set<std::string> lvars;
  std::set<std::string> pvars;
};
AssertVars fv_assertion(const Assertion& a);  // free variables

// Capture-avoiding substitution; existential binders are renamed as needed.
AssertionPtr subst_assertion(const AssertionPtr& a, const VarSubst& sub);

// A name based on `base` not contained in `avoid`.
std::string fresh_name(const std::string& base, const std::set<std::string>& avoid);

bool assertion_equal(const Assertion& a, const Assertion& b);

std::string show_assertion(const Assertion& a);

}  // namespace esl
