#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "esl/value.hpp"

namespace esl {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class UnOp { Not, Len };
enum class BinOp { Add, Sub, Eq, Lt, And, Cons, Concat, Mod };

// Carrier sets for membership tests. Membership evaluates to a boolean and
// never to undefined, so `E in Val` is false exactly when E does not evaluate.
enum class Carrier { Val, Nat, Bool, Str, List };

// Logical expressions: program expressions extended with logical variables.
// A program expression is an Expr containing no LVar node.
struct Expr {
  struct Const {
    Value v;
  };
  struct PVar {
    std::string name;
  };
  struct LVar {
    std::string name;
  };
  struct Unary {
    UnOp op;
    ExprPtr arg;
  };
  struct Binary {
    BinOp op;
    ExprPtr lhs, rhs;
  };
  struct ListLit {
    std::vector<ExprPtr> elems;
  };
  struct InSet {
    ExprPtr arg;
    Carrier set;
  };
  // Application of a registered mathematical function (rev, min, height, ...).
  struct MathApp {
    std::string name;
    std::vector<ExprPtr> args;
  };

  using Node =
      std::variant<Const, PVar, LVar, Unary, Binary, ListLit, InSet, MathApp>;
  Node node;
};

ExprPtr mk_const(Value v);
ExprPtr mk_nat(uint64_t n);
ExprPtr mk_bool(bool b);
ExprPtr mk_str(std::string s);
ExprPtr mk_nil();
ExprPtr mk_pvar(std::string name);
ExprPtr mk_lvar(std::string name);
ExprPtr mk_unary(UnOp op, ExprPtr e);
ExprPtr mk_binary(BinOp op, ExprPtr a, ExprPtr b);
ExprPtr mk_list(std::vector<ExprPtr> elems);
ExprPtr mk_inset(ExprPtr e, Carrier c);
ExprPtr mk_mathapp(std::string name, std::vector<ExprPtr> args);

ExprPtr mk_eq(ExprPtr a, ExprPtr b);
ExprPtr mk_add(ExprPtr a, ExprPtr b);
ExprPtr mk_sub(ExprPtr a, ExprPtr b);
ExprPtr mk_not(ExprPtr e);

bool expr_equal(const Expr& a, const Expr& b);

// Syntactic variable sets.
std::set<std::string> pv(const Expr& e);
std::set<std::string> lv(const Expr& e);
bool is_program_expr(const Expr& e);  // no logical variables

// Substitution of variables by expressions, simultaneous.
struct VarSubst {
  std::map<std::string, ExprPtr> pvars;
  std::map<std::string, ExprPtr> lvars;
};
ExprPtr subst_expr(const ExprPtr& e, const VarSubst& sub);

}  // namespace esl
