#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "esl/expr.hpp"

namespace esl {

struct Command;
using CommandPtr = std::shared_ptr<const Command>;

// Commands of the while-language: assignment, nondeterministic number
// generation, error raising, control flow, function call, and the memory
// commands lookup, mutate, alloc, free.
struct Command {
  struct Skip {};
  struct Assign {
    std::string target;
    ExprPtr expr;
  };
  struct Nondet {
    std::string target;
  };
  struct Error {
    ExprPtr expr;
  };
  struct If {
    ExprPtr cond;
    CommandPtr then_branch, else_branch;
  };
  struct While {
    ExprPtr cond;
    CommandPtr body;
  };
  struct Seq {
    CommandPtr first, second;
  };
  struct FunCall {
    std::string target;
    std::string fun;
    std::vector<ExprPtr> args;
  };
  struct Lookup {
    std::string target;
    ExprPtr addr;
  };
  struct Mutate {
    ExprPtr addr;
    ExprPtr value;
  };
  struct Alloc {
    std::string target;
    ExprPtr size;
  };
  struct Free {
    ExprPtr addr;
  };

  using Node = std::variant<Skip, Assign, Nondet, Error, If, While, Seq,
                            FunCall, Lookup, Mutate, Alloc, Free>;
  Node node;
};

CommandPtr mk_skip();
CommandPtr mk_assign(std::string x, ExprPtr e);
CommandPtr mk_nondet(std::string x);
CommandPtr mk_error(ExprPtr e);
CommandPtr mk_if(ExprPtr c, CommandPtr t, CommandPtr e);
CommandPtr mk_while(ExprPtr c, CommandPtr body);
CommandPtr mk_seq(CommandPtr a, CommandPtr b);
CommandPtr mk_funcall(std::string y, std::string f, std::vector<ExprPtr> args);
CommandPtr mk_lookup(std::string x, ExprPtr addr);
CommandPtr mk_mutate(ExprPtr addr, ExprPtr val);
CommandPtr mk_alloc(std::string x, ExprPtr size);
CommandPtr mk_free(ExprPtr addr);

// Program variables of a command; modified variables (assignment, lookup,
// alloc, nondet and call targets, through compounds).
std::set<std::string> pv(const Command& c);
std::set<std::string> mods(const Command& c);

struct FunctionDef {
  std::string name;
  std::vector<std::string> params;
  CommandPtr body;
  ExprPtr return_expr;
};

// Finite map from function identifier to definition; keys equal the
// contained names.
class ImplContext {
 public:
  void add(FunctionDef def);
  const FunctionDef* find(const std::string& name) const;
  const std::map<std::string, FunctionDef>& all() const { return funcs_; }
  bool empty() const { return funcs_.empty(); }

 private:
  std::map<std::string, FunctionDef> funcs_;
};

// Checks the function well-formedness conditions: distinct parameters, the
// return expression confined to params and body variables, and the reserved
// names ret/err never bound.
std::vector<std::string> validate_function(const FunctionDef& f);
std::vector<std::string> validate_context(const ImplContext& gamma);

std::string show_command(const Command& c);

}  // namespace esl
