#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "esl/assertion.hpp"
#include "esl/predicates.hpp"
#include "esl/syntax.hpp"

namespace esl {

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line)
      : std::runtime_error("parse error at line " + std::to_string(line) +
                           ": " + msg),
        line(line) {}
  int line;
};

// A parsed program file: function definitions plus an optional main command.
struct Program {
  ImplContext funcs;
  CommandPtr main;  // may be null
};

Program parse_program(const std::string& text);

// Expressions: in program syntax plain identifiers are program variables; in
// logic syntax plain identifiers are logical variables and @x is a program
// variable.
ExprPtr parse_pexpr(const std::string& text);
ExprPtr parse_lexpr(const std::string& text);
CommandPtr parse_command(const std::string& text);

// Assertions resolve predicate instances against the given name set.
AssertionPtr parse_assertion(const std::string& text,
                             const std::set<std::string>& pred_names);

// Predicate definition files: `pred name(params) := assertion;` items.
std::vector<PredDef> parse_pred_file(const std::string& text,
                                     const std::set<std::string>& known);

// Specification files.
struct SpecItem {
  std::string name;
  std::string target_fun;  // empty when target_cmd is used
  CommandPtr target_cmd;   // null when a function is named
  AssertionPtr pre, post_ok, post_err;
};
struct SpecFile {
  std::vector<PredDef> preds;
  std::vector<SpecItem> specs;
};
SpecFile parse_spec_file(const std::string& text,
                         const std::set<std::string>& builtin_preds);

}  // namespace esl
