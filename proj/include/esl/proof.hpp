#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "esl/oracle.hpp"
#include "esl/predicates.hpp"
#include "esl/specs.hpp"

namespace esl {

enum class SpecKind { Terminating, NT };

// A declared external specification with its termination measure, a
// natural-number-valued logical expression over the pre-condition variables.
struct ExternalSpecDecl {
  std::string fun;
  SpecKind kind = SpecKind::Terminating;
  ExprPtr measure;  // null for non-recursive declarations
  AssertionPtr pre, post_ok, post_err;
};

struct CallHints {
  std::string use;  // cited specification: function or derived name
  bool use_nt = false;
  std::map<std::string, ExprPtr> inst;  // spec lvar -> caller-side expression
  AssertionPtr frame;                   // null means emp
  ExprPtr old_target;                   // previous value of the target; default nil
};

struct ProofElem;
using ProofBody = std::vector<ProofElem>;

struct WhileFamilies {
  std::string index_var;  // the meta-index, instantiated 0..Imax
  AssertionPtr p_family;
  AssertionPtr q_family;  // error family; null means False
  ProofBody body;
};

struct ProofElem {
  enum class Kind { Assert, Basic, IfElse, WhileLoop, Call, Return };
  Kind kind;
  int line = 0;

  AssertionPtr assert_;  // Assert

  CommandPtr cmd;    // Basic and Call (the command itself)
  std::string rule;  // optional explicit rule annotation for Basic

  ExprPtr cond;  // IfElse / WhileLoop guard
  std::shared_ptr<ProofBody> then_body, else_body;
  std::shared_ptr<WhileFamilies> families;

  CallHints call;

  ExprPtr ret_expr;  // Return
};

struct ProofDecl {
  std::string fun;
  bool nt = false;  // proves the NT specification
  // Case proofs split the spec by pre-condition disjunct and are joined by
  // the admissible disjunction; a single unnamed case covers the whole spec.
  AssertionPtr case_pre, case_ok, case_err;  // null for the whole spec
  ProofBody body;
  int line = 0;
};

struct AdmStep {
  enum class Kind { Exists, Frame, Equiv, Disj, AlphaEquiv };
  Kind kind;
  std::string var;                       // Exists
  AssertionPtr frame;                    // Frame
  AssertionPtr eq_pre, eq_ok, eq_err;    // Equiv target quadruple
  std::string other;                     // Disj partner (derived name)
  std::vector<std::pair<std::string, std::string>> renames;  // AlphaEquiv
  int line = 0;
};

struct DeriveDecl {
  std::string name;
  std::string from;  // function or earlier derived name
  bool from_nt = false;
  std::vector<AdmStep> steps;
  int line = 0;
};

struct EnvBlock {
  std::vector<FunctionDef> funcs;
  std::vector<ExternalSpecDecl> specs;
  std::vector<ProofDecl> proofs;
  std::optional<uint64_t> alpha_max;  // overrides the configured default
  int line = 0;
};

struct LemmaDecl {
  std::string name;
  AssertionPtr lhs, rhs;
  int line = 0;
};

struct ProofScript {
  std::vector<PredDef> preds;
  using Item = std::variant<LemmaDecl, DeriveDecl, EnvBlock>;
  std::vector<Item> items;
};

ProofScript parse_proof_script(const std::string& text,
                               const std::set<std::string>& builtin_preds);

struct ProofConfig {
  ModelBounds bounds;
  uint64_t imax = 4;       // while-family instantiation bound
  uint64_t alpha_max = 3;  // measure instantiation bound
};

struct StepReport {
  int line = 0;
  std::string where;
  bool ok = true;
  bool bounded = false;
  std::string message;
};

struct ProofReport {
  std::vector<StepReport> steps;
  bool all_ok = true;
  bool any_bounded = false;
  void add(StepReport r) {
    all_ok = all_ok && r.ok;
    any_bounded = any_bounded || r.bounded;
    steps.push_back(std::move(r));
  }
};

// Checks a whole script: blocks in order, growing the specification context;
// per block, every measure instance of every function proof, the
// internal/external transitions, and all declared derivations.
ProofReport check_proof(const ProofScript& script, Mode mode,
                        const ProofConfig& cfg);

// The specification table built while checking; exposed so the oracle-backed
// commands can reuse specs declared in scripts.
struct SpecTableEntry {
  ExternalSpec ext;
  SpecKind kind = SpecKind::Terminating;
  ExprPtr measure;  // null when erased/non-recursive
};

// The rule registry of the checker; `conj` is recognised and rejected: there
// is no sound conjunction rule.
bool known_rule(const std::string& name);
std::vector<std::string> rule_registry();

}  // namespace esl
