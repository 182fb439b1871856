#include "esl/proof.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>

#include "esl/eval.hpp"
#include "esl/interp.hpp"
#include "esl/printer.hpp"

namespace esl {

namespace {

const std::vector<std::string> kRules = {
    "skip", "nondet", "assign", "assign-err",
    "lookup", "lookup-err-val", "lookup-err-type", "lookup-err-use-after-free",
    "mutate", "mutate-err-val-1", "mutate-err-type",
    "mutate-err-use-after-free", "mutate-err-val-2",
    "new", "new-err-eval", "new-err-type",
    "free", "free-err-eval", "free-err-type", "free-err-use-after-free",
    "error", "error-err",
    "if-then", "if-else", "if-err-val", "if-err-type",
    "seq", "while", "while-err-val", "while-err-type",
    "equiv", "frame", "exists", "disj",
    "fun-call", "fun-call-err-nofunc", "fun-call-err-param-count",
    "fun-call-err-param-expr-eval",
    "adm-in", "adm-exists", "adm-frame", "adm-equiv", "adm-disj",
    "adm-alpha-equiv",
};

const std::string kAlpha = "alpha";

struct SpecInfo {
  ExternalSpec ext;
  SpecKind kind = SpecKind::Terminating;
  ExprPtr measure;  // null: erased or non-recursive
  bool same_block = false;
};

struct Checker {
  PredRegistry reg;
  ProofConfig cfg;
  Mode mode;
  ProofReport report;
  std::map<std::string, std::vector<SpecInfo>> table;
  ImplContext gamma;
  ModelCache cache;

  void fail(int line, const std::string& where, const std::string& msg,
            bool bounded = false) {
    report.add({line, where, false, bounded, msg});
  }
  void pass(int line, const std::string& where, bool bounded,
            const std::string& msg = "") {
    report.add({line, where, true, bounded, msg});
  }

  const SpecInfo* find_spec(const std::string& name, bool nt) {
    auto it = table.find(name);
    if (it == table.end()) return nullptr;
    for (const auto& s : it->second) {
      if ((s.kind == SpecKind::NT) == nt) return &s;
    }
    return nullptr;
  }

  // ---- helpers ----------------------------------------------------------

  bool is_vacuous(const AssertionPtr& a, const std::set<std::string>& pvars) {
    auto fv = fv_assertion(*a);
    ModelSet ms = enumerate_models(reg, *a, fv.lvars, pvars, cfg.bounds, &cache);
    return ms.models.empty() && !ms.bounded;
  }

  CheckOutcome compare(const AssertionPtr& derived, const AssertionPtr& declared,
                       const std::set<std::string>& pvars) {
    return mode_compare(reg, derived, declared, mode, pvars, cfg.bounds, &cache);
  }

  // P entails a pure condition: |= P => pure * True.
  CheckOutcome entails_pure(const AssertionPtr& p, const AssertionPtr& pure,
                            const std::set<std::string>& pvars) {
    auto rhs = mk_star(pure, mk_trueassert());
    auto v = check_valid_implication(reg, *p, *rhs, pvars, cfg.bounds, &cache);
    CheckOutcome out;
    out.ok = v.valid;
    out.bounded = v.bounded;
    out.counterexample = v.counterexample;
    return out;
  }

  struct Opened {
    std::vector<std::string> binders;
    std::vector<AssertionPtr> atoms;
  };

  void flatten(const AssertionPtr& a, std::vector<AssertionPtr>& out) {
    if (const auto* st = std::get_if<Assertion::Star>(&a->node)) {
      flatten(st->lhs, out);
      flatten(st->rhs, out);
    } else {
      out.push_back(a);
    }
  }

  Opened open_assertion(AssertionPtr a, std::set<std::string> avoid) {
    Opened out;
    auto fv = fv_assertion(*a);
    avoid.insert(fv.lvars.begin(), fv.lvars.end());
    while (const auto* ex = std::get_if<Assertion::Exists>(&a->node)) {
      std::string name = fresh_name(ex->var, avoid);
      avoid.insert(name);
      out.binders.push_back(name);
      if (name != ex->var) {
        VarSubst ren;
        ren.lvars.emplace(ex->var, mk_lvar(name));
        a = subst_assertion(ex->body, ren);
      } else {
        a = ex->body;
      }
    }
    flatten(a, out.atoms);
    return out;
  }

  AssertionPtr close_assertion(const Opened& o) {
    return mk_exists_many(o.binders, mk_star_many(o.atoms));
  }

  // Locates the atom describing the cell at `addr` (a value cell when
  // `want_value`, a freed cell otherwise) by evaluating both addresses over
  // the pre-condition's models: the atom must agree on every model. Returns
  // the atom index, -1 when no atom matches, -2 when the model space is
  // empty so no selection can be justified.
  int find_cell(const Opened& o, const ExprPtr& addr, bool want_value,
                const std::set<std::string>& pvars, bool* bounded) {
    // Syntactic fast path: rewrite program variables through the equalities
    // present among the atoms, then compare addresses textually. Distinct
    // cell atoms never alias in a model, so a unique textual match is the
    // semantic match.
    {
      VarSubst eqs;
      for (const auto& atom : o.atoms) {
        const auto* ba = std::get_if<Assertion::BoolA>(&atom->node);
        if (!ba) continue;
        const auto* eq = std::get_if<Expr::Binary>(&ba->e->node);
        if (!eq || eq->op != BinOp::Eq) continue;
        const auto* pv_ = std::get_if<Expr::PVar>(&eq->lhs->node);
        if (pv_ && lv(*eq->rhs).empty() == false) {
          eqs.pvars.emplace(pv_->name, eq->rhs);
        } else if (pv_ && std::get_if<Expr::Const>(&eq->rhs->node)) {
          eqs.pvars.emplace(pv_->name, eq->rhs);
        }
      }
      ExprPtr want = subst_expr(addr, eqs);
      int found = -1;
      int hits = 0;
      for (size_t i = 0; i < o.atoms.size(); ++i) {
        ExprPtr atom_addr;
        if (want_value) {
          if (const auto* c = std::get_if<Assertion::Cell>(&o.atoms[i]->node)) {
            atom_addr = c->addr;
          }
        } else {
          if (const auto* c =
                  std::get_if<Assertion::FreedCell>(&o.atoms[i]->node)) {
            atom_addr = c->addr;
          }
        }
        if (!atom_addr) continue;
        if (expr_equal(*subst_expr(atom_addr, eqs), *want)) {
          found = static_cast<int>(i);
          ++hits;
        }
      }
      if (hits == 1) return found;
    }
    AssertionPtr matrix = mk_star_many(o.atoms);
    auto fv = fv_assertion(*matrix);
    ModelSet ms =
        enumerate_models(reg, *matrix, fv.lvars, pvars, cfg.bounds, &cache);
    *bounded = *bounded || ms.bounded;
    if (ms.models.empty()) return -2;
    for (size_t i = 0; i < o.atoms.size(); ++i) {
      ExprPtr atom_addr;
      if (want_value) {
        if (const auto* c = std::get_if<Assertion::Cell>(&o.atoms[i]->node)) {
          atom_addr = c->addr;
        }
      } else {
        if (const auto* c = std::get_if<Assertion::FreedCell>(&o.atoms[i]->node)) {
          atom_addr = c->addr;
        }
      }
      if (!atom_addr) continue;
      bool all = true;
      for (const auto& m : ms.models) {
        auto want = eval_expr(m.theta, m.state.store, *addr);
        auto got = eval_expr(m.theta, m.state.store, *atom_addr);
        if (!want || !got || !(*want == *got)) {
          all = false;
          break;
        }
      }
      if (all) return static_cast<int>(i);
    }
    return -1;
  }

  // ---- error payload expressions ------------------------------------------

  ExprPtr payload_expr_eval(const Expr& e) {
    return mk_list({mk_str("ExprEval"), mk_str(serialize_expr(e))});
  }
  ExprPtr payload_type(const ExprPtr& e, const std::string& expected) {
    return mk_list({mk_str("Type"), mk_str(serialize_expr(*e)), e,
                    mk_str(expected)});
  }
  ExprPtr payload_uaf(const ExprPtr& e) {
    return mk_list({mk_str("UseAfterFree"), mk_str(serialize_expr(*e)), e});
  }

  AssertionPtr err_q(const AssertionPtr& pre, ExprPtr payload) {
    return mk_star(pre, mk_boolassert(mk_eq(mk_pvar(kErrVar), std::move(payload))));
  }

  AssertionPtr not_in_val(const ExprPtr& e) {
    return mk_boolassert(mk_not(mk_inset(e, Carrier::Val)));
  }
  AssertionPtr in_val(const ExprPtr& e) {
    return mk_boolassert(mk_inset(e, Carrier::Val));
  }

  // ---- body walking ---------------------------------------------------------

  struct WalkResult {
    AssertionPtr ok;
    std::vector<AssertionPtr> errs;
    ExprPtr returned;  // non-null when the body ends in return
    bool failed = false;
  };

  struct FnCtx {
    std::string fun;
    std::set<std::string> pvars;      // params and locals
    std::optional<uint64_t> alpha;    // concrete measure instance
    int depth = 0;
  };

  std::set<std::string> pvars_with_err(const FnCtx& fn) {
    auto s = fn.pvars;
    s.insert(kErrVar);
    return s;
  }

  // One basic or faulting step: computes the canonical post and error
  // contribution of the cited rule applied under the ambient frame.
  bool basic_step(const FnCtx& fn, const ProofElem& el, const AssertionPtr& pre,
                  AssertionPtr* post_ok, AssertionPtr* post_err,
                  std::string* why, bool* bounded) {
    const Command& c = *el.cmd;
    std::string rule = el.rule;
    auto infer = [&]() -> std::string {
      if (std::holds_alternative<Command::Skip>(c.node)) return "skip";
      if (std::holds_alternative<Command::Assign>(c.node)) return "assign";
      if (std::holds_alternative<Command::Nondet>(c.node)) return "nondet";
      if (std::holds_alternative<Command::Lookup>(c.node)) return "lookup";
      if (std::holds_alternative<Command::Mutate>(c.node)) return "mutate";
      if (std::holds_alternative<Command::Alloc>(c.node)) return "new";
      if (std::holds_alternative<Command::Free>(c.node)) return "free";
      if (std::holds_alternative<Command::Error>(c.node)) return "error";
      return "";
    };
    if (rule.empty()) rule = infer();
    if (rule == "conj") {
      *why = "there is no sound conjunction rule";
      return false;
    }
    if (!known_rule(rule)) {
      *why = "unknown rule '" + rule + "'";
      return false;
    }
    *post_ok = nullptr;
    *post_err = nullptr;

    auto fresh_old = [&](const std::string& target) {
      auto fv = fv_assertion(*pre);
      std::set<std::string> avoid = fv.lvars;
      return fresh_name(target + "0", avoid);
    };
    auto entail = [&](const AssertionPtr& pure) {
      auto r = entails_pure(pre, pure, fn.pvars);
      *bounded = *bounded || r.bounded;
      if (!r.ok) {
        *why = "side condition not entailed by the pre-condition: " +
               show_assertion(*pure);
        return false;
      }
      return true;
    };

    if (rule == "skip") {
      if (!std::holds_alternative<Command::Skip>(c.node)) {
        *why = "rule/command mismatch";
        return false;
      }
      *post_ok = pre;
      return true;
    }
    if (rule == "assign" || rule == "assign-err") {
      const auto* n = std::get_if<Command::Assign>(&c.node);
      if (!n) {
        *why = "rule/command mismatch";
        return false;
      }
      if (rule == "assign-err") {
        if (!entail(not_in_val(n->expr))) return false;
        *post_ok = mk_false();
        *post_err = err_q(pre, payload_expr_eval(*n->expr));
        return true;
      }
      if (!entail(in_val(n->expr))) return false;
      std::string old = fresh_old(n->target);
      VarSubst sub;
      sub.pvars.emplace(n->target, mk_lvar(old));
      auto shifted = subst_assertion(pre, sub);
      auto newval = subst_expr(n->expr, sub);
      *post_ok = mk_exists(
          old, mk_star_many({shifted, in_val(mk_lvar(old)),
                             mk_boolassert(mk_eq(mk_pvar(n->target), newval))}));
      return true;
    }
    if (rule == "nondet") {
      const auto* n = std::get_if<Command::Nondet>(&c.node);
      if (!n) {
        *why = "rule/command mismatch";
        return false;
      }
      std::string old = fresh_old(n->target);
      VarSubst sub;
      sub.pvars.emplace(n->target, mk_lvar(old));
      auto shifted = subst_assertion(pre, sub);
      *post_ok = mk_exists(
          old,
          mk_star_many({shifted, in_val(mk_lvar(old)),
                        mk_boolassert(mk_inset(mk_pvar(n->target), Carrier::Nat))}));
      return true;
    }
    if (rule == "error" || rule == "error-err") {
      const auto* n = std::get_if<Command::Error>(&c.node);
      if (!n) {
        *why = "rule/command mismatch";
        return false;
      }
      if (rule == "error-err") {
        if (!entail(not_in_val(n->expr))) return false;
        *post_ok = mk_false();
        *post_err = err_q(pre, payload_expr_eval(*n->expr));
        return true;
      }
      if (!entail(in_val(n->expr))) return false;
      *post_ok = mk_false();
      *post_err = err_q(
          pre, mk_list({mk_str("Error"), n->expr}));
      return true;
    }
    if (rule == "new" || rule == "new-err-eval" || rule == "new-err-type") {
      const auto* n = std::get_if<Command::Alloc>(&c.node);
      if (!n) {
        *why = "rule/command mismatch";
        return false;
      }
      if (rule == "new-err-eval") {
        if (!entail(not_in_val(n->size))) return false;
        *post_ok = mk_false();
        *post_err = err_q(pre, payload_expr_eval(*n->size));
        return true;
      }
      if (rule == "new-err-type") {
        if (!entail(mk_boolassert(mk_binary(
                BinOp::And, mk_inset(n->size, Carrier::Val),
                mk_not(mk_inset(n->size, Carrier::Nat))))))
          return false;
        *post_ok = mk_false();
        *post_err = err_q(pre, payload_type(n->size, "Nat"));
        return true;
      }
      if (!entail(mk_boolassert(mk_inset(n->size, Carrier::Nat)))) return false;
      std::string old = fresh_old(n->target);
      VarSubst sub;
      sub.pvars.emplace(n->target, mk_lvar(old));
      auto shifted = subst_assertion(pre, sub);
      auto count = subst_expr(n->size, sub);
      auto cells = mk_iterstar(
          "i#", mk_nat(0), count,
          mk_cell(mk_add(mk_pvar(n->target), mk_lvar("i#")), mk_nil()));
      *post_ok =
          mk_exists(old, mk_star_many({shifted, in_val(mk_lvar(old)), cells}));
      return true;
    }

    // The remaining rules need the pre-condition opened into its spatial
    // atoms.
    Opened o = open_assertion(pre, {});
    AssertionPtr matrix = mk_star_many(o.atoms);

    auto entail_matrix = [&](const AssertionPtr& pure) {
      auto r = entails_pure(matrix, pure, fn.pvars);
      *bounded = *bounded || r.bounded;
      if (!r.ok) {
        *why = "side condition not entailed by the pre-condition: " +
               show_assertion(*pure);
        return false;
      }
      return true;
    };

    if (rule == "lookup" || rule == "lookup-err-val" ||
        rule == "lookup-err-type" || rule == "lookup-err-use-after-free") {
      const auto* n = std::get_if<Command::Lookup>(&c.node);
      if (!n) {
        *why = "rule/command mismatch";
        return false;
      }
      if (rule == "lookup-err-val") {
        if (!entail(not_in_val(n->addr))) return false;
        *post_ok = mk_false();
        *post_err = err_q(pre, payload_expr_eval(*n->addr));
        return true;
      }
      if (rule == "lookup-err-type") {
        if (!entail(mk_boolassert(
                mk_binary(BinOp::And, mk_inset(n->addr, Carrier::Val),
                          mk_not(mk_inset(n->addr, Carrier::Nat))))))
          return false;
        *post_ok = mk_false();
        *post_err = err_q(pre, payload_type(n->addr, "Nat"));
        return true;
      }
      if (rule == "lookup-err-use-after-free") {
        bool b = false;
        int idx = find_cell(o, n->addr, false, fn.pvars, &b);
        *bounded = *bounded || b;
        if (idx < 0) {
          *why = "no freed cell for " + serialize_expr(*n->addr) +
                 " in the pre-condition";
          return false;
        }
        *post_ok = mk_false();
        *post_err = err_q(pre, payload_uaf(n->addr));
        return true;
      }
      bool b = false;
      int idx = find_cell(o, n->addr, true, fn.pvars, &b);
      *bounded = *bounded || b;
      if (idx < 0) {
        *why = idx == -2 ? "pre-condition has no models within bounds"
                         : "no cell for " + serialize_expr(*n->addr) +
                               " in the pre-condition";
        return false;
      }
      const auto& cell = std::get<Assertion::Cell>(o.atoms[idx]->node);
      std::string old = fresh_old(n->target);
      VarSubst sub;
      sub.pvars.emplace(n->target, mk_lvar(old));
      Opened shifted = o;
      for (auto& atom : shifted.atoms) atom = subst_assertion(atom, sub);
      auto content = subst_expr(cell.val, sub);
      std::vector<AssertionPtr> parts{mk_star_many(shifted.atoms),
                                      in_val(mk_lvar(old)),
                                      mk_boolassert(mk_eq(mk_pvar(n->target),
                                                          content))};
      shifted.atoms = parts;
      shifted.binders.push_back(old);
      *post_ok = close_assertion(shifted);
      return true;
    }
    if (rule == "mutate" || rule == "mutate-err-val-1" ||
        rule == "mutate-err-type" || rule == "mutate-err-use-after-free" ||
        rule == "mutate-err-val-2") {
      const auto* n = std::get_if<Command::Mutate>(&c.node);
      if (!n) {
        *why = "rule/command mismatch";
        return false;
      }
      if (rule == "mutate-err-val-1") {
        if (!entail(not_in_val(n->addr))) return false;
        *post_ok = mk_false();
        *post_err = err_q(pre, payload_expr_eval(*n->addr));
        return true;
      }
      if (rule == "mutate-err-type") {
        if (!entail(mk_boolassert(
                mk_binary(BinOp::And, mk_inset(n->addr, Carrier::Val),
                          mk_not(mk_inset(n->addr, Carrier::Nat))))))
          return false;
        *post_ok = mk_false();
        *post_err = err_q(pre, payload_type(n->addr, "Nat"));
        return true;
      }
      if (rule == "mutate-err-use-after-free") {
        bool b = false;
        int idx = find_cell(o, n->addr, false, fn.pvars, &b);
        *bounded = *bounded || b;
        if (idx < 0) {
          *why = "no freed cell for " + serialize_expr(*n->addr);
          return false;
        }
        *post_ok = mk_false();
        *post_err = err_q(pre, payload_uaf(n->addr));
        return true;
      }
      bool b = false;
      int idx = find_cell(o, n->addr, true, fn.pvars, &b);
      *bounded = *bounded || b;
      if (idx < 0) {
        *why = "no cell for " + serialize_expr(*n->addr) +
               " in the pre-condition";
        return false;
      }
      if (rule == "mutate-err-val-2") {
        if (!entail_matrix(not_in_val(n->value))) return false;
        *post_ok = mk_false();
        *post_err = err_q(pre, payload_expr_eval(*n->value));
        return true;
      }
      if (!entail_matrix(in_val(n->value))) return false;
      const auto& cell = std::get<Assertion::Cell>(o.atoms[idx]->node);
      Opened next = o;
      auto old_content = cell.val;
      next.atoms[idx] = mk_cell(cell.addr, n->value);
      next.atoms.push_back(in_val(old_content));
      *post_ok = close_assertion(next);
      return true;
    }
    if (rule == "free" || rule == "free-err-eval" || rule == "free-err-type" ||
        rule == "free-err-use-after-free") {
      const auto* n = std::get_if<Command::Free>(&c.node);
      if (!n) {
        *why = "rule/command mismatch";
        return false;
      }
      if (rule == "free-err-eval") {
        if (!entail(not_in_val(n->addr))) return false;
        *post_ok = mk_false();
        *post_err = err_q(pre, payload_expr_eval(*n->addr));
        return true;
      }
      if (rule == "free-err-type") {
        if (!entail(mk_boolassert(
                mk_binary(BinOp::And, mk_inset(n->addr, Carrier::Val),
                          mk_not(mk_inset(n->addr, Carrier::Nat))))))
          return false;
        *post_ok = mk_false();
        *post_err = err_q(pre, payload_type(n->addr, "Nat"));
        return true;
      }
      if (rule == "free-err-use-after-free") {
        bool b = false;
        int idx = find_cell(o, n->addr, false, fn.pvars, &b);
        *bounded = *bounded || b;
        if (idx < 0) {
          *why = "no freed cell for " + serialize_expr(*n->addr);
          return false;
        }
        *post_ok = mk_false();
        *post_err = err_q(pre, payload_uaf(n->addr));
        return true;
      }
      bool b = false;
      int idx = find_cell(o, n->addr, true, fn.pvars, &b);
      *bounded = *bounded || b;
      if (idx < 0) {
        *why = "no cell for " + serialize_expr(*n->addr) +
               " in the pre-condition";
        return false;
      }
      const auto& cell = std::get<Assertion::Cell>(o.atoms[idx]->node);
      Opened next = o;
      auto old_content = cell.val;
      next.atoms[idx] = mk_freed(cell.addr);
      next.atoms.push_back(in_val(old_content));
      *post_ok = close_assertion(next);
      return true;
    }
    if (rule == "if-err-val" || rule == "if-err-type") {
      const auto* n = std::get_if<Command::If>(&c.node);
      if (!n) {
        *why = "rule/command mismatch";
        return false;
      }
      if (rule == "if-err-val") {
        if (!entail(not_in_val(n->cond))) return false;
        *post_ok = mk_false();
        *post_err = err_q(pre, payload_expr_eval(*n->cond));
        return true;
      }
      if (!entail(mk_boolassert(
              mk_binary(BinOp::And, mk_inset(n->cond, Carrier::Val),
                        mk_not(mk_inset(n->cond, Carrier::Bool))))))
        return false;
      *post_ok = mk_false();
      *post_err = err_q(pre, payload_type(n->cond, "Bool"));
      return true;
    }
    *why = "rule '" + rule + "' cannot be used as a basic step";
    return false;
  }

  // The fun-call rule under an ambient frame: matches the pre-condition
  // against the cited specification instance and produces both posts.
  bool call_step(const FnCtx& fn, const ProofElem& el, const AssertionPtr& pre,
                 AssertionPtr* post_ok, AssertionPtr* post_err,
                 std::string* why, bool* bounded) {
    const auto& n = std::get<Command::FunCall>(el.cmd->node);
    std::string rule = el.rule.empty() ? "fun-call" : el.rule;
    if (rule == "conj") {
      *why = "there is no sound conjunction rule";
      return false;
    }
    if (!known_rule(rule)) {
      *why = "unknown rule '" + rule + "'";
      return false;
    }

    if (rule == "fun-call-err-nofunc") {
      if (table.count(n.fun)) {
        *why = "function '" + n.fun + "' has a specification";
        return false;
      }
      std::vector<AssertionPtr> arg_ok;
      for (const auto& a : n.args) arg_ok.push_back(in_val(a));
      auto r = entails_pure(pre, mk_star_many(arg_ok), fn.pvars);
      *bounded = *bounded || r.bounded;
      if (!r.ok) {
        *why = "arguments must evaluate in the pre-condition";
        return false;
      }
      *post_ok = mk_false();
      *post_err = err_q(pre, mk_list({mk_str("NoFunc"), mk_str(n.fun)}));
      return true;
    }
    std::string cited = el.call.use.empty() ? n.fun : el.call.use;
    const SpecInfo* spec = find_spec(cited, el.call.use_nt);
    if (!spec) {
      *why = "no specification named '" + cited + "'";
      return false;
    }
    if (rule == "fun-call-err-param-count") {
      if (spec->ext.params.size() == n.args.size()) {
        *why = "parameter count matches; the rule does not apply";
        return false;
      }
      *post_ok = mk_false();
      *post_err = err_q(pre, mk_list({mk_str("ParamCount"), mk_str(n.fun)}));
      return true;
    }
    if (rule == "fun-call-err-param-expr-eval") {
      if (spec->ext.params.size() != n.args.size()) {
        *why = "parameter count mismatch";
        return false;
      }
      // the first failing argument, per the pre-condition
      for (size_t k = 0; k < n.args.size(); ++k) {
        std::vector<AssertionPtr> conds;
        for (size_t i = 0; i < k; ++i) conds.push_back(in_val(n.args[i]));
        conds.push_back(not_in_val(n.args[k]));
        auto r = entails_pure(pre, mk_star_many(conds), fn.pvars);
        *bounded = *bounded || r.bounded;
        if (r.ok) {
          *post_ok = mk_false();
          *post_err = err_q(pre, payload_expr_eval(*n.args[k]));
          return true;
        }
      }
      *why = "no argument is refuted by the pre-condition";
      return false;
    }

    // fun-call proper.
    if (spec->ext.params.size() != n.args.size()) {
      *why = "argument count differs from the specification";
      return false;
    }
    // The instantiation and frame may mention the pre-condition's
    // existential context, so the pre is opened once and its binders are
    // treated as free throughout the call obligations.
    Opened o = open_assertion(pre, {});
    AssertionPtr matrix = mk_star_many(o.atoms);
    // Measure discipline for same-block citations.
    if (spec->same_block && mode != Mode::SL) {
      if (!fn.alpha.has_value()) {
        *why = "recursive call outside a measured proof";
        return false;
      }
      if (!spec->measure) {
        *why = "cited specification has no measure";
        return false;
      }
      VarSubst sigma;
      for (const auto& [v, e] : el.call.inst) sigma.lvars.emplace(v, e);
      auto inst_measure = subst_expr(spec->measure, sigma);
      auto alpha_e = mk_nat(*fn.alpha);
      ExprPtr cond = mk_binary(BinOp::Lt, inst_measure, alpha_e);
      if (spec->kind == SpecKind::NT) {
        auto eq = mk_eq(inst_measure, alpha_e);
        cond = mk_not(mk_binary(BinOp::And, mk_not(cond), mk_not(eq)));
      }
      auto r = entails_pure(matrix, mk_boolassert(cond), fn.pvars);
      *bounded = *bounded || r.bounded;
      if (!r.ok) {
        *why = spec->kind == SpecKind::NT
                   ? "measure must not increase across the call"
                   : "measure must strictly decrease across the call";
        return false;
      }
    }
    if (std::holds_alternative<Expr::PVar>(el.call.old_target
                                               ? el.call.old_target->node
                                               : Expr::Node(Expr::Const{Value::nil()}))) {
      const auto& pv_ = std::get<Expr::PVar>(el.call.old_target->node);
      if (pv_.name == n.target) {
        *why = "the old-value expression mentions the call target";
        return false;
      }
    }

    ExprPtr old_y = el.call.old_target ? el.call.old_target : mk_nil();
    if (!pv(*old_y).empty() && pv(*old_y).count(n.target)) {
      *why = "the old-value expression mentions the call target";
      return false;
    }
    VarSubst sigma;
    for (const auto& [v, e] : el.call.inst) sigma.lvars.emplace(v, e);
    AssertionPtr frame = el.call.frame ? el.call.frame : mk_emp();

    auto sigma_of = [&](const std::string& lv_) -> ExprPtr {
      auto it = el.call.inst.find(lv_);
      return it != el.call.inst.end() ? it->second : mk_lvar(lv_);
    };

    // rule pre: y = old * args = sigma(xs) * sigma(P') * frame
    std::vector<AssertionPtr> rulepre;
    rulepre.push_back(mk_boolassert(mk_eq(mk_pvar(n.target), old_y)));
    for (size_t i = 0; i < n.args.size(); ++i) {
      rulepre.push_back(mk_boolassert(
          mk_eq(n.args[i], sigma_of(spec->ext.param_lvars[i]))));
    }
    rulepre.push_back(subst_assertion(spec->ext.pre_rest, sigma));
    rulepre.push_back(frame);
    auto expected_pre =
        mk_exists_many(o.binders, mk_star_many(rulepre));
    // Pre-side consequence runs the other way round: in SL the current
    // assertion may strengthen the rule's pre-condition, in ISL weaken it.
    auto cmp = compare(pre, expected_pre, fn.pvars);
    *bounded = *bounded || cmp.bounded;
    if (!cmp.ok) {
      *why = "pre-condition does not match the cited specification instance";
      return false;
    }

    // success post: old in Val * args[old/y] = sigma(xs) * sigma(Qok)[y/ret] * frame
    VarSubst y_to_old;
    y_to_old.pvars.emplace(n.target, old_y);
    std::vector<AssertionPtr> okparts;
    okparts.push_back(in_val(old_y));
    for (size_t i = 0; i < n.args.size(); ++i) {
      okparts.push_back(mk_boolassert(mk_eq(subst_expr(n.args[i], y_to_old),
                                            sigma_of(spec->ext.param_lvars[i]))));
    }
    VarSubst ret_to_y;
    ret_to_y.pvars.emplace(kRetVar, mk_pvar(n.target));
    okparts.push_back(
        subst_assertion(subst_assertion(spec->ext.post_ok, sigma), ret_to_y));
    okparts.push_back(frame);
    *post_ok = is_false(*spec->ext.post_ok)
                   ? mk_false()
                   : mk_exists_many(o.binders, mk_star_many(okparts));

    if (is_false(*spec->ext.post_err)) {
      *post_err = nullptr;
    } else {
      std::vector<AssertionPtr> errparts;
      errparts.push_back(mk_boolassert(mk_eq(mk_pvar(n.target), old_y)));
      for (size_t i = 0; i < n.args.size(); ++i) {
        errparts.push_back(mk_boolassert(
            mk_eq(n.args[i], sigma_of(spec->ext.param_lvars[i]))));
      }
      errparts.push_back(subst_assertion(spec->ext.post_err, sigma));
      errparts.push_back(frame);
      *post_err = mk_exists_many(o.binders, mk_star_many(errparts));
    }
    return true;
  }

  WalkResult walk_body(const FnCtx& fn, const ProofBody& body,
                       const AssertionPtr& expected_entry,
                       const std::string& where) {
    WalkResult out;
    out.ok = expected_entry;
    if (body.empty() || body.front().kind != ProofElem::Kind::Assert) {
      fail(body.empty() ? 0 : body.front().line, where,
           "a proof body must open with its assertion");
      out.failed = true;
      return out;
    }
    {
      const auto& first = body.front();
      auto cmp = compare(expected_entry, first.assert_, fn.pvars);
      if (!cmp.ok) {
        fail(first.line, where, "entry assertion mismatch: " + cmp.message,
             cmp.bounded);
        out.failed = true;
      } else {
        pass(first.line, where + " entry", cmp.bounded);
      }
      out.ok = first.assert_;
    }

    size_t i = 1;
    auto declared_after = [&](const char* what) -> AssertionPtr {
      if (i >= body.size() || body[i].kind != ProofElem::Kind::Assert) {
        fail(i < body.size() ? body[i].line : body.back().line, where,
             std::string("expected an assertion after ") + what);
        out.failed = true;
        return nullptr;
      }
      return body[i++].assert_;
    };

    while (i < body.size()) {
      const ProofElem& el = body[i];
      bool vacuous = is_vacuous(out.ok, fn.pvars);
      switch (el.kind) {
        case ProofElem::Kind::Assert: {
          auto cmp = compare(out.ok, el.assert_, fn.pvars);
          if (!cmp.ok) {
            fail(el.line, where, "consequence step failed: " + cmp.message,
                 cmp.bounded);
            out.failed = true;
          } else {
            pass(el.line, where + " conseq", cmp.bounded);
          }
          out.ok = el.assert_;
          ++i;
          break;
        }
        case ProofElem::Kind::Basic: {
          ++i;
          AssertionPtr post_ok, post_err;
          std::string why;
          bool bounded = false;
          if (vacuous) {
            post_ok = mk_false();
            post_err = nullptr;
            pass(el.line, where + " step (vacuous)", false);
          } else if (!basic_step(fn, el, out.ok, &post_ok, &post_err, &why,
                                 &bounded)) {
            fail(el.line, where, why, bounded);
            out.failed = true;
            post_ok = mk_false();
            post_err = nullptr;
          } else {
            pass(el.line, where + " " + show_command(*el.cmd), bounded);
          }
          if (post_err) out.errs.push_back(post_err);
          AssertionPtr declared = declared_after("a command step");
          if (!declared) return out;
          auto cmp = compare(post_ok, declared, fn.pvars);
          if (!cmp.ok) {
            if (std::getenv("ESL_DEBUG")) {
              std::cerr << "[basic] canonical post: " << show_assertion(*post_ok)
                        << "\n[basic] declared:       "
                        << show_assertion(*declared) << "\n";
            }
            fail(el.line, where,
                 "post-condition does not follow from the rule: " + cmp.message,
                 cmp.bounded);
            out.failed = true;
          }
          out.ok = declared;
          break;
        }
        case ProofElem::Kind::Call: {
          ++i;
          AssertionPtr post_ok, post_err;
          std::string why;
          bool bounded = false;
          if (vacuous) {
            post_ok = mk_false();
            post_err = nullptr;
            pass(el.line, where + " call (vacuous)", false);
          } else if (!call_step(fn, el, out.ok, &post_ok, &post_err, &why,
                                &bounded)) {
            fail(el.line, where, why, bounded);
            out.failed = true;
            post_ok = mk_false();
            post_err = nullptr;
          } else {
            pass(el.line, where + " " + show_command(*el.cmd), bounded);
          }
          if (post_err) out.errs.push_back(post_err);
          AssertionPtr declared = declared_after("a call step");
          if (!declared) return out;
          auto cmp = compare(post_ok, declared, fn.pvars);
          if (!cmp.ok) {
            if (std::getenv("ESL_DEBUG")) {
              std::cerr << "[call] canonical post: " << show_assertion(*post_ok)
                        << "\n[call] declared:       " << show_assertion(*declared)
                        << "\n";
            }
            fail(el.line, where,
                 "post-condition does not follow from the call rule: " +
                     cmp.message,
                 cmp.bounded);
            out.failed = true;
          }
          out.ok = declared;
          break;
        }
        case ProofElem::Kind::IfElse: {
          ++i;
          if (!vacuous) {
            auto guard_ok = entails_pure(
                out.ok, mk_boolassert(mk_inset(el.cond, Carrier::Bool)),
                fn.pvars);
            if (!guard_ok.ok) {
              fail(el.line, where,
                   "guard may not be boolean; use if_err for faulting "
                   "conditionals",
                   guard_ok.bounded);
              out.failed = true;
            }
          }
          auto then_entry = mk_star(out.ok, mk_boolassert(el.cond));
          auto else_entry = mk_star(out.ok, mk_boolassert(mk_not(el.cond)));
          WalkResult tr =
              walk_body(fn, *el.then_body, then_entry, where + "/then");
          WalkResult er =
              walk_body(fn, *el.else_body, else_entry, where + "/else");
          out.failed = out.failed || tr.failed || er.failed;
          for (auto& e : tr.errs) out.errs.push_back(e);
          for (auto& e : er.errs) out.errs.push_back(e);
          AssertionPtr joined = mk_or(tr.ok, er.ok);
          AssertionPtr declared = declared_after("an if statement");
          if (!declared) return out;
          auto cmp = compare(joined, declared, fn.pvars);
          if (!cmp.ok) {
            fail(el.line, where, "if join failed: " + cmp.message, cmp.bounded);
            out.failed = true;
          }
          out.ok = declared;
          break;
        }
        case ProofElem::Kind::WhileLoop: {
          ++i;
          const WhileFamilies& fam = *el.families;
          auto family_at = [&](const AssertionPtr& a, uint64_t k) {
            VarSubst sub;
            sub.lvars.emplace(fam.index_var, mk_nat(k));
            return subst_assertion(a, sub);
          };
          bool isErr = el.rule == "while-err-val" || el.rule == "while-err-type";
          uint64_t jbound = cfg.imax;
          if (isErr) {
            auto it = el.call.inst.find("#j");
            jbound = it != el.call.inst.end()
                         ? std::get<Expr::Const>(it->second->node).v.as_nat()
                         : 1;
          }
          // conclusion pre must match P_0
          {
            auto cmp = compare(out.ok, family_at(fam.p_family, 0), fn.pvars);
            if (!cmp.ok) {
              fail(el.line, where, "loop pre-condition is not P_0: " + cmp.message,
                   cmp.bounded);
              out.failed = true;
            }
          }
          uint64_t premise_bound = isErr ? jbound : cfg.imax;
          for (uint64_t k = 0; k <= premise_bound; ++k) {
            AssertionPtr pk = family_at(fam.p_family, k);
            if (isErr) {
              // P_i entails the guard being true below j, and the fault at j.
              if (k < jbound) {
                auto r = entails_pure(pk, mk_boolassert(el.cond), fn.pvars);
                if (!r.ok) {
                  fail(el.line, where,
                       "P_" + std::to_string(k) + " must entail the guard",
                       r.bounded);
                  out.failed = true;
                }
              } else {
                AssertionPtr cond =
                    el.rule == "while-err-val"
                        ? not_in_val(el.cond)
                        : mk_boolassert(mk_binary(
                              BinOp::And, mk_inset(el.cond, Carrier::Val),
                              mk_not(mk_inset(el.cond, Carrier::Bool))));
                auto r = entails_pure(pk, cond, fn.pvars);
                if (!r.ok) {
                  fail(el.line, where, "P_j must entail the guard fault",
                       r.bounded);
                  out.failed = true;
                }
              }
            } else {
              auto r = entails_pure(
                  pk, mk_boolassert(mk_inset(el.cond, Carrier::Bool)),
                  fn.pvars);
              if (!r.ok) {
                fail(el.line, where,
                     "P_" + std::to_string(k) + " must type the guard",
                     r.bounded);
                out.failed = true;
              }
            }
          }
          uint64_t body_rounds = isErr ? jbound : cfg.imax;
          for (uint64_t k = 0; k < body_rounds; ++k) {
            ProofBody inst;
            inst.reserve(fam.body.size());
            for (const auto& e : fam.body) {
              inst.push_back(instantiate_elem(e, fam.index_var, k));
            }
            AssertionPtr entry =
                isErr ? family_at(fam.p_family, k)
                      : mk_star(family_at(fam.p_family, k),
                                mk_boolassert(el.cond));
            WalkResult wr = walk_body(fn, inst, entry,
                                      where + "/while@i=" + std::to_string(k));
            out.failed = out.failed || wr.failed;
            // body must conclude P_{k+1} with error family Q_k
            auto cmp =
                compare(wr.ok, family_at(fam.p_family, k + 1), fn.pvars);
            if (!cmp.ok) {
              fail(el.line, where,
                   "loop body does not restore P_" + std::to_string(k + 1) +
                       ": " + cmp.message,
                   cmp.bounded);
              out.failed = true;
            }
            auto errj = mk_or_many(wr.errs);
            auto qcmp = compare(errj, family_at(fam.q_family, k),
                                pvars_with_err(fn));
            if (!qcmp.ok) {
              fail(el.line, where,
                   "loop body errors do not match Q_" + std::to_string(k) +
                       ": " + qcmp.message,
                   qcmp.bounded);
              out.failed = true;
            }
          }
          pass(el.line, where + " while", true,
               "families checked for i <= " + std::to_string(premise_bound));
          // conclusion
          std::string iota = fresh_name("i", fv_assertion(*fam.p_family).lvars);
          VarSubst to_iota;
          to_iota.lvars.emplace(fam.index_var, mk_lvar(iota));
          AssertionPtr conc_ok, conc_err;
          if (isErr) {
            std::vector<AssertionPtr> errparts;
            for (uint64_t k = 0; k < jbound; ++k) {
              errparts.push_back(family_at(fam.q_family, k));
            }
            errparts.push_back(err_q(
                family_at(fam.p_family, jbound),
                el.rule == "while-err-val"
                    ? payload_expr_eval(*el.cond)
                    : payload_type(el.cond, "Bool")));
            conc_ok = mk_false();
            conc_err = mk_or_many(errparts);
          } else {
            conc_ok = mk_star(
                mk_boolassert(mk_not(el.cond)),
                mk_exists(iota,
                          mk_star(mk_boolassert(mk_inset(mk_lvar(iota),
                                                         Carrier::Nat)),
                                  subst_assertion(fam.p_family, to_iota))));
            conc_err =
                is_false(*fam.q_family)
                    ? nullptr
                    : mk_exists(
                          iota,
                          mk_star(mk_boolassert(
                                      mk_inset(mk_lvar(iota), Carrier::Nat)),
                                  subst_assertion(fam.q_family, to_iota)));
          }
          if (conc_err) out.errs.push_back(conc_err);
          AssertionPtr declared = declared_after("a while loop");
          if (!declared) return out;
          auto cmp = compare(conc_ok, declared, fn.pvars);
          if (!cmp.ok) {
            fail(el.line, where, "while conclusion failed: " + cmp.message,
                 cmp.bounded);
            out.failed = true;
          }
          out.ok = declared;
          break;
        }
        case ProofElem::Kind::Return: {
          out.returned = el.ret_expr;
          ++i;
          if (i != body.size()) {
            fail(el.line, where, "return must be the last proof element");
            out.failed = true;
            i = body.size();
          }
          break;
        }
      }
    }
    return out;
  }

  ProofElem instantiate_elem(const ProofElem& e, const std::string& var,
                             uint64_t k) {
    ProofElem out = e;
    VarSubst sub;
    sub.lvars.emplace(var, mk_nat(k));
    if (out.assert_) out.assert_ = subst_assertion(out.assert_, sub);
    if (out.call.frame) out.call.frame = subst_assertion(out.call.frame, sub);
    for (auto& [v, ex] : out.call.inst) ex = subst_expr(ex, sub);
    if (out.call.old_target) out.call.old_target = subst_expr(out.call.old_target, sub);
    if (out.then_body) {
      auto tb = std::make_shared<ProofBody>();
      for (const auto& el : *out.then_body)
        tb->push_back(instantiate_elem(el, var, k));
      out.then_body = tb;
    }
    if (out.else_body) {
      auto eb = std::make_shared<ProofBody>();
      for (const auto& el : *out.else_body)
        eb->push_back(instantiate_elem(el, var, k));
      out.else_body = eb;
    }
    if (out.families) {
      auto fam = std::make_shared<WhileFamilies>(*out.families);
      if (fam->index_var != var) {
        fam->p_family = subst_assertion(fam->p_family, sub);
        fam->q_family = subst_assertion(fam->q_family, sub);
        ProofBody nb;
        for (const auto& el : fam->body) nb.push_back(instantiate_elem(el, var, k));
        fam->body = std::move(nb);
      }
      out.families = fam;
    }
    return out;
  }

  // ---- command structure ----------------------------------------------------

  // The proofs must walk the function body itself: commands reconstructed
  // from the proof elements are matched against the definition. A branch
  // containing no command elements is exempt; its entry assertion is then
  // forced to be unsatisfiable by the semantic walk.

  void flatten_cmds(const CommandPtr& c, std::vector<CommandPtr>& out) {
    if (const auto* seq = std::get_if<Command::Seq>(&c->node)) {
      flatten_cmds(seq->first, out);
      flatten_cmds(seq->second, out);
    } else {
      out.push_back(c);
    }
  }

  bool command_equal(const Command& a, const Command& b) {
    return show_command(a) == show_command(b);
  }

  bool match_commands(const ProofBody& body, const CommandPtr& cmd,
                      std::string* why) {
    std::vector<const ProofElem*> steps;
    for (const auto& el : body) {
      if (el.kind != ProofElem::Kind::Assert &&
          el.kind != ProofElem::Kind::Return) {
        steps.push_back(&el);
      }
    }
    if (steps.empty()) return true;  // vacuous branch, enforced semantically
    std::vector<CommandPtr> cmds;
    flatten_cmds(cmd, cmds);
    if (steps.size() != cmds.size()) {
      *why = "proof covers " + std::to_string(steps.size()) +
             " command(s), the body has " + std::to_string(cmds.size());
      return false;
    }
    for (size_t i = 0; i < steps.size(); ++i) {
      const ProofElem& el = *steps[i];
      const Command& actual = *cmds[i];
      switch (el.kind) {
        case ProofElem::Kind::Basic:
        case ProofElem::Kind::Call: {
          // Faulting-if steps stand for the if command itself.
          bool named_if = el.rule == "if-err-val" || el.rule == "if-err-type";
          if (named_if) {
            const auto* n = std::get_if<Command::If>(&actual.node);
            const auto* mine = std::get_if<Command::If>(&el.cmd->node);
            if (!n || !mine || !expr_equal(*mine->cond, *n->cond)) {
              *why = "faulting conditional does not match the body";
              return false;
            }
            break;
          }
          if (!command_equal(*el.cmd, actual)) {
            *why = "command mismatch: proof has '" + show_command(*el.cmd) +
                   "', body has '" + show_command(actual) + "'";
            return false;
          }
          break;
        }
        case ProofElem::Kind::IfElse: {
          const auto* n = std::get_if<Command::If>(&actual.node);
          if (!n || !expr_equal(*el.cond, *n->cond)) {
            *why = "conditional mismatch at '" + show_command(actual) + "'";
            return false;
          }
          if (!match_commands(*el.then_body, n->then_branch, why) ||
              !match_commands(*el.else_body, n->else_branch, why)) {
            return false;
          }
          break;
        }
        case ProofElem::Kind::WhileLoop: {
          const auto* n = std::get_if<Command::While>(&actual.node);
          if (!n || !expr_equal(*el.cond, *n->cond)) {
            *why = "loop mismatch at '" + show_command(actual) + "'";
            return false;
          }
          if (!match_commands(el.families->body, n->body, why)) return false;
          break;
        }
        default:
          break;
      }
    }
    return true;
  }

  // ---- blocks -----------------------------------------------------------------

  AssertionPtr with_measure(const AssertionPtr& a, const ExprPtr& measure) {
    if (!measure || is_false(*a)) return a;
    return mk_star(a, mk_boolassert(mk_eq(mk_lvar(kAlpha), measure)));
  }

  AssertionPtr at_alpha(const AssertionPtr& a, uint64_t k) {
    VarSubst sub;
    sub.lvars.emplace(kAlpha, mk_nat(k));
    return subst_assertion(a, sub);
  }

  void check_block(const EnvBlock& block) {
    // Freshness and well-formedness of the implementations.
    for (const auto& f : block.funcs) {
      if (gamma.find(f.name)) {
        fail(block.line, "block", "function '" + f.name + "' already defined");
        return;
      }
      auto errs = validate_function(f);
      for (const auto& e : errs) fail(block.line, "fn " + f.name, e);
      if (!errs.empty()) return;
    }
    ImplContext new_gamma = gamma;
    for (const auto& f : block.funcs) new_gamma.add(f);

    // External shapes.
    std::vector<std::pair<const ExternalSpecDecl*, SpecInfo>> infos;
    bool any_measure = false;
    for (const auto& decl : block.specs) {
      const FunctionDef* def = new_gamma.find(decl.fun);
      if (!def ||
          std::none_of(block.funcs.begin(), block.funcs.end(),
                       [&](const FunctionDef& f) { return f.name == decl.fun; })) {
        fail(block.line, "spec " + decl.fun,
             "specification for a function not defined in this block");
        continue;
      }
      // The table keeps the raw specification; the measure conjunct is
      // attached only to the instance being proven, while citations are
      // constrained through the measure expression itself.
      ExternalSpec ext;
      auto errs = make_external_spec(decl.fun, def->params, decl.pre,
                                     decl.post_ok, decl.post_err, &ext);
      for (const auto& e : errs) fail(block.line, "spec " + decl.fun, e);
      if (!errs.empty()) continue;
      SpecInfo info{ext, decl.kind, decl.measure, true};
      any_measure = any_measure || (decl.measure != nullptr);
      infos.emplace_back(&decl, std::move(info));
    }

    // Same-block specs become citable under the measure discipline.
    std::map<std::string, std::vector<SpecInfo>> saved = table;
    for (const auto& [decl, info] : infos) {
      table[decl->fun].push_back(info);
    }

    uint64_t amax_blk = block.alpha_max.value_or(cfg.alpha_max);
    uint64_t alpha_lo = 0, alpha_hi = any_measure ? amax_blk : 0;

    for (uint64_t alpha = alpha_lo; alpha <= alpha_hi; ++alpha) {
      for (const auto& [decl, info] : infos) {
        const FunctionDef* def = new_gamma.find(decl->fun);
        // Proof declarations for this spec.
        std::vector<const ProofDecl*> proofs;
        for (const auto& p : block.proofs) {
          if (p.fun == decl->fun && p.nt == (decl->kind == SpecKind::NT)) {
            proofs.push_back(&p);
          }
        }
        if (proofs.empty()) {
          fail(block.line, "spec " + decl->fun, "no proof declared");
          continue;
        }
        std::string ctxname = decl->fun +
                              (decl->kind == SpecKind::NT ? " (nt)" : "") +
                              (any_measure
                                   ? " @alpha=" + std::to_string(alpha)
                                   : "");
        if (alpha == alpha_lo) {
          for (const ProofDecl* p : proofs) {
            std::string why;
            if (!match_commands(p->body, def->body, &why)) {
              fail(p->line, ctxname, "proof does not follow the body: " + why);
            }
          }
        }
        // Each case proof yields a sub-quadruple; they join by disjunction.
        std::vector<Quadruple> parts;
        bool case_failed = false;
        for (const ProofDecl* p : proofs) {
          AssertionPtr case_pre = p->case_pre ? p->case_pre : decl->pre;
          AssertionPtr case_ok = p->case_ok ? p->case_ok : decl->post_ok;
          AssertionPtr case_err = p->case_err ? p->case_err : decl->post_err;
          ExternalSpec case_ext;
          auto errs = make_external_spec(
              decl->fun, def->params, with_measure(case_pre, decl->measure),
              with_measure(case_ok, decl->measure),
              with_measure(case_err, decl->measure), &case_ext);
          for (const auto& e : errs) fail(p->line, ctxname, e);
          if (!errs.empty()) {
            case_failed = true;
            continue;
          }
          // Instantiate the measure variable.
          ExternalSpec inst = case_ext;
          inst.pre = at_alpha(inst.pre, alpha);
          inst.pre_rest = at_alpha(inst.pre_rest, alpha);
          inst.post_ok = at_alpha(inst.post_ok, alpha);
          inst.post_err = at_alpha(inst.post_err, alpha);

          FnCtx fn;
          fn.fun = decl->fun;
          fn.pvars.insert(def->params.begin(), def->params.end());
          for (const auto& v : pv(*def->body)) fn.pvars.insert(v);
          if (any_measure) fn.alpha = alpha;

          // Entry: external pre with locals at nil.
          std::vector<AssertionPtr> entry_parts{inst.pre};
          std::vector<std::string> locals;
          for (const auto& v : pv(*def->body)) {
            if (std::find(def->params.begin(), def->params.end(), v) ==
                def->params.end())
              locals.push_back(v);
          }
          for (const auto& z : locals) {
            entry_parts.push_back(mk_boolassert(mk_eq(mk_pvar(z), mk_nil())));
          }
          AssertionPtr entry = mk_star_many(entry_parts);

          ProofBody inst_body;
          for (const auto& el : p->body) {
            inst_body.push_back(instantiate_elem(el, kAlpha, alpha));
          }
          WalkResult wr = walk_body(fn, inst_body, entry, ctxname);
          if (wr.failed) {
            case_failed = true;
            continue;
          }
          if (!wr.returned) {
            fail(p->line, ctxname, "proof body does not end with return");
            case_failed = true;
            continue;
          }
          if (!expr_equal(*wr.returned, *def->return_expr)) {
            fail(p->line, ctxname,
                 "returned expression differs from the function definition");
            case_failed = true;
            continue;
          }
          // Internal-to-external transition.
          Quadruple candidate{entry, wr.ok, mk_or_many(wr.errs)};
          auto intr = check_internalisation(reg, *def, inst, candidate, mode,
                                            cfg.bounds);
          if (!intr.ok) {
            fail(p->line, ctxname, intr.message, intr.bounded);
            case_failed = true;
            continue;
          }
          pass(p->line, ctxname + " internalisation", intr.bounded);
          parts.push_back(
              Quadruple{at_alpha(with_measure(case_pre, decl->measure), alpha),
                        at_alpha(with_measure(case_ok, decl->measure), alpha),
                        at_alpha(with_measure(case_err, decl->measure), alpha)});
        }
        if (case_failed) continue;
        // Join the cases against the declared specification.
        if (proofs.size() > 1 || proofs.front()->case_pre) {
          std::vector<AssertionPtr> pres, oks, errs2;
          for (const auto& q : parts) {
            pres.push_back(q.pre);
            oks.push_back(q.post_ok);
            errs2.push_back(q.post_err);
          }
          auto target_pre =
              at_alpha(with_measure(decl->pre, decl->measure), alpha);
          auto target_ok =
              at_alpha(with_measure(decl->post_ok, decl->measure), alpha);
          auto target_err =
              at_alpha(with_measure(decl->post_err, decl->measure), alpha);
          auto c1 = compare(mk_or_many(pres), target_pre, {});
          auto c2 = compare(mk_or_many(oks), target_ok, {"ret"});
          auto c3 = compare(mk_or_many(errs2), target_err, {"err"});
          if (!c1.ok || !c2.ok || !c3.ok) {
            fail(block.line, ctxname, "case join does not cover the spec",
                 c1.bounded || c2.bounded || c3.bounded);
          } else {
            pass(block.line, ctxname + " case join",
                 c1.bounded || c2.bounded || c3.bounded);
          }
        }
      }
    }

    // Rebuild the table: erase the measure, keep the specs ambient.
    table = std::move(saved);
    for (const auto& [decl, info] : infos) {
      SpecInfo erased = info;
      erased.same_block = false;
      if (decl->measure) {
        // t-infinity: exists alpha. spec(alpha), i.e. the measure expression
        // is a natural; drop the conjunct when the pre already forces it.
        auto nat_measure =
            mk_boolassert(mk_inset(decl->measure, Carrier::Nat));
        auto v = check_valid_implication(
            reg, *decl->pre, *mk_star(nat_measure, mk_trueassert()), {},
            cfg.bounds);
        ExternalSpec ext;
        AssertionPtr pre = decl->pre;
        AssertionPtr ok = decl->post_ok;
        AssertionPtr err = decl->post_err;
        if (!v.valid) {
          pre = mk_star(pre, nat_measure);
          if (!is_false(*ok)) ok = mk_star(ok, nat_measure);
          if (!is_false(*err)) err = mk_star(err, nat_measure);
        }
        auto errs = make_external_spec(decl->fun,
                                       new_gamma.find(decl->fun)->params, pre,
                                       ok, err, &ext);
        if (errs.empty()) erased.ext = ext;
        erased.measure = nullptr;
      }
      table[decl->fun].push_back(std::move(erased));
    }
    gamma = new_gamma;
  }

  // ---- derivations --------------------------------------------------------

  AssertionPtr bindings_star(const ExternalSpec& s) {
    std::vector<AssertionPtr> parts;
    for (size_t i = 0; i < s.params.size(); ++i) {
      parts.push_back(mk_boolassert(
          mk_eq(mk_pvar(s.params[i]), mk_lvar(s.param_lvars[i]))));
    }
    return mk_star_many(parts);
  }

  void check_derive(const DeriveDecl& d) {
    const SpecInfo* from = find_spec(d.from, d.from_nt);
    if (!from) {
      fail(d.line, "derive " + d.name, "unknown source specification");
      return;
    }
    ExternalSpec cur = from->ext;
    for (const auto& step : d.steps) {
      switch (step.kind) {
        case AdmStep::Kind::Exists: {
          if (std::find(cur.param_lvars.begin(), cur.param_lvars.end(),
                        step.var) != cur.param_lvars.end()) {
            fail(step.line, "derive " + d.name,
                 "adm-exists variable is a parameter variable");
            return;
          }
          cur.pre_rest = mk_exists(step.var, cur.pre_rest);
          cur.pre = mk_star(bindings_star(cur), cur.pre_rest);
          if (!is_false(*cur.post_ok))
            cur.post_ok = mk_exists(step.var, cur.post_ok);
          if (!is_false(*cur.post_err))
            cur.post_err = mk_exists(step.var, cur.post_err);
          break;
        }
        case AdmStep::Kind::Frame: {
          auto vars = fv_assertion(*step.frame);
          if (!vars.pvars.empty()) {
            fail(step.line, "derive " + d.name,
                 "adm-frame assertion mentions a program variable");
            return;
          }
          cur.pre_rest = mk_star(cur.pre_rest, step.frame);
          cur.pre = mk_star(bindings_star(cur), cur.pre_rest);
          if (!is_false(*cur.post_ok))
            cur.post_ok = mk_star(cur.post_ok, step.frame);
          if (!is_false(*cur.post_err))
            cur.post_err = mk_star(cur.post_err, step.frame);
          break;
        }
        case AdmStep::Kind::Equiv: {
          ExternalSpec target;
          auto errs = make_external_spec(cur.fun, cur.params, step.eq_pre,
                                         step.eq_ok, step.eq_err, &target);
          for (const auto& e : errs) fail(step.line, "derive " + d.name, e);
          if (!errs.empty()) return;
          auto c1 = check_equiv(reg, *cur.pre, *target.pre, {}, cfg.bounds);
          auto c2 =
              check_equiv(reg, *cur.post_ok, *target.post_ok, {"ret"}, cfg.bounds);
          auto c3 = check_equiv(reg, *cur.post_err, *target.post_err, {"err"},
                                cfg.bounds);
          if (!c1.valid || !c2.valid || !c3.valid) {
            fail(step.line, "derive " + d.name, "adm-equiv failed",
                 c1.bounded || c2.bounded || c3.bounded);
            return;
          }
          pass(step.line, "derive " + d.name + " adm-equiv",
               c1.bounded || c2.bounded || c3.bounded);
          cur = target;
          break;
        }
        case AdmStep::Kind::Disj: {
          const SpecInfo* other = find_spec(step.other, false);
          if (!other) {
            fail(step.line, "derive " + d.name, "unknown disjunction partner");
            return;
          }
          if (other->ext.params != cur.params ||
              other->ext.param_lvars != cur.param_lvars) {
            fail(step.line, "derive " + d.name,
                 "disjunction partner binds different parameter variables");
            return;
          }
          cur.pre_rest = mk_or(cur.pre_rest, other->ext.pre_rest);
          cur.pre = mk_star(bindings_star(cur), cur.pre_rest);
          cur.post_ok = mk_or(cur.post_ok, other->ext.post_ok);
          cur.post_err = mk_or(cur.post_err, other->ext.post_err);
          break;
        }
        case AdmStep::Kind::AlphaEquiv: {
          VarSubst ren;
          std::set<std::string> targets;
          for (const auto& [from_v, to_v] : step.renames) {
            ren.lvars.emplace(from_v, mk_lvar(to_v));
            if (!targets.insert(to_v).second) {
              fail(step.line, "derive " + d.name,
                   "adm-alpha-equiv renames to non-distinct names");
              return;
            }
          }
          for (auto& lv_ : cur.param_lvars) {
            auto it = ren.lvars.find(lv_);
            if (it != ren.lvars.end())
              lv_ = std::get<Expr::LVar>(it->second->node).name;
          }
          std::set<std::string> distinct(cur.param_lvars.begin(),
                                         cur.param_lvars.end());
          if (distinct.size() != cur.param_lvars.size()) {
            fail(step.line, "derive " + d.name,
                 "renaming collapses parameter variables");
            return;
          }
          cur.pre = subst_assertion(cur.pre, ren);
          cur.pre_rest = subst_assertion(cur.pre_rest, ren);
          cur.post_ok = subst_assertion(cur.post_ok, ren);
          cur.post_err = subst_assertion(cur.post_err, ren);
          break;
        }
      }
    }
    pass(d.line, "derive " + d.name, false);
    SpecInfo info{cur, d.from_nt ? SpecKind::NT : SpecKind::Terminating,
                  nullptr, false};
    table[d.name].push_back(std::move(info));
  }
};

}  // namespace

bool known_rule(const std::string& name) {
  return std::find(kRules.begin(), kRules.end(), name) != kRules.end();
}

std::vector<std::string> rule_registry() { return kRules; }

ProofReport check_proof(const ProofScript& script, Mode mode,
                        const ProofConfig& cfg) {
  Checker ck;
  ck.reg = builtin_corpus();
  ck.cfg = cfg;
  ck.mode = mode;
  if (!script.preds.empty()) {
    auto errs = ck.reg.register_group(script.preds);
    for (const auto& e : errs) ck.fail(0, "predicates", e);
    if (!errs.empty()) return std::move(ck.report);
  }
  for (const auto& item : script.items) {
    if (const auto* lem = std::get_if<LemmaDecl>(&item)) {
      auto v = check_equiv(ck.reg, *lem->lhs, *lem->rhs, {}, cfg.bounds);
      if (!v.valid) {
        ck.fail(lem->line, "lemma " + lem->name,
                "equivalence failed (" + v.note + ")", v.bounded);
      } else {
        ck.pass(lem->line, "lemma " + lem->name, v.bounded);
      }
    } else if (const auto* der = std::get_if<DeriveDecl>(&item)) {
      ck.check_derive(*der);
    } else {
      ck.check_block(std::get<EnvBlock>(item));
    }
  }
  return std::move(ck.report);
}

}  // namespace esl
