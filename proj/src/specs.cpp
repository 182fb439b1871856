#include "esl/specs.hpp"

#include <algorithm>

#include "esl/printer.hpp"

namespace esl {

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::ESL: return "esl";
    case Mode::SL: return "sl";
    case Mode::ISL: return "isl";
  }
  return "?";
}

namespace {

// Flattens top-level stars into a list of conjuncts.
void flatten_star(const AssertionPtr& a, std::vector<AssertionPtr>& out) {
  if (const auto* st = std::get_if<Assertion::Star>(&a->node)) {
    flatten_star(st->lhs, out);
    flatten_star(st->rhs, out);
  } else {
    out.push_back(a);
  }
}

// Recognises `@p = x` with x a logical variable.
bool match_param_binding(const Assertion& a, const std::string& param,
                         std::string* lvar) {
  const auto* b = std::get_if<Assertion::BoolA>(&a.node);
  if (!b) return false;
  const auto* eq = std::get_if<Expr::Binary>(&b->e->node);
  if (!eq || eq->op != BinOp::Eq) return false;
  const auto* pv_ = std::get_if<Expr::PVar>(&eq->lhs->node);
  const auto* lv_ = std::get_if<Expr::LVar>(&eq->rhs->node);
  if (!pv_ || !lv_ || pv_->name != param) return false;
  *lvar = lv_->name;
  return true;
}

}  // namespace

std::vector<std::string> make_external_spec(
    const std::string& fun, const std::vector<std::string>& params,
    const AssertionPtr& pre, const AssertionPtr& post_ok,
    const AssertionPtr& post_err, ExternalSpec* out) {
  std::vector<std::string> errs;
  std::vector<AssertionPtr> conjuncts;
  flatten_star(pre, conjuncts);

  std::vector<std::string> lvars;
  std::vector<AssertionPtr> rest;
  std::set<size_t> used;
  for (const auto& p : params) {
    bool found = false;
    for (size_t i = 0; i < conjuncts.size(); ++i) {
      if (used.count(i)) continue;
      std::string lv_;
      if (match_param_binding(*conjuncts[i], p, &lv_)) {
        lvars.push_back(lv_);
        used.insert(i);
        found = true;
        break;
      }
    }
    if (!found) {
      errs.push_back(fun + ": pre-condition does not bind parameter '" + p +
                     "' to a logical variable");
    }
  }
  std::set<std::string> distinct(lvars.begin(), lvars.end());
  if (distinct.size() != lvars.size()) {
    errs.push_back(fun + ": parameter logical variables are not distinct");
  }
  for (size_t i = 0; i < conjuncts.size(); ++i) {
    if (!used.count(i)) rest.push_back(conjuncts[i]);
  }
  AssertionPtr pre_rest = mk_star_many(rest);
  auto rest_vars = fv_assertion(*pre_rest);
  if (!rest_vars.pvars.empty()) {
    errs.push_back(fun + ": pre-condition mentions program variable '@" +
                   *rest_vars.pvars.begin() + "' beyond the parameter bindings");
  }
  auto check_post = [&](const AssertionPtr& q, const std::string& which,
                        const std::string& allowed) {
    if (is_false(*q)) return;
    auto vars = fv_assertion(*q);
    for (const auto& v : vars.pvars) {
      if (v != allowed) {
        errs.push_back(fun + ": " + which + " post-condition mentions '@" + v +
                       "' (only @" + allowed + " is allowed)");
      }
    }
  };
  check_post(post_ok, "success", "ret");
  check_post(post_err, "error", "err");

  if (errs.empty() && out) {
    out->fun = fun;
    out->params = params;
    out->param_lvars = lvars;
    out->pre = pre;
    out->pre_rest = pre_rest;
    out->post_ok = post_ok;
    out->post_err = post_err;
  }
  return errs;
}

CheckOutcome mode_compare(const PredRegistry& reg, const AssertionPtr& derived,
                          const AssertionPtr& declared, Mode mode,
                          const std::set<std::string>& pvars,
                          const ModelBounds& b, ModelCache* cache) {
  CheckOutcome out;
  BoundedVerdict v;
  switch (mode) {
    case Mode::ESL:
      v = check_equiv(reg, *derived, *declared, pvars, b, cache);
      break;
    case Mode::SL:
      v = check_valid_implication(reg, *derived, *declared, pvars, b, cache);
      break;
    case Mode::ISL:
      v = check_valid_implication(reg, *declared, *derived, pvars, b, cache);
      break;
  }
  out.ok = v.valid;
  out.bounded = v.bounded;
  out.counterexample = v.counterexample;
  if (!v.valid) {
    out.message = mode == Mode::ESL ? "equivalence failed (" + v.note + ")"
                                    : "implication failed";
    if (v.counterexample) {
      std::string theta;
      for (const auto& [k, val] : v.counterexample->theta) {
        theta += k + "=" + val.show() + " ";
      }
      out.message += "; countermodel: theta{" + theta + "} store" +
                     show_store(v.counterexample->state.store) + " heap" +
                     show_heap(v.counterexample->state.heap);
    }
  }
  return out;
}

CheckOutcome check_internalisation(const PredRegistry& reg,
                                   const FunctionDef& def,
                                   const ExternalSpec& ext,
                                   const Quadruple& candidate, Mode mode,
                                   const ModelBounds& b) {
  CheckOutcome out;
  // Locals: body variables that are not parameters.
  std::vector<std::string> locals;
  for (const auto& v : pv(*def.body)) {
    if (std::find(def.params.begin(), def.params.end(), v) == def.params.end())
      locals.push_back(v);
  }
  std::set<std::string> pvars(def.params.begin(), def.params.end());
  pvars.insert(locals.begin(), locals.end());

  // Condition: candidate pre is the external pre with locals at nil.
  std::vector<AssertionPtr> parts{ext.pre};
  for (const auto& z : locals) {
    parts.push_back(mk_boolassert(mk_eq(mk_pvar(z), mk_nil())));
  }
  auto expected_pre = mk_star_many(parts);
  auto pre_cmp = check_equiv(reg, *candidate.pre, *expected_pre, pvars, b);
  if (!pre_cmp.valid) {
    out.message = "internal pre-condition is not the external one with locals "
                  "initialised to nil";
    out.counterexample = pre_cmp.counterexample;
    out.bounded = pre_cmp.bounded;
    return out;
  }
  out.bounded = pre_cmp.bounded;

  // Condition: the return expression evaluates in every success post-model.
  if (!is_false(*candidate.post_ok)) {
    auto ret_in_val =
        mk_star(mk_boolassert(mk_inset(def.return_expr, Carrier::Val)),
                mk_trueassert());
    auto v =
        check_valid_implication(reg, *candidate.post_ok, *ret_in_val, pvars, b);
    out.bounded = out.bounded || v.bounded;
    if (!v.valid) {
      out.message =
          "return expression may fail to evaluate in a success post-model";
      out.counterexample = v.counterexample;
      return out;
    }
  }

  // Fresh logical mirrors for parameters and locals.
  std::set<std::string> avoid;
  for (const auto& a :
       {candidate.post_ok, candidate.post_err, ext.post_ok, ext.post_err}) {
    auto vars = fv_assertion(*a);
    avoid.insert(vars.lvars.begin(), vars.lvars.end());
  }
  VarSubst to_lvar;
  std::vector<std::string> fresh;
  for (const auto& p : pvars) {
    std::string name = fresh_name("p_" + p, avoid);
    avoid.insert(name);
    fresh.push_back(name);
    to_lvar.pvars.emplace(p, mk_lvar(name));
  }

  // ok: external <=> exists p. internal[p/pvars] * ret = E[p/pvars]
  {
    auto body = mk_star(
        subst_assertion(candidate.post_ok, to_lvar),
        mk_boolassert(
            mk_eq(mk_pvar("ret"), subst_expr(def.return_expr, to_lvar))));
    auto derived = mk_exists_many(fresh, body);
    auto cmp = mode_compare(reg, derived, ext.post_ok, mode, {"ret"}, b);
    out.bounded = out.bounded || cmp.bounded;
    if (!cmp.ok) {
      out.message =
          "success post-condition internalisation failed: " + cmp.message;
      out.counterexample = cmp.counterexample;
      return out;
    }
  }
  // err: external <=> exists p. internal[p/pvars]
  {
    auto derived =
        mk_exists_many(fresh, subst_assertion(candidate.post_err, to_lvar));
    auto cmp = mode_compare(reg, derived, ext.post_err, mode, {"err"}, b);
    out.bounded = out.bounded || cmp.bounded;
    if (!cmp.ok) {
      out.message =
          "error post-condition internalisation failed: " + cmp.message;
      out.counterexample = cmp.counterexample;
      return out;
    }
  }
  out.ok = true;
  return out;
}

}  // namespace esl
