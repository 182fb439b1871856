#include "esl/assertion.hpp"

#include <sstream>

#include "esl/printer.hpp"

namespace esl {

namespace {
AssertionPtr make(Assertion::Node n) {
  return std::make_shared<const Assertion>(Assertion{std::move(n)});
}
}  // namespace

AssertionPtr mk_boolassert(ExprPtr e) { return make(Assertion::BoolA{std::move(e)}); }
AssertionPtr mk_false() { return make(Assertion::FalseA{}); }
AssertionPtr mk_implies(AssertionPtr a, AssertionPtr b) {
  return make(Assertion::Implies{std::move(a), std::move(b)});
}
AssertionPtr mk_exists(std::string var, AssertionPtr body) {
  return make(Assertion::Exists{std::move(var), std::move(body)});
}
AssertionPtr mk_exists_many(const std::vector<std::string>& vars, AssertionPtr body) {
  AssertionPtr out = std::move(body);
  for (auto it = vars.rbegin(); it != vars.rend(); ++it) {
    out = mk_exists(*it, std::move(out));
  }
  return out;
}
AssertionPtr mk_emp() { return make(Assertion::Emp{}); }
AssertionPtr mk_cell(ExprPtr addr, ExprPtr val) {
  return make(Assertion::Cell{std::move(addr), std::move(val)});
}
AssertionPtr mk_freed(ExprPtr addr) {
  return make(Assertion::FreedCell{std::move(addr)});
}
AssertionPtr mk_star(AssertionPtr a, AssertionPtr b) {
  return make(Assertion::Star{std::move(a), std::move(b)});
}
AssertionPtr mk_star_many(std::vector<AssertionPtr> parts) {
  if (parts.empty()) return mk_emp();
  AssertionPtr out = parts.back();
  for (size_t i = parts.size() - 1; i-- > 0;) {
    out = mk_star(parts[i], std::move(out));
  }
  return out;
}
AssertionPtr mk_iterstar(std::string var, ExprPtr lo, ExprPtr hi, AssertionPtr body) {
  return make(Assertion::IterStar{std::move(var), std::move(lo), std::move(hi),
                                  std::move(body)});
}
AssertionPtr mk_pred(std::string name, std::vector<ExprPtr> args) {
  return make(Assertion::Pred{std::move(name), std::move(args)});
}

AssertionPtr mk_or(AssertionPtr a, AssertionPtr b) {
  return mk_implies(mk_implies(std::move(a), mk_false()), std::move(b));
}
AssertionPtr mk_or_many(const std::vector<AssertionPtr>& disjuncts) {
  if (disjuncts.empty()) return mk_false();
  AssertionPtr out = disjuncts.back();
  for (size_t i = disjuncts.size() - 1; i-- > 0;) {
    out = mk_or(disjuncts[i], std::move(out));
  }
  return out;
}
AssertionPtr mk_and(AssertionPtr a, AssertionPtr b) {
  return mk_implies(mk_implies(std::move(a), mk_implies(std::move(b), mk_false())),
                    mk_false());
}
AssertionPtr mk_trueassert() { return mk_implies(mk_false(), mk_false()); }

bool is_false(const Assertion& a) {
  return std::holds_alternative<Assertion::FalseA>(a.node);
}

bool match_or(const Assertion& a, AssertionPtr* lhs, AssertionPtr* rhs) {
  const auto* imp = std::get_if<Assertion::Implies>(&a.node);
  if (!imp) return false;
  const auto* neg = std::get_if<Assertion::Implies>(&imp->lhs->node);
  if (!neg || !is_false(*neg->rhs)) return false;
  // ((A => False) => B), but not True (False => False shapes).
  if (match_true(a)) return false;
  if (lhs) *lhs = neg->lhs;
  if (rhs) *rhs = imp->rhs;
  return true;
}

bool match_and(const Assertion& a, AssertionPtr* lhs, AssertionPtr* rhs) {
  // ((A => (B => False)) => False)
  const auto* outer = std::get_if<Assertion::Implies>(&a.node);
  if (!outer || !is_false(*outer->rhs)) return false;
  const auto* inner = std::get_if<Assertion::Implies>(&outer->lhs->node);
  if (!inner) return false;
  const auto* negb = std::get_if<Assertion::Implies>(&inner->rhs->node);
  if (!negb || !is_false(*negb->rhs)) return false;
  if (lhs) *lhs = inner->lhs;
  if (rhs) *rhs = negb->lhs;
  return true;
}

bool match_true(const Assertion& a) {
  const auto* imp = std::get_if<Assertion::Implies>(&a.node);
  return imp && is_false(*imp->lhs) && is_false(*imp->rhs);
}

namespace {
void fv(const Assertion& a, std::set<std::string>& bound, AssertVars& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        auto add_expr = [&](const Expr& e) {
          for (const auto& v : lv(e)) {
            if (!bound.count(v)) out.lvars.insert(v);
          }
          for (const auto& v : pv(e)) out.pvars.insert(v);
        };
        if constexpr (std::is_same_v<T, Assertion::BoolA>) {
          add_expr(*n.e);
        } else if constexpr (std::is_same_v<T, Assertion::FalseA> ||
                             std::is_same_v<T, Assertion::Emp>) {
        } else if constexpr (std::is_same_v<T, Assertion::Implies>) {
          fv(*n.lhs, bound, out);
          fv(*n.rhs, bound, out);
        } else if constexpr (std::is_same_v<T, Assertion::Exists>) {
          bool was = bound.count(n.var) > 0;
          bound.insert(n.var);
          fv(*n.body, bound, out);
          if (!was) bound.erase(n.var);
        } else if constexpr (std::is_same_v<T, Assertion::Cell>) {
          add_expr(*n.addr);
          add_expr(*n.val);
        } else if constexpr (std::is_same_v<T, Assertion::FreedCell>) {
          add_expr(*n.addr);
        } else if constexpr (std::is_same_v<T, Assertion::Star>) {
          fv(*n.lhs, bound, out);
          fv(*n.rhs, bound, out);
        } else if constexpr (std::is_same_v<T, Assertion::IterStar>) {
          add_expr(*n.lo);
          add_expr(*n.hi);
          bool was = bound.count(n.var) > 0;
          bound.insert(n.var);
          fv(*n.body, bound, out);
          if (!was) bound.erase(n.var);
        } else {
          static_assert(std::is_same_v<T, Assertion::Pred>);
          for (const auto& arg : n.args) add_expr(*arg);
        }
      },
      a.node);
}
}  // namespace

AssertVars fv_assertion(const Assertion& a) {
  AssertVars out;
  std::set<std::string> bound;
  fv(a, bound, out);
  return out;
}

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  if (!avoid.count(base)) return base;
  for (int i = 0;; ++i) {
    std::string cand = base + "_f" + std::to_string(i);
    if (!avoid.count(cand)) return cand;
  }
}

namespace {
std::set<std::string> range_lvars(const VarSubst& sub) {
  std::set<std::string> out;
  for (const auto& [k, e] : sub.lvars) {
    auto vs = lv(*e);
    out.insert(vs.begin(), vs.end());
  }
  for (const auto& [k, e] : sub.pvars) {
    auto vs = lv(*e);
    out.insert(vs.begin(), vs.end());
  }
  return out;
}
}  // namespace

namespace {
// The range variables are computed once per outer substitution; binders
// consult the precomputed set instead of rescanning the mapping.
AssertionPtr subst_rec(const AssertionPtr& a, const VarSubst& sub,
                       const std::set<std::string>& range) {
  if (sub.lvars.empty() && sub.pvars.empty()) return a;
  return std::visit(
      [&](const auto& n) -> AssertionPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Assertion::BoolA>) {
          return mk_boolassert(subst_expr(n.e, sub));
        } else if constexpr (std::is_same_v<T, Assertion::FalseA> ||
                             std::is_same_v<T, Assertion::Emp>) {
          return a;
        } else if constexpr (std::is_same_v<T, Assertion::Implies>) {
          return mk_implies(subst_rec(n.lhs, sub, range),
                            subst_rec(n.rhs, sub, range));
        } else if constexpr (std::is_same_v<T, Assertion::Exists>) {
          VarSubst inner = sub;
          inner.lvars.erase(n.var);
          if (inner.lvars.empty() && inner.pvars.empty()) return a;
          if (range.count(n.var)) {
            std::set<std::string> avoid = range;
            auto bodyfv = fv_assertion(*n.body);
            avoid.insert(bodyfv.lvars.begin(), bodyfv.lvars.end());
            for (const auto& [k, e] : inner.lvars) avoid.insert(k);
            std::string renamed = fresh_name(n.var, avoid);
            VarSubst rename;
            rename.lvars.emplace(n.var, mk_lvar(renamed));
            AssertionPtr body = subst_assertion(n.body, rename);
            return mk_exists(renamed, subst_rec(body, inner, range));
          }
          return mk_exists(n.var, subst_rec(n.body, inner, range));
        } else if constexpr (std::is_same_v<T, Assertion::Cell>) {
          return mk_cell(subst_expr(n.addr, sub), subst_expr(n.val, sub));
        } else if constexpr (std::is_same_v<T, Assertion::FreedCell>) {
          return mk_freed(subst_expr(n.addr, sub));
        } else if constexpr (std::is_same_v<T, Assertion::Star>) {
          return mk_star(subst_rec(n.lhs, sub, range),
                         subst_rec(n.rhs, sub, range));
        } else if constexpr (std::is_same_v<T, Assertion::IterStar>) {
          VarSubst inner = sub;
          inner.lvars.erase(n.var);
          ExprPtr lo = subst_expr(n.lo, sub);
          ExprPtr hi = subst_expr(n.hi, sub);
          if (range.count(n.var)) {
            std::set<std::string> avoid = range;
            auto bodyfv = fv_assertion(*n.body);
            avoid.insert(bodyfv.lvars.begin(), bodyfv.lvars.end());
            std::string renamed = fresh_name(n.var, avoid);
            VarSubst rename;
            rename.lvars.emplace(n.var, mk_lvar(renamed));
            AssertionPtr body = subst_assertion(n.body, rename);
            return mk_iterstar(renamed, std::move(lo), std::move(hi),
                               subst_rec(body, inner, range));
          }
          return mk_iterstar(n.var, std::move(lo), std::move(hi),
                             subst_rec(n.body, inner, range));
        } else {
          static_assert(std::is_same_v<T, Assertion::Pred>);
          std::vector<ExprPtr> args;
          args.reserve(n.args.size());
          for (const auto& arg : n.args) args.push_back(subst_expr(arg, sub));
          return mk_pred(n.name, std::move(args));
        }
      },
      a->node);
}
}  // namespace

AssertionPtr subst_assertion(const AssertionPtr& a, const VarSubst& sub) {
  if (sub.lvars.empty() && sub.pvars.empty()) return a;
  return subst_rec(a, sub, range_lvars(sub));
}

bool assertion_equal(const Assertion& a, const Assertion& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& na) -> bool {
        using T = std::decay_t<decltype(na)>;
        const auto& nb = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Assertion::BoolA>) {
          return expr_equal(*na.e, *nb.e);
        } else if constexpr (std::is_same_v<T, Assertion::FalseA> ||
                             std::is_same_v<T, Assertion::Emp>) {
          return true;
        } else if constexpr (std::is_same_v<T, Assertion::Implies>) {
          return assertion_equal(*na.lhs, *nb.lhs) && assertion_equal(*na.rhs, *nb.rhs);
        } else if constexpr (std::is_same_v<T, Assertion::Exists>) {
          return na.var == nb.var && assertion_equal(*na.body, *nb.body);
        } else if constexpr (std::is_same_v<T, Assertion::Cell>) {
          return expr_equal(*na.addr, *nb.addr) && expr_equal(*na.val, *nb.val);
        } else if constexpr (std::is_same_v<T, Assertion::FreedCell>) {
          return expr_equal(*na.addr, *nb.addr);
        } else if constexpr (std::is_same_v<T, Assertion::Star>) {
          return assertion_equal(*na.lhs, *nb.lhs) && assertion_equal(*na.rhs, *nb.rhs);
        } else if constexpr (std::is_same_v<T, Assertion::IterStar>) {
          return na.var == nb.var && expr_equal(*na.lo, *nb.lo) &&
                 expr_equal(*na.hi, *nb.hi) && assertion_equal(*na.body, *nb.body);
        } else {
          static_assert(std::is_same_v<T, Assertion::Pred>);
          if (na.name != nb.name || na.args.size() != nb.args.size()) return false;
          for (size_t i = 0; i < na.args.size(); ++i) {
            if (!expr_equal(*na.args[i], *nb.args[i])) return false;
          }
          return true;
        }
      },
      a.node);
}

namespace {
// Precedence: exists/implies 0, or 1, and 2, star 3, atoms 4. A child is
// parenthesised whenever its own level is below what its context requires,
// so the printed form reparses to the same grouping.
int prec_of(const Assertion& a) {
  AssertionPtr l, r;
  if (match_true(a)) return 4;
  if (match_or(a, &l, &r)) return 1;
  if (match_and(a, &l, &r)) return 2;
  return std::visit(
      [](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Assertion::Implies> ||
                      std::is_same_v<T, Assertion::Exists>) {
          return 0;
        } else if constexpr (std::is_same_v<T, Assertion::Star>) {
          return 3;
        } else {
          return 4;
        }
      },
      a.node);
}

void show(const Assertion& a, std::ostringstream& out);

void show_child(const Assertion& a, std::ostringstream& out, int min_prec) {
  if (prec_of(a) < min_prec) {
    out << '(';
    show(a, out);
    out << ')';
  } else {
    show(a, out);
  }
}

void show(const Assertion& a, std::ostringstream& out) {
  AssertionPtr l, r;
  if (match_true(a)) {
    out << "True";
    return;
  }
  if (match_or(a, &l, &r)) {
    show_child(*l, out, 2);
    out << " \\/ ";
    show_child(*r, out, 1);
    return;
  }
  if (match_and(a, &l, &r)) {
    show_child(*l, out, 3);
    out << " /\\ ";
    show_child(*r, out, 2);
    return;
  }
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Assertion::BoolA>) {
          out << show_lexpr(*n.e);
        } else if constexpr (std::is_same_v<T, Assertion::FalseA>) {
          out << "False";
        } else if constexpr (std::is_same_v<T, Assertion::Implies>) {
          show_child(*n.lhs, out, 1);
          out << " => ";
          show_child(*n.rhs, out, 0);
        } else if constexpr (std::is_same_v<T, Assertion::Exists>) {
          out << "exists " << n.var;
          const Assertion* body = n.body.get();
          while (const auto* e = std::get_if<Assertion::Exists>(&body->node)) {
            out << ", " << e->var;
            body = e->body.get();
          }
          out << ". ";
          show(*body, out);
        } else if constexpr (std::is_same_v<T, Assertion::Emp>) {
          out << "emp";
        } else if constexpr (std::is_same_v<T, Assertion::Cell>) {
          out << show_lexpr(*n.addr) << " |-> " << show_lexpr(*n.val);
        } else if constexpr (std::is_same_v<T, Assertion::FreedCell>) {
          out << show_lexpr(*n.addr) << " |-> #";
        } else if constexpr (std::is_same_v<T, Assertion::Star>) {
          show_child(*n.lhs, out, 4);
          out << " * ";
          show_child(*n.rhs, out, 3);
        } else if constexpr (std::is_same_v<T, Assertion::IterStar>) {
          out << "bigstar " << n.var << " in [" << show_lexpr(*n.lo) << ", "
              << show_lexpr(*n.hi) << "). ";
          show_child(*n.body, out, 4);
        } else {
          static_assert(std::is_same_v<T, Assertion::Pred>);
          out << n.name << '(';
          bool first = true;
          for (const auto& arg : n.args) {
            if (!first) out << ", ";
            first = false;
            out << show_lexpr(*arg);
          }
          out << ')';
        }
      },
      a.node);
}
}  // namespace

std::string show_assertion(const Assertion& a) {
  std::ostringstream out;
  show(a, out);
  return out.str();
}

}  // namespace esl
