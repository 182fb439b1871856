#include "esl/expr.hpp"

namespace esl {

namespace {
ExprPtr make(Expr::Node n) { return std::make_shared<const Expr>(Expr{std::move(n)}); }
}  // namespace

ExprPtr mk_const(Value v) { return make(Expr::Const{std::move(v)}); }
ExprPtr mk_nat(uint64_t n) { return mk_const(Value::nat(n)); }
ExprPtr mk_bool(bool b) { return mk_const(Value::boolean(b)); }
ExprPtr mk_str(std::string s) { return mk_const(Value::str(std::move(s))); }
ExprPtr mk_nil() { return mk_const(Value::nil()); }
ExprPtr mk_pvar(std::string name) { return make(Expr::PVar{std::move(name)}); }
ExprPtr mk_lvar(std::string name) { return make(Expr::LVar{std::move(name)}); }
ExprPtr mk_unary(UnOp op, ExprPtr e) { return make(Expr::Unary{op, std::move(e)}); }
ExprPtr mk_binary(BinOp op, ExprPtr a, ExprPtr b) {
  return make(Expr::Binary{op, std::move(a), std::move(b)});
}
ExprPtr mk_list(std::vector<ExprPtr> elems) {
  return make(Expr::ListLit{std::move(elems)});
}
ExprPtr mk_inset(ExprPtr e, Carrier c) { return make(Expr::InSet{std::move(e), c}); }
ExprPtr mk_mathapp(std::string name, std::vector<ExprPtr> args) {
  return make(Expr::MathApp{std::move(name), std::move(args)});
}

ExprPtr mk_eq(ExprPtr a, ExprPtr b) { return mk_binary(BinOp::Eq, std::move(a), std::move(b)); }
ExprPtr mk_add(ExprPtr a, ExprPtr b) { return mk_binary(BinOp::Add, std::move(a), std::move(b)); }
ExprPtr mk_sub(ExprPtr a, ExprPtr b) { return mk_binary(BinOp::Sub, std::move(a), std::move(b)); }
ExprPtr mk_not(ExprPtr e) { return mk_unary(UnOp::Not, std::move(e)); }

bool expr_equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& na) -> bool {
        using T = std::decay_t<decltype(na)>;
        const auto& nb = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Expr::Const>) {
          return na.v == nb.v;
        } else if constexpr (std::is_same_v<T, Expr::PVar> ||
                             std::is_same_v<T, Expr::LVar>) {
          return na.name == nb.name;
        } else if constexpr (std::is_same_v<T, Expr::Unary>) {
          return na.op == nb.op && expr_equal(*na.arg, *nb.arg);
        } else if constexpr (std::is_same_v<T, Expr::Binary>) {
          return na.op == nb.op && expr_equal(*na.lhs, *nb.lhs) &&
                 expr_equal(*na.rhs, *nb.rhs);
        } else if constexpr (std::is_same_v<T, Expr::ListLit>) {
          if (na.elems.size() != nb.elems.size()) return false;
          for (size_t i = 0; i < na.elems.size(); ++i) {
            if (!expr_equal(*na.elems[i], *nb.elems[i])) return false;
          }
          return true;
        } else if constexpr (std::is_same_v<T, Expr::InSet>) {
          return na.set == nb.set && expr_equal(*na.arg, *nb.arg);
        } else {
          static_assert(std::is_same_v<T, Expr::MathApp>);
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
void collect_vars(const Expr& e, std::set<std::string>* pvars,
                  std::set<std::string>* lvars) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Expr::PVar>) {
          if (pvars) pvars->insert(n.name);
        } else if constexpr (std::is_same_v<T, Expr::LVar>) {
          if (lvars) lvars->insert(n.name);
        } else if constexpr (std::is_same_v<T, Expr::Unary>) {
          collect_vars(*n.arg, pvars, lvars);
        } else if constexpr (std::is_same_v<T, Expr::Binary>) {
          collect_vars(*n.lhs, pvars, lvars);
          collect_vars(*n.rhs, pvars, lvars);
        } else if constexpr (std::is_same_v<T, Expr::ListLit>) {
          for (const auto& el : n.elems) collect_vars(*el, pvars, lvars);
        } else if constexpr (std::is_same_v<T, Expr::InSet>) {
          collect_vars(*n.arg, pvars, lvars);
        } else if constexpr (std::is_same_v<T, Expr::MathApp>) {
          for (const auto& a : n.args) collect_vars(*a, pvars, lvars);
        }
      },
      e.node);
}
}  // namespace

std::set<std::string> pv(const Expr& e) {
  std::set<std::string> out;
  collect_vars(e, &out, nullptr);
  return out;
}

std::set<std::string> lv(const Expr& e) {
  std::set<std::string> out;
  collect_vars(e, nullptr, &out);
  return out;
}

bool is_program_expr(const Expr& e) { return lv(e).empty(); }

ExprPtr subst_expr(const ExprPtr& e, const VarSubst& sub) {
  return std::visit(
      [&](const auto& n) -> ExprPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Expr::Const>) {
          return e;
        } else if constexpr (std::is_same_v<T, Expr::PVar>) {
          auto it = sub.pvars.find(n.name);
          return it != sub.pvars.end() ? it->second : e;
        } else if constexpr (std::is_same_v<T, Expr::LVar>) {
          auto it = sub.lvars.find(n.name);
          return it != sub.lvars.end() ? it->second : e;
        } else if constexpr (std::is_same_v<T, Expr::Unary>) {
          return mk_unary(n.op, subst_expr(n.arg, sub));
        } else if constexpr (std::is_same_v<T, Expr::Binary>) {
          return mk_binary(n.op, subst_expr(n.lhs, sub), subst_expr(n.rhs, sub));
        } else if constexpr (std::is_same_v<T, Expr::ListLit>) {
          std::vector<ExprPtr> elems;
          elems.reserve(n.elems.size());
          for (const auto& el : n.elems) elems.push_back(subst_expr(el, sub));
          return mk_list(std::move(elems));
        } else if constexpr (std::is_same_v<T, Expr::InSet>) {
          return mk_inset(subst_expr(n.arg, sub), n.set);
        } else {
          static_assert(std::is_same_v<T, Expr::MathApp>);
          std::vector<ExprPtr> args;
          args.reserve(n.args.size());
          for (const auto& a : n.args) args.push_back(subst_expr(a, sub));
          return mk_mathapp(n.name, std::move(args));
        }
      },
      e->node);
}

}  // namespace esl
