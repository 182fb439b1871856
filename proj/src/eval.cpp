#include "esl/eval.hpp"

#include <algorithm>
#include <functional>

namespace esl {

namespace {

const Substitution kEmptyTheta;

std::optional<Value> undef() { return std::nullopt; }

bool is_nat_list(const Value& v) {
  if (!v.is_list()) return false;
  for (const auto& e : v.as_list()) {
    if (!e.is_nat()) return false;
  }
  return true;
}

// Sets of naturals are encoded as sorted, duplicate-free nat lists.
bool is_canonical_set(const Value& v) {
  if (!is_nat_list(v)) return false;
  const auto& l = v.as_list();
  for (size_t i = 1; i < l.size(); ++i) {
    if (!(l[i - 1].as_nat() < l[i].as_nat())) return false;
  }
  return true;
}

bool is_tree(const Value& v) {
  if (v.is_nil()) return true;
  if (!v.is_list()) return false;
  const auto& n = v.as_list();
  if (n.size() != 3) return false;
  const Value& hd = n[0];
  if (!hd.is_list() || hd.as_list().size() != 2) return false;
  if (!hd.as_list()[0].is_nat() || !hd.as_list()[1].is_nat()) return false;
  return is_tree(n[1]) && is_tree(n[2]);
}

void tree_keys(const Value& t, std::vector<uint64_t>* out) {
  if (t.is_nil()) return;
  const auto& n = t.as_list();
  out->push_back(n[0].as_list()[1].as_nat());
  tree_keys(n[1], out);
  tree_keys(n[2], out);
}

uint64_t tree_height(const Value& t) {
  if (t.is_nil()) return 0;
  const auto& n = t.as_list();
  return 1 + std::max(tree_height(n[1]), tree_height(n[2]));
}

Value bst_insert_math(const Value& t, const Value& node) {
  if (t.is_nil()) {
    return Value::list({node, Value::nil(), Value::nil()});
  }
  const auto& n = t.as_list();
  uint64_t k = n[0].as_list()[1].as_nat();
  uint64_t v = node.as_list()[1].as_nat();
  if (v < k) {
    return Value::list({n[0], bst_insert_math(n[1], node), n[2]});
  }
  if (k < v) {
    return Value::list({n[0], n[1], bst_insert_math(n[2], node)});
  }
  return t;
}

}  // namespace

bool is_mathfn(const std::string& name) {
  static const std::set<std::string> names = {
      "rev", "min", "uplus", "height", "treekeys", "bst_insert"};
  return names.count(name) > 0;
}

std::vector<std::string> mathfn_names() {
  return {"rev", "min", "uplus", "height", "treekeys", "bst_insert"};
}

std::optional<Value> eval_mathfn(const std::string& name,
                                 const std::vector<Value>& args) {
  if (name == "rev") {
    if (args.size() != 1 || !args[0].is_list()) return undef();
    Value::List l = args[0].as_list();
    std::reverse(l.begin(), l.end());
    return Value::list(std::move(l));
  }
  if (name == "min") {
    if (args.size() != 1 || !is_nat_list(args[0]) || args[0].as_list().empty())
      return undef();
    uint64_t m = args[0].as_list()[0].as_nat();
    for (const auto& e : args[0].as_list()) m = std::min(m, e.as_nat());
    return Value::nat(m);
  }
  if (name == "uplus") {
    // Disjoint union of canonical sets; undefined on overlap.
    if (args.size() != 2 || !is_canonical_set(args[0]) ||
        !is_canonical_set(args[1]))
      return undef();
    std::vector<uint64_t> merged;
    for (const auto& e : args[0].as_list()) merged.push_back(e.as_nat());
    for (const auto& e : args[1].as_list()) merged.push_back(e.as_nat());
    std::sort(merged.begin(), merged.end());
    for (size_t i = 1; i < merged.size(); ++i) {
      if (merged[i - 1] == merged[i]) return undef();
    }
    Value::List out;
    for (uint64_t n : merged) out.push_back(Value::nat(n));
    return Value::list(std::move(out));
  }
  if (name == "height") {
    if (args.size() != 1 || !is_tree(args[0])) return undef();
    return Value::nat(tree_height(args[0]));
  }
  if (name == "treekeys") {
    if (args.size() != 1 || !is_tree(args[0])) return undef();
    std::vector<uint64_t> ks;
    tree_keys(args[0], &ks);
    std::sort(ks.begin(), ks.end());
    Value::List out;
    for (uint64_t k : ks) out.push_back(Value::nat(k));
    return Value::list(std::move(out));
  }
  if (name == "bst_insert") {
    if (args.size() != 2 || !is_tree(args[0])) return undef();
    const Value& node = args[1];
    if (!node.is_list() || node.as_list().size() != 2 ||
        !node.as_list()[0].is_nat() || !node.as_list()[1].is_nat())
      return undef();
    return bst_insert_math(args[0], node);
  }
  return undef();
}

namespace {
struct MapEnv final : EvalEnv {
  const Substitution* theta;
  const Store* store;
  const Value* lvar(const std::string& name) const override {
    auto it = theta->find(name);
    return it == theta->end() ? nullptr : &it->second;
  }
  const Value* pvar(const std::string& name) const override {
    auto it = store->find(name);
    return it == store->end() ? nullptr : &it->second;
  }
};
}  // namespace

std::optional<Value> eval_expr(const Store& store, const Expr& e) {
  return eval_expr(kEmptyTheta, store, e);
}

std::optional<Value> eval_expr(const Substitution& theta, const Store& store,
                               const Expr& e) {
  MapEnv env;
  env.theta = &theta;
  env.store = &store;
  return eval_expr(env, e);
}

std::optional<Value> eval_expr(const EvalEnv& env, const Expr& e) {
  using R = std::optional<Value>;
  return std::visit(
      [&](const auto& n) -> R {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Expr::Const>) {
          return n.v;
        } else if constexpr (std::is_same_v<T, Expr::PVar>) {
          const Value* v = env.pvar(n.name);
          if (!v) return undef();
          return *v;
        } else if constexpr (std::is_same_v<T, Expr::LVar>) {
          const Value* v = env.lvar(n.name);
          if (!v) return undef();
          return *v;
        } else if constexpr (std::is_same_v<T, Expr::Unary>) {
          R a = eval_expr(env, *n.arg);
          if (!a) return undef();
          switch (n.op) {
            case UnOp::Not:
              if (!a->is_bool()) return undef();
              return Value::boolean(!a->as_bool());
            case UnOp::Len:
              if (!a->is_list()) return undef();
              return Value::nat(a->as_list().size());
          }
          return undef();
        } else if constexpr (std::is_same_v<T, Expr::Binary>) {
          R a = eval_expr(env, *n.lhs);
          R b = eval_expr(env, *n.rhs);
          if (!a || !b) return undef();
          switch (n.op) {
            case BinOp::Add:
              if (!a->is_nat() || !b->is_nat()) return undef();
              return Value::nat(a->as_nat() + b->as_nat());
            case BinOp::Sub:
              // Natural subtraction is partial, not truncated; this keeps
              // list(x', n - 1) unsatisfiable at n = 0.
              if (!a->is_nat() || !b->is_nat() || a->as_nat() < b->as_nat())
                return undef();
              return Value::nat(a->as_nat() - b->as_nat());
            case BinOp::Eq:
              return Value::boolean(*a == *b);
            case BinOp::Lt: {
              if (a->is_nat() && b->is_nat())
                return Value::boolean(a->as_nat() < b->as_nat());
              // Overloaded comparison against a set of naturals: every
              // element must be on the right side of the bound.
              if (a->is_list() && b->is_nat()) {
                if (!is_nat_list(*a)) return undef();
                for (const auto& el : a->as_list()) {
                  if (!(el.as_nat() < b->as_nat())) return Value::boolean(false);
                }
                return Value::boolean(true);
              }
              if (a->is_nat() && b->is_list()) {
                if (!is_nat_list(*b)) return undef();
                for (const auto& el : b->as_list()) {
                  if (!(a->as_nat() < el.as_nat())) return Value::boolean(false);
                }
                return Value::boolean(true);
              }
              return undef();
            }
            case BinOp::And:
              if (!a->is_bool() || !b->is_bool()) return undef();
              return Value::boolean(a->as_bool() && b->as_bool());
            case BinOp::Cons: {
              if (!b->is_list()) return undef();
              Value::List out;
              out.reserve(b->as_list().size() + 1);
              out.push_back(*a);
              out.insert(out.end(), b->as_list().begin(), b->as_list().end());
              return Value::list(std::move(out));
            }
            case BinOp::Concat: {
              if (!a->is_list() || !b->is_list()) return undef();
              Value::List out = a->as_list();
              out.insert(out.end(), b->as_list().begin(), b->as_list().end());
              return Value::list(std::move(out));
            }
            case BinOp::Mod:
              if (!a->is_nat() || !b->is_nat() || b->as_nat() == 0)
                return undef();
              return Value::nat(a->as_nat() % b->as_nat());
          }
          return undef();
        } else if constexpr (std::is_same_v<T, Expr::ListLit>) {
          Value::List out;
          out.reserve(n.elems.size());
          for (const auto& el : n.elems) {
            R v = eval_expr(env, *el);
            if (!v) return undef();
            out.push_back(*v);
          }
          return Value::list(std::move(out));
        } else if constexpr (std::is_same_v<T, Expr::InSet>) {
          // Membership is total: it is false, not undefined, when the
          // argument fails to evaluate.
          R v = eval_expr(env, *n.arg);
          switch (n.set) {
            case Carrier::Val: return Value::boolean(v.has_value());
            case Carrier::Nat: return Value::boolean(v && v->is_nat());
            case Carrier::Bool: return Value::boolean(v && v->is_bool());
            case Carrier::Str: return Value::boolean(v && v->is_str());
            case Carrier::List: return Value::boolean(v && v->is_list());
          }
          return undef();
        } else {
          static_assert(std::is_same_v<T, Expr::MathApp>);
          std::vector<Value> args;
          args.reserve(n.args.size());
          for (const auto& a : n.args) {
            R v = eval_expr(env, *a);
            if (!v) return undef();
            args.push_back(*v);
          }
          return eval_mathfn(n.name, args);
        }
      },
      e.node);
}

}  // namespace esl
