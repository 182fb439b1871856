#include "esl/sat.hpp"

#include "esl/printer.hpp"

#include <algorithm>
#include <functional>

namespace esl {

namespace {

enum class Tri { No, Yes, Maybe };

Tri tri_or(Tri a, Tri b) {
  if (a == Tri::Yes || b == Tri::Yes) return Tri::Yes;
  if (a == Tri::Maybe || b == Tri::Maybe) return Tri::Maybe;
  return Tri::No;
}

// ---------------------------------------------------------------------------
// Enumeration universes.
// ---------------------------------------------------------------------------

void harvest_strings(const Expr& e, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Expr::Const>) {
          if (n.v.is_str()) out.insert(n.v.as_str());
        } else if constexpr (std::is_same_v<T, Expr::Unary>) {
          harvest_strings(*n.arg, out);
        } else if constexpr (std::is_same_v<T, Expr::Binary>) {
          harvest_strings(*n.lhs, out);
          harvest_strings(*n.rhs, out);
        } else if constexpr (std::is_same_v<T, Expr::ListLit>) {
          for (const auto& el : n.elems) harvest_strings(*el, out);
        } else if constexpr (std::is_same_v<T, Expr::InSet>) {
          harvest_strings(*n.arg, out);
        } else if constexpr (std::is_same_v<T, Expr::MathApp>) {
          for (const auto& a : n.args) harvest_strings(*a, out);
        }
      },
      e.node);
}

void harvest_strings(const Assertion& a, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Assertion::BoolA>) {
          harvest_strings(*n.e, out);
        } else if constexpr (std::is_same_v<T, Assertion::Implies> ||
                             std::is_same_v<T, Assertion::Star>) {
          harvest_strings(*n.lhs, out);
          harvest_strings(*n.rhs, out);
        } else if constexpr (std::is_same_v<T, Assertion::Exists>) {
          harvest_strings(*n.body, out);
        } else if constexpr (std::is_same_v<T, Assertion::Cell>) {
          harvest_strings(*n.addr, out);
          harvest_strings(*n.val, out);
        } else if constexpr (std::is_same_v<T, Assertion::FreedCell>) {
          harvest_strings(*n.addr, out);
        } else if constexpr (std::is_same_v<T, Assertion::IterStar>) {
          harvest_strings(*n.lo, out);
          harvest_strings(*n.hi, out);
          harvest_strings(*n.body, out);
        } else if constexpr (std::is_same_v<T, Assertion::Pred>) {
          for (const auto& arg : n.args) harvest_strings(*arg, out);
        }
      },
      a.node);
}

std::vector<Value> atoms_with_pool(const ModelBounds& b,
                                   const std::set<std::string>& extra) {
  std::vector<Value> out;
  uint64_t nmax = std::max(b.vmax, b.amax);
  for (uint64_t n = 0; n <= nmax; ++n) out.push_back(Value::nat(n));
  out.push_back(Value::boolean(false));
  out.push_back(Value::boolean(true));
  out.push_back(Value::nil());
  std::set<std::string> strings(b.string_pool.begin(), b.string_pool.end());
  strings.insert(extra.begin(), extra.end());
  for (const auto& s : strings) out.push_back(Value::str(s));
  return out;
}

std::vector<Value> universe_with_pool(const ModelBounds& b, uint64_t depth,
                                      const std::set<std::string>& extra) {
  std::vector<Value> out = atoms_with_pool(b, extra);
  std::vector<Value> prev = out;
  for (uint64_t d = 0; d < depth; ++d) {
    std::vector<Value> lists;
    // Lists over the previous layer, lengths 0..list_len, in length-major
    // lexicographic order.
    std::vector<Value::List> frontier = {{}};
    lists.push_back(Value::list({}));
    for (uint64_t len = 1; len <= b.list_len; ++len) {
      std::vector<Value::List> next;
      for (const auto& stem : frontier) {
        for (const auto& v : prev) {
          Value::List l = stem;
          l.push_back(v);
          next.push_back(l);
          lists.push_back(Value::list(l));
        }
      }
      frontier = std::move(next);
    }
    prev = out;
    prev.insert(prev.end(), lists.begin(), lists.end());
    std::swap(prev, out);
    prev = out;
  }
  return out;
}

}  // namespace

std::vector<Value> atom_universe(const ModelBounds& b) {
  return atoms_with_pool(b, {});
}

std::vector<Value> value_universe(const ModelBounds& b, uint64_t depth) {
  return universe_with_pool(b, depth, {});
}

namespace {

// ---------------------------------------------------------------------------
// The solver. Goals are processed left to right against either a heap to be
// consumed (checking mode) or a heap under construction (generation mode).
// Equalities bind existentials by structural matching; pure constraints that
// cannot yet be decided are deferred and retried as bindings grow, with a
// final bounded enumeration fallback.
// ---------------------------------------------------------------------------

// Unfold ancestry: the chain of predicate instances a goal descends from,
// used to prune least-fixpoint recursions that make no progress.
struct AncNode {
  std::string key;
  std::shared_ptr<const AncNode> next;
};
using AncList = std::shared_ptr<const AncNode>;

bool anc_contains(const AncList& a, const std::string& key) {
  for (const AncNode* n = a.get(); n; n = n->next.get()) {
    if (n->key == key) return true;
  }
  return false;
}

struct GoalNode;
using GoalList = std::shared_ptr<const GoalNode>;
struct GoalNode {
  AssertionPtr a;
  uint64_t fuel;
  bool requeued;
  AncList anc;
  GoalList next;
};
GoalList goal_cons(AssertionPtr a, uint64_t fuel, bool requeued, GoalList next,
                   AncList anc = nullptr) {
  return std::make_shared<const GoalNode>(
      GoalNode{std::move(a), fuel, requeued, std::move(anc), std::move(next)});
}

struct Engine;

// Variable bindings as a persistent list: copying a search node is a
// reference-count bump, and shadowing pushes a fresh head. An entry without
// a value registers an introduced-but-unbound variable.
struct BindNode {
  std::string name;
  bool is_lvar;
  std::optional<Value> val;
  std::shared_ptr<const BindNode> next;
};
using Binds = std::shared_ptr<const BindNode>;

const BindNode* find_bind(const Binds& b, bool is_lvar,
                          const std::string& name) {
  for (const BindNode* n = b.get(); n; n = n->next.get()) {
    if (n->is_lvar == is_lvar && n->name == name) return n;
  }
  return nullptr;
}

struct Sigma {
  Binds binds;
  Heap remaining;                // checking mode
  Heap produced;                 // generation mode
  std::vector<ExprPtr> pending;  // deferred pure constraints
  bool slack = false;            // a True absorbed the heap remainder
  uint32_t bound_count = 0;      // bound entries, for progress detection

  void push(bool is_lvar, const std::string& name, std::optional<Value> v) {
    if (v.has_value()) ++bound_count;
    binds = std::make_shared<const BindNode>(
        BindNode{name, is_lvar, std::move(v), binds});
  }
};

using Cont = std::function<Tri(Sigma&)>;

struct Engine {
  const PredRegistry& reg;
  const ModelBounds& bounds;
  bool generating = false;
  const Store* fixed_store = nullptr;  // checking mode
  std::set<std::string> gen_pvars;     // generation mode store domain
  std::vector<Value> lvar_universe;
  std::vector<Value> pvar_universe;
  std::vector<Value> cell_universe;
  uint64_t work = 0;
  bool capped = false;
  bool fuel_hit = false;
  uint64_t fresh_counter = 0;
  // One body instantiation per (predicate, argument list); keyed by content
  // since assertion nodes are ephemeral.
  std::map<std::string, AssertionPtr> inst_cache;

  bool tick() {
    if (++work > bounds.max_enum) {
      capped = true;
      return false;
    }
    return true;
  }
  std::string fresh_internal(const std::string& base) {
    return base + "#" + std::to_string(fresh_counter++);
  }
};

// Evaluation that refuses to guess: undefined results caused by unbound
// variables are reported as "stuck" rather than as genuine undefinedness.
enum class PE { Value_, Undef, Stuck };
struct PEval {
  PE kind;
  std::optional<Value> v;
};

bool has_unbound(const Engine& eng, const Sigma& s, const Expr& e) {
  for (const auto& x : lv(e)) {
    const BindNode* n = find_bind(s.binds, true, x);
    if (n && !n->val.has_value()) return true;
  }
  if (eng.generating) {
    for (const auto& x : pv(e)) {
      const BindNode* n = find_bind(s.binds, false, x);
      if (n && !n->val.has_value()) return true;
    }
  }
  return false;
}

struct SigmaEnv final : EvalEnv {
  const Engine* eng;
  const Sigma* s;
  const Value* lvar(const std::string& name) const override {
    const BindNode* n = find_bind(s->binds, true, name);
    return n && n->val.has_value() ? &*n->val : nullptr;
  }
  const Value* pvar(const std::string& name) const override;
};

PEval peval(const Engine& eng, const Sigma& s, const Expr& e) {
  if (has_unbound(eng, s, e)) return {PE::Stuck, std::nullopt};
  SigmaEnv env;
  env.eng = &eng;
  env.s = &s;
  auto v = eval_expr(env, e);
  if (!v) return {PE::Undef, std::nullopt};
  return {PE::Value_, std::move(v)};
}

const Value* SigmaEnv::pvar(const std::string& name) const {
  if (eng->generating) {
    const BindNode* n = find_bind(s->binds, false, name);
    return n && n->val.has_value() ? &*n->val : nullptr;
  }
  auto it = eng->fixed_store->find(name);
  return it == eng->fixed_store->end() ? nullptr : &it->second;
}

// Renames every binder to a per-instance unique name, so unfolded bodies
// never shadow the ambient bindings and instances stay textually stable.
AssertionPtr rename_binders(const AssertionPtr& a, const std::string& suffix,
                            std::map<std::string, std::string>& scope) {
  return std::visit(
      [&](const auto& n) -> AssertionPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Assertion::Exists>) {
          std::string renamed = n.var + suffix;
          auto saved = scope.find(n.var);
          std::string old = saved != scope.end() ? saved->second : "";
          scope[n.var] = renamed;
          AssertionPtr body = rename_binders(n.body, suffix, scope);
          if (old.empty()) {
            scope.erase(n.var);
          } else {
            scope[n.var] = old;
          }
          return mk_exists(renamed, body);
        } else if constexpr (std::is_same_v<T, Assertion::IterStar>) {
          std::string renamed = n.var + suffix;
          auto saved = scope.find(n.var);
          std::string old = saved != scope.end() ? saved->second : "";
          VarSubst lift;
          for (const auto& [from, to] : scope) lift.lvars.emplace(from, mk_lvar(to));
          ExprPtr lo = subst_expr(n.lo, lift);
          ExprPtr hi = subst_expr(n.hi, lift);
          scope[n.var] = renamed;
          AssertionPtr body = rename_binders(n.body, suffix, scope);
          if (old.empty()) {
            scope.erase(n.var);
          } else {
            scope[n.var] = old;
          }
          return mk_iterstar(renamed, lo, hi, body);
        } else if constexpr (std::is_same_v<T, Assertion::Implies>) {
          return mk_implies(rename_binders(n.lhs, suffix, scope),
                            rename_binders(n.rhs, suffix, scope));
        } else if constexpr (std::is_same_v<T, Assertion::Star>) {
          return mk_star(rename_binders(n.lhs, suffix, scope),
                         rename_binders(n.rhs, suffix, scope));
        } else {
          if (scope.empty()) return a;
          VarSubst lift;
          for (const auto& [from, to] : scope) lift.lvars.emplace(from, mk_lvar(to));
          return subst_assertion(a, lift);
        }
      },
      a->node);
}

AssertionPtr instantiate_pred(Engine& eng, const Assertion::Pred& n) {
  std::string key = n.name;
  key += '(';
  for (const auto& arg : n.args) {
    key += show_lexpr(*arg);
    key += ',';
  }
  key += ')';
  auto hit = eng.inst_cache.find(key);
  if (hit != eng.inst_cache.end()) return hit->second;
  const PredDef* def = eng.reg.find(n.name);
  VarSubst sub;
  for (size_t i = 0; i < def->params.size(); ++i) {
    sub.lvars.emplace(def->params[i], n.args[i]);
  }
  AssertionPtr body = subst_assertion(def->body, sub);
  std::string suffix = "~" + std::to_string(eng.inst_cache.size());
  std::map<std::string, std::string> scope;
  body = rename_binders(body, suffix, scope);
  eng.inst_cache.emplace(std::move(key), body);
  return body;
}

// Materialised views for the classical fallbacks.
Substitution binds_theta(const Sigma& s) {
  Substitution out;
  for (const BindNode* n = s.binds.get(); n; n = n->next.get()) {
    if (n->is_lvar && n->val.has_value()) out.emplace(n->name, *n->val);
  }
  return out;
}
Store binds_store(const Sigma& s) {
  Store out;
  for (const BindNode* n = s.binds.get(); n; n = n->next.get()) {
    if (!n->is_lvar && n->val.has_value()) out.emplace(n->name, *n->val);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structural binding: match an expression pattern against a concrete value,
// binding unbound variables. Returns No on mismatch, Yes on success (possibly
// with new bindings), Maybe when the pattern is not invertible yet.
// ---------------------------------------------------------------------------

struct BindOps {
  Engine& eng;
  Sigma& s;
  bool progressed = false;

  bool bind_lvar(const std::string& x, const Value& v) {
    s.push(true, x, v);
    progressed = true;
    return true;
  }
  bool bind_pvar(const std::string& x, const Value& v) {
    s.push(false, x, v);
    progressed = true;
    return true;
  }

  Tri match(const Expr& e, const Value& v) {
    // Fast path: fully evaluable.
    PEval pe = peval(eng, s, e);
    if (pe.kind == PE::Value_) return *pe.v == v ? Tri::Yes : Tri::No;
    if (pe.kind == PE::Undef) return Tri::No;
    return std::visit(
        [&](const auto& n) -> Tri {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Expr::LVar>) {
            const BindNode* b = find_bind(s.binds, true, n.name);
            if (b && !b->val.has_value()) {
              bind_lvar(n.name, v);
              return Tri::Yes;
            }
            return Tri::Maybe;
          } else if constexpr (std::is_same_v<T, Expr::PVar>) {
            if (eng.generating) {
              const BindNode* b = find_bind(s.binds, false, n.name);
              if (b && !b->val.has_value()) {
                bind_pvar(n.name, v);
                return Tri::Yes;
              }
            }
            return Tri::Maybe;
          } else if constexpr (std::is_same_v<T, Expr::ListLit>) {
            if (!v.is_list() || v.as_list().size() != n.elems.size())
              return Tri::No;
            for (size_t i = 0; i < n.elems.size(); ++i) {
              Tri r = match(*n.elems[i], v.as_list()[i]);
              if (r != Tri::Yes) return r;
            }
            return Tri::Yes;
          } else if constexpr (std::is_same_v<T, Expr::Binary>) {
            if (n.op == BinOp::Cons) {
              if (!v.is_list() || v.as_list().empty()) return Tri::No;
              Tri r = match(*n.lhs, v.as_list().front());
              if (r != Tri::Yes) return r;
              Value::List rest(v.as_list().begin() + 1, v.as_list().end());
              return match(*n.rhs, Value::list(std::move(rest)));
            }
            // Arithmetic inversion for the pervasive x+c / x-c patterns.
            if (n.op == BinOp::Add || n.op == BinOp::Sub) {
              if (!v.is_nat()) return Tri::No;
              PEval l = peval(eng, s, *n.lhs);
              PEval r = peval(eng, s, *n.rhs);
              if (n.op == BinOp::Add && r.kind == PE::Value_ && r.v->is_nat()) {
                if (v.as_nat() < r.v->as_nat()) return Tri::No;
                return match(*n.lhs, Value::nat(v.as_nat() - r.v->as_nat()));
              }
              if (n.op == BinOp::Add && l.kind == PE::Value_ && l.v->is_nat()) {
                if (v.as_nat() < l.v->as_nat()) return Tri::No;
                return match(*n.rhs, Value::nat(v.as_nat() - l.v->as_nat()));
              }
              if (n.op == BinOp::Sub && r.kind == PE::Value_ && r.v->is_nat()) {
                // e - c = v  <=>  e = v + c
                return match(*n.lhs, Value::nat(v.as_nat() + r.v->as_nat()));
              }
              if (n.op == BinOp::Sub && l.kind == PE::Value_ && l.v->is_nat()) {
                // c - e = v  <=>  e = c - v, defined when c >= v
                if (l.v->as_nat() < v.as_nat()) return Tri::No;
                return match(*n.rhs, Value::nat(l.v->as_nat() - v.as_nat()));
              }
              return Tri::Maybe;
            }
            return Tri::Maybe;
          } else if constexpr (std::is_same_v<T, Expr::MathApp>) {
            // List reversal is invertible.
            if (n.name == "rev" && n.args.size() == 1) {
              if (!v.is_list()) return Tri::No;
              Value::List rev(v.as_list().rbegin(), v.as_list().rend());
              return match(*n.args[0], Value::list(std::move(rev)));
            }
            return Tri::Maybe;
          } else {
            return Tri::Maybe;
          }
        },
        e.node);
  }
};

// Attempts an equality constraint; Yes = satisfied (with bindings), No =
// refuted, Maybe = still stuck.
Tri try_equation(Engine& eng, Sigma& s, const Expr& e) {
  const auto* bin = std::get_if<Expr::Binary>(&e.node);
  if (bin && bin->op == BinOp::Eq) {
    PEval l = peval(eng, s, *bin->lhs);
    if (l.kind == PE::Value_) {
      BindOps ops{eng, s};
      return ops.match(*bin->rhs, *l.v);
    }
    PEval r = peval(eng, s, *bin->rhs);
    if (r.kind == PE::Value_) {
      BindOps ops{eng, s};
      return ops.match(*bin->lhs, *r.v);
    }
    return Tri::Maybe;
  }
  if (bin && bin->op == BinOp::And) {
    // Split conjunctions so each side can bind independently.
    Tri a = try_equation(eng, s, *bin->lhs);
    if (a == Tri::No) return Tri::No;
    Tri b = try_equation(eng, s, *bin->rhs);
    if (b == Tri::No) return Tri::No;
    return (a == Tri::Yes && b == Tri::Yes) ? Tri::Yes : Tri::Maybe;
  }
  PEval pe = peval(eng, s, e);
  if (pe.kind == PE::Stuck) return Tri::Maybe;
  if (pe.kind == PE::Undef) return Tri::No;
  return (pe.v->is_bool() && pe.v->as_bool()) ? Tri::Yes : Tri::No;
}

// Re-examines deferred constraints after new bindings. Returns No if any
// constraint is refuted.
Tri settle_pending(Engine& eng, Sigma& s) {
  bool progress = true;
  while (progress) {
    progress = false;
    std::vector<ExprPtr> still;
    for (const auto& c : s.pending) {
      uint32_t before = s.bound_count;
      Tri r = try_equation(eng, s, *c);
      if (r == Tri::No) return Tri::No;
      if (r == Tri::Maybe) {
        still.push_back(c);
      }
      if (s.bound_count != before) progress = true;
    }
    s.pending = std::move(still);
  }
  return s.pending.empty() ? Tri::Yes : Tri::Maybe;
}

bool spatial_free(const Assertion& a) {
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Assertion::BoolA> ||
                      std::is_same_v<T, Assertion::FalseA>) {
          return true;
        } else if constexpr (std::is_same_v<T, Assertion::Implies> ||
                             std::is_same_v<T, Assertion::Star>) {
          return spatial_free(*n.lhs) && spatial_free(*n.rhs);
        } else if constexpr (std::is_same_v<T, Assertion::Exists>) {
          return spatial_free(*n.body);
        } else {
          return false;
        }
      },
      a.node);
}

// Ground classical satisfaction on a concrete sub-heap, used for Implies and
// negation shapes once their variables are bound.
Tri ground_sat(Engine& eng, const Substitution& theta, const Store& store,
               const Heap& heap, const Assertion& a, uint64_t fuel);

Tri ground_sat_star(Engine& eng, const Substitution& theta, const Store& store,
                    const Heap& heap, const Assertion& lhs, const Assertion& rhs,
                    uint64_t fuel) {
  // Enumerate sub-heaps of heap for the left side.
  std::vector<std::pair<Addr, Cell>> cells(heap.begin(), heap.end());
  size_t n = cells.size();
  if (n > 20) {
    eng.capped = true;
    return Tri::Maybe;
  }
  Tri acc = Tri::No;
  for (uint64_t mask = 0; mask < (1ull << n); ++mask) {
    if (!eng.tick()) return tri_or(acc, Tri::Maybe);
    Heap h1, h2;
    for (size_t i = 0; i < n; ++i) {
      if (mask & (1ull << i)) {
        h1.insert(cells[i]);
      } else {
        h2.insert(cells[i]);
      }
    }
    Tri a = ground_sat(eng, theta, store, h1, lhs, fuel);
    if (a == Tri::No) continue;
    Tri b = ground_sat(eng, theta, store, h2, rhs, fuel);
    Tri both = (a == Tri::Yes && b == Tri::Yes)
                   ? Tri::Yes
                   : (b == Tri::No ? Tri::No : Tri::Maybe);
    acc = tri_or(acc, both);
    if (acc == Tri::Yes) return acc;
  }
  return acc;
}

Tri ground_sat(Engine& eng, const Substitution& theta, const Store& store,
               const Heap& heap, const Assertion& a, uint64_t fuel) {
  return std::visit(
      [&](const auto& n) -> Tri {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Assertion::BoolA>) {
          auto v = eval_expr(theta, store, *n.e);
          return (heap.empty() && v && v->is_bool() && v->as_bool()) ? Tri::Yes
                                                                     : Tri::No;
        } else if constexpr (std::is_same_v<T, Assertion::FalseA>) {
          return Tri::No;
        } else if constexpr (std::is_same_v<T, Assertion::Implies>) {
          Tri l = ground_sat(eng, theta, store, heap, *n.lhs, fuel);
          if (l == Tri::No) return Tri::Yes;
          Tri r = ground_sat(eng, theta, store, heap, *n.rhs, fuel);
          if (l == Tri::Yes) return r;
          return r == Tri::Yes ? Tri::Yes : Tri::Maybe;
        } else if constexpr (std::is_same_v<T, Assertion::Exists>) {
          Tri acc = Tri::No;
          for (const auto& v : eng.lvar_universe) {
            if (!eng.tick()) return tri_or(acc, Tri::Maybe);
            Substitution t2 = theta;
            t2.insert_or_assign(n.var, v);
            acc = tri_or(acc, ground_sat(eng, t2, store, heap, *n.body, fuel));
            if (acc == Tri::Yes) return acc;
          }
          // The bounded universe may miss witnesses.
          return acc == Tri::No ? Tri::Maybe : acc;
        } else if constexpr (std::is_same_v<T, Assertion::Emp>) {
          return heap.empty() ? Tri::Yes : Tri::No;
        } else if constexpr (std::is_same_v<T, Assertion::Cell>) {
          auto va = eval_expr(theta, store, *n.addr);
          auto vv = eval_expr(theta, store, *n.val);
          if (!va || !vv || !va->is_nat()) return Tri::No;
          if (heap.size() != 1) return Tri::No;
          const auto& [addr, cell] = *heap.begin();
          return (addr == va->as_nat() && !cell.freed() && *cell.contents == *vv)
                     ? Tri::Yes
                     : Tri::No;
        } else if constexpr (std::is_same_v<T, Assertion::FreedCell>) {
          auto va = eval_expr(theta, store, *n.addr);
          if (!va || !va->is_nat()) return Tri::No;
          if (heap.size() != 1) return Tri::No;
          const auto& [addr, cell] = *heap.begin();
          return (addr == va->as_nat() && cell.freed()) ? Tri::Yes : Tri::No;
        } else if constexpr (std::is_same_v<T, Assertion::Star>) {
          return ground_sat_star(eng, theta, store, heap, *n.lhs, *n.rhs, fuel);
        } else if constexpr (std::is_same_v<T, Assertion::IterStar>) {
          auto lo = eval_expr(theta, store, *n.lo);
          auto hi = eval_expr(theta, store, *n.hi);
          if (!lo || !hi || !lo->is_nat() || !hi->is_nat()) return Tri::No;
          std::vector<AssertionPtr> parts;
          for (uint64_t i = lo->as_nat(); i < hi->as_nat(); ++i) {
            VarSubst sub;
            sub.lvars.emplace(n.var, mk_nat(i));
            parts.push_back(subst_assertion(n.body, sub));
          }
          return ground_sat(eng, theta, store, heap, *mk_star_many(parts), fuel);
        } else {
          static_assert(std::is_same_v<T, Assertion::Pred>);
          if (fuel == 0) {
            eng.fuel_hit = true;
            return Tri::Maybe;
          }
          const PredDef* def = eng.reg.find(n.name);
          if (!def || def->params.size() != n.args.size()) return Tri::No;
          AssertionPtr body = instantiate_pred(eng, n);
          return ground_sat(eng, theta, store, heap, *body, fuel - 1);
        }
      },
      a.node);
}

// ---------------------------------------------------------------------------
// Goal-directed solving.
// ---------------------------------------------------------------------------

Tri solve(Engine& eng, Sigma s, GoalList goals, const Cont& k);

Tri finish(Engine& eng, Sigma& s, const Cont& k) {
  Tri p = settle_pending(eng, s);
  if (p == Tri::No) return Tri::No;
  if (p == Tri::Maybe) {
    // Bounded fallback: enumerate candidates for unbound variables that
    // block the deferred constraints.
    std::set<std::pair<bool, std::string>> blocked;
    for (const auto& c : s.pending) {
      for (const auto& x : lv(*c)) {
        const BindNode* n = find_bind(s.binds, true, x);
        if (n && !n->val.has_value()) blocked.insert({true, x});
      }
      for (const auto& x : pv(*c)) {
        const BindNode* n = find_bind(s.binds, false, x);
        if (eng.generating && n && !n->val.has_value()) blocked.insert({false, x});
      }
    }
    std::vector<std::pair<bool, std::string>> vars(blocked.begin(), blocked.end());
    if (vars.empty()) return Tri::No;  // stuck with no unbound vars: refuted
    // The joint enumeration over blocked variables gets a local budget: a
    // runaway product here must not starve the rest of the search.
    const uint64_t local_start = eng.work;
    const uint64_t local_budget = 100000;
    std::function<Tri(size_t, Sigma&)> go = [&](size_t i, Sigma& cur) -> Tri {
      if (eng.work - local_start > local_budget) {
        eng.capped = true;
        return Tri::Maybe;
      }
      if (i == vars.size()) {
        if (!cur.pending.empty()) return Tri::Maybe;
        return finish(eng, cur, k);
      }
      // Already bound through propagation from an earlier choice?
      const BindNode* n = find_bind(cur.binds, vars[i].first, vars[i].second);
      if (n && n->val.has_value()) {
        return go(i + 1, cur);
      }
      const auto& universe = vars[i].first ? eng.lvar_universe : eng.pvar_universe;
      Tri acc = Tri::No;
      for (const auto& v : universe) {
        if (!eng.tick()) return tri_or(acc, Tri::Maybe);
        Sigma next = cur;
        next.push(vars[i].first, vars[i].second, v);
        // Settle immediately so refuted choices are pruned early.
        Tri st = settle_pending(eng, next);
        if (st == Tri::No) continue;
        acc = tri_or(acc, go(i + 1, next));
        if (acc == Tri::Yes && !eng.generating) return acc;
      }
      // The universe is bounded; unfound is Maybe only if something was cut.
      return acc;
    };
    return go(0, s);
  }
  if (!eng.generating) {
    if (!s.remaining.empty() && !s.slack) return Tri::No;
  }
  return k(s);
}

Tri solve_cell(Engine& eng, Sigma& s, const Assertion::Cell* cell,
               const Assertion::FreedCell* freed, GoalList rest, const Cont& k) {
  const ExprPtr& addr_e = cell ? cell->addr : freed->addr;
  PEval pa = peval(eng, s, *addr_e);
  if (pa.kind == PE::Undef) return Tri::No;

  auto continue_with_cell = [&](Sigma sig, Addr a, bool had_binding) -> Tri {
    if (eng.generating) {
      if (a > eng.bounds.amax) return Tri::No;    // models stay within bounds
      if (sig.produced.count(a)) return Tri::No;  // disjointness
      if (cell) {
        PEval pv_ = peval(eng, sig, *cell->val);
        if (pv_.kind == PE::Undef) return Tri::No;
        if (pv_.kind == PE::Value_) {
          sig.produced.emplace(a, Cell::value(*pv_.v));
          if (settle_pending(eng, sig) == Tri::No) return Tri::No;
          return solve(eng, std::move(sig), rest, k);
        }
        // Unbound content: enumerate the cell universe and bind through it.
        Tri acc = Tri::No;
        for (const auto& v : eng.cell_universe) {
          if (!eng.tick()) return tri_or(acc, Tri::Maybe);
          Sigma next = sig;
          BindOps ops{eng, next};
          Tri m = ops.match(*cell->val, v);
          if (m == Tri::No) continue;
          if (m == Tri::Maybe) {
            acc = tri_or(acc, Tri::Maybe);
            continue;
          }
          next.produced.emplace(a, Cell::value(v));
          if (settle_pending(eng, next) == Tri::No) continue;
          acc = tri_or(acc, solve(eng, std::move(next), rest, k));
          if (acc == Tri::Yes && !eng.generating) return acc;
        }
        return acc;
      }
      sig.produced.emplace(a, Cell::freed_cell());
      if (settle_pending(eng, sig) == Tri::No) return Tri::No;
      return solve(eng, std::move(sig), rest, k);
    }
    // Checking mode: the cell must be available in the remaining heap.
    auto it = sig.remaining.find(a);
    if (it == sig.remaining.end()) return Tri::No;
    if (cell) {
      if (it->second.freed()) return Tri::No;
      Value content = *it->second.contents;
      sig.remaining.erase(a);
      BindOps ops{eng, sig};
      Tri m = ops.match(*cell->val, content);
      if (m == Tri::No) return Tri::No;
      if (m == Tri::Maybe) {
        // Cannot invert the content expression: defer as an equation.
        sig.pending.push_back(mk_eq(cell->val, mk_const(content)));
      }
      if (settle_pending(eng, sig) == Tri::No) return Tri::No;
      return solve(eng, std::move(sig), rest, k);
    }
    if (!it->second.freed()) return Tri::No;
    sig.remaining.erase(a);
    if (settle_pending(eng, sig) == Tri::No) return Tri::No;
    return solve(eng, std::move(sig), rest, k);
    (void)had_binding;
  };

  if (pa.kind == PE::Value_) {
    if (!pa.v->is_nat()) return Tri::No;
    return continue_with_cell(s, pa.v->as_nat(), false);
  }

  // Stuck address: enumerate candidate addresses and bind through the
  // address expression.
  Tri acc = Tri::No;
  std::vector<Addr> candidates;
  if (eng.generating) {
    for (Addr a = 0; a <= eng.bounds.amax; ++a) candidates.push_back(a);
  } else {
    for (const auto& [a, c] : s.remaining) candidates.push_back(a);
  }
  for (Addr a : candidates) {
    if (!eng.tick()) return tri_or(acc, Tri::Maybe);
    Sigma next = s;
    BindOps ops{eng, next};
    Tri m = ops.match(*addr_e, Value::nat(a));
    if (m == Tri::No) continue;
    if (m == Tri::Maybe) {
      acc = tri_or(acc, Tri::Maybe);
      continue;
    }
    if (settle_pending(eng, next) == Tri::No) continue;
    acc = tri_or(acc, continue_with_cell(std::move(next), a, true));
    if (acc == Tri::Yes && !eng.generating) return acc;
  }
  return acc;
}

Tri solve(Engine& eng, Sigma s, GoalList goals, const Cont& k) {
  if (!goals) return finish(eng, s, k);
  const GoalNode& g = *goals;
  GoalList rest = g.next;
  const Assertion& a = *g.a;

  // Derived shapes first.
  if (match_true(a)) {
    s.slack = true;
    return solve(eng, std::move(s), rest, k);
  }
  AssertionPtr l, r;
  if (match_or(a, &l, &r)) {
    Sigma s2 = s;
    Tri left = solve(eng, std::move(s), goal_cons(l, g.fuel, false, rest, g.anc), k);
    if (left == Tri::Yes && !eng.generating) return left;
    Tri right = solve(eng, std::move(s2), goal_cons(r, g.fuel, false, rest, g.anc), k);
    return tri_or(left, right);
  }
  if (match_and(a, &l, &r)) {
    if (spatial_free(*l) && spatial_free(*r)) {
      GoalList gl = goal_cons(l, g.fuel, false, rest, g.anc);
      // Both conjuncts are pure: check against the empty footprint in order.
      return solve(eng, std::move(s), goal_cons(r, g.fuel, false, gl, g.anc), k);
    }
    // fall through to the classical treatment below
  }

  return std::visit(
      [&](const auto& n) -> Tri {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Assertion::FalseA>) {
          return Tri::No;
        } else if constexpr (std::is_same_v<T, Assertion::Emp>) {
          return solve(eng, std::move(s), rest, k);
        } else if constexpr (std::is_same_v<T, Assertion::BoolA>) {
          Tri e = try_equation(eng, s, *n.e);
          if (e == Tri::No) return Tri::No;
          if (e == Tri::Maybe) s.pending.push_back(n.e);
          if (settle_pending(eng, s) == Tri::No) return Tri::No;
          return solve(eng, std::move(s), rest, k);
        } else if constexpr (std::is_same_v<T, Assertion::Star>) {
          GoalList gl = goal_cons(n.rhs, g.fuel, false, rest, g.anc);
          return solve(eng, std::move(s), goal_cons(n.lhs, g.fuel, false, gl, g.anc), k);
        } else if constexpr (std::is_same_v<T, Assertion::Exists>) {
          // Binders are renamed only when they would shadow an existing
          // entry, and deterministically by scope depth, so equal subtrees
          // produce equal instance keys across branches.
          AssertionPtr body;
          std::string name = n.var;
          if (!find_bind(s.binds, true, name)) {
            body = n.body;
          } else {
            int depth = 0;
            for (const BindNode* bn = s.binds.get(); bn; bn = bn->next.get()) {
              if (bn->is_lvar && bn->name.size() >= n.var.size() &&
                  bn->name.compare(0, n.var.size(), n.var) == 0)
                ++depth;
            }
            do {
              name = n.var + "~" + std::to_string(depth++);
            } while (find_bind(s.binds, true, name));
            VarSubst sub;
            sub.lvars.emplace(n.var, mk_lvar(name));
            body = subst_assertion(n.body, sub);
          }
          s.push(true, name, std::nullopt);
          return solve(eng, std::move(s),
                       goal_cons(body, g.fuel, false, rest, g.anc), k);
        } else if constexpr (std::is_same_v<T, Assertion::Cell>) {
          return solve_cell(eng, s, &n, nullptr, rest, k);
        } else if constexpr (std::is_same_v<T, Assertion::FreedCell>) {
          return solve_cell(eng, s, nullptr, &n, rest, k);
        } else if constexpr (std::is_same_v<T, Assertion::IterStar>) {
          PEval lo = peval(eng, s, *n.lo);
          PEval hi = peval(eng, s, *n.hi);
          if (lo.kind == PE::Undef || hi.kind == PE::Undef) return Tri::No;
          if (lo.kind == PE::Stuck || hi.kind == PE::Stuck) {
            if (g.requeued) {
              eng.capped = true;
              return Tri::Maybe;
            }
            // Requeue once at the back, hoping later goals bind the bounds.
            std::vector<GoalNode> items;
            for (GoalList p = rest; p; p = p->next) items.push_back(*p);
            GoalList rebuilt = goal_cons(g.a, g.fuel, true, nullptr, g.anc);
            for (auto it = items.rbegin(); it != items.rend(); ++it) {
              rebuilt = goal_cons(it->a, it->fuel, it->requeued, rebuilt, it->anc);
            }
            return solve(eng, std::move(s), rebuilt, k);
          }
          if (!lo.v->is_nat() || !hi.v->is_nat()) return Tri::No;
          GoalList gl = rest;
          uint64_t lo_n = lo.v->as_nat(), hi_n = hi.v->as_nat();
          if (hi_n > lo_n && hi_n - lo_n > eng.bounds.amax + 2) {
            eng.capped = true;
            return Tri::Maybe;
          }
          for (uint64_t i = hi_n; i > lo_n; --i) {
            VarSubst sub;
            sub.lvars.emplace(n.var, mk_nat(i - 1));
            gl = goal_cons(subst_assertion(n.body, sub), g.fuel, false, gl, g.anc);
          }
          return solve(eng, std::move(s), gl, k);
        } else if constexpr (std::is_same_v<T, Assertion::Pred>) {
          if (g.fuel == 0) {
            eng.fuel_hit = true;
            return Tri::Maybe;
          }
          const PredDef* def = eng.reg.find(n.name);
          if (!def || def->params.size() != n.args.size()) return Tri::No;
          // A repeated ground instance with no progress in bindings or in
          // the heap cannot start a finite unfolding: predicates denote
          // least fixpoints, so the branch is refuted outright.
          std::string cyc = n.name;
          bool ground = true;
          for (const auto& arg : n.args) {
            PEval pe = peval(eng, s, *arg);
            if (pe.kind == PE::Stuck) {
              ground = false;
              break;
            }
            cyc += '|';
            cyc += pe.kind == PE::Undef ? "#undef" : pe.v->show();
          }
          AncList anc = g.anc;
          if (ground) {
            cyc += '@';
            cyc += show_heap(eng.generating ? s.produced : s.remaining);
            cyc += '#';
            cyc += std::to_string(s.bound_count);
            if (anc_contains(g.anc, cyc)) return Tri::No;
            anc = std::make_shared<const AncNode>(AncNode{std::move(cyc), g.anc});
          }
          AssertionPtr body = instantiate_pred(eng, n);
          return solve(eng, std::move(s),
                       goal_cons(body, g.fuel - 1, false, rest, anc), k);
        } else {
          static_assert(std::is_same_v<T, Assertion::Implies>);
          // Classical connective: requires ground variables and a committed
          // sub-heap.
          auto vars = fv_assertion(a);
          auto enumerate_var = [&](bool is_lvar, const std::string& x) -> Tri {
            const auto& universe =
                is_lvar ? eng.lvar_universe : eng.pvar_universe;
            Tri acc = Tri::No;
            for (const auto& v : universe) {
              if (!eng.tick()) return tri_or(acc, Tri::Maybe);
              Sigma next = s;
              next.push(is_lvar, x, v);
              if (settle_pending(eng, next) == Tri::No) continue;
              acc = tri_or(acc,
                           solve(eng, std::move(next),
                                 goal_cons(g.a, g.fuel, g.requeued, rest), k));
              if (acc == Tri::Yes && !eng.generating) return acc;
            }
            return acc;
          };
          for (const auto& x : vars.lvars) {
            const BindNode* n0 = find_bind(s.binds, true, x);
            if (n0 && !n0->val.has_value()) return enumerate_var(true, x);
          }
          if (eng.generating) {
            for (const auto& x : vars.pvars) {
              const BindNode* n0 = find_bind(s.binds, false, x);
              if (n0 && !n0->val.has_value()) return enumerate_var(false, x);
            }
          }
          Store store_mat = eng.generating ? binds_store(s) : *eng.fixed_store;
          const Store& store = store_mat;
          Substitution theta_mat = binds_theta(s);
          if (spatial_free(a)) {
            Tri r0 = ground_sat(eng, theta_mat, store, Heap{}, a, g.fuel);
            if (r0 == Tri::No) return Tri::No;
            Tri res = solve(eng, std::move(s), rest, k);
            return r0 == Tri::Maybe ? tri_or(res == Tri::Yes ? Tri::Maybe : res,
                                             Tri::Maybe)
                                    : res;
          }
          if (!eng.generating) {
            // Choose the sub-heap this connective covers.
            std::vector<std::pair<Addr, Cell>> cells(s.remaining.begin(),
                                                     s.remaining.end());
            size_t cn = cells.size();
            if (cn > 16) {
              eng.capped = true;
              return Tri::Maybe;
            }
            Tri acc = Tri::No;
            for (uint64_t mask = 0; mask < (1ull << cn); ++mask) {
              if (!eng.tick()) return tri_or(acc, Tri::Maybe);
              Heap sub_heap;
              for (size_t i = 0; i < cn; ++i) {
                if (mask & (1ull << i)) sub_heap.insert(cells[i]);
              }
              Tri g0 = ground_sat(eng, theta_mat, store, sub_heap, a, g.fuel);
              if (g0 != Tri::Yes) {
                acc = tri_or(acc, g0 == Tri::Maybe ? Tri::Maybe : Tri::No);
                continue;
              }
              Sigma next = s;
              next.remaining = heap_minus(next.remaining, sub_heap);
              acc = tri_or(acc, solve(eng, std::move(next), rest, k));
              if (acc == Tri::Yes) return acc;
            }
            return acc;
          }
          // Generation through a classical connective: enumerate candidate
          // footprints over the free bounded address space and ground-check.
          std::vector<Addr> free_addrs;
          for (Addr ad = 0; ad <= eng.bounds.amax; ++ad) {
            if (!s.produced.count(ad)) free_addrs.push_back(ad);
          }
          std::vector<Cell> cell_opts;
          for (const auto& v : eng.cell_universe) cell_opts.push_back(Cell::value(v));
          cell_opts.push_back(Cell::freed_cell());
          Tri acc = Tri::No;
          std::function<Tri(size_t, Heap&)> expand = [&](size_t idx,
                                                         Heap& fp) -> Tri {
            if (!eng.tick()) return Tri::Maybe;
            if (idx == free_addrs.size()) {
              Tri g0 = ground_sat(eng, theta_mat, store, fp, a, g.fuel);
              if (g0 != Tri::Yes) return g0 == Tri::Maybe ? Tri::Maybe : Tri::No;
              Sigma next = s;
              next.produced = heap_union(next.produced, fp);
              return solve(eng, next, rest, k);
            }
            Tri r0 = expand(idx + 1, fp);
            if (r0 == Tri::Yes && !eng.generating) return r0;
            Tri racc = r0;
            for (const auto& cop : cell_opts) {
              fp.emplace(free_addrs[idx], cop);
              Tri r1 = expand(idx + 1, fp);
              fp.erase(free_addrs[idx]);
              racc = tri_or(racc, r1);
              if (racc == Tri::Yes && !eng.generating) return racc;
            }
            return racc;
          };
          Heap fp;
          acc = expand(0, fp);
          return acc;
        }
      },
      a.node);
}

// ---------------------------------------------------------------------------
// Entry points.
// ---------------------------------------------------------------------------

Engine make_engine(const PredRegistry& reg, const ModelBounds& b,
                   const std::set<std::string>& extra_strings) {
  Engine eng{reg, b};
  eng.lvar_universe = universe_with_pool(b, b.list_depth, extra_strings);
  eng.pvar_universe = atoms_with_pool(b, extra_strings);
  eng.cell_universe = universe_with_pool(b, b.cell_depth, extra_strings);
  return eng;
}

std::set<std::string> strings_of(const Assertion& a) {
  std::set<std::string> out;
  harvest_strings(a, out);
  return out;
}

}  // namespace

SatResult sat(const PredRegistry& reg, const Substitution& theta,
              const State& st, const Assertion& p, const ModelBounds& b) {
  Engine eng = make_engine(reg, b, strings_of(p));
  eng.generating = false;
  eng.fixed_store = &st.store;
  Sigma s;
  for (const auto& [name, v] : theta) s.push(true, name, v);
  s.remaining = st.heap;
  Cont k = [](Sigma&) { return Tri::Yes; };
  Tri r = solve(eng, std::move(s), goal_cons(std::make_shared<const Assertion>(p),
                                             b.unfold_depth, false, nullptr),
                k);
  SatResult out;
  out.holds = (r == Tri::Yes);
  out.bounded = !out.holds && (r == Tri::Maybe || eng.capped || eng.fuel_hit);
  return out;
}

ModelSet enumerate_models(const PredRegistry& reg, const Assertion& p,
                          const std::set<std::string>& lvars,
                          const std::set<std::string>& pvars,
                          const ModelBounds& b, ModelCache* cache) {
  std::string key;
  if (cache) {
    key = show_assertion(p);
    key += '\x01';
    for (const auto& v : lvars) key += v + ",";
    key += '\x02';
    for (const auto& v : pvars) key += v + ",";
    auto it = cache->find(key);
    if (it != cache->end()) return it->second;
  }
  Engine eng = make_engine(reg, b, strings_of(p));
  eng.generating = true;
  eng.gen_pvars = pvars;
  std::set<Model> found;

  // Free requested variables start unbound; unconstrained ones are filled
  // from the universes when a branch completes.
  Sigma s;
  for (const auto& x : lvars) s.push(true, x, std::nullopt);
  for (const auto& x : pvars) s.push(false, x, std::nullopt);

  Cont k = [&](Sigma& sig) -> Tri {
    // Enumerate any still-unbound requested variables.
    std::vector<std::string> todo_lv, todo_pv;
    for (const auto& x : lvars) {
      const BindNode* n = find_bind(sig.binds, true, x);
      if (!n || !n->val.has_value()) todo_lv.push_back(x);
    }
    for (const auto& x : pvars) {
      const BindNode* n = find_bind(sig.binds, false, x);
      if (!n || !n->val.has_value()) todo_pv.push_back(x);
    }
    std::function<void(size_t, size_t, Sigma&)> fill = [&](size_t i, size_t j,
                                                           Sigma& cur) {
      if (i < todo_lv.size()) {
        for (const auto& v : eng.lvar_universe) {
          if (!eng.tick()) return;
          Sigma next = cur;
          next.push(true, todo_lv[i], v);
          fill(i + 1, j, next);
        }
        return;
      }
      if (j < todo_pv.size()) {
        for (const auto& v : eng.pvar_universe) {
          if (!eng.tick()) return;
          Sigma next = cur;
          next.push(false, todo_pv[j], v);
          fill(i, j + 1, next);
        }
        return;
      }
      Model m;
      for (const auto& x : lvars) {
        m.theta.emplace(x, *find_bind(cur.binds, true, x)->val);
      }
      for (const auto& x : pvars) {
        m.state.store.emplace(x, *find_bind(cur.binds, false, x)->val);
      }
      m.state.heap = cur.produced;
      if (cur.slack) {
        // A True conjunct admits arbitrary disjoint extensions; enumerate
        // them over the bounded address space.
        std::vector<Addr> free_addrs;
        for (Addr a = 0; a <= b.amax; ++a) {
          if (!cur.produced.count(a)) free_addrs.push_back(a);
        }
        std::vector<Cell> cell_opts;
        for (const auto& v : eng.cell_universe) cell_opts.push_back(Cell::value(v));
        cell_opts.push_back(Cell::freed_cell());
        std::function<void(size_t, Heap&)> ext = [&](size_t idx, Heap& h) {
          if (!eng.tick()) return;
          if (idx == free_addrs.size()) {
            Model m2 = m;
            m2.state.heap = heap_union(cur.produced, h);
            found.insert(std::move(m2));
            return;
          }
          ext(idx + 1, h);  // cell absent
          for (const auto& c : cell_opts) {
            h.emplace(free_addrs[idx], c);
            ext(idx + 1, h);
            h.erase(free_addrs[idx]);
          }
        };
        Heap h;
        ext(0, h);
      } else {
        found.insert(std::move(m));
      }
    };
    fill(0, 0, sig);
    return Tri::No;  // keep searching for more models
  };

  solve(eng, std::move(s), goal_cons(std::make_shared<const Assertion>(p),
                                     b.unfold_depth, false, nullptr),
        k);
  ModelSet out;
  out.models.assign(found.begin(), found.end());
  out.bounded = eng.capped || eng.fuel_hit;
  out.work = eng.work;
  if (cache) cache->emplace(std::move(key), out);
  return out;
}

BoundedVerdict check_valid_implication(const PredRegistry& reg,
                                       const Assertion& lhs,
                                       const Assertion& rhs,
                                       const std::set<std::string>& pvars,
                                       const ModelBounds& b,
                                       ModelCache* cache) {
  auto lv_l = fv_assertion(lhs);
  auto lv_r = fv_assertion(rhs);
  std::set<std::string> lvars = lv_l.lvars;
  lvars.insert(lv_r.lvars.begin(), lv_r.lvars.end());
  std::set<std::string> pv_all = pvars;
  pv_all.insert(lv_l.pvars.begin(), lv_l.pvars.end());
  pv_all.insert(lv_r.pvars.begin(), lv_r.pvars.end());

  ModelSet ms = enumerate_models(reg, lhs, lvars, pv_all, b, cache);
  BoundedVerdict out;
  out.bounded = ms.bounded;
  for (const auto& m : ms.models) {
    SatResult r = sat(reg, m.theta, m.state, rhs, b);
    out.bounded = out.bounded || r.bounded;
    if (!r.holds) {
      if (r.bounded) continue;  // not a definite refutation
      out.valid = false;
      out.counterexample = m;
      return out;
    }
  }
  out.valid = true;
  return out;
}

BoundedVerdict check_valid(const PredRegistry& reg, const Assertion& p,
                           const std::set<std::string>& pvars,
                           const ModelBounds& b) {
  if (const auto* imp = std::get_if<Assertion::Implies>(&p.node)) {
    AssertionPtr l, r;
    if (!match_or(p, &l, &r) && !match_true(p) && !match_and(p, &l, &r)) {
      return check_valid_implication(reg, *imp->lhs, *imp->rhs, pvars, b);
    }
  }
  // General case: every bounded model of True must satisfy p.
  return check_valid_implication(reg, *mk_trueassert(), p, pvars, b);
}

BoundedVerdict check_equiv(const PredRegistry& reg, const Assertion& p,
                           const Assertion& q,
                           const std::set<std::string>& pvars,
                           const ModelBounds& b, ModelCache* cache) {
  if (assertion_equal(p, q)) {
    BoundedVerdict out;
    out.valid = true;
    return out;
  }
  auto fv_p = fv_assertion(p);
  auto fv_q = fv_assertion(q);
  std::set<std::string> lvars = fv_p.lvars;
  lvars.insert(fv_q.lvars.begin(), fv_q.lvars.end());
  std::set<std::string> pv_all = pvars;
  pv_all.insert(fv_p.pvars.begin(), fv_p.pvars.end());
  pv_all.insert(fv_q.pvars.begin(), fv_q.pvars.end());

  ModelSet mp = enumerate_models(reg, p, lvars, pv_all, b, cache);
  ModelSet mq = enumerate_models(reg, q, lvars, pv_all, b, cache);
  BoundedVerdict out;
  out.bounded = mp.bounded || mq.bounded;

  std::set<Model> sp(mp.models.begin(), mp.models.end());
  std::set<Model> sq(mq.models.begin(), mq.models.end());
  for (const auto& m : mp.models) {
    if (!sq.count(m)) {
      // Model sets are narrowing-extended; double-check by direct
      // satisfaction before reporting. A bounded unknown is not a
      // refutation.
      SatResult r = sat(reg, m.theta, m.state, q, b);
      out.bounded = out.bounded || r.bounded;
      if (!r.holds) {
        if (r.bounded) continue;
        out.valid = false;
        out.counterexample = m;
        out.note = "left-to-right";
        return out;
      }
    }
  }
  for (const auto& m : mq.models) {
    if (!sp.count(m)) {
      SatResult r = sat(reg, m.theta, m.state, p, b);
      out.bounded = out.bounded || r.bounded;
      if (!r.holds) {
        if (r.bounded) continue;
        out.valid = false;
        out.counterexample = m;
        out.note = "right-to-left";
        return out;
      }
    }
  }
  out.valid = true;
  return out;
}

}  // namespace esl
