#include "esl/interp.hpp"

#include <pthread.h>

#include <functional>
#include <stdexcept>

#include "esl/eval.hpp"
#include "esl/printer.hpp"

namespace esl {

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Ok: return "ok";
    case Outcome::Err: return "err";
    case Outcome::Miss: return "miss";
  }
  return "?";
}

Value err_expr_eval(const Expr& e) {
  return Value::list({Value::str("ExprEval"), Value::str(serialize_expr(e))});
}
Value err_type(const Expr& e, const Value& v, const std::string& expected) {
  return Value::list({Value::str("Type"), Value::str(serialize_expr(e)), v,
                      Value::str(expected)});
}
Value err_missing_cell(const Expr& e, Addr n) {
  return Value::list({Value::str("MissingCell"), Value::str(serialize_expr(e)),
                      Value::nat(n)});
}
Value err_use_after_free(const Expr& e, Addr n) {
  return Value::list({Value::str("UseAfterFree"),
                      Value::str(serialize_expr(e)), Value::nat(n)});
}
Value err_error(const Value& v) {
  return Value::list({Value::str("Error"), v});
}
Value err_no_func(const std::string& f) {
  return Value::list({Value::str("NoFunc"), Value::str(f)});
}
Value err_param_count(const std::string& f) {
  return Value::list({Value::str("ParamCount"), Value::str(f)});
}

namespace {

// Result sets are deduplicated as they are built, keeping the largest
// remaining fuel per (outcome, state): any continuation derivable from a
// smaller budget is derivable from a larger one, so this preserves the
// exact set of results reachable within max_steps while capping the
// branching of loops over nondeterministic bodies.
using ResMap = std::map<std::pair<Outcome, State>, uint64_t>;

void add_res(ResMap& m, Outcome o, State st, uint64_t fuel) {
  auto key = std::make_pair(o, std::move(st));
  auto [it, inserted] = m.emplace(std::move(key), fuel);
  if (!inserted && it->second < fuel) it->second = fuel;
}

struct Ctx {
  const ImplContext& gamma;
  const Budget& budget;
  bool exhausted = false;
};

Store with_err(const Store& s, Value verr) {
  Store out = s;
  out.insert_or_assign(kErrVar, std::move(verr));
  return out;
}

void run(Ctx& ctx, const State& st, const Command& c, uint64_t fuel,
         ResMap& out);

// Runs `first`, then feeds ok-states into `second`.
void run_seq(Ctx& ctx, const State& st, const Command& first,
             const Command& second, uint64_t fuel, ResMap& out) {
  ResMap mid;
  run(ctx, st, first, fuel, mid);
  for (auto& [key, left] : mid) {
    if (key.first == Outcome::Ok) {
      run(ctx, key.second, second, left, out);
    } else {
      add_res(out, key.first, key.second, left);
    }
  }
}

void run(Ctx& ctx, const State& st, const Command& c, uint64_t fuel,
         ResMap& out) {
  if (fuel == 0) {
    ctx.exhausted = true;
    return;
  }
  const uint64_t f = fuel - 1;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Command::Skip>) {
          add_res(out, Outcome::Ok, st, f);
        } else if constexpr (std::is_same_v<T, Command::Assign>) {
          auto v = eval_expr(st.store, *n.expr);
          if (!v) {
            add_res(out, Outcome::Err, State{with_err(st.store, err_expr_eval(*n.expr)), st.heap}, f);
            return;
          }
          Store s = st.store;
          s.insert_or_assign(n.target, *v);
          add_res(out, Outcome::Ok, State{std::move(s), st.heap}, f);
        } else if constexpr (std::is_same_v<T, Command::Nondet>) {
          for (uint64_t k = 0; k <= ctx.budget.vmax; ++k) {
            Store s = st.store;
            s.insert_or_assign(n.target, Value::nat(k));
            add_res(out, Outcome::Ok, State{std::move(s), st.heap}, f);
          }
        } else if constexpr (std::is_same_v<T, Command::Error>) {
          auto v = eval_expr(st.store, *n.expr);
          Value payload = v ? err_error(*v) : err_expr_eval(*n.expr);
          add_res(out, Outcome::Err, State{with_err(st.store, payload), st.heap}, f);
        } else if constexpr (std::is_same_v<T, Command::If>) {
          auto v = eval_expr(st.store, *n.cond);
          if (!v) {
            add_res(out, Outcome::Err, State{with_err(st.store, err_expr_eval(*n.cond)), st.heap}, f);
          } else if (!v->is_bool()) {
            add_res(out, Outcome::Err, State{with_err(st.store, err_type(*n.cond, *v, "Bool")), st.heap}, f);
          } else if (v->as_bool()) {
            run(ctx, st, *n.then_branch, f, out);
          } else {
            run(ctx, st, *n.else_branch, f, out);
          }
        } else if constexpr (std::is_same_v<T, Command::While>) {
          // Fixed-point exploration of the loop's entry states: each
          // distinct state is expanded once, at its best remaining budget,
          // so nondeterministic bodies cannot blow the search up.
          std::map<State, uint64_t> frontier{{st, f}};
          std::map<State, uint64_t> settled;
          while (!frontier.empty()) {
            auto best = frontier.begin();
            for (auto it = frontier.begin(); it != frontier.end(); ++it) {
              if (it->second > best->second) best = it;
            }
            State s0 = best->first;
            uint64_t rem = best->second;
            frontier.erase(best);
            settled.emplace(s0, rem);
            auto v = eval_expr(s0.store, *n.cond);
            if (!v) {
              add_res(out, Outcome::Err,
                      State{with_err(s0.store, err_expr_eval(*n.cond)), s0.heap},
                      rem);
              continue;
            }
            if (!v->is_bool()) {
              add_res(out, Outcome::Err,
                      State{with_err(s0.store, err_type(*n.cond, *v, "Bool")),
                            s0.heap},
                      rem);
              continue;
            }
            if (!v->as_bool()) {
              add_res(out, Outcome::Ok, s0, rem);
              continue;
            }
            ResMap mid;
            run(ctx, s0, *n.body, rem, mid);
            for (auto& [key, left] : mid) {
              if (key.first != Outcome::Ok) {
                add_res(out, key.first, key.second, left);
                continue;
              }
              if (left == 0) {
                ctx.exhausted = true;
                continue;
              }
              uint64_t reentry = left - 1;
              if (settled.count(key.second)) {
                // A revisited entry state closes a cycle: the derivation
                // tree is infinite and would have been cut by the budget.
                ctx.exhausted = true;
                continue;
              }
              auto [it, inserted] = frontier.emplace(key.second, reentry);
              if (!inserted && it->second < reentry) it->second = reentry;
            }
          }
        } else if constexpr (std::is_same_v<T, Command::Seq>) {
          run_seq(ctx, st, *n.first, *n.second, f, out);
        } else if constexpr (std::is_same_v<T, Command::FunCall>) {
          const FunctionDef* def = ctx.gamma.find(n.fun);
          if (!def) {
            add_res(out, Outcome::Err, State{with_err(st.store, err_no_func(n.fun)), st.heap}, f);
            return;
          }
          if (def->params.size() != n.args.size()) {
            add_res(out, Outcome::Err, State{with_err(st.store, err_param_count(n.fun)), st.heap}, f);
            return;
          }
          std::vector<Value> vals;
          vals.reserve(n.args.size());
          for (const auto& a : n.args) {
            auto v = eval_expr(st.store, *a);
            if (!v) {
              add_res(out, Outcome::Err, State{with_err(st.store, err_expr_eval(*a)), st.heap}, f);
              return;
            }
            vals.push_back(*v);
          }
          Store callee;
          for (size_t i = 0; i < def->params.size(); ++i) {
            callee.insert_or_assign(def->params[i], vals[i]);
          }
          for (const auto& z : pv(*def->body)) {
            if (!callee.count(z)) callee.emplace(z, Value::nil());
          }
          ResMap body_paths;
          run(ctx, {std::move(callee), st.heap}, *def->body, f, body_paths);
          for (auto& [key, left] : body_paths) {
            const State& bst = key.second;
            if (key.first == Outcome::Ok) {
              auto v = eval_expr(bst.store, *def->return_expr);
              if (!v) {
                add_res(out, Outcome::Err,
                        State{with_err(st.store, err_expr_eval(*def->return_expr)),
                              bst.heap},
                        left);
              } else {
                Store s = st.store;
                s.insert_or_assign(n.target, *v);
                add_res(out, Outcome::Ok, State{std::move(s), bst.heap}, left);
              }
            } else {
              // Caller store is restored apart from the error variable; heap
              // changes made by the callee persist.
              Value verr = bst.store.count(kErrVar) ? bst.store.at(kErrVar)
                                                    : Value::nil();
              add_res(out, key.first, State{with_err(st.store, std::move(verr)), bst.heap},
                      left);
            }
          }
        } else if constexpr (std::is_same_v<T, Command::Lookup>) {
          auto v = eval_expr(st.store, *n.addr);
          if (!v) {
            add_res(out, Outcome::Err, State{with_err(st.store, err_expr_eval(*n.addr)), st.heap}, f);
            return;
          }
          if (!v->is_nat()) {
            add_res(out, Outcome::Err, State{with_err(st.store, err_type(*n.addr, *v, "Nat")), st.heap}, f);
            return;
          }
          Addr a = v->as_nat();
          auto it = st.heap.find(a);
          if (it == st.heap.end()) {
            add_res(out, Outcome::Miss, State{with_err(st.store, err_missing_cell(*n.addr, a)), st.heap}, f);
          } else if (it->second.freed()) {
            add_res(out, Outcome::Err, State{with_err(st.store, err_use_after_free(*n.addr, a)), st.heap}, f);
          } else {
            Store s = st.store;
            s.insert_or_assign(n.target, *it->second.contents);
            add_res(out, Outcome::Ok, State{std::move(s), st.heap}, f);
          }
        } else if constexpr (std::is_same_v<T, Command::Mutate>) {
          auto v1 = eval_expr(st.store, *n.addr);
          if (!v1) {
            add_res(out, Outcome::Err, State{with_err(st.store, err_expr_eval(*n.addr)), st.heap}, f);
            return;
          }
          if (!v1->is_nat()) {
            add_res(out, Outcome::Err, State{with_err(st.store, err_type(*n.addr, *v1, "Nat")), st.heap}, f);
            return;
          }
          Addr a = v1->as_nat();
          auto it = st.heap.find(a);
          if (it == st.heap.end()) {
            add_res(out, Outcome::Miss, State{with_err(st.store, err_missing_cell(*n.addr, a)), st.heap}, f);
            return;
          }
          if (it->second.freed()) {
            add_res(out, Outcome::Err, State{with_err(st.store, err_use_after_free(*n.addr, a)), st.heap}, f);
            return;
          }
          auto v2 = eval_expr(st.store, *n.value);
          if (!v2) {
            add_res(out, Outcome::Err, State{with_err(st.store, err_expr_eval(*n.value)), st.heap}, f);
            return;
          }
          Heap h = st.heap;
          h.insert_or_assign(a, Cell::value(*v2));
          add_res(out, Outcome::Ok, State{st.store, std::move(h)}, f);
        } else if constexpr (std::is_same_v<T, Command::Alloc>) {
          auto v = eval_expr(st.store, *n.size);
          if (!v) {
            add_res(out, Outcome::Err, State{with_err(st.store, err_expr_eval(*n.size)), st.heap}, f);
            return;
          }
          if (!v->is_nat()) {
            add_res(out, Outcome::Err, State{with_err(st.store, err_type(*n.size, *v, "Nat")), st.heap}, f);
            return;
          }
          uint64_t count = v->as_nat();
          auto range_fresh = [&](Addr base) {
            for (uint64_t i = 0; i < count; ++i) {
              if (st.heap.count(base + i)) return false;
            }
            return true;
          };
          std::vector<Addr> bases;
          for (Addr b = 0; b <= ctx.budget.amax; ++b) {
            if (range_fresh(b)) bases.push_back(b);
          }
          if (bases.empty()) {
            // Heaps are finite, so a fresh range always exists; keep the
            // semantics total by taking the least base beyond the bound.
            Addr b = ctx.budget.amax + 1;
            while (!range_fresh(b)) ++b;
            bases.push_back(b);
          }
          for (Addr b : bases) {
            Heap h = st.heap;
            for (uint64_t i = 0; i < count; ++i) {
              h.emplace(b + i, Cell::value(Value::nil()));
            }
            Store s = st.store;
            s.insert_or_assign(n.target, Value::nat(b));
            add_res(out, Outcome::Ok, State{std::move(s), std::move(h)}, f);
          }
        } else {
          static_assert(std::is_same_v<T, Command::Free>);
          auto v = eval_expr(st.store, *n.addr);
          if (!v) {
            add_res(out, Outcome::Err, State{with_err(st.store, err_expr_eval(*n.addr)), st.heap}, f);
            return;
          }
          if (!v->is_nat()) {
            add_res(out, Outcome::Err, State{with_err(st.store, err_type(*n.addr, *v, "Nat")), st.heap}, f);
            return;
          }
          Addr a = v->as_nat();
          auto it = st.heap.find(a);
          if (it == st.heap.end()) {
            add_res(out, Outcome::Miss, State{with_err(st.store, err_missing_cell(*n.addr, a)), st.heap}, f);
          } else if (it->second.freed()) {
            add_res(out, Outcome::Err, State{with_err(st.store, err_use_after_free(*n.addr, a)), st.heap}, f);
          } else {
            Heap h = st.heap;
            h.insert_or_assign(a, Cell::freed_cell());
            add_res(out, Outcome::Ok, State{st.store, std::move(h)}, f);
          }
        }
      },
      c.node);
}

// Deep step budgets unroll loops into deep recursion; run those on a thread
// with a large stack.
void with_exec_stack(uint64_t max_steps, const std::function<void()>& fn) {
  if (max_steps <= 1500) {
    fn();
    return;
  }
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, 512ull * 1024 * 1024);
  struct Box {
    const std::function<void()>* fn;
    std::exception_ptr err;
  } box{&fn, nullptr};
  auto trampoline = [](void* arg) -> void* {
    Box* b = static_cast<Box*>(arg);
    try {
      (*b->fn)();
    } catch (...) {
      b->err = std::current_exception();
    }
    return nullptr;
  };
  pthread_t tid;
  if (pthread_create(&tid, &attr, trampoline, &box) != 0) {
    pthread_attr_destroy(&attr);
    fn();
    return;
  }
  pthread_join(tid, nullptr);
  pthread_attr_destroy(&attr);
  if (box.err) std::rethrow_exception(box.err);
}

// splitmix64; deterministic across platforms.
struct Rng {
  uint64_t state;
  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

struct SeededCut {};

std::pair<Outcome, State> run_one(Ctx& ctx, Rng& rng, const State& st,
                                  const Command& c, uint64_t& fuel);

// For choice-free situations the enumerating runner yields exactly one path;
// reuse it instead of duplicating the error-rule case analysis.
std::pair<Outcome, State> run_deterministic(Ctx& ctx, const State& st,
                                            const Command& c, uint64_t& fuel) {
  ResMap out;
  Ctx sub{ctx.gamma, ctx.budget};
  run(sub, st, c, fuel + 1, out);
  if (out.empty()) throw SeededCut{};
  fuel = out.begin()->second;
  return out.begin()->first;
}

std::pair<Outcome, State> run_one_seq(Ctx& ctx, Rng& rng, const State& st,
                                      const Command& first,
                                      const Command& second, uint64_t& fuel) {
  auto mid = run_one(ctx, rng, st, first, fuel);
  if (mid.first != Outcome::Ok) return mid;
  return run_one(ctx, rng, mid.second, second, fuel);
}

std::pair<Outcome, State> run_one(Ctx& ctx, Rng& rng, const State& st,
                                  const Command& c, uint64_t& fuel) {
  if (fuel == 0) throw SeededCut{};
  --fuel;
  using R = std::pair<Outcome, State>;
  return std::visit(
      [&](const auto& n) -> R {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Command::Nondet>) {
          Store s = st.store;
          s.insert_or_assign(n.target, Value::nat(rng.next() % (ctx.budget.vmax + 1)));
          return {Outcome::Ok, {std::move(s), st.heap}};
        } else if constexpr (std::is_same_v<T, Command::If>) {
          auto v = eval_expr(st.store, *n.cond);
          if (v && v->is_bool()) {
            return run_one(ctx, rng, st, v->as_bool() ? *n.then_branch : *n.else_branch,
                           fuel);
          }
          return run_deterministic(ctx, st, c, fuel);
        } else if constexpr (std::is_same_v<T, Command::While>) {
          auto v = eval_expr(st.store, *n.cond);
          if (v && v->is_bool() && v->as_bool()) {
            return run_one_seq(ctx, rng, st, *n.body, c, fuel);
          }
          return run_deterministic(ctx, st, c, fuel);
        } else if constexpr (std::is_same_v<T, Command::Seq>) {
          return run_one_seq(ctx, rng, st, *n.first, *n.second, fuel);
        } else if constexpr (std::is_same_v<T, Command::FunCall>) {
          const FunctionDef* def = ctx.gamma.find(n.fun);
          if (def && def->params.size() == n.args.size()) {
            std::vector<Value> vals;
            bool all_ok = true;
            for (const auto& a : n.args) {
              auto v = eval_expr(st.store, *a);
              if (!v) {
                all_ok = false;
                break;
              }
              vals.push_back(*v);
            }
            if (all_ok) {
              Store callee;
              for (size_t i = 0; i < def->params.size(); ++i) {
                callee.insert_or_assign(def->params[i], vals[i]);
              }
              for (const auto& z : pv(*def->body)) {
                if (!callee.count(z)) callee.emplace(z, Value::nil());
              }
              auto body = run_one(ctx, rng, {std::move(callee), st.heap},
                                  *def->body, fuel);
              if (body.first == Outcome::Ok) {
                auto v = eval_expr(body.second.store, *def->return_expr);
                if (!v) {
                  return {Outcome::Err,
                          {with_err(st.store, err_expr_eval(*def->return_expr)),
                           body.second.heap}};
                }
                Store s = st.store;
                s.insert_or_assign(n.target, *v);
                return {Outcome::Ok, {std::move(s), body.second.heap}};
              }
              Value verr = body.second.store.count(kErrVar)
                               ? body.second.store.at(kErrVar)
                               : Value::nil();
              return {body.first,
                      {with_err(st.store, std::move(verr)), body.second.heap}};
            }
          }
          return run_deterministic(ctx, st, c, fuel);
        } else if constexpr (std::is_same_v<T, Command::Alloc>) {
          auto v = eval_expr(st.store, *n.size);
          if (v && v->is_nat()) {
            uint64_t count = v->as_nat();
            Addr b = 0;
            auto range_fresh = [&](Addr base) {
              for (uint64_t i = 0; i < count; ++i) {
                if (st.heap.count(base + i)) return false;
              }
              return true;
            };
            while (!range_fresh(b)) ++b;
            Heap h = st.heap;
            for (uint64_t i = 0; i < count; ++i) {
              h.emplace(b + i, Cell::value(Value::nil()));
            }
            Store s = st.store;
            s.insert_or_assign(n.target, Value::nat(b));
            return {Outcome::Ok, {std::move(s), std::move(h)}};
          }
          return run_deterministic(ctx, st, c, fuel);
        } else {
          // Deterministic commands: delegate to the enumerating runner,
          // which yields exactly one path for them.
          return run_deterministic(ctx, st, c, fuel);
        }
      },
      c.node);
}

}  // namespace

ExecResult exec_all(const ImplContext& gamma, const State& st,
                    const Command& c, const Budget& b) {
  auto errs = validate_context(gamma);
  if (!errs.empty()) {
    throw std::invalid_argument("invalid implementation context: " + errs.front());
  }
  Ctx ctx{gamma, b};
  ResMap paths;
  with_exec_stack(b.max_steps,
                  [&] { run(ctx, st, c, b.max_steps, paths); });
  ExecResult res;
  res.exhausted = ctx.exhausted;
  for (auto& [key, left] : paths) {
    (void)left;
    res.results.insert(key);
  }
  return res;
}

SeededResult exec_seeded(const ImplContext& gamma, const State& st,
                         const Command& c, const Budget& b, uint64_t seed) {
  auto errs = validate_context(gamma);
  if (!errs.empty()) {
    throw std::invalid_argument("invalid implementation context: " + errs.front());
  }
  Ctx ctx{gamma, b};
  Rng rng{seed ^ 0x51b5c1a8d6ff4e21ULL};
  SeededResult result = Diverged{};
  with_exec_stack(b.max_steps, [&] {
    uint64_t fuel = b.max_steps;
    try {
      result = run_one(ctx, rng, st, c, fuel);
    } catch (const SeededCut&) {
      result = Diverged{};
    }
  });
  return result;
}

}  // namespace esl
