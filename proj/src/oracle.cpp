#include "esl/oracle.hpp"

#include <algorithm>

namespace esl {

namespace {

// Frames: all heaps over addresses 0..amax with at most frame_cap cells,
// cells drawn from the bounded cell universe plus the freed marker.
std::vector<Heap> all_frames(const OracleConfig& cfg) {
  std::vector<Cell> cell_opts;
  for (const auto& v : value_universe(cfg.bounds, cfg.bounds.cell_depth)) {
    cell_opts.push_back(Cell::value(v));
  }
  cell_opts.push_back(Cell::freed_cell());
  std::vector<Heap> out{{}};
  std::vector<Heap> frontier{{}};
  for (uint64_t k = 0; k < cfg.frame_cap; ++k) {
    std::vector<Heap> next;
    for (const auto& h : frontier) {
      Addr start = h.empty() ? 0 : h.rbegin()->first + 1;
      for (Addr a = start; a <= cfg.bounds.amax; ++a) {
        for (const auto& c : cell_opts) {
          Heap h2 = h;
          h2.emplace(a, c);
          next.push_back(h2);
          out.push_back(std::move(h2));
        }
      }
    }
    frontier = std::move(next);
  }
  return out;
}

struct SpecVars {
  std::set<std::string> lvars;       // shared across pre and posts
  std::set<std::string> pre_pvars;   // store domain for pre-models
};

SpecVars spec_vars(const Command& c, const Quadruple& q) {
  SpecVars out;
  for (const auto& a : {q.pre, q.post_ok, q.post_err}) {
    auto vars = fv_assertion(*a);
    out.lvars.insert(vars.lvars.begin(), vars.lvars.end());
  }
  auto pre_vars = fv_assertion(*q.pre);
  out.pre_pvars = pre_vars.pvars;
  for (const auto& v : pv(c)) out.pre_pvars.insert(v);
  for (const auto& a : {q.post_ok, q.post_err}) {
    auto vars = fv_assertion(*a);
    for (const auto& v : vars.pvars) {
      if (v != kErrVar) out.pre_pvars.insert(v);
    }
  }
  return out;
}

}  // namespace

CallSpec canonical_call_spec(const ExternalSpec& spec) {
  CallSpec out;
  std::vector<ExprPtr> args;
  std::vector<AssertionPtr> bindings;
  for (size_t i = 0; i < spec.params.size(); ++i) {
    args.push_back(mk_pvar(spec.params[i]));
    bindings.push_back(mk_boolassert(
        mk_eq(mk_pvar(spec.params[i]), mk_lvar(spec.param_lvars[i]))));
  }
  out.cmd = mk_funcall(kRetVar, spec.fun, args);
  auto ret_nil = mk_boolassert(mk_eq(mk_pvar(kRetVar), mk_nil()));
  out.quad.pre = mk_star(ret_nil, spec.pre);
  out.quad.post_ok = is_false(*spec.post_ok)
                         ? mk_false()
                         : mk_star(mk_star_many(bindings), spec.post_ok);
  out.quad.post_err =
      is_false(*spec.post_err)
          ? mk_false()
          : mk_star(ret_nil,
                    mk_star(mk_star_many(bindings), spec.post_err));
  return out;
}

Verdict check_ox_valid(const PredRegistry& reg, const ImplContext& gamma,
                       const Command& c, const Quadruple& q,
                       const OracleConfig& cfg) {
  Verdict out;
  SpecVars vars = spec_vars(c, q);
  ModelSet pre_models =
      enumerate_models(reg, *q.pre, vars.lvars, vars.pre_pvars, cfg.bounds);
  out.bounded = pre_models.bounded;
  std::vector<Heap> frames = all_frames(cfg);

  for (const auto& m : pre_models.models) {
    for (const auto& hf : frames) {
      if (!heaps_disjoint(hf, m.state.heap)) continue;
      State start{m.state.store, heap_union(m.state.heap, hf)};
      ExecResult res = exec_all(gamma, start, c, cfg.budget);
      if (res.exhausted) out.bounded = true;
      for (const auto& [o, st1] : res.results) {
        const AssertionPtr& post = o == Outcome::Ok ? q.post_ok : q.post_err;
        bool violated = false;
        std::string why;
        if (o == Outcome::Miss) {
          violated = true;
          why = "execution faults with a missing resource error";
        } else if (!heap_submap(hf, st1.heap)) {
          violated = true;
          why = "execution does not preserve the frame";
        } else {
          State inner{st1.store, heap_minus(st1.heap, hf)};
          SatResult r = sat(reg, m.theta, inner, *post, cfg.bounds);
          if (!r.holds && r.bounded) {
            out.bounded = true;
          } else if (!r.holds) {
            violated = true;
            why = std::string("end state escapes the ") +
                  (o == Outcome::Ok ? "success" : "error") + " post-condition";
          }
        }
        if (violated) {
          out.kind = Verdict::Kind::OXCounterexample;
          out.message = why;
          out.theta = m.theta;
          out.frame = hf;
          out.pre_state = m.state;
          out.outcome = o;
          out.end_state = st1;
          return out;
        }
      }
    }
  }
  out.kind = Verdict::Kind::Holds;
  return out;
}

Verdict check_ux_valid(const PredRegistry& reg, const ImplContext& gamma,
                       const Command& c, const Quadruple& q,
                       const OracleConfig& cfg) {
  Verdict out;
  SpecVars vars = spec_vars(c, q);
  ModelSet pre_models =
      enumerate_models(reg, *q.pre, vars.lvars, vars.pre_pvars, cfg.bounds);
  out.bounded = pre_models.bounded;

  // Pre-models grouped by substitution; executions memoised per start state.
  std::map<Substitution, std::vector<const Model*>> by_theta;
  for (const auto& m : pre_models.models) {
    by_theta[m.theta].push_back(&m);
  }
  // Deterministic search order: smaller heaps, then smaller stores.
  for (auto& [t, ms] : by_theta) {
    std::stable_sort(ms.begin(), ms.end(), [](const Model* a, const Model* b) {
      if (a->state.heap.size() != b->state.heap.size())
        return a->state.heap.size() < b->state.heap.size();
      return a->state < b->state;
    });
  }
  std::map<State, ExecResult> exec_memo;
  auto run_from = [&](const State& start) -> const ExecResult& {
    auto it = exec_memo.find(start);
    if (it != exec_memo.end()) return it->second;
    ExecResult res = exec_all(gamma, start, c, cfg.budget);
    if (res.exhausted) out.bounded = true;
    return exec_memo.emplace(start, std::move(res)).first->second;
  };

  std::vector<Heap> frames = all_frames(cfg);
  for (Outcome o : {Outcome::Ok, Outcome::Err}) {
    const AssertionPtr& post = o == Outcome::Ok ? q.post_ok : q.post_err;
    if (is_false(*post)) continue;  // no post-models, vacuous
    std::set<std::string> post_pvars = vars.pre_pvars;
    if (o == Outcome::Err) post_pvars.insert(kErrVar);
    ModelSet post_models =
        enumerate_models(reg, *post, vars.lvars, post_pvars, cfg.bounds);
    out.bounded = out.bounded || post_models.bounded;
    for (const auto& m : post_models.models) {
      auto group = by_theta.find(m.theta);
      for (const auto& hf : frames) {
        if (!heaps_disjoint(hf, m.state.heap)) continue;
        std::pair<Outcome, State> target{
            o, State{m.state.store, heap_union(m.state.heap, hf)}};
        bool reached = false;
        if (group != by_theta.end()) {
          for (const Model* pm : group->second) {
            if (!heaps_disjoint(hf, pm->state.heap)) continue;
            State start{pm->state.store, heap_union(pm->state.heap, hf)};
            if (run_from(start).results.count(target)) {
              reached = true;
              break;
            }
          }
        }
        if (!reached) {
          out.kind = Verdict::Kind::UXCounterexample;
          out.message = std::string("post-model (") + outcome_name(o) +
                        ") unreachable from every pre-model";
          out.theta = m.theta;
          out.frame = hf;
          out.outcome = o;
          out.post_state = m.state;
          return out;
        }
      }
    }
  }
  out.kind = Verdict::Kind::Holds;
  return out;
}

Verdict check_ex_valid(const PredRegistry& reg, const ImplContext& gamma,
                       const Command& c, const Quadruple& q,
                       const OracleConfig& cfg) {
  Verdict ox = check_ox_valid(reg, gamma, c, q, cfg);
  if (!ox.holds()) return ox;
  Verdict ux = check_ux_valid(reg, gamma, c, q, cfg);
  ux.bounded = ux.bounded || ox.bounded;
  return ux;
}

std::vector<EnvReportEntry> check_env_valid(const PredRegistry& reg,
                                            const ImplContext& gamma,
                                            const SpecEnv& env,
                                            const OracleConfig& cfg) {
  std::vector<EnvReportEntry> report;
  for (const auto& [fun, entries] : env) {
    const FunctionDef* def = gamma.find(fun);
    size_t index = 0;
    for (const auto& entry : entries) {
      EnvReportEntry r;
      r.fun = fun;
      r.index = index++;
      if (!def) {
        r.message = "function has no implementation";
        report.push_back(std::move(r));
        continue;
      }
      CheckOutcome intr = check_internalisation(
          reg, *def, entry.ext, entry.internal_candidate, Mode::ESL, cfg.bounds);
      r.bounded = intr.bounded;
      if (!intr.ok) {
        r.message = "internalisation: " + intr.message;
        report.push_back(std::move(r));
        continue;
      }
      Verdict v =
          check_ex_valid(reg, gamma, *def->body, entry.internal_candidate, cfg);
      r.bounded = r.bounded || v.bounded;
      if (!v.holds()) {
        r.message = std::string(v.kind == Verdict::Kind::OXCounterexample
                                    ? "OX violation: "
                                    : "UX violation: ") +
                    v.message;
        report.push_back(std::move(r));
        continue;
      }
      r.ok = true;
      report.push_back(std::move(r));
    }
  }
  return report;
}

}  // namespace esl
