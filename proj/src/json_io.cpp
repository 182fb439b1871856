#include "esl/json_io.hpp"

namespace esl {

Json value_to_json(const Value& v) {
  if (v.is_nat()) return Json(v.as_nat());
  if (v.is_bool()) return Json(v.as_bool());
  if (v.is_str()) return Json(v.as_str());
  if (v.is_nil()) return Json(nullptr);
  Json arr = Json::array();
  for (const auto& e : v.as_list()) arr.push_back(value_to_json(e));
  return arr;
}

Json store_to_json(const Store& s) {
  Json out = Json::object();
  for (const auto& [k, v] : s) out[k] = value_to_json(v);
  return out;
}

Json heap_to_json(const Heap& h) {
  Json out = Json::object();
  for (const auto& [a, c] : h) {
    out[std::to_string(a)] = c.freed() ? Json("⊥") : value_to_json(*c.contents);
  }
  return out;
}

Json state_to_json(const State& st) {
  return Json{{"store", store_to_json(st.store)}, {"heap", heap_to_json(st.heap)}};
}

Json exec_result_to_json(const ExecResult& r) {
  Json arr = Json::array();
  for (const auto& [o, st] : r.results) {
    Json item{{"outcome", outcome_name(o)},
              {"store", store_to_json(st.store)},
              {"heap", heap_to_json(st.heap)}};
    auto it = st.store.find(kErrVar);
    if (it != st.store.end()) item["err"] = value_to_json(it->second);
    arr.push_back(std::move(item));
  }
  return Json{{"results", arr}, {"exhausted", r.exhausted}};
}

Json model_to_json(const Model& m) {
  Json theta = Json::object();
  for (const auto& [k, v] : m.theta) theta[k] = value_to_json(v);
  return Json{{"theta", theta},
              {"store", store_to_json(m.state.store)},
              {"heap", heap_to_json(m.state.heap)}};
}

Json verdict_to_json(const Verdict& v) {
  Json out;
  switch (v.kind) {
    case Verdict::Kind::Holds: out["verdict"] = "holds"; break;
    case Verdict::Kind::OXCounterexample: out["verdict"] = "ox-counterexample"; break;
    case Verdict::Kind::UXCounterexample: out["verdict"] = "ux-counterexample"; break;
  }
  out["bounded"] = v.bounded;
  if (!v.message.empty()) out["message"] = v.message;
  if (!v.holds()) {
    Json theta = Json::object();
    for (const auto& [k, val] : v.theta) theta[k] = value_to_json(val);
    out["theta"] = theta;
    out["frame"] = heap_to_json(v.frame);
    if (v.outcome) out["outcome"] = outcome_name(*v.outcome);
    if (v.pre_state) out["pre_state"] = state_to_json(*v.pre_state);
    if (v.end_state) out["end_state"] = state_to_json(*v.end_state);
    if (v.post_state) out["post_state"] = state_to_json(*v.post_state);
  }
  return out;
}

Json env_report_to_json(const std::vector<EnvReportEntry>& entries) {
  Json arr = Json::array();
  for (const auto& e : entries) {
    arr.push_back(Json{{"fun", e.fun},
                       {"index", e.index},
                       {"ok", e.ok},
                       {"bounded", e.bounded},
                       {"message", e.message}});
  }
  return arr;
}

Json proof_report_to_json(const ProofReport& r) {
  Json steps = Json::array();
  for (const auto& s : r.steps) {
    steps.push_back(Json{{"line", s.line},
                         {"where", s.where},
                         {"ok", s.ok},
                         {"bounded", s.bounded},
                         {"message", s.message}});
  }
  return Json{{"all_ok", r.all_ok}, {"bounded", r.any_bounded}, {"steps", steps}};
}

}  // namespace esl
