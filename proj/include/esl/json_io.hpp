#pragma once

#include <json.hpp>

#include "esl/interp.hpp"
#include "esl/oracle.hpp"
#include "esl/proof.hpp"

namespace esl {

using Json = nlohmann::json;

// Values: naturals and booleans map to JSON numbers/booleans, strings to
// strings, nil to null, lists to arrays. Freed heap cells are encoded as the
// literal string "⊥".
Json value_to_json(const Value& v);
Json store_to_json(const Store& s);
Json heap_to_json(const Heap& h);
Json state_to_json(const State& st);

Json exec_result_to_json(const ExecResult& r);
Json model_to_json(const Model& m);
Json verdict_to_json(const Verdict& v);
Json env_report_to_json(const std::vector<EnvReportEntry>& entries);
Json proof_report_to_json(const ProofReport& r);

}  // namespace esl
