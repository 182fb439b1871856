// Command-line driver: run programs, query satisfiability, enumerate
// models, check specifications against the bounded oracle, and check proof
// scripts. JSON goes to stdout, human-readable summaries to stderr.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "esl/json_io.hpp"
#include "esl/parser.hpp"
#include "esl/proof.hpp"

using namespace esl;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct Options {
  uint64_t vmax = 2;
  uint64_t amax = 5;
  uint64_t list_depth = 1;
  uint64_t list_len = 3;
  uint64_t unfold_depth = 12;
  uint64_t frame_cap = 2;
  uint64_t imax = 4;
  uint64_t alpha_max = 3;
  uint64_t max_steps = 10000;
  uint64_t seed = 0;
  bool strict = false;
  unsigned jobs = 1;
  std::string mode = "esl";
  std::string config_file;

  void add_flags(CLI::App* app) {
    app->add_option("--vmax", vmax, "nondet and value bound");
    app->add_option("--amax", amax, "heap address bound");
    app->add_option("--list-depth", list_depth, "enumerated list nesting");
    app->add_option("--list-len", list_len, "enumerated list length");
    app->add_option("--unfold-depth", unfold_depth, "predicate unfolding fuel");
    app->add_option("--frame-cap", frame_cap, "max cells in quantified frames");
    app->add_option("--imax", imax, "while-family instantiation bound");
    app->add_option("--alpha-max", alpha_max, "measure instantiation bound");
    app->add_option("--max-steps", max_steps, "derivation size budget");
    app->add_flag("--strict", strict, "exit 2 on bounded-only verdicts");
    app->add_option("--jobs", jobs, "parallel workers for corpus runs");
    app->add_option("--config", config_file, "JSON file with bound overrides");
  }

  void load_config() {
    if (config_file.empty()) return;
    Json j = Json::parse(slurp(config_file));
    if (j.contains("vmax")) vmax = j["vmax"];
    if (j.contains("amax")) amax = j["amax"];
    if (j.contains("list_depth")) list_depth = j["list_depth"];
    if (j.contains("list_len")) list_len = j["list_len"];
    if (j.contains("unfold_depth")) unfold_depth = j["unfold_depth"];
    if (j.contains("frame_cap")) frame_cap = j["frame_cap"];
    if (j.contains("imax")) imax = j["imax"];
    if (j.contains("alpha_max")) alpha_max = j["alpha_max"];
    if (j.contains("max_steps")) max_steps = j["max_steps"];
  }

  ModelBounds bounds() const {
    ModelBounds b;
    b.vmax = vmax;
    b.amax = amax;
    b.list_depth = list_depth;
    b.list_len = list_len;
    b.unfold_depth = unfold_depth;
    return b;
  }
  Budget budget() const {
    Budget b;
    b.max_steps = max_steps;
    b.vmax = vmax;
    b.amax = amax;
    return b;
  }
  OracleConfig oracle() const {
    OracleConfig cfg;
    cfg.bounds = bounds();
    cfg.budget = budget();
    cfg.frame_cap = frame_cap;
    return cfg;
  }
  ProofConfig proof() const {
    ProofConfig cfg;
    cfg.bounds = bounds();
    cfg.imax = imax;
    cfg.alpha_max = alpha_max;
    return cfg;
  }
  Mode proof_mode() const {
    if (mode == "sl") return Mode::SL;
    if (mode == "isl") return Mode::ISL;
    return Mode::ESL;
  }
};

std::set<std::string> builtin_pred_names() {
  static const PredRegistry reg = builtin_corpus();
  std::set<std::string> out;
  for (const auto& [name, def] : reg.all()) out.insert(name);
  return out;
}

Value json_to_value(const Json& j, bool* freed = nullptr) {
  if (freed) *freed = false;
  if (j.is_number_unsigned() || j.is_number_integer())
    return Value::nat(j.get<uint64_t>());
  if (j.is_boolean()) return Value::boolean(j.get<bool>());
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (freed && s == "⊥") {
      *freed = true;
      return Value::nil();
    }
    return Value::str(s);
  }
  if (j.is_null()) return Value::nil();
  Value::List l;
  for (const auto& e : j) l.push_back(json_to_value(e));
  return Value::list(std::move(l));
}

State json_to_state(const Json& j) {
  State st;
  if (j.contains("store")) {
    for (auto it = j["store"].begin(); it != j["store"].end(); ++it) {
      st.store.emplace(it.key(), json_to_value(it.value()));
    }
  }
  if (j.contains("heap")) {
    for (auto it = j["heap"].begin(); it != j["heap"].end(); ++it) {
      bool freed = false;
      Value v = json_to_value(it.value(), &freed);
      st.heap.emplace(std::stoull(it.key()),
                      freed ? Cell::freed_cell() : Cell::value(v));
    }
  }
  return st;
}

int verdict_exit(bool ok, bool bounded, bool strict) {
  if (!ok) return 1;
  if (bounded && strict) return 2;
  return 0;
}

int cmd_run(const Options& opt, const std::string& file, bool all,
            bool seeded, uint64_t seed) {
  Program prog = parse_program(slurp(file));
  if (!prog.main) {
    std::cerr << "error: " << file << " has no main block\n";
    return 1;
  }
  auto errs = validate_context(prog.funcs);
  for (const auto& e : errs) std::cerr << "error: " << e << "\n";
  if (!errs.empty()) return 1;
  State init;
  if (!seeded || all) {
    ExecResult res = exec_all(prog.funcs, init, *prog.main, opt.budget());
    std::cout << exec_result_to_json(res).dump(2) << "\n";
    std::cerr << res.results.size() << " result(s)"
              << (res.exhausted ? ", budget exhausted on some branch" : "")
              << "\n";
    return 0;
  }
  SeededResult r = exec_seeded(prog.funcs, init, *prog.main, opt.budget(), seed);
  if (std::holds_alternative<Diverged>(r)) {
    std::cout << Json{{"outcome", "diverged"}}.dump(2) << "\n";
    std::cerr << "diverged within the step budget\n";
    return 0;
  }
  const auto& [o, st] = std::get<std::pair<Outcome, State>>(r);
  Json j{{"outcome", outcome_name(o)},
         {"store", store_to_json(st.store)},
         {"heap", heap_to_json(st.heap)}};
  auto it = st.store.find(kErrVar);
  if (it != st.store.end()) j["err"] = value_to_json(it->second);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_sat(const Options& opt, const std::string& assert_text,
            const std::string& model_json, const std::string& pred_file) {
  PredRegistry reg = builtin_corpus();
  std::set<std::string> names = builtin_pred_names();
  if (!pred_file.empty()) {
    auto defs = parse_pred_file(slurp(pred_file), names);
    auto errs = reg.register_group(defs);
    for (const auto& e : errs) std::cerr << "error: " << e << "\n";
    if (!errs.empty()) return 1;
    for (const auto& d : defs) names.insert(d.name);
  }
  AssertionPtr a = parse_assertion(assert_text, names);
  Json mj = model_json.empty() ? Json::object() : Json::parse(model_json);
  State st = json_to_state(mj);
  Substitution theta;
  if (mj.contains("theta")) {
    for (auto it = mj["theta"].begin(); it != mj["theta"].end(); ++it) {
      theta.emplace(it.key(), json_to_value(it.value()));
    }
  }
  SatResult r = sat(reg, theta, st, *a, opt.bounds());
  Json out = Json{{"kind", "sat"}, {"holds", r.holds}, {"bounded", r.bounded}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_models(const Options& opt, const std::string& assert_text,
               const std::string& lvars_csv, const std::string& pvars_csv,
               const std::string& pred_file) {
  PredRegistry reg = builtin_corpus();
  std::set<std::string> names = builtin_pred_names();
  if (!pred_file.empty()) {
    auto defs = parse_pred_file(slurp(pred_file), names);
    auto errs = reg.register_group(defs);
    for (const auto& e : errs) std::cerr << "error: " << e << "\n";
    if (!errs.empty()) return 1;
    for (const auto& d : defs) names.insert(d.name);
  }
  AssertionPtr a = parse_assertion(assert_text, names);
  auto split = [](const std::string& csv) {
    std::set<std::string> out;
    std::istringstream in(csv);
    std::string item;
    while (std::getline(in, item, ',')) {
      if (!item.empty()) out.insert(item);
    }
    return out;
  };
  auto fv = fv_assertion(*a);
  std::set<std::string> lv_ = lvars_csv.empty() ? fv.lvars : split(lvars_csv);
  std::set<std::string> pv_ = pvars_csv.empty() ? fv.pvars : split(pvars_csv);
  ModelSet ms = enumerate_models(reg, *a, lv_, pv_, opt.bounds());
  Json arr = Json::array();
  for (const auto& m : ms.models) arr.push_back(model_to_json(m));
  Json out = Json{{"kind", "models"}, {"bounded", ms.bounded}, {"models", arr}};
  std::cout << out.dump(2) << "\n";
  std::cerr << ms.models.size() << " model(s)\n";
  return 0;
}

int cmd_check_spec(const Options& opt, const std::string& spec_file,
                   const std::string& prog_file, const std::string& prop) {
  PredRegistry reg = builtin_corpus();
  std::set<std::string> names = builtin_pred_names();
  SpecFile sf = parse_spec_file(slurp(spec_file), names);
  if (!sf.preds.empty()) {
    auto errs = reg.register_group(sf.preds);
    for (const auto& e : errs) std::cerr << "error: " << e << "\n";
    if (!errs.empty()) return 1;
  }
  Program prog;
  if (!prog_file.empty()) prog = parse_program(slurp(prog_file));
  OracleConfig cfg = opt.oracle();
  Json arr = Json::array();
  bool any_fail = false, any_bounded = false;
  for (const auto& item : sf.specs) {
    CommandPtr cmd = item.target_cmd;
    Quadruple quad{item.pre, item.post_ok, item.post_err};
    if (!item.target_fun.empty()) {
      const FunctionDef* def = prog.funcs.find(item.target_fun);
      if (!def) {
        std::cerr << "error: no function '" << item.target_fun << "'\n";
        return 1;
      }
      ExternalSpec ext;
      auto errs = make_external_spec(item.target_fun, def->params, item.pre,
                                     item.post_ok, item.post_err, &ext);
      for (const auto& e : errs) std::cerr << "error: " << e << "\n";
      if (!errs.empty()) return 1;
      CallSpec cs = canonical_call_spec(ext);
      cmd = cs.cmd;
      quad = cs.quad;
    }
    Verdict v;
    if (prop == "ox") {
      v = check_ox_valid(reg, prog.funcs, *cmd, quad, cfg);
    } else if (prop == "ux") {
      v = check_ux_valid(reg, prog.funcs, *cmd, quad, cfg);
    } else {
      v = check_ex_valid(reg, prog.funcs, *cmd, quad, cfg);
    }
    any_fail = any_fail || !v.holds();
    any_bounded = any_bounded || v.bounded;
    Json j = verdict_to_json(v);
    j["spec"] = item.name;
    arr.push_back(j);
    std::cerr << item.name << ": "
              << (v.holds() ? (v.bounded ? "holds (bounded)" : "holds")
                            : "counterexample")
              << "\n";
  }
  std::cout << Json{{"kind", "verdict"}, {"results", arr}}.dump(2) << "\n";
  return verdict_exit(!any_fail, any_bounded, opt.strict);
}

int check_one_proof(const Options& opt, const std::string& file, Mode mode,
                    Json* out) {
  ProofScript script = parse_proof_script(slurp(file), builtin_pred_names());
  ProofReport report = check_proof(script, mode, opt.proof());
  *out = proof_report_to_json(report);
  (*out)["file"] = file;
  (*out)["mode"] = mode_name(mode);
  return verdict_exit(report.all_ok, report.any_bounded, opt.strict);
}

int cmd_check_proof(const Options& opt, const std::string& file) {
  Json j;
  int rc = check_one_proof(opt, file, opt.proof_mode(), &j);
  std::cout << j.dump(2) << "\n";
  if (j["all_ok"] == true) {
    std::cerr << file << ": all steps check\n";
  } else {
    for (const auto& s : j["steps"]) {
      if (s["ok"] == false) {
        std::cerr << file << ":" << s["line"].get<int>() << " "
                  << s["where"].get<std::string>() << ": "
                  << s["message"].get<std::string>() << "\n";
      }
    }
  }
  return rc;
}

struct CorpusEntry {
  std::string file;
  Mode mode;
  bool expect_ok;
};

int cmd_corpus(const Options& opt, const std::string& dir) {
  // Bundled proof scripts; the SL-style list-length proof is checked in SL
  // mode and is expected to fail the equivalence discipline of ESL.
  std::vector<CorpusEntry> entries = {
      {"llen_rec.proof", Mode::ESL, true},
      {"llen_iter.proof", Mode::ESL, true},
      {"lswap.proof", Mode::ESL, true},
      {"linsert_first.proof", Mode::ESL, true},
      {"linsert_last.proof", Mode::ESL, true},
      {"lfree.proof", Mode::ESL, true},
      {"lprev.proof", Mode::ESL, true},
      {"lclient.proof", Mode::ESL, true},
      {"evenodd.proof", Mode::ESL, true},
      {"evenoddll.proof", Mode::ESL, true},
      {"bst_findmin.proof", Mode::ESL, true},
      {"bst_insert.proof", Mode::ESL, true},
      {"llen_sl.proof", Mode::SL, true},
      {"llen_sl.proof", Mode::ESL, false},
  };
  unsigned jobs = std::max(1u, opt.jobs);
  std::vector<std::pair<int, Json>> results(entries.size());
  for (size_t base = 0; base < entries.size(); base += jobs) {
    size_t hi = std::min(entries.size(), base + jobs);
    std::vector<std::future<std::pair<int, Json>>> wave;
    for (size_t i = base; i < hi; ++i) {
      wave.push_back(std::async(std::launch::async, [&opt, &dir, &entries, i] {
        Json j;
        int rc = check_one_proof(opt, dir + "/" + entries[i].file,
                                 entries[i].mode, &j);
        return std::make_pair(rc, j);
      }));
    }
    for (size_t i = base; i < hi; ++i) {
      results[i] = wave[i - base].get();
    }
  }
  Json arr = Json::array();
  bool all_as_expected = true;
  for (size_t i = 0; i < entries.size(); ++i) {
    const auto& [rc, j] = results[i];
    bool ok = j["all_ok"] == true;
    bool as_expected = ok == entries[i].expect_ok;
    all_as_expected = all_as_expected && as_expected;
    std::cerr << (as_expected ? "pass" : "FAIL") << "  " << entries[i].file
              << " [" << mode_name(entries[i].mode) << "] -> "
              << (ok ? "all-ok" : "rejected")
              << (entries[i].expect_ok ? "" : " (rejection expected)") << "\n";
    Json e = j;
    e["expected_ok"] = entries[i].expect_ok;
    e["as_expected"] = as_expected;
    arr.push_back(e);
  }
  std::cout << Json{{"kind", "corpus"}, {"entries", arr}}.dump(2) << "\n";
  return all_as_expected ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact separation logic toolkit"};
  app.require_subcommand(1);
  Options opt;

  std::string file, assert_text, model_json, lvars, pvars, pred_file;
  std::string spec_file, prog_file, prop = "ex", dir = "corpus";
  bool all = false;
  bool have_seed = false;

  auto* run = app.add_subcommand("run", "execute a program's main block");
  run->add_option("file", file)->required();
  run->add_flag("--all", all, "enumerate all results");
  auto* seed_opt = run->add_option("--seed", opt.seed, "single seeded run");
  opt.add_flags(run);

  auto* sat_cmd = app.add_subcommand("sat", "check assertion satisfiability");
  sat_cmd->add_option("--assert", assert_text)->required();
  sat_cmd->add_option("--model", model_json,
                      "JSON {theta, store, heap} to check against");
  sat_cmd->add_option("--preds", pred_file, "extra predicate definitions");
  opt.add_flags(sat_cmd);

  auto* models = app.add_subcommand("models", "enumerate bounded models");
  models->add_option("--assert", assert_text)->required();
  models->add_option("--lvars", lvars);
  models->add_option("--pvars", pvars);
  models->add_option("--preds", pred_file);
  opt.add_flags(models);

  auto* check_spec =
      app.add_subcommand("check-spec", "check specs against the oracle");
  check_spec->add_option("spec", spec_file)->required();
  check_spec->add_option("program", prog_file);
  check_spec->add_option("--prop", prop, "ox, ux, or ex");
  opt.add_flags(check_spec);

  auto* check_proof_cmd =
      app.add_subcommand("check-proof", "check a proof script");
  check_proof_cmd->add_option("file", file)->required();
  check_proof_cmd->add_option("--mode", opt.mode, "esl, sl, or isl");
  opt.add_flags(check_proof_cmd);

  auto* corpus = app.add_subcommand("corpus", "run the bundled corpus");
  corpus->add_option("--dir", dir, "corpus directory");
  opt.add_flags(corpus);

  CLI11_PARSE(app, argc, argv);

  try {
    opt.load_config();
    if (run->parsed()) {
      have_seed = seed_opt->count() > 0;
      return cmd_run(opt, file, all, have_seed, opt.seed);
    }
    if (sat_cmd->parsed()) return cmd_sat(opt, assert_text, model_json, pred_file);
    if (models->parsed())
      return cmd_models(opt, assert_text, lvars, pvars, pred_file);
    if (check_spec->parsed())
      return cmd_check_spec(opt, spec_file, prog_file, prop);
    if (check_proof_cmd->parsed()) return cmd_check_proof(opt, file);
    if (corpus->parsed()) return cmd_corpus(opt, dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
