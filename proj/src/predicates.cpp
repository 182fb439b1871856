#include "esl/predicates.hpp"

#include "esl/eval.hpp"

namespace esl {

namespace {

void collect_calls(const Assertion& a,
                   std::vector<const Assertion::Pred*>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Assertion::Implies> ||
                      std::is_same_v<T, Assertion::Star>) {
          collect_calls(*n.lhs, out);
          collect_calls(*n.rhs, out);
        } else if constexpr (std::is_same_v<T, Assertion::Exists>) {
          collect_calls(*n.body, out);
        } else if constexpr (std::is_same_v<T, Assertion::IterStar>) {
          collect_calls(*n.body, out);
        } else if constexpr (std::is_same_v<T, Assertion::Pred>) {
          out.push_back(&n);
        }
      },
      a.node);
}

}  // namespace

std::vector<std::string> PredRegistry::register_group(
    const std::vector<PredDef>& defs) {
  std::vector<std::string> errs;
  std::map<std::string, size_t> group_arity;
  for (const auto& d : defs) {
    if (defs_.count(d.name) || group_arity.count(d.name)) {
      errs.push_back("duplicate predicate name '" + d.name + "'");
    }
    if (is_mathfn(d.name)) {
      errs.push_back("predicate name '" + d.name +
                     "' collides with a mathematical function");
    }
    std::set<std::string> seen;
    for (const auto& p : d.params) {
      if (!seen.insert(p).second)
        errs.push_back(d.name + ": duplicate parameter '" + p + "'");
    }
    group_arity.emplace(d.name, d.params.size());
  }
  for (const auto& d : defs) {
    auto vars = fv_assertion(*d.body);
    for (const auto& v : vars.lvars) {
      if (std::find(d.params.begin(), d.params.end(), v) == d.params.end())
        errs.push_back(d.name + ": unbound variable '" + v + "' in body");
    }
    if (!vars.pvars.empty())
      errs.push_back(d.name + ": program variable '" + *vars.pvars.begin() +
                     "' in body");
    std::vector<const Assertion::Pred*> calls;
    collect_calls(*d.body, calls);
    for (const auto* call : calls) {
      size_t arity;
      if (auto it = group_arity.find(call->name); it != group_arity.end()) {
        arity = it->second;
      } else if (const PredDef* reg = find(call->name)) {
        arity = reg->params.size();
      } else {
        errs.push_back(d.name + ": unknown predicate '" + call->name + "'");
        continue;
      }
      if (arity != call->args.size())
        errs.push_back(d.name + ": call to '" + call->name + "' with " +
                       std::to_string(call->args.size()) + " args, expected " +
                       std::to_string(arity));
    }
  }
  if (!errs.empty()) return errs;
  for (const auto& d : defs) defs_.emplace(d.name, d);
  return errs;
}

std::vector<std::string> PredRegistry::register_def(const PredDef& def) {
  return register_group({def});
}

const PredDef* PredRegistry::find(const std::string& name) const {
  auto it = defs_.find(name);
  return it == defs_.end() ? nullptr : &it->second;
}

namespace {
AssertionPtr instantiate(const PredDef& def, const std::vector<ExprPtr>& args) {
  VarSubst sub;
  for (size_t i = 0; i < def.params.size(); ++i) {
    sub.lvars.emplace(def.params[i], args[i]);
  }
  return subst_assertion(def.body, sub);
}

AssertionPtr unfold_rec(const PredRegistry& reg, const AssertionPtr& a,
                        uint64_t depth) {
  if (depth == 0) return a;
  return std::visit(
      [&](const auto& n) -> AssertionPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Assertion::Implies>) {
          return mk_implies(unfold_rec(reg, n.lhs, depth),
                            unfold_rec(reg, n.rhs, depth));
        } else if constexpr (std::is_same_v<T, Assertion::Star>) {
          return mk_star(unfold_rec(reg, n.lhs, depth),
                         unfold_rec(reg, n.rhs, depth));
        } else if constexpr (std::is_same_v<T, Assertion::Exists>) {
          return mk_exists(n.var, unfold_rec(reg, n.body, depth));
        } else if constexpr (std::is_same_v<T, Assertion::IterStar>) {
          return mk_iterstar(n.var, n.lo, n.hi, unfold_rec(reg, n.body, depth));
        } else if constexpr (std::is_same_v<T, Assertion::Pred>) {
          const PredDef* def = reg.find(n.name);
          if (!def) return a;
          return unfold_rec(reg, instantiate(*def, n.args), depth - 1);
        } else {
          return a;
        }
      },
      a->node);
}
}  // namespace

AssertionPtr unfold(const PredRegistry& reg, const std::string& name,
                    const std::vector<ExprPtr>& args, uint64_t depth) {
  return unfold_rec(reg, mk_pred(name, args), depth);
}

PredRegistry builtin_corpus() {
  PredRegistry reg;
  auto L = [](const char* n) { return mk_lvar(n); };
  auto cell2 = [&](ExprPtr a, ExprPtr v, ExprPtr nxt) {
    // Two contiguous cells: value then next-pointer.
    return mk_star(mk_cell(a, std::move(v)),
                   mk_cell(mk_add(a, mk_nat(1)), std::move(nxt)));
  };
  auto eq = [&](ExprPtr a, ExprPtr b) {
    return mk_boolassert(mk_eq(std::move(a), std::move(b)));
  };
  auto emptylist = [] { return mk_list({}); };

  std::vector<PredDef> lists;

  // list(x): a singly-linked list at x, hiding everything.
  lists.push_back(
      {"list",
       {"x"},
       mk_or(eq(L("x"), mk_nil()),
             mk_exists_many({"v", "x'"}, mk_star(cell2(L("x"), L("v"), L("x'")),
                                                 mk_pred("list", {L("x'")}))))});
  // list_n(x, n): exposes the length.
  lists.push_back(
      {"list_n",
       {"x", "n"},
       mk_or(mk_star(eq(L("x"), mk_nil()), eq(L("n"), mk_nat(0))),
             mk_exists_many(
                 {"v", "x'"},
                 mk_star(cell2(L("x"), L("v"), L("x'")),
                         mk_pred("list_n", {L("x'"), mk_sub(L("n"), mk_nat(1))}))))});
  // list_v(x, vs): exposes the values.
  lists.push_back(
      {"list_v",
       {"x", "vs"},
       mk_or(mk_star(eq(L("x"), mk_nil()), eq(L("vs"), emptylist())),
             mk_exists_many(
                 {"v", "x'", "vs'"},
                 mk_star_many({cell2(L("x"), L("v"), L("x'")),
                               mk_pred("list_v", {L("x'"), L("vs'")}),
                               eq(L("vs"), mk_binary(BinOp::Cons, L("v"), L("vs'")))})))});
  // list_p(x, xs): exposes the node addresses.
  lists.push_back(
      {"list_p",
       {"x", "xs"},
       mk_or(mk_star(eq(L("x"), mk_nil()), eq(L("xs"), emptylist())),
             mk_exists_many(
                 {"v", "x'", "xs'"},
                 mk_star_many({cell2(L("x"), L("v"), L("x'")),
                               mk_pred("list_p", {L("x'"), L("xs'")}),
                               eq(L("xs"), mk_binary(BinOp::Cons, L("x"), L("xs'")))})))});
  // list_pv(x, xs, vs): exposes addresses and values.
  lists.push_back(
      {"list_pv",
       {"x", "xs", "vs"},
       mk_or(mk_star_many({eq(L("x"), mk_nil()), eq(L("xs"), emptylist()),
                           eq(L("vs"), emptylist())}),
             mk_exists_many(
                 {"v", "x'", "xs'", "vs'"},
                 mk_star_many({cell2(L("x"), L("v"), L("x'")),
                               mk_pred("list_pv", {L("x'"), L("xs'"), L("vs'")}),
                               eq(L("xs"), mk_binary(BinOp::Cons, L("x"), L("xs'"))),
                               eq(L("vs"), mk_binary(BinOp::Cons, L("v"), L("vs'")))})))});
  // list_nat(x, vs): values constrained to naturals.
  lists.push_back(
      {"list_nat",
       {"x", "vs"},
       mk_or(mk_star(eq(L("x"), mk_nil()), eq(L("vs"), emptylist())),
             mk_exists_many(
                 {"v", "x'", "vs'"},
                 mk_star_many({cell2(L("x"), L("v"), L("x'")),
                               mk_boolassert(mk_inset(L("v"), Carrier::Nat)),
                               mk_pred("list_nat", {L("x'"), L("vs'")}),
                               eq(L("vs"), mk_binary(BinOp::Cons, L("v"), L("vs'")))})))});
  // llseg_n(x, y, n): list segment from x to y of length n.
  lists.push_back(
      {"llseg_n",
       {"x", "y", "n"},
       mk_or(mk_star(eq(L("x"), L("y")), eq(L("n"), mk_nat(0))),
             mk_exists_many(
                 {"v", "x'"},
                 mk_star(cell2(L("x"), L("v"), L("x'")),
                         mk_pred("llseg_n",
                                 {L("x'"), L("y"), mk_sub(L("n"), mk_nat(1))}))))});
  // llseg_pv(x, y, xs, vs): segment exposing addresses and values.
  lists.push_back(
      {"llseg_pv",
       {"x", "y", "xs", "vs"},
       mk_or(mk_star_many({eq(L("x"), L("y")), eq(L("xs"), emptylist()),
                           eq(L("vs"), emptylist())}),
             mk_exists_many(
                 {"v", "x'", "xs'", "vs'"},
                 mk_star_many(
                     {cell2(L("x"), L("v"), L("x'")),
                      mk_pred("llseg_pv", {L("x'"), L("y"), L("xs'"), L("vs'")}),
                      eq(L("xs"), mk_binary(BinOp::Cons, L("x"), L("xs'"))),
                      eq(L("vs"), mk_binary(BinOp::Cons, L("v"), L("vs'")))})))});
  // listptr(x, xs): the list xs starts with x (pure).
  lists.push_back(
      {"listptr",
       {"x", "xs"},
       mk_or(mk_star(eq(L("xs"), emptylist()), eq(L("x"), mk_nil())),
             mk_exists("xs'",
                       eq(L("xs"), mk_binary(BinOp::Cons, L("x"), L("xs'")))))});
  // freed(xs): every node in xs has been deallocated.
  lists.push_back(
      {"freed",
       {"xs"},
       mk_or(eq(L("xs"), emptylist()),
             mk_exists_many(
                 {"x", "xs'"},
                 mk_star_many({eq(L("xs"), mk_binary(BinOp::Cons, L("x"), L("xs'"))),
                               mk_freed(L("x")),
                               mk_freed(mk_add(L("x"), mk_nat(1))),
                               mk_pred("freed", {L("xs'")})})))});
  // even/odd on naturals, mutually recursive.
  lists.push_back({"even",
                   {"n"},
                   mk_or(eq(L("n"), mk_nat(0)),
                         mk_pred("odd", {mk_sub(L("n"), mk_nat(1))}))});
  lists.push_back({"odd",
                   {"n"},
                   mk_or(eq(L("n"), mk_nat(1)),
                         mk_pred("even", {mk_sub(L("n"), mk_nat(1))}))});

  // Binary search trees over a key set K (sorted duplicate-free nat list).
  // Nodes occupy three contiguous cells: key, left child, right child.
  auto cell3 = [&](ExprPtr a, ExprPtr k, ExprPtr l, ExprPtr r) {
    return mk_star_many({mk_cell(a, std::move(k)),
                         mk_cell(mk_add(a, mk_nat(1)), std::move(l)),
                         mk_cell(mk_add(a, mk_nat(2)), std::move(r))});
  };
  lists.push_back(
      {"bst_k",
       {"x", "K"},
       mk_or(mk_star(eq(L("x"), mk_nil()), eq(L("K"), emptylist())),
             mk_exists_many(
                 {"k", "l", "r", "Kl", "Kr"},
                 mk_star_many(
                     {cell3(L("x"), L("k"), L("l"), L("r")),
                      mk_pred("bst_k", {L("r"), L("Kr")}),
                      mk_pred("bst_k", {L("l"), L("Kl")}),
                      eq(L("K"), mk_mathapp("uplus",
                                            {L("Kl"),
                                             mk_mathapp("uplus",
                                                        {mk_list({L("k")}), L("Kr")})})),
                      mk_boolassert(mk_binary(BinOp::Lt, L("Kl"), L("k"))),
                      mk_boolassert(mk_binary(BinOp::Lt, L("k"), L("Kr")))})))});
  // Trees t are nil or [[x, k], tl, tr]; key ordering via treekeys.
  lists.push_back(
      {"bst_t",
       {"x", "t"},
       mk_or(mk_star(eq(L("x"), mk_nil()), eq(L("t"), mk_nil())),
             mk_exists_many(
                 {"k", "l", "r", "tl", "tr"},
                 mk_star_many(
                     {cell3(L("x"), L("k"), L("l"), L("r")),
                      mk_pred("bst_t", {L("r"), L("tr")}),
                      mk_pred("bst_t", {L("l"), L("tl")}),
                      eq(L("t"), mk_list({mk_list({L("x"), L("k")}), L("tl"), L("tr")})),
                      mk_boolassert(mk_binary(BinOp::Lt, mk_mathapp("treekeys", {L("tl")}),
                                              L("k"))),
                      mk_boolassert(mk_binary(BinOp::Lt, L("k"),
                                              mk_mathapp("treekeys", {L("tr")})))})))});
  // bst_root(x, t): x is the root address of t.
  lists.push_back(
      {"bst_root",
       {"x", "t"},
       mk_or(mk_star(eq(L("t"), mk_nil()), eq(L("x"), mk_nil())),
             mk_exists_many(
                 {"k", "tl", "tr"},
                 eq(L("t"), mk_list({mk_list({L("x"), L("k")}), L("tl"), L("tr")}))))});

  auto errs = reg.register_group(lists);
  (void)errs;  // the corpus is checked by tests
  return reg;
}

}  // namespace esl
