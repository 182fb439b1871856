#include "esl/syntax.hpp"

#include <sstream>

#include "esl/printer.hpp"

namespace esl {

namespace {
CommandPtr make(Command::Node n) {
  return std::make_shared<const Command>(Command{std::move(n)});
}
}  // namespace

CommandPtr mk_skip() { return make(Command::Skip{}); }
CommandPtr mk_assign(std::string x, ExprPtr e) {
  return make(Command::Assign{std::move(x), std::move(e)});
}
CommandPtr mk_nondet(std::string x) { return make(Command::Nondet{std::move(x)}); }
CommandPtr mk_error(ExprPtr e) { return make(Command::Error{std::move(e)}); }
CommandPtr mk_if(ExprPtr c, CommandPtr t, CommandPtr e) {
  return make(Command::If{std::move(c), std::move(t), std::move(e)});
}
CommandPtr mk_while(ExprPtr c, CommandPtr body) {
  return make(Command::While{std::move(c), std::move(body)});
}
CommandPtr mk_seq(CommandPtr a, CommandPtr b) {
  return make(Command::Seq{std::move(a), std::move(b)});
}
CommandPtr mk_funcall(std::string y, std::string f, std::vector<ExprPtr> args) {
  return make(Command::FunCall{std::move(y), std::move(f), std::move(args)});
}
CommandPtr mk_lookup(std::string x, ExprPtr addr) {
  return make(Command::Lookup{std::move(x), std::move(addr)});
}
CommandPtr mk_mutate(ExprPtr addr, ExprPtr val) {
  return make(Command::Mutate{std::move(addr), std::move(val)});
}
CommandPtr mk_alloc(std::string x, ExprPtr size) {
  return make(Command::Alloc{std::move(x), std::move(size)});
}
CommandPtr mk_free(ExprPtr addr) { return make(Command::Free{std::move(addr)}); }

namespace {
void collect(const Command& c, std::set<std::string>& pvars,
             std::set<std::string>* modset) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Command::Skip>) {
        } else if constexpr (std::is_same_v<T, Command::Assign>) {
          pvars.insert(n.target);
          if (modset) modset->insert(n.target);
          auto vs = pv(*n.expr);
          pvars.insert(vs.begin(), vs.end());
        } else if constexpr (std::is_same_v<T, Command::Nondet>) {
          pvars.insert(n.target);
          if (modset) modset->insert(n.target);
        } else if constexpr (std::is_same_v<T, Command::Error>) {
          auto vs = pv(*n.expr);
          pvars.insert(vs.begin(), vs.end());
        } else if constexpr (std::is_same_v<T, Command::If>) {
          auto vs = pv(*n.cond);
          pvars.insert(vs.begin(), vs.end());
          collect(*n.then_branch, pvars, modset);
          collect(*n.else_branch, pvars, modset);
        } else if constexpr (std::is_same_v<T, Command::While>) {
          auto vs = pv(*n.cond);
          pvars.insert(vs.begin(), vs.end());
          collect(*n.body, pvars, modset);
        } else if constexpr (std::is_same_v<T, Command::Seq>) {
          collect(*n.first, pvars, modset);
          collect(*n.second, pvars, modset);
        } else if constexpr (std::is_same_v<T, Command::FunCall>) {
          pvars.insert(n.target);
          if (modset) modset->insert(n.target);
          for (const auto& a : n.args) {
            auto vs = pv(*a);
            pvars.insert(vs.begin(), vs.end());
          }
        } else if constexpr (std::is_same_v<T, Command::Lookup>) {
          pvars.insert(n.target);
          if (modset) modset->insert(n.target);
          auto vs = pv(*n.addr);
          pvars.insert(vs.begin(), vs.end());
        } else if constexpr (std::is_same_v<T, Command::Mutate>) {
          auto vs = pv(*n.addr);
          pvars.insert(vs.begin(), vs.end());
          auto ws = pv(*n.value);
          pvars.insert(ws.begin(), ws.end());
        } else if constexpr (std::is_same_v<T, Command::Alloc>) {
          pvars.insert(n.target);
          if (modset) modset->insert(n.target);
          auto vs = pv(*n.size);
          pvars.insert(vs.begin(), vs.end());
        } else {
          static_assert(std::is_same_v<T, Command::Free>);
          auto vs = pv(*n.addr);
          pvars.insert(vs.begin(), vs.end());
        }
      },
      c.node);
}
}  // namespace

std::set<std::string> pv(const Command& c) {
  std::set<std::string> out;
  collect(c, out, nullptr);
  return out;
}

std::set<std::string> mods(const Command& c) {
  std::set<std::string> all, modset;
  collect(c, all, &modset);
  return modset;
}

void ImplContext::add(FunctionDef def) {
  std::string name = def.name;
  funcs_.insert_or_assign(std::move(name), std::move(def));
}

const FunctionDef* ImplContext::find(const std::string& name) const {
  auto it = funcs_.find(name);
  return it == funcs_.end() ? nullptr : &it->second;
}

std::vector<std::string> validate_function(const FunctionDef& f) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& p : f.params) {
    if (!seen.insert(p).second) out.push_back("duplicate parameter '" + p + "'");
    if (p == "ret" || p == "err")
      out.push_back("reserved name '" + p + "' used as parameter");
  }
  auto body_pv = pv(*f.body);
  for (const auto& v : pv(*f.return_expr)) {
    if (!seen.count(v) && !body_pv.count(v))
      out.push_back("return expression mentions unknown variable '" + v + "'");
  }
  if (!is_program_expr(*f.return_expr))
    out.push_back("return expression contains logical variables");
  for (const auto& v : mods(*f.body)) {
    if (v == "ret" || v == "err")
      out.push_back("body assigns to reserved variable '" + v + "'");
  }
  return out;
}

std::vector<std::string> validate_context(const ImplContext& gamma) {
  std::vector<std::string> out;
  for (const auto& [name, def] : gamma.all()) {
    for (auto& msg : validate_function(def)) {
      out.push_back(name + ": " + msg);
    }
  }
  return out;
}

namespace {
void show(const Command& c, std::ostringstream& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Command::Skip>) {
          out << "skip";
        } else if constexpr (std::is_same_v<T, Command::Assign>) {
          out << n.target << " := " << serialize_expr(*n.expr);
        } else if constexpr (std::is_same_v<T, Command::Nondet>) {
          out << n.target << " := nondet";
        } else if constexpr (std::is_same_v<T, Command::Error>) {
          out << "error(" << serialize_expr(*n.expr) << ")";
        } else if constexpr (std::is_same_v<T, Command::If>) {
          out << "if (" << serialize_expr(*n.cond) << ") { ";
          show(*n.then_branch, out);
          out << " } else { ";
          show(*n.else_branch, out);
          out << " }";
        } else if constexpr (std::is_same_v<T, Command::While>) {
          out << "while (" << serialize_expr(*n.cond) << ") { ";
          show(*n.body, out);
          out << " }";
        } else if constexpr (std::is_same_v<T, Command::Seq>) {
          show(*n.first, out);
          out << "; ";
          show(*n.second, out);
        } else if constexpr (std::is_same_v<T, Command::FunCall>) {
          out << n.target << " := " << n.fun << "(";
          bool first = true;
          for (const auto& a : n.args) {
            if (!first) out << ", ";
            first = false;
            out << serialize_expr(*a);
          }
          out << ")";
        } else if constexpr (std::is_same_v<T, Command::Lookup>) {
          out << n.target << " := [" << serialize_expr(*n.addr) << "]";
        } else if constexpr (std::is_same_v<T, Command::Mutate>) {
          out << "[" << serialize_expr(*n.addr) << "] := "
              << serialize_expr(*n.value);
        } else if constexpr (std::is_same_v<T, Command::Alloc>) {
          out << n.target << " := new(" << serialize_expr(*n.size) << ")";
        } else {
          static_assert(std::is_same_v<T, Command::Free>);
          out << "free(" << serialize_expr(*n.addr) << ")";
        }
      },
      c.node);
}
}  // namespace

std::string show_command(const Command& c) {
  std::ostringstream out;
  show(c, out);
  return out.str();
}

}  // namespace esl
