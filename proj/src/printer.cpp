#include "esl/printer.hpp"

#include <sstream>

namespace esl {

namespace {

bool is_atomic(const Expr& e) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        // Lists, length bars, and applications are self-delimiting.
        if constexpr (std::is_same_v<T, Expr::Const> ||
                      std::is_same_v<T, Expr::PVar> ||
                      std::is_same_v<T, Expr::LVar> ||
                      std::is_same_v<T, Expr::ListLit> ||
                      std::is_same_v<T, Expr::MathApp>) {
          return true;
        } else if constexpr (std::is_same_v<T, Expr::Unary>) {
          return n.op == UnOp::Len;
        } else {
          return false;
        }
      },
      e.node);
}

const char* binop_token(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Eq: return "=";
    case BinOp::Lt: return "<";
    case BinOp::And: return "and";
    case BinOp::Cons: return ":";
    case BinOp::Concat: return "++";
    case BinOp::Mod: return "mod";
  }
  return "?";
}

const char* carrier_token(Carrier c) {
  switch (c) {
    case Carrier::Val: return "Val";
    case Carrier::Nat: return "Nat";
    case Carrier::Bool: return "Bool";
    case Carrier::Str: return "Str";
    case Carrier::List: return "List";
  }
  return "?";
}

// In program syntax plain identifiers are program variables; in assertion
// syntax program variables carry an @ sigil and plain identifiers are
// logical variables.
struct Style {
  bool mark_pvars;
};

void print(const Expr& e, const Style& st, std::ostringstream& out);

void print_child(const Expr& e, const Style& st, std::ostringstream& out) {
  if (is_atomic(e)) {
    print(e, st, out);
  } else {
    out << '(';
    print(e, st, out);
    out << ')';
  }
}

void print(const Expr& e, const Style& st, std::ostringstream& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Expr::Const>) {
          out << n.v.show();
        } else if constexpr (std::is_same_v<T, Expr::PVar>) {
          if (st.mark_pvars) out << '@';
          out << n.name;
        } else if constexpr (std::is_same_v<T, Expr::LVar>) {
          out << n.name;
        } else if constexpr (std::is_same_v<T, Expr::Unary>) {
          if (n.op == UnOp::Len) {
            out << '|';
            print(*n.arg, st, out);
            out << '|';
          } else {
            out << "not ";
            print_child(*n.arg, st, out);
          }
        } else if constexpr (std::is_same_v<T, Expr::Binary>) {
          print_child(*n.lhs, st, out);
          out << ' ' << binop_token(n.op) << ' ';
          print_child(*n.rhs, st, out);
        } else if constexpr (std::is_same_v<T, Expr::ListLit>) {
          out << '[';
          bool first = true;
          for (const auto& el : n.elems) {
            if (!first) out << ", ";
            first = false;
            print(*el, st, out);
          }
          out << ']';
        } else if constexpr (std::is_same_v<T, Expr::InSet>) {
          print_child(*n.arg, st, out);
          out << " in " << carrier_token(n.set);
        } else {
          static_assert(std::is_same_v<T, Expr::MathApp>);
          out << n.name << '(';
          bool first = true;
          for (const auto& a : n.args) {
            if (!first) out << ", ";
            first = false;
            print(*a, st, out);
          }
          out << ')';
        }
      },
      e.node);
}

}  // namespace

std::string serialize_expr(const Expr& e) {
  std::ostringstream out;
  print(e, Style{false}, out);
  return out.str();
}

std::string show_lexpr(const Expr& e) {
  std::ostringstream out;
  print(e, Style{true}, out);
  return out.str();
}

std::string show_value(const Value& v) { return v.show(); }

}  // namespace esl
