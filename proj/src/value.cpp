#include "esl/value.hpp"

#include <sstream>

namespace esl {

std::string Value::show() const {
  std::ostringstream out;
  if (is_nat()) {
    out << as_nat();
  } else if (is_bool()) {
    out << (as_bool() ? "true" : "false");
  } else if (is_str()) {
    out << '"' << as_str() << '"';
  } else if (is_nil()) {
    out << "nil";
  } else {
    out << '[';
    bool first = true;
    for (const auto& e : as_list()) {
      if (!first) out << ", ";
      first = false;
      out << e.show();
    }
    out << ']';
  }
  return out.str();
}

bool heaps_disjoint(const Heap& a, const Heap& b) {
  const Heap& small = a.size() <= b.size() ? a : b;
  const Heap& big = a.size() <= b.size() ? b : a;
  for (const auto& [addr, cell] : small) {
    if (big.count(addr)) return false;
  }
  return true;
}

Heap heap_union(const Heap& a, const Heap& b) {
  Heap out = a;
  out.insert(b.begin(), b.end());
  return out;
}

bool heap_submap(const Heap& sub, const Heap& h) {
  for (const auto& [addr, cell] : sub) {
    auto it = h.find(addr);
    if (it == h.end() || !(it->second == cell)) return false;
  }
  return true;
}

Heap heap_minus(const Heap& h, const Heap& sub) {
  Heap out;
  for (const auto& [addr, cell] : h) {
    if (!sub.count(addr)) out.emplace(addr, cell);
  }
  return out;
}

std::string show_store(const Store& s) {
  std::ostringstream out;
  out << '{';
  bool first = true;
  for (const auto& [name, v] : s) {
    if (!first) out << ", ";
    first = false;
    out << name << " -> " << v.show();
  }
  out << '}';
  return out.str();
}

std::string show_heap(const Heap& h) {
  std::ostringstream out;
  out << '{';
  bool first = true;
  for (const auto& [addr, cell] : h) {
    if (!first) out << ", ";
    first = false;
    out << addr << " -> " << (cell.freed() ? "#" : cell.contents->show());
  }
  out << '}';
  return out.str();
}

std::string show_state(const State& st) {
  return show_store(st.store) + " | " + show_heap(st.heap);
}

}  // namespace esl
