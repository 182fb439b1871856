#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace esl {

// The value universe: naturals, booleans, strings, nil, and value lists.
class Value {
 public:
  struct Nil {
    auto operator<=>(const Nil&) const = default;
  };
  using List = std::vector<Value>;

  Value() : rep_(Nil{}) {}
  static Value nat(uint64_t n) { return Value(Rep(std::in_place_index<0>, n)); }
  static Value boolean(bool b) { return Value(Rep(std::in_place_index<1>, b)); }
  static Value str(std::string s) {
    return Value(Rep(std::in_place_index<2>, std::move(s)));
  }
  static Value nil() { return Value(Rep(Nil{})); }
  static Value list(List elems) {
    return Value(Rep(std::make_shared<const List>(std::move(elems))));
  }

  bool is_nat() const { return rep_.index() == 0; }
  bool is_bool() const { return rep_.index() == 1; }
  bool is_str() const { return rep_.index() == 2; }
  bool is_nil() const { return rep_.index() == 3; }
  bool is_list() const { return rep_.index() == 4; }

  uint64_t as_nat() const { return std::get<0>(rep_); }
  bool as_bool() const { return std::get<1>(rep_); }
  const std::string& as_str() const { return std::get<2>(rep_); }
  const List& as_list() const { return *std::get<4>(rep_); }

  // Structural equality across all tags; cross-tag comparison is false,
  // never undefined, so `x = nil` guards work on arbitrary values.
  friend bool operator==(const Value& a, const Value& b) {
    if (a.rep_.index() != b.rep_.index()) return false;
    switch (a.rep_.index()) {
      case 0: return a.as_nat() == b.as_nat();
      case 1: return a.as_bool() == b.as_bool();
      case 2: return a.as_str() == b.as_str();
      case 3: return true;
      case 4: return a.as_list() == b.as_list();
    }
    return false;
  }
  friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }

  // Total order for use as container keys (tag-major, then payload).
  friend bool operator<(const Value& a, const Value& b) {
    if (a.rep_.index() != b.rep_.index()) return a.rep_.index() < b.rep_.index();
    switch (a.rep_.index()) {
      case 0: return a.as_nat() < b.as_nat();
      case 1: return a.as_bool() < b.as_bool();
      case 2: return a.as_str() < b.as_str();
      case 3: return false;
      case 4: {
        const auto& la = a.as_list();
        const auto& lb = b.as_list();
        return std::lexicographical_compare(la.begin(), la.end(), lb.begin(),
                                            lb.end());
      }
    }
    return false;
  }

  std::string show() const;

 private:
  using Rep = std::variant<uint64_t, bool, std::string, Nil,
                           std::shared_ptr<const List>>;
  explicit Value(Rep rep) : rep_(std::move(rep)) {}
  Rep rep_;
};

// Heap cells hold a value or the freed marker; absence from the heap is a
// distinct third situation (missing resource).
struct Cell {
  std::optional<Value> contents;  // nullopt encodes the freed marker
  bool freed() const { return !contents.has_value(); }
  static Cell value(Value v) { return Cell{std::move(v)}; }
  static Cell freed_cell() { return Cell{std::nullopt}; }
  friend bool operator==(const Cell& a, const Cell& b) {
    return a.contents == b.contents;
  }
  friend bool operator<(const Cell& a, const Cell& b) {
    if (a.freed() != b.freed()) return a.freed() && !b.freed();
    if (a.freed()) return false;
    return *a.contents < *b.contents;
  }
};

using Addr = uint64_t;
using Store = std::map<std::string, Value>;
using Heap = std::map<Addr, Cell>;

struct State {
  Store store;
  Heap heap;
  friend bool operator==(const State& a, const State& b) {
    return a.store == b.store && a.heap == b.heap;
  }
  friend bool operator<(const State& a, const State& b) {
    if (a.store != b.store) return a.store < b.store;
    return a.heap < b.heap;
  }
};

// Disjointness and union of heaps.
bool heaps_disjoint(const Heap& a, const Heap& b);
Heap heap_union(const Heap& a, const Heap& b);  // precondition: disjoint
// True iff sub is contained in h with identical cells.
bool heap_submap(const Heap& sub, const Heap& h);
// h minus the domain of sub.
Heap heap_minus(const Heap& h, const Heap& sub);

std::string show_store(const Store& s);
std::string show_heap(const Heap& h);
std::string show_state(const State& st);

}  // namespace esl
