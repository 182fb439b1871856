#pragma once

// Random generators for property-style tests: values, stores, heaps,
// expressions and commands within small bounds.

#include <cstdint>
#include <string>
#include <vector>

#include "esl/interp.hpp"
#include "esl/syntax.hpp"

namespace esl::testgen {

struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed ^ 0x9e3779b97f4a7c15ULL) {}
  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  uint64_t below(uint64_t n) { return n == 0 ? 0 : next() % n; }
  bool coin() { return next() & 1; }
};

inline const std::vector<std::string> kVars = {"x", "y", "z", "w"};

inline Value gen_value(Rng& r, uint64_t vmax, int depth = 1) {
  switch (r.below(depth > 0 ? 5 : 4)) {
    case 0: return Value::nat(r.below(vmax + 1));
    case 1: return Value::boolean(r.coin());
    case 2: return Value::nil();
    case 3: return Value::str(r.coin() ? "a" : "b");
    default: {
      Value::List l;
      uint64_t n = r.below(3);
      for (uint64_t i = 0; i < n; ++i) l.push_back(gen_value(r, vmax, depth - 1));
      return Value::list(std::move(l));
    }
  }
}

inline Store gen_store(Rng& r, uint64_t vmax) {
  Store s;
  for (const auto& v : kVars) {
    if (r.below(4) != 0) s.emplace(v, gen_value(r, vmax));
  }
  return s;
}

inline Heap gen_heap(Rng& r, uint64_t amax, uint64_t vmax) {
  Heap h;
  for (Addr a = 0; a <= amax; ++a) {
    switch (r.below(3)) {
      case 0: h.emplace(a, Cell::value(gen_value(r, vmax))); break;
      case 1: h.emplace(a, Cell::freed_cell()); break;
      default: break;
    }
  }
  return h;
}

inline ExprPtr gen_expr(Rng& r, int depth) {
  if (depth == 0 || r.below(3) == 0) {
    switch (r.below(3)) {
      case 0: return mk_pvar(kVars[r.below(kVars.size())]);
      case 1: return mk_nat(r.below(4));
      default: return r.coin() ? mk_nil() : mk_bool(r.coin());
    }
  }
  switch (r.below(6)) {
    case 0: return mk_add(gen_expr(r, depth - 1), gen_expr(r, depth - 1));
    case 1: return mk_sub(gen_expr(r, depth - 1), gen_expr(r, depth - 1));
    case 2: return mk_eq(gen_expr(r, depth - 1), gen_expr(r, depth - 1));
    case 3: return mk_binary(BinOp::Lt, gen_expr(r, depth - 1), gen_expr(r, depth - 1));
    case 4: return mk_not(gen_expr(r, depth - 1));
    default:
      return mk_binary(BinOp::And, gen_expr(r, depth - 1), gen_expr(r, depth - 1));
  }
}

// Commands over a tiny vocabulary, biased towards heap operations so that
// miss/use-after-free paths are exercised.
inline CommandPtr gen_command(Rng& r, int depth) {
  if (depth == 0) {
    switch (r.below(8)) {
      case 0: return mk_skip();
      case 1: return mk_assign(kVars[r.below(kVars.size())], gen_expr(r, 1));
      case 2: return mk_nondet(kVars[r.below(kVars.size())]);
      case 3: return mk_lookup(kVars[r.below(kVars.size())], gen_expr(r, 1));
      case 4: return mk_mutate(gen_expr(r, 1), gen_expr(r, 1));
      case 5: return mk_alloc(kVars[r.below(kVars.size())], mk_nat(r.below(3)));
      case 6: return mk_free(gen_expr(r, 1));
      default: return mk_error(gen_expr(r, 1));
    }
  }
  switch (r.below(4)) {
    case 0:
      return mk_seq(gen_command(r, depth - 1), gen_command(r, depth - 1));
    case 1:
      return mk_if(gen_expr(r, 1), gen_command(r, depth - 1),
                   gen_command(r, depth - 1));
    case 2: {
      // guard that eventually falsifies under the body to keep loops short
      auto guard = mk_binary(BinOp::Lt, mk_pvar("x"), mk_nat(1 + r.below(3)));
      auto body = mk_seq(gen_command(r, 0),
                         mk_assign("x", mk_add(mk_pvar("x"), mk_nat(1))));
      return mk_seq(mk_assign("x", mk_nat(0)), mk_while(guard, body));
    }
    default:
      return gen_command(r, 0);
  }
}

}  // namespace esl::testgen
