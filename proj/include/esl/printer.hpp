#pragma once

#include <string>

#include "esl/expr.hpp"

namespace esl {

// Canonical expression printer: deterministic and injective up to parsing.
// Non-atomic subterms are fully parenthesised except at top level; error
// payloads embed this output, so it must stay bit-stable. Program syntax:
// plain identifiers are program variables.
std::string serialize_expr(const Expr& e);

// Assertion-syntax printer: program variables carry the @ sigil, plain
// identifiers are logical variables.
std::string show_lexpr(const Expr& e);

std::string show_value(const Value& v);

}  // namespace esl
