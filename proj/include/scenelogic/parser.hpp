#pragma once

#include <string>
#include <string_view>

#include "scenelogic/ast.hpp"

namespace scenelogic {

/// Parses the keyword grammar (`pred`, `query`, `exists`, `and`, `or`, `not`).
/// Throws SyntaxError with line/column on malformed input.
Program parse_program(std::string_view text);

/// Parses a single formula (no trailing period). Mostly useful in tests.
Formula parse_formula(std::string_view text);

/// Canonical text. parse_program(print_program(p)) == p for valid programs,
/// and the output is byte-stable.
std::string print_program(const Program& program);
std::string print_formula(const Formula& formula);

}  // namespace scenelogic
