#pragma once

#include <string>
#include <vector>

#include "scenelogic/ast.hpp"

namespace scenelogic {

struct Violation {
  std::string kind;  // e.g. "unbound variable", "unsafe negation", "recursion"
  std::string message;
  SourcePos pos;
};

using ValidationReport = std::vector<Violation>;

/// Checks names, arities, argument shapes, variable scoping, negation safety
/// and rule acyclicity. An empty report means the program can be compiled.
ValidationReport validate(const Program& program);

std::string format_report(const ValidationReport& report);

}  // namespace scenelogic
