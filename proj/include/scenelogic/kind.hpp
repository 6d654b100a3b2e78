#pragma once

#include <string_view>

namespace scenelogic {

/// Objects come from attention-style maps, segments from dense segmentation.
enum class SymbolKind { object, segment };

std::string_view to_string(SymbolKind kind);

/// Throws ValidationError for anything other than "object" or "segment".
SymbolKind parse_symbol_kind(std::string_view text);

}  // namespace scenelogic
