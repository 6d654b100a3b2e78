#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "scenelogic/kind.hpp"

namespace scenelogic {

/// Per-symbol probability map, row-major, origin top-left, y down.
struct SymbolHeatmap {
  std::string symbol;
  SymbolKind kind = SymbolKind::object;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<float> values;

  float at(std::uint32_t row, std::uint32_t col) const { return values[std::size_t(row) * width + col]; }
  float& at(std::uint32_t row, std::uint32_t col) { return values[std::size_t(row) * width + col]; }
  float max_value() const;

  /// Throws FormatError / ValidationError when dimensions or values are invalid.
  void validate() const;

  friend bool operator==(const SymbolHeatmap&, const SymbolHeatmap&) = default;
};

SymbolHeatmap make_heatmap(std::string symbol, SymbolKind kind, std::uint32_t height, std::uint32_t width,
                           std::vector<float> values);

// SYMH v1: "SYMH", u32 version, u32 height, u32 width, then float32 values,
// all little-endian.
inline constexpr std::uint32_t kSymhVersion = 1;
inline constexpr std::size_t kSymhHeaderSize = 16;

/// Decodes and validates. Out-of-range values are rejected, never clamped.
/// The byte stream carries no name; symbol and kind come from the caller.
SymbolHeatmap read_heatmap(std::span<const std::uint8_t> bytes, std::string symbol = {},
                           SymbolKind kind = SymbolKind::object);
std::vector<std::uint8_t> write_heatmap(const SymbolHeatmap& h);

SymbolHeatmap read_heatmap_file(const std::filesystem::path& path, std::string symbol = {},
                                SymbolKind kind = SymbolKind::object);
void write_heatmap_file(const std::filesystem::path& path, const SymbolHeatmap& h);

/// All symbol maps measured on one image. Dimensions are uniform.
struct Bundle {
  std::string image_id;
  std::vector<SymbolHeatmap> heatmaps;

  const SymbolHeatmap* find(std::string_view symbol) const;
  std::uint32_t height() const { return heatmaps.empty() ? 0 : heatmaps.front().height; }
  std::uint32_t width() const { return heatmaps.empty() ? 0 : heatmaps.front().width; }

  /// Unique symbol names, uniform dimensions, valid maps.
  void validate() const;
};

/// Reads a JSON manifest {"image_id", "symbols": [{"name", "kind", "file"}]};
/// files resolve relative to the manifest's directory. Missing files raise
/// IoError, everything else ValidationError.
Bundle read_bundle(const std::filesystem::path& manifest);

/// Writes one SYMH file per symbol plus the manifest into `dir`. Returns the
/// manifest path.
std::filesystem::path write_bundle(const Bundle& bundle, const std::filesystem::path& dir,
                                   const std::string& manifest_name = "manifest.json");

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace scenelogic
