#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "scenelogic/heatmap.hpp"

namespace scenelogic {

enum class Layout {
  tool_on_floor_positive,
  tool_not_on_floor,
  tool_only,
  floor_only,
  neither,
  pipe_leak_positive,
  pipe_leak_far,
};

inline constexpr std::array kAllLayouts = {
    Layout::tool_on_floor_positive, Layout::tool_not_on_floor, Layout::tool_only,     Layout::floor_only,
    Layout::neither,                Layout::pipe_leak_positive, Layout::pipe_leak_far,
};

std::string_view to_string(Layout layout);  // "tool-on-floor-positive", ...
Layout parse_layout(std::string_view text);  // throws ValidationError
bool is_positive(Layout layout);

enum class Label { positive, negative };
std::string_view to_string(Label label);

/// Which hard negative tool-not-on-floor draws; `any` lets the seed decide.
enum class NegativeVariant { any, floor_above, cabinet_between };

struct SceneSpec {
  Layout layout = Layout::tool_on_floor_positive;
  std::uint32_t height = 224;
  std::uint32_t width = 224;
  int blob_min = 8;  // diameter range of the primary object, pixels
  int blob_max = 96;
  double peak_min = 0.6;
  double peak_max = 0.95;
  double noise = 0.1;
  std::uint64_t seed = 0;
  NegativeVariant variant = NegativeVariant::any;
  bool cabinet = true;  // tool layouts also carry a cabinet map

  void validate() const;  // throws ValidationError
};

/// Pixel rectangle [x0, x1) × [y0, y1) covering a bump's non-zero support.
struct Rect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  friend bool operator==(const Rect&, const Rect&) = default;
};

struct Placement {
  std::string symbol;
  Rect support;
  int cx = 0, cy = 0;  // peak pixel
  double peak = 0.0;
};

struct LabeledBundle {
  Bundle bundle;
  Layout layout = Layout::tool_on_floor_positive;
  Label label = Label::negative;
  std::vector<Placement> placements;
};

/// Tent bumps plus uniform noise; every value is peak·shape·(1 − noise) +
/// noise·u so nothing needs clamping. Pure function of the spec.
LabeledBundle gen_scene(const SceneSpec& spec);

/// Name of the generator behind every seed, written into dataset.json.
inline constexpr std::string_view kGeneratorName = "mt19937_64";

struct DatasetConfig {
  std::map<Layout, int> counts;
  std::uint64_t base_seed = 0;
  SceneSpec scene;  // layout and seed are overridden per item
};

struct IndexEntry {
  std::string file;  // manifest path relative to the dataset directory
  Layout layout = Layout::tool_on_floor_positive;
  Label label = Label::negative;
  std::uint64_t seed = 0;
};

/// Items are emitted layout by layout in declaration order; item i gets seed
/// base + i and lives in scene_NNNN/. Writes index.jsonl and dataset.json.
std::vector<IndexEntry> gen_dataset(const DatasetConfig& config, const std::filesystem::path& dir);

std::string index_line(const IndexEntry& entry);
std::vector<IndexEntry> read_index(const std::filesystem::path& index_file);

}  // namespace scenelogic
