#include "scenelogic/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include <json.hpp>

#include "scenelogic/errors.hpp"

namespace scenelogic {

namespace {

constexpr std::array kLayoutNames = {
    "tool-on-floor-positive", "tool-not-on-floor",  "tool-only",     "floor-only",
    "neither",                "pipe-leak-positive", "pipe-leak-far",
};

// Cabinet and floor extents are fixed ranges so that positives and hard
// negatives share them; the cabinet is at least 49 px tall, which leaves a
// full cell row of cabinet between tool and floor at every scale up to 16.
constexpr int kCabinetRx[] = {20, 32};
constexpr int kCabinetRy[] = {25, 32};
constexpr int kFloorRx[] = {48, 96};
constexpr int kFloorRy[] = {20, 32};
constexpr int kLeakR[] = {12, 32};
constexpr int kFarGap = 48;

// Distributions from <random> are implementation-defined, so draws are
// derived from the raw engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  int between(int lo, int hi) {
    if (hi < lo) throw ValidationError("blob does not fit image");
    auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % span);
  }

  double between(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

struct Bump {
  int cx = 0, cy = 0, rx = 1, ry = 1;
  double peak = 0.0;

  Rect support() const { return {cx - rx + 1, cy - ry + 1, cx + rx, cy + ry}; }
  int width() const { return 2 * rx - 1; }
  int height() const { return 2 * ry - 1; }

  double at(int x, int y) const {
    double fx = 1.0 - std::abs(x - cx) / double(rx);
    double fy = 1.0 - std::abs(y - cy) / double(ry);
    return fx > 0.0 && fy > 0.0 ? peak * fx * fy : 0.0;
  }
};

// Random offsets for extents laid end to end along one axis of length
// `length`, with at least gaps[i] between item i and i+1. Returns starts.
std::vector<int> stack(Rng& rng, int length, const std::vector<int>& extents, const std::vector<int>& gaps) {
  int used = 0;
  for (int e : extents) used += e;
  for (int g : gaps) used += g;
  int slack = length - used;
  if (slack < 0) throw ValidationError("blob does not fit image");
  std::vector<int> starts;
  int pos = 0;
  for (std::size_t i = 0; i < extents.size(); ++i) {
    int extra = rng.between(0, slack);
    slack -= extra;
    pos += extra;
    starts.push_back(pos);
    pos += extents[i] + (i < gaps.size() ? gaps[i] : 0);
  }
  return starts;
}

// Center in [r - 1, length - r] near `target`.
int clamp_center(int target, int r, int length) {
  if (2 * r - 1 > length) throw ValidationError("blob does not fit image");
  return std::clamp(target, r - 1, length - r);
}

int anywhere(Rng& rng, int r, int length) {
  if (2 * r - 1 > length) throw ValidationError("blob does not fit image");
  return rng.between(r - 1, length - r);
}

struct Layer {
  std::string symbol;
  SymbolKind kind;
  std::vector<Bump> bumps;
  bool emit = true;
};

LabeledBundle render(const SceneSpec& spec, Rng& rng, std::vector<Layer> layers) {
  LabeledBundle out;
  out.layout = spec.layout;
  out.label = is_positive(spec.layout) ? Label::positive : Label::negative;
  out.bundle.image_id = "seed_" + std::to_string(spec.seed);
  const auto h = spec.height, w = spec.width;
  for (auto& layer : layers) {
    SymbolHeatmap map{layer.symbol, layer.kind, h, w, std::vector<float>(std::size_t(h) * w)};
    for (std::uint32_t y = 0; y < h; ++y)
      for (std::uint32_t x = 0; x < w; ++x) {
        double b = 0.0;
        for (const auto& bump : layer.bumps) b = std::max(b, bump.at(int(x), int(y)));
        double u = spec.noise > 0.0 ? rng.uniform() : 0.0;
        map.at(y, x) = static_cast<float>(b * (1.0 - spec.noise) + spec.noise * u);
      }
    if (!layer.emit) continue;
    for (const auto& bump : layer.bumps)
      out.placements.push_back({layer.symbol, bump.support(), bump.cx, bump.cy, bump.peak});
    out.bundle.heatmaps.push_back(std::move(map));
  }
  return out;
}

LabeledBundle tool_scene(const SceneSpec& spec, Rng& rng) {
  const int H = int(spec.height), W = int(spec.width);
  Bump tool, floor, cabinet;
  int d = rng.between(spec.blob_min, spec.blob_max);
  tool.rx = tool.ry = std::max(1, d / 2);
  tool.peak = rng.between(spec.peak_min, spec.peak_max);
  floor.rx = rng.between(kFloorRx[0], kFloorRx[1]);
  floor.ry = rng.between(kFloorRy[0], kFloorRy[1]);
  floor.peak = rng.between(spec.peak_min, spec.peak_max);
  cabinet.rx = rng.between(kCabinetRx[0], kCabinetRx[1]);
  cabinet.ry = rng.between(kCabinetRy[0], kCabinetRy[1]);
  cabinet.peak = rng.between(spec.peak_min, spec.peak_max);
  floor.rx = std::min(floor.rx, (W + 1) / 2);

  bool has_tool = true, has_floor = true, has_cabinet = true;
  switch (spec.layout) {
    case Layout::tool_on_floor_positive: {
      // cabinet above the tool; floor centered on the tool's lower edge,
      // wider than the tool, so it lies both below and beside it
      auto ys = stack(rng, H, {cabinet.height(), tool.height(), floor.ry}, {0, 0});
      cabinet.cy = ys[0] + cabinet.ry - 1;
      tool.cy = ys[1] + tool.ry - 1;
      floor.cy = tool.cy + tool.ry;
      tool.cx = anywhere(rng, tool.rx, W);
      floor.cx = clamp_center(tool.cx + rng.between(-tool.rx, tool.rx), floor.rx, W);
      cabinet.cx = anywhere(rng, cabinet.rx, W);
      break;
    }
    case Layout::tool_not_on_floor: {
      bool cabinet_between = spec.variant == NegativeVariant::any ? rng.coin()
                                                                  : spec.variant == NegativeVariant::cabinet_between;
      if (cabinet_between) {
        auto ys = stack(rng, H, {tool.height(), cabinet.height(), floor.height()}, {0, 0});
        tool.cy = ys[0] + tool.ry - 1;
        cabinet.cy = ys[1] + cabinet.ry - 1;
        floor.cy = ys[2] + floor.ry - 1;
        tool.cx = anywhere(rng, tool.rx, W);
        cabinet.cx = clamp_center(tool.cx + rng.between(-tool.rx, tool.rx), cabinet.rx, W);
        floor.cx = clamp_center(tool.cx + rng.between(-tool.rx, tool.rx), floor.rx, W);
      } else {
        auto ys = stack(rng, H, {floor.height(), tool.height()}, {0});
        floor.cy = ys[0] + floor.ry - 1;
        tool.cy = ys[1] + tool.ry - 1;
        // cabinet beside the tool, sharing its rows
        bool tool_left = rng.coin();
        auto xs = tool_left ? stack(rng, W, {tool.width(), cabinet.width()}, {0})
                            : stack(rng, W, {cabinet.width(), tool.width()}, {0});
        tool.cx = xs[tool_left ? 0 : 1] + tool.rx - 1;
        cabinet.cx = xs[tool_left ? 1 : 0] + cabinet.rx - 1;
        cabinet.cy = clamp_center(tool.cy, cabinet.ry, H);
        floor.cx = clamp_center(tool.cx + rng.between(-tool.rx, tool.rx), floor.rx, W);
      }
      break;
    }
    case Layout::tool_only:
    case Layout::floor_only:
    case Layout::neither:
      has_tool = spec.layout == Layout::tool_only;
      has_floor = spec.layout == Layout::floor_only;
      has_cabinet = spec.layout != Layout::neither;
      tool.cx = anywhere(rng, tool.rx, W);
      tool.cy = anywhere(rng, tool.ry, H);
      floor.cx = anywhere(rng, floor.rx, W);
      floor.cy = anywhere(rng, floor.ry, H);
      cabinet.cx = anywhere(rng, cabinet.rx, W);
      cabinet.cy = anywhere(rng, cabinet.ry, H);
      break;
    default:
      break;
  }

  auto bumps = [](bool present, const Bump& b) { return present ? std::vector<Bump>{b} : std::vector<Bump>{}; };
  return render(spec, rng,
                {{"tool", SymbolKind::object, bumps(has_tool, tool)},
                 {"floor", SymbolKind::segment, bumps(has_floor, floor)},
                 {"cabinet", SymbolKind::object, bumps(has_cabinet, cabinet), spec.cabinet}});
}

LabeledBundle pipe_scene(const SceneSpec& spec, Rng& rng) {
  const int H = int(spec.height), W = int(spec.width);
  Bump pipe, leak;
  int d = rng.between(spec.blob_min, spec.blob_max);
  pipe.rx = pipe.ry = std::max(1, d / 2);
  pipe.peak = rng.between(spec.peak_min, spec.peak_max);
  leak.rx = rng.between(kLeakR[0], kLeakR[1]);
  leak.ry = rng.between(kLeakR[0], kLeakR[1]);
  leak.peak = rng.between(spec.peak_min, spec.peak_max);

  const bool vertical = rng.coin();
  const bool pipe_first = rng.coin();
  const bool far = spec.layout == Layout::pipe_leak_far;
  // along the axis: far scenes keep a gap, positives overlap by half the
  // smaller support
  int along = vertical ? H : W, across = vertical ? W : H;
  int pe = vertical ? pipe.height() : pipe.width(), le = vertical ? leak.height() : leak.width();
  int gap = far ? kFarGap : -(std::min(pe, le) / 2);
  std::vector<int> starts;
  if (far) {
    starts = pipe_first ? stack(rng, along, {pe, le}, {gap}) : stack(rng, along, {le, pe}, {gap});
  } else {
    int total = pe + le + gap;
    int first = pipe_first ? pe : le;
    int start = rng.between(0, along - total);
    starts = {start, start + first + gap};
  }
  int ps = starts[pipe_first ? 0 : 1], ls = starts[pipe_first ? 1 : 0];
  int pr_along = vertical ? pipe.ry : pipe.rx, lr_along = vertical ? leak.ry : leak.rx;
  int pr_across = vertical ? pipe.rx : pipe.ry, lr_across = vertical ? leak.rx : leak.ry;
  int pc_across = anywhere(rng, pr_across, across);
  int lc_across = clamp_center(pc_across + rng.between(-pr_across, pr_across), lr_across, across);
  if (vertical) {
    pipe.cy = ps + pr_along - 1, leak.cy = ls + lr_along - 1;
    pipe.cx = pc_across, leak.cx = lc_across;
  } else {
    pipe.cx = ps + pr_along - 1, leak.cx = ls + lr_along - 1;
    pipe.cy = pc_across, leak.cy = lc_across;
  }
  return render(spec, rng, {{"pipe", SymbolKind::object, {pipe}}, {"leakage", SymbolKind::segment, {leak}}});
}

}  // namespace

std::string_view to_string(Layout layout) { return kLayoutNames[static_cast<std::size_t>(layout)]; }

Layout parse_layout(std::string_view text) {
  for (Layout l : kAllLayouts)
    if (to_string(l) == text) return l;
  throw ValidationError("unknown layout '" + std::string(text) + "'");
}

bool is_positive(Layout layout) {
  return layout == Layout::tool_on_floor_positive || layout == Layout::pipe_leak_positive;
}

std::string_view to_string(Label label) { return label == Label::positive ? "positive" : "negative"; }

void SceneSpec::validate() const {
  if (height == 0 || width == 0) throw ValidationError("image size must be positive");
  if (blob_min < 1 || blob_min > blob_max) throw ValidationError("blob size range must satisfy 1 <= min <= max");
  if (!(peak_min > 0.0 && peak_min <= peak_max && peak_max <= 1.0))
    throw ValidationError("peak range must satisfy 0 < min <= max <= 1");
  if (!(noise >= 0.0 && noise < 1.0)) throw ValidationError("noise amplitude must lie in [0,1)");
}

LabeledBundle gen_scene(const SceneSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  bool pipe = spec.layout == Layout::pipe_leak_positive || spec.layout == Layout::pipe_leak_far;
  return pipe ? pipe_scene(spec, rng) : tool_scene(spec, rng);
}

std::string index_line(const IndexEntry& e) {
  nlohmann::ordered_json j;
  j["file"] = e.file;
  j["layout"] = std::string(to_string(e.layout));
  j["label"] = std::string(to_string(e.label));
  j["seed"] = e.seed;
  return j.dump();
}

std::vector<IndexEntry> gen_dataset(const DatasetConfig& config, const std::filesystem::path& dir) {
  for (const auto& [layout, n] : config.counts)
    if (n < 0) throw ValidationError("count for " + std::string(to_string(layout)) + " is negative");
  config.scene.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());

  std::vector<IndexEntry> index;
  std::string lines;
  std::uint64_t i = 0;
  for (Layout layout : kAllLayouts) {
    auto it = config.counts.find(layout);
    if (it == config.counts.end()) continue;
    for (int n = 0; n < it->second; ++n, ++i) {
      SceneSpec spec = config.scene;
      spec.layout = layout;
      spec.seed = config.base_seed + i;
      auto scene = gen_scene(spec);
      char name[32];
      std::snprintf(name, sizeof name, "scene_%04llu", static_cast<unsigned long long>(i));
      scene.bundle.image_id = name;
      write_bundle(scene.bundle, dir / name);
      IndexEntry e{std::string(name) + "/manifest.json", layout, scene.label, spec.seed};
      lines += index_line(e) + "\n";
      index.push_back(std::move(e));
    }
  }
  write_text_file(dir / "index.jsonl", lines);

  nlohmann::ordered_json meta;
  meta["generator"] = std::string(kGeneratorName);
  meta["base_seed"] = config.base_seed;
  meta["height"] = config.scene.height;
  meta["width"] = config.scene.width;
  meta["blob_min"] = config.scene.blob_min;
  meta["blob_max"] = config.scene.blob_max;
  meta["peak_min"] = config.scene.peak_min;
  meta["peak_max"] = config.scene.peak_max;
  meta["noise"] = config.scene.noise;
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (Layout layout : kAllLayouts)
    if (auto it = config.counts.find(layout); it != config.counts.end())
      counts[std::string(to_string(layout))] = it->second;
  meta["counts"] = counts;
  meta["items"] = index.size();
  write_text_file(dir / "dataset.json", meta.dump(2) + "\n");
  return index;
}

std::vector<IndexEntry> read_index(const std::filesystem::path& index_file) {
  std::istringstream in(read_text_file(index_file));
  std::vector<IndexEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      IndexEntry e;
      e.file = j.at("file").get<std::string>();
      e.layout = parse_layout(j.at("layout").get<std::string>());
      auto label = j.at("label").get<std::string>();
      if (label != "positive" && label != "negative") throw ValidationError("label must be positive or negative");
      e.label = label == "positive" ? Label::positive : Label::negative;
      e.seed = j.at("seed").get<std::uint64_t>();
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw ValidationError(index_file.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    } catch (const ValidationError& ex) {
      throw ValidationError(index_file.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace scenelogic
