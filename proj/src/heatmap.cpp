#include "scenelogic/heatmap.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <json.hpp>

#include "scenelogic/errors.hpp"

namespace scenelogic {

std::string_view to_string(SymbolKind kind) { return kind == SymbolKind::object ? "object" : "segment"; }

SymbolKind parse_symbol_kind(std::string_view text) {
  if (text == "object") return SymbolKind::object;
  if (text == "segment") return SymbolKind::segment;
  throw ValidationError("kind must be 'object' or 'segment', got '" + std::string(text) + "'");
}

namespace {

std::uint32_t load_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

void store_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::string where(std::size_t index, std::uint32_t width) {
  return "(" + std::to_string(index / width) + "," + std::to_string(index % width) + ")";
}

void check_value(float v, std::size_t index, std::uint32_t width) {
  if (std::isnan(v)) throw FormatError(FormatError::Code::nan_value, "NaN value at " + where(index, width));
  if (std::isinf(v)) throw FormatError(FormatError::Code::inf_value, "Inf value at " + where(index, width));
  if (v < 0.0f || v > 1.0f) {
    std::ostringstream os;
    os << "value " << v << " outside [0,1] at " << where(index, width);
    throw FormatError(FormatError::Code::out_of_range, os.str());
  }
}

}  // namespace

float SymbolHeatmap::max_value() const {
  return values.empty() ? 0.0f : *std::max_element(values.begin(), values.end());
}

void SymbolHeatmap::validate() const {
  if (height == 0 || width == 0)
    throw FormatError(FormatError::Code::bad_dimensions, "heatmap '" + symbol + "' has zero extent");
  if (values.size() != std::size_t(height) * width)
    throw ValidationError("heatmap '" + symbol + "' has " + std::to_string(values.size()) + " values for " +
                          std::to_string(height) + "x" + std::to_string(width));
  for (std::size_t i = 0; i < values.size(); ++i) check_value(values[i], i, width);
}

SymbolHeatmap make_heatmap(std::string symbol, SymbolKind kind, std::uint32_t height, std::uint32_t width,
                           std::vector<float> values) {
  SymbolHeatmap h{std::move(symbol), kind, height, width, std::move(values)};
  h.validate();
  return h;
}

SymbolHeatmap read_heatmap(std::span<const std::uint8_t> bytes, std::string symbol, SymbolKind kind) {
  if (bytes.size() < 4 || !std::equal(bytes.begin(), bytes.begin() + 4, "SYMH"))
    throw FormatError(FormatError::Code::bad_magic, "bad magic: not a SYMH file");
  if (bytes.size() < kSymhHeaderSize)
    throw FormatError(FormatError::Code::truncated, "truncated header: " + std::to_string(bytes.size()) + " bytes");
  std::uint32_t version = load_u32(bytes.data() + 4);
  if (version != kSymhVersion)
    throw FormatError(FormatError::Code::unsupported_version, "unsupported SYMH version " + std::to_string(version));
  std::uint32_t height = load_u32(bytes.data() + 8);
  std::uint32_t width = load_u32(bytes.data() + 12);
  if (height == 0 || width == 0)
    throw FormatError(FormatError::Code::bad_dimensions,
                      "bad dimensions " + std::to_string(height) + "x" + std::to_string(width));
  std::uint64_t count = std::uint64_t(height) * width;
  std::uint64_t payload = bytes.size() - kSymhHeaderSize;
  if (payload < count * 4)
    throw FormatError(FormatError::Code::truncated, "truncated payload: expected " + std::to_string(count * 4) +
                                                        " bytes, got " + std::to_string(payload));
  if (payload > count * 4)
    throw FormatError(FormatError::Code::trailing_data,
                      "trailing data: " + std::to_string(payload - count * 4) + " bytes after payload");

  SymbolHeatmap h;
  h.symbol = std::move(symbol);
  h.kind = kind;
  h.height = height;
  h.width = width;
  h.values.resize(count);
  const std::uint8_t* p = bytes.data() + kSymhHeaderSize;
  for (std::size_t i = 0; i < count; ++i, p += 4) {
    float v = std::bit_cast<float>(load_u32(p));
    check_value(v, i, width);
    h.values[i] = v;
  }
  return h;
}

std::vector<std::uint8_t> write_heatmap(const SymbolHeatmap& h) {
  std::vector<std::uint8_t> out = {'S', 'Y', 'M', 'H'};
  out.reserve(kSymhHeaderSize + h.values.size() * 4);
  store_u32(out, kSymhVersion);
  store_u32(out, h.height);
  store_u32(out, h.width);
  for (float v : h.values) store_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("cannot read '" + path.string() + "'");
  return bytes;
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

// Symbol names become file names; keep them portable.
std::string file_stem(std::size_t index, const std::string& symbol) {
  std::string stem = std::to_string(index) + "_";
  for (char c : symbol) stem += (std::isalnum(static_cast<unsigned char>(c)) || c == '-') ? c : '_';
  return stem;
}

}  // namespace

SymbolHeatmap read_heatmap_file(const std::filesystem::path& path, std::string symbol, SymbolKind kind) {
  auto bytes = read_bytes(path);
  try {
    return read_heatmap(bytes, std::move(symbol), kind);
  } catch (const FormatError& e) {
    throw FormatError(e.code(), path.string() + ": " + e.what());
  }
}

void write_heatmap_file(const std::filesystem::path& path, const SymbolHeatmap& h) {
  write_bytes(path, write_heatmap(h));
}

std::string read_text_file(const std::filesystem::path& path) {
  auto bytes = read_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

const SymbolHeatmap* Bundle::find(std::string_view symbol) const {
  for (const auto& h : heatmaps)
    if (h.symbol == symbol) return &h;
  return nullptr;
}

void Bundle::validate() const {
  std::set<std::string> names;
  for (const auto& h : heatmaps) {
    if (!names.insert(h.symbol).second) throw ValidationError("duplicate symbol '" + h.symbol + "'");
    h.validate();
    if (h.height != height() || h.width != width())
      throw ValidationError("dimension mismatch: '" + h.symbol + "' is " + std::to_string(h.height) + "x" +
                            std::to_string(h.width) + ", expected " + std::to_string(height()) + "x" +
                            std::to_string(width()));
  }
}

Bundle read_bundle(const std::filesystem::path& manifest) {
  std::string text = read_text_file(manifest);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(manifest.string() + ": malformed manifest: " + e.what());
  }
  Bundle b;
  try {
    b.image_id = doc.at("image_id").get<std::string>();
    const auto base = manifest.parent_path();
    std::set<std::string> names;
    for (const auto& entry : doc.at("symbols")) {
      auto name = entry.at("name").get<std::string>();
      auto kind = parse_symbol_kind(entry.at("kind").get<std::string>());
      if (!names.insert(name).second) throw ValidationError("duplicate symbol '" + name + "'");
      b.heatmaps.push_back(read_heatmap_file(base / entry.at("file").get<std::string>(), name, kind));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(manifest.string() + ": bad manifest: " + e.what());
  }
  b.validate();
  return b;
}

std::filesystem::path write_bundle(const Bundle& bundle, const std::filesystem::path& dir,
                                   const std::string& manifest_name) {
  bundle.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
  nlohmann::json symbols = nlohmann::json::array();
  for (std::size_t i = 0; i < bundle.heatmaps.size(); ++i) {
    const auto& h = bundle.heatmaps[i];
    std::string file = file_stem(i, h.symbol) + ".symh";
    write_heatmap_file(dir / file, h);
    symbols.push_back({{"name", h.symbol}, {"kind", std::string(to_string(h.kind))}, {"file", file}});
  }
  nlohmann::json doc = {{"image_id", bundle.image_id}, {"symbols", symbols}};
  auto path = dir / manifest_name;
  write_text_file(path, doc.dump(2) + "\n");
  return path;
}

}  // namespace scenelogic
