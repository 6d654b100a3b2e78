#include "scenelogic/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <set>

#include "scenelogic/errors.hpp"
#include "scenelogic/parser.hpp"
#include "scenelogic/prelude_text.hpp"

namespace scenelogic {

std::string_view default_prelude() { return detail::kPreludeText; }

Program load_program(std::string_view query_text, std::string_view prelude_text) {
  Program program = parse_program(prelude_text);
  Program user = parse_program(query_text);
  for (auto& r : user.rules) program.rules.push_back(std::move(r));
  for (auto& q : user.queries) program.queries.push_back(std::move(q));
  return program;
}

CompiledQuery load_query(const std::filesystem::path& query_file, const std::optional<std::filesystem::path>& prelude,
                         const std::string& name) {
  std::string text = read_text_file(query_file);
  std::string prelude_text = prelude ? read_text_file(*prelude) : std::string(default_prelude());
  Program user = parse_program(text);
  if (user.queries.empty() && name.empty()) throw ValidationError(query_file.string() + ": no query defined");
  std::string chosen = name.empty() ? user.queries.front().name : name;
  return compile_query(load_program(text, prelude_text), chosen);
}

void EngineParams::validate() const {
  grounding.validate();
  agg.validate();
  if (proof_cap < 1) throw ValidationError("proof cap must be >= 1");
}

namespace {

constexpr std::pair<EvalMode::Kind, std::string_view> kModeNames[] = {
    {EvalMode::Kind::object_only, "object-only"},
    {EvalMode::Kind::segment_only, "segment-only"},
    {EvalMode::Kind::product, "product"},
    {EvalMode::Kind::conj_no_spatial, "conj-no-spatial"},
    {EvalMode::Kind::spatial_fixed, "spatial-fixed"},
    {EvalMode::Kind::spatial_multiscale, "spatial-multiscale"},
};

int parse_scale(std::string_view text) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || v < 1)
    throw ValidationError("bad scale '" + std::string(text) + "'");
  return v;
}

}  // namespace

std::string EvalMode::name() const {
  for (const auto& [k, n] : kModeNames)
    if (k == kind) return kind == Kind::spatial_fixed ? std::string(n) + ":" + std::to_string(scale) : std::string(n);
  return "?";
}

EvalMode parse_eval_mode(std::string_view text, int default_scale) {
  std::string_view head = text, arg;
  if (auto colon = text.find(':'); colon != std::string_view::npos) {
    head = text.substr(0, colon);
    arg = text.substr(colon + 1);
  } else if (auto paren = text.find('('); paren != std::string_view::npos && text.ends_with(')')) {
    head = text.substr(0, paren);
    arg = text.substr(paren + 1, text.size() - paren - 2);
  }
  for (const auto& [k, n] : kModeNames) {
    if (head != n) continue;
    EvalMode m{k, default_scale};
    if (k == EvalMode::Kind::spatial_fixed) {
      if (!arg.empty()) m.scale = parse_scale(arg);
    } else if (head.size() != text.size()) {
      break;
    }
    return m;
  }
  throw ValidationError("unknown mode '" + std::string(text) + "'");
}

std::vector<EvalMode> all_eval_modes(int fixed_scale) {
  return {{EvalMode::Kind::object_only},     {EvalMode::Kind::segment_only},
          {EvalMode::Kind::product},         {EvalMode::Kind::conj_no_spatial},
          {EvalMode::Kind::spatial_fixed, fixed_scale}, {EvalMode::Kind::spatial_multiscale}};
}

void check_mode(const EvalMode& mode, const EngineParams& params) {
  if (mode.kind != EvalMode::Kind::spatial_fixed) return;
  const auto& s = params.grounding.scales;
  if (std::find(s.begin(), s.end(), mode.scale) == s.end())
    throw ValidationError("fixed scale " + std::to_string(mode.scale) + " is not in the configured scale set");
}

namespace {

std::optional<std::string> first_symbol(const CompiledQuery& query, SymbolKind kind) {
  // Source order of the first branch, so "object-only" follows the query text.
  for (const auto& branch : query.branches)
    for (const auto& atom : branch.atoms)
      if (atom.kind == kind) return atom.symbol;
  return std::nullopt;
}

double symbol_max(const Bundle& bundle, const std::optional<std::string>& symbol) {
  if (!symbol) return 0.0;
  const SymbolHeatmap* h = bundle.find(*symbol);
  return h ? h->max_value() : 0.0;
}

}  // namespace

std::optional<std::string> query_object_symbol(const CompiledQuery& query) {
  return first_symbol(query, SymbolKind::object);
}

std::optional<std::string> query_segment_symbol(const CompiledQuery& query) {
  return first_symbol(query, SymbolKind::segment);
}

double score_pyramid(const Bundle& bundle, const Pyramid& pyramid, const CompiledQuery& query, const EvalMode& mode,
                     const EngineParams& params) {
  switch (mode.kind) {
    case EvalMode::Kind::object_only:
      return symbol_max(bundle, query_object_symbol(query));
    case EvalMode::Kind::segment_only:
      return symbol_max(bundle, query_segment_symbol(query));
    case EvalMode::Kind::product:
      return symbol_max(bundle, query_object_symbol(query)) * symbol_max(bundle, query_segment_symbol(query));
    case EvalMode::Kind::conj_no_spatial:
      return infer_multiscale(strip_spatial(query), pyramid, params.agg, params.proof_cap).prob;
    case EvalMode::Kind::spatial_fixed: {
      check_mode(mode, params);
      auto it = pyramid.find(mode.scale);
      if (it != pyramid.end()) return infer_at_scale(query, it->second, params.agg, params.proof_cap).prob;
      return infer_at_scale(query, ground_scale(bundle, mode.scale, params.grounding), params.agg, params.proof_cap)
          .prob;
    }
    case EvalMode::Kind::spatial_multiscale:
      return infer_multiscale(query, pyramid, params.agg, params.proof_cap).prob;
  }
  throw ValidationError("unknown mode");
}

double score_bundle(const Bundle& bundle, const CompiledQuery& query, const EvalMode& mode,
                    const EngineParams& params) {
  params.validate();
  check_mode(mode, params);
  switch (mode.kind) {
    case EvalMode::Kind::object_only:
    case EvalMode::Kind::segment_only:
    case EvalMode::Kind::product:
      return score_pyramid(bundle, {}, query, mode, params);
    default:
      return score_pyramid(bundle, build_pyramid(bundle, params.grounding), query, mode, params);
  }
}

ConfigurationResult infer_bundle(const Bundle& bundle, const CompiledQuery& query, const EvalMode& mode,
                                 const EngineParams& params) {
  params.validate();
  check_mode(mode, params);
  switch (mode.kind) {
    case EvalMode::Kind::spatial_multiscale:
      return infer_multiscale(query, build_pyramid(bundle, params.grounding), params.agg, params.proof_cap);
    case EvalMode::Kind::conj_no_spatial:
      return infer_multiscale(strip_spatial(query), build_pyramid(bundle, params.grounding), params.agg,
                              params.proof_cap);
    case EvalMode::Kind::spatial_fixed: {
      auto r = infer_at_scale(query, ground_scale(bundle, mode.scale, params.grounding), params.agg, params.proof_cap);
      ConfigurationResult out;
      out.query = query.name;
      out.prob = r.prob;
      out.scale = mode.scale;
      out.cells = std::move(r.cells);
      out.best = std::move(r.best);
      out.per_scale[mode.scale] = r.prob;
      out.truncated = r.truncated;
      return out;
    }
    default:
      throw ValidationError("mode " + mode.name() + " has no configuration map; use eval");
  }
}

RocResult roc_auc(std::span<const double> scores, std::span<const bool> labels) {
  if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
  RocResult r;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw ValidationError("NaN score");
    r.sorted.emplace_back(scores[i], labels[i]);
    pos += labels[i];
  }
  std::size_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0) throw ValidationError("degenerate labels: ROC needs both positives and negatives");
  std::stable_sort(r.sorted.begin(), r.sorted.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  r.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < r.sorted.size();) {
    std::size_t j = i;
    while (j < r.sorted.size() && r.sorted[j].first == r.sorted[i].first) {
      (r.sorted[j].second ? tp : fp) += 1;
      ++j;
    }
    RocPoint next{double(fp) / double(neg), double(tp) / double(pos)};
    const RocPoint& prev = r.points.back();
    r.auc += (next.fpr - prev.fpr) * (next.tpr + prev.tpr) / 2.0;
    r.points.push_back(next);
    i = j;
  }
  return r;
}

std::vector<std::uint8_t> render_pgm(const SymbolHeatmap& map) {
  std::string header = "P5\n" + std::to_string(map.width) + " " + std::to_string(map.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + map.values.size());
  for (float v : map.values) {
    double c = std::clamp(double(v), 0.0, 1.0);
    out.push_back(static_cast<std::uint8_t>(std::lround(255.0 * c)));
  }
  return out;
}

SymbolHeatmap configuration_map(const ConfigurationResult& result, std::uint32_t height, std::uint32_t width) {
  SymbolHeatmap map{"config", SymbolKind::segment, height, width, std::vector<float>(std::size_t(height) * width)};
  const int s = result.scale;
  for (const auto& c : result.cells) {
    std::int64_t y0 = std::int64_t(c.cell.y) * s, x0 = std::int64_t(c.cell.x) * s;
    for (std::int64_t y = y0; y < std::min<std::int64_t>(y0 + s, height); ++y)
      for (std::int64_t x = x0; x < std::min<std::int64_t>(x0 + s, width); ++x)
        map.at(std::uint32_t(y), std::uint32_t(x)) = static_cast<float>(c.prob);
  }
  return map;
}

EvalReport evaluate_dataset(const std::filesystem::path& index_file, const CompiledQuery& query,
                            std::span<const EvalMode> modes, const EngineParams& params) {
  params.validate();
  for (const auto& m : modes) check_mode(m, params);
  EvalReport report;
  report.items = read_index(index_file);
  const auto base = index_file.parent_path();
  for (const auto& m : modes) report.modes.push_back({m, 0.0, 0, 0, {}});

  const CompiledQuery stripped = strip_spatial(query);
  for (const auto& item : report.items) {
    Bundle bundle = read_bundle(base / item.file);
    Pyramid pyramid = build_pyramid(bundle, params.grounding);
    for (auto& mr : report.modes) {
      double s = mr.mode.kind == EvalMode::Kind::conj_no_spatial
                     ? infer_multiscale(stripped, pyramid, params.agg, params.proof_cap).prob
                     : score_pyramid(bundle, pyramid, query, mr.mode, params);
      mr.scores.push_back(s);
    }
  }

  const std::size_t n = report.items.size();
  auto labels = std::make_unique<bool[]>(n);
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n; ++i) n_pos += labels[i] = report.items[i].label == Label::positive;
  for (auto& mr : report.modes) {
    mr.auc = roc_auc(mr.scores, std::span<const bool>(labels.get(), n)).auc;
    mr.n_pos = n_pos;
    mr.n_neg = n - n_pos;
  }
  return report;
}

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

std::string metrics_csv(const EvalReport& report) {
  std::string out = "mode,auc,n_pos,n_neg\n";
  for (const auto& m : report.modes)
    out += m.mode.name() + "," + fmt("%.6f", m.auc) + "," + std::to_string(m.n_pos) + "," + std::to_string(m.n_neg) +
           "\n";
  return out;
}

std::string scores_csv(const EvalReport& report) {
  std::string out = "file,layout,label";
  for (const auto& m : report.modes) out += "," + m.mode.name();
  out += "\n";
  for (std::size_t i = 0; i < report.items.size(); ++i) {
    const auto& item = report.items[i];
    out += item.file + "," + std::string(to_string(item.layout)) + "," + std::string(to_string(item.label));
    for (const auto& m : report.modes) out += "," + fmt("%.9g", m.scores[i]);
    out += "\n";
  }
  return out;
}

}  // namespace scenelogic
