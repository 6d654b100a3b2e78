#include "scenelogic/grounding.hpp"

#include <algorithm>
#include <set>

#include "scenelogic/errors.hpp"

namespace scenelogic {

Pooling parse_pooling(std::string_view text) {
  if (text == "max") return Pooling::max;
  if (text == "mean") return Pooling::mean;
  throw ValidationError("pooling must be 'max' or 'mean', got '" + std::string(text) + "'");
}

std::string_view to_string(Pooling p) { return p == Pooling::max ? "max" : "mean"; }

Grid grid_for(std::uint32_t height, std::uint32_t width, int scale) {
  if (scale < 1) throw ValidationError("scale must be >= 1, got " + std::to_string(scale));
  auto s = static_cast<std::uint32_t>(scale);
  return {scale, static_cast<int>((height + s - 1) / s), static_cast<int>((width + s - 1) / s)};
}

void GroundingParams::validate() const {
  if (scales.empty()) throw ValidationError("scale set is empty");
  std::set<int> seen;
  for (int s : scales) {
    if (s < 1) throw ValidationError("scale must be >= 1, got " + std::to_string(s));
    if (!seen.insert(s).second) throw ValidationError("scale " + std::to_string(s) + " listed twice");
  }
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in [0,1)");
  if (max_facts < 1) throw ValidationError("max facts per symbol must be >= 1");
}

namespace {

bool by_prob_then_cell(const Proposal& a, const Proposal& b) {
  if (a.prob != b.prob) return a.prob > b.prob;
  return a.cell < b.cell;
}

}  // namespace

FactTable FactTable::build(Grid grid, double epsilon, int max_facts, std::vector<Proposal> proposals) {
  if (grid.rows < 1 || grid.cols < 1) throw ValidationError("grid must have at least one cell");
  if (max_facts < 1) throw ValidationError("max facts per symbol must be >= 1");
  for (const auto& p : proposals) {
    if (p.cell.x < 0 || p.cell.y < 0 || p.cell.x >= grid.cols || p.cell.y >= grid.rows)
      throw ValidationError("proposal for '" + p.symbol + "' lies outside the grid");
    if (!(p.prob > epsilon && p.prob <= 1.0))
      throw ValidationError("proposal probability must lie in (epsilon, 1] for '" + p.symbol + "'");
  }
  std::sort(proposals.begin(), proposals.end(), [](const Proposal& a, const Proposal& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.symbol != b.symbol) return a.symbol < b.symbol;
    return by_prob_then_cell(a, b);
  });

  FactTable t;
  t.grid_ = grid;
  t.epsilon_ = epsilon;
  t.max_facts_ = max_facts;
  for (std::size_t i = 0; i < proposals.size();) {
    std::size_t j = i;
    while (j < proposals.size() && proposals[j].kind == proposals[i].kind && proposals[j].symbol == proposals[i].symbol)
      ++j;
    std::size_t begin = t.proposals_.size();
    std::size_t keep = std::min<std::size_t>(j - i, static_cast<std::size_t>(max_facts));
    for (std::size_t k = i; k < i + keep; ++k) {
      Proposal p = std::move(proposals[k]);
      p.id = static_cast<ProposalId>(t.proposals_.size());
      t.proposals_.push_back(std::move(p));
    }
    t.groups_[{t.proposals_[begin].kind, t.proposals_[begin].symbol}] = {begin, t.proposals_.size()};
    i = j;
  }
  return t;
}

std::span<const Proposal> FactTable::group(SymbolKind kind, std::string_view symbol) const {
  auto it = groups_.find({kind, std::string(symbol)});
  if (it == groups_.end()) return {};
  return std::span(proposals_).subspan(it->second.first, it->second.second - it->second.first);
}

std::vector<std::pair<SymbolKind, std::string>> FactTable::group_keys() const {
  std::vector<std::pair<SymbolKind, std::string>> out;
  for (const auto& [key, range] : groups_) out.push_back(key);
  return out;
}

SymbolHeatmap downsample(const SymbolHeatmap& h, int scale, Pooling pooling) {
  Grid g = grid_for(h.height, h.width, scale);
  if (scale == 1) return h;
  SymbolHeatmap out;
  out.symbol = h.symbol;
  out.kind = h.kind;
  out.height = static_cast<std::uint32_t>(g.rows);
  out.width = static_cast<std::uint32_t>(g.cols);
  out.values.assign(std::size_t(g.rows) * g.cols, 0.0f);
  const auto s = static_cast<std::uint32_t>(scale);
  for (int r = 0; r < g.rows; ++r) {
    std::uint32_t r0 = r * s, r1 = std::min(h.height, r0 + s);
    for (int c = 0; c < g.cols; ++c) {
      std::uint32_t c0 = c * s, c1 = std::min(h.width, c0 + s);
      float best = 0.0f, least = 1.0f;
      double sum = 0.0;
      for (std::uint32_t y = r0; y < r1; ++y)
        for (std::uint32_t x = c0; x < c1; ++x) {
          float v = h.at(y, x);
          best = std::max(best, v);
          least = std::min(least, v);
          sum += v;
        }
      float value = pooling == Pooling::max ? best : static_cast<float>(sum / double((r1 - r0) * (c1 - c0)));
      // Rounding the mean to float can step just outside the block's range.
      out.at(r, c) = std::clamp(value, least, best);
    }
  }
  return out;
}

std::vector<Proposal> extract_facts(const SymbolHeatmap& h, double epsilon, int max_facts) {
  std::vector<Proposal> out;
  for (std::uint32_t r = 0; r < h.height; ++r)
    for (std::uint32_t c = 0; c < h.width; ++c) {
      double v = h.at(r, c);
      if (v > epsilon) out.push_back({0, h.kind, h.symbol, {static_cast<int>(c), static_cast<int>(r)}, v});
    }
  auto keep = std::min<std::size_t>(out.size(), static_cast<std::size_t>(std::max(max_facts, 0)));
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(keep), out.end(), by_prob_then_cell);
  out.resize(keep);
  return out;
}

FactTable ground_scale(const Bundle& bundle, int scale, const GroundingParams& params) {
  Grid grid = grid_for(bundle.height(), bundle.width(), scale);
  if (bundle.heatmaps.empty()) grid.rows = grid.cols = 1;
  std::vector<Proposal> all;
  for (const auto& h : bundle.heatmaps) {
    auto facts = extract_facts(downsample(h, scale, params.pooling), params.epsilon, params.max_facts);
    all.insert(all.end(), std::make_move_iterator(facts.begin()), std::make_move_iterator(facts.end()));
  }
  return FactTable::build(grid, params.epsilon, params.max_facts, std::move(all));
}

Pyramid build_pyramid(const Bundle& bundle, const GroundingParams& params) {
  params.validate();
  Pyramid out;
  for (int s : params.scales) out.emplace(s, ground_scale(bundle, s, params));
  return out;
}

}  // namespace scenelogic
