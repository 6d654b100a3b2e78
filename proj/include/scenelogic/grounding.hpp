#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scenelogic/heatmap.hpp"

namespace scenelogic {

enum class Pooling { max, mean };

Pooling parse_pooling(std::string_view text);  // throws ValidationError
std::string_view to_string(Pooling p);

/// Grid of σ×σ pixel blocks; edge blocks may be smaller.
struct Grid {
  int scale = 1;
  int rows = 0;
  int cols = 0;

  friend bool operator==(const Grid&, const Grid&) = default;
};

Grid grid_for(std::uint32_t height, std::uint32_t width, int scale);

/// x is the column, y the row.
struct Cell {
  int x = 0;
  int y = 0;

  friend auto operator<=>(const Cell& a, const Cell& b) {
    // row-major
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
  friend bool operator==(const Cell&, const Cell&) = default;
};

using ProposalId = std::uint32_t;

struct Proposal {
  ProposalId id = 0;
  SymbolKind kind = SymbolKind::object;
  std::string symbol;
  Cell cell;
  double prob = 0.0;

  friend bool operator==(const Proposal&, const Proposal&) = default;
};

struct GroundingParams {
  std::vector<int> scales{1, 2, 4, 8, 16};
  Pooling pooling = Pooling::max;
  double epsilon = 0.05;
  int max_facts = 64;

  void validate() const;  // throws ValidationError
};

/// Probabilistic facts of one scale. Proposals are stored grouped by
/// (kind, symbol), each group sorted by descending probability with ties in
/// row-major cell order; ids are the positions in that order, so the table
/// does not depend on the order proposals were supplied in.
class FactTable {
 public:
  FactTable() = default;

  /// Validates cells and probabilities (> epsilon, <= 1), keeps at most
  /// `max_facts` per group and assigns ids.
  static FactTable build(Grid grid, double epsilon, int max_facts, std::vector<Proposal> proposals);

  const Grid& grid() const { return grid_; }
  double epsilon() const { return epsilon_; }
  int max_facts() const { return max_facts_; }

  const std::vector<Proposal>& proposals() const { return proposals_; }
  const Proposal& proposal(ProposalId id) const { return proposals_[id]; }
  std::size_t size() const { return proposals_.size(); }

  /// Empty span when the symbol has no facts.
  std::span<const Proposal> group(SymbolKind kind, std::string_view symbol) const;
  std::vector<std::pair<SymbolKind, std::string>> group_keys() const;

  friend bool operator==(const FactTable&, const FactTable&) = default;

 private:
  Grid grid_;
  double epsilon_ = 0.0;
  int max_facts_ = 0;
  std::vector<Proposal> proposals_;
  std::map<std::pair<SymbolKind, std::string>, std::pair<std::size_t, std::size_t>> groups_;  // begin, end
};

using Pyramid = std::map<int, FactTable>;

/// Block pooling with factor σ; output dims are ceil(input / σ).
SymbolHeatmap downsample(const SymbolHeatmap& h, int scale, Pooling pooling);

/// One proposal per cell with value > epsilon, the `max_facts` largest kept,
/// ordered by (-prob, row-major cell). Ids are left at 0.
std::vector<Proposal> extract_facts(const SymbolHeatmap& h, double epsilon, int max_facts);

FactTable ground_scale(const Bundle& bundle, int scale, const GroundingParams& params);
Pyramid build_pyramid(const Bundle& bundle, const GroundingParams& params);

}  // namespace scenelogic
