#include <doctest.h>

#include <algorithm>
#include <random>

#include "random_instances.hpp"
#include "scenelogic/errors.hpp"
#include "scenelogic/grounding.hpp"

using namespace scenelogic;

namespace {

SymbolHeatmap random_map(testing::Rng& rng, std::uint32_t h, std::uint32_t w, const char* name = "m") {
  std::vector<float> v(std::size_t(h) * w);
  for (auto& x : v) x = static_cast<float>(testing::uniform(rng, 0.0, 1.0));
  return make_heatmap(name, SymbolKind::object, h, w, std::move(v));
}

}  // namespace

TEST_SUITE("grounding") {

TEST_CASE("grid dimensions round up") {
  CHECK(grid_for(224, 224, 16) == Grid{16, 14, 14});
  CHECK(grid_for(10, 7, 4) == Grid{4, 3, 2});
  CHECK(grid_for(5, 5, 1) == Grid{1, 5, 5});
  CHECK_THROWS_AS(grid_for(5, 5, 0), ValidationError);
}

TEST_CASE("max and mean pooling on a small map") {
  auto h = make_heatmap("m", SymbolKind::object, 3, 3, {0.1f, 0.2f, 0.9f, 0.3f, 0.4f, 0.0f, 0.5f, 0.0f, 1.0f});
  auto mx = downsample(h, 2, Pooling::max);
  CHECK(mx.height == 2);
  CHECK(mx.width == 2);
  CHECK(mx.values == std::vector<float>{0.4f, 0.9f, 0.5f, 1.0f});
  auto mean = downsample(h, 2, Pooling::mean);
  // edge blocks average over the pixels they actually cover
  CHECK(mean.at(0, 0) == doctest::Approx(0.25));
  CHECK(mean.at(0, 1) == doctest::Approx(0.45));
  CHECK(mean.at(1, 0) == doctest::Approx(0.25));
  CHECK(mean.at(1, 1) == doctest::Approx(1.0));
  CHECK(downsample(h, 1, Pooling::mean) == h);
}

TEST_CASE("pooling invariants on random maps") {
  testing::Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    auto h = random_map(rng, testing::uniform_int(rng, 1, 40), testing::uniform_int(rng, 1, 40));
    int s = testing::uniform_int(rng, 1, 9);
    auto mx = downsample(h, s, Pooling::max);
    auto mean = downsample(h, s, Pooling::mean);
    CHECK(mx.max_value() == h.max_value());
    for (std::size_t k = 0; k < mx.values.size(); ++k) {
      CHECK(mean.values[k] <= mx.values[k]);
      CHECK(mean.values[k] >= 0.0f);
    }
    mx.validate();
    mean.validate();
  }
}

TEST_CASE("fact extraction thresholds strictly and keeps the largest") {
  auto h = make_heatmap("m", SymbolKind::segment, 2, 3, {0.5f, 0.625f, 0.9f, 0.9f, 0.0f, 0.75f});
  auto facts = extract_facts(h, 0.5, 64);
  REQUIRE(facts.size() == 4);
  CHECK(facts[0].cell == Cell{2, 0});
  CHECK(facts[1].cell == Cell{0, 1});  // equal probability, row-major order
  CHECK(facts[3].prob == 0.625);
  CHECK(extract_facts(h, 0.5, 2).size() == 2);
  CHECK(extract_facts(h, 0.9, 64).empty());
}

TEST_CASE("fact table groups, truncates and validates") {
  std::vector<Proposal> props = {
      {0, SymbolKind::object, "a", {0, 0}, 0.5},  {0, SymbolKind::object, "a", {1, 0}, 0.9},
      {0, SymbolKind::segment, "s", {0, 1}, 0.7}, {0, SymbolKind::object, "a", {1, 1}, 0.2},
  };
  auto t = FactTable::build({1, 2, 2}, 0.05, 2, props);
  CHECK(t.size() == 3);
  auto a = t.group(SymbolKind::object, "a");
  REQUIRE(a.size() == 2);
  CHECK(a[0].prob == 0.9);
  CHECK(a[1].prob == 0.5);
  CHECK(t.group(SymbolKind::segment, "a").empty());
  for (ProposalId i = 0; i < t.size(); ++i) CHECK(t.proposal(i).id == i);

  CHECK_THROWS_AS(FactTable::build({1, 2, 2}, 0.05, 4, {{0, SymbolKind::object, "a", {2, 0}, 0.5}}), ValidationError);
  CHECK_THROWS_AS(FactTable::build({1, 2, 2}, 0.05, 4, {{0, SymbolKind::object, "a", {0, 0}, 0.05}}), ValidationError);
  CHECK_THROWS_AS(FactTable::build({1, 2, 2}, 0.05, 4, {{0, SymbolKind::object, "a", {0, 0}, 1.5}}), ValidationError);
}

TEST_CASE("fact table does not depend on proposal order") {
  testing::Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    auto t = testing::random_table(rng, 12);
    auto props = t.proposals();
    std::shuffle(props.begin(), props.end(), rng);
    CHECK(FactTable::build(t.grid(), t.epsilon(), t.max_facts(), props) == t);
  }
}

TEST_CASE("pyramid has one table per scale") {
  testing::Rng rng(1);
  Bundle b;
  b.heatmaps.push_back(random_map(rng, 20, 30, "a"));
  b.heatmaps.push_back(random_map(rng, 20, 30, "b"));
  GroundingParams p;
  p.max_facts = 5;
  auto pyr = build_pyramid(b, p);
  CHECK(pyr.size() == 5);
  CHECK(pyr.at(16).grid() == Grid{16, 2, 2});
  for (const auto& [s, t] : pyr) {
    CHECK(t.group(SymbolKind::object, "a").size() <= 5);
    for (const auto& prop : t.proposals()) CHECK(prop.prob > p.epsilon);
  }
}

TEST_CASE("parameter validation") {
  GroundingParams p;
  p.scales = {};
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p.scales = {1, 1};
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p.scales = {1, 0};
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p.scales = {2};
  p.epsilon = 1.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  CHECK(parse_pooling("mean") == Pooling::mean);
  CHECK_THROWS_AS(parse_pooling("median"), ValidationError);
}

}
