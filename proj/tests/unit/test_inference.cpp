#include <doctest.h>

#include <stdexcept>

#include "random_instances.hpp"
#include "scenelogic/errors.hpp"
#include "scenelogic/harness.hpp"
#include "scenelogic/inference.hpp"

using namespace scenelogic;

namespace {

std::string share(const char* name) { return std::string(SCENELOGIC_SHARE_DIR) + "/queries/" + name; }

Proposal obj(const char* s, int x, int y, double p) { return {0, SymbolKind::object, s, {x, y}, p}; }
Proposal seg(const char* s, int x, int y, double p) { return {0, SymbolKind::segment, s, {x, y}, p}; }

FactTable table(std::vector<Proposal> props, int side = 4, int scale = 1) {
  return FactTable::build({scale, side, side}, 0.05, 64, std::move(props));
}

CompiledQuery compile_text(const std::string& text) {
  return compile_query(load_program(text, testing::kTestRules), "q");
}

CompiledQuery q(const std::string& body) { return compile_text("query q := " + body + "."); }

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("builtin relations") {
  CHECK(eval_builtin("left", {0, 0}, {1, 0}));
  CHECK_FALSE(eval_builtin("left", {1, 0}, {1, 0}));
  CHECK(eval_builtin("right", {2, 5}, {1, 0}));
  CHECK(eval_builtin("above", {3, 0}, {0, 1}));
  CHECK_FALSE(eval_builtin("above", {0, 1}, {0, 1}));
  CHECK(eval_builtin("below", {0, 2}, {0, 1}));
  CHECK(eval_builtin("neighbor", {1, 1}, {1, 1}));
  CHECK(eval_builtin("neighbor", {1, 1}, {2, 2}));
  CHECK_FALSE(eval_builtin("neighbor", {1, 1}, {3, 1}));
  CHECK_THROWS_AS(eval_builtin("near", {0, 0}, {0, 0}), ValidationError);
}

TEST_CASE("aggregators") {
  std::vector<double> p = {0.9, 0.5, 0.2};
  CHECK(aggregate(p, Aggregator::max()) == 0.9);
  CHECK(aggregate(p, Aggregator::top_k(1)) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(aggregate(p, Aggregator::top_k(2)) == doctest::Approx(0.95).epsilon(1e-15));
  CHECK(aggregate(p, Aggregator::top_k(3)) == doctest::Approx(0.96).epsilon(1e-15));
  CHECK(aggregate(p, Aggregator::top_k(10)) == doctest::Approx(0.96).epsilon(1e-15));
  CHECK(aggregate(std::vector<double>{}, Aggregator::top_k(3)) == 0.0);
  CHECK_THROWS_AS(aggregate(p, Aggregator::exact()), std::invalid_argument);
  CHECK_THROWS_AS(Aggregator::top_k(0).validate(), ValidationError);
}

TEST_CASE("a fact shared by two atoms counts once") {
  auto t = table({obj("a", 0, 0, 0.5)});
  auto query = q("exists X, Y: (object(X, \"a\") and object(Y, \"a\"))");
  auto ps = enumerate_proofs(query, t);
  REQUIRE(ps.proofs.size() == 1);
  CHECK(ps.proofs[0].facts == std::vector<ProposalId>{0});
  CHECK(ps.proofs[0].prob == 0.5);
  CHECK(infer_at_scale(query, t, Aggregator::top_k(3)).prob == 0.5);
  CHECK(exact_probability(query, t) == doctest::Approx(0.5));
}

TEST_CASE("proofs are not deduplicated and ties order by bindings") {
  auto t = table({obj("a", 0, 0, 0.5), obj("a", 1, 0, 0.4)});
  auto query = q("exists X, Y: (object(X, \"a\") and object(Y, \"a\"))");
  auto ps = enumerate_proofs(query, t);
  REQUIRE(ps.proofs.size() == 4);
  CHECK(ps.total == 4);
  CHECK_FALSE(ps.truncated);
  CHECK(ps.proofs[0].prob == 0.5);
  CHECK(ps.proofs[1].prob == 0.4);
  CHECK(ps.proofs[2].bindings == std::vector<ProposalId>{0, 1});
  CHECK(ps.proofs[3].bindings == std::vector<ProposalId>{1, 0});
  CHECK(ps.proofs[2].prob == doctest::Approx(0.2));

  auto r = infer_at_scale(query, t, Aggregator::top_k(3));
  REQUIRE(r.cells.size() == 2);
  CHECK(r.cells[0].cell == Cell{0, 0});
  CHECK(r.cells[0].prob == doctest::Approx(0.6));
  CHECK(r.cells[1].cell == Cell{1, 0});
  CHECK(r.cells[1].prob == doctest::Approx(0.52));
  CHECK(r.prob == doctest::Approx(0.6));
  CHECK(r.proof_count == 4);
  REQUIRE(r.best);
  CHECK(r.best->prob == 0.5);
}

TEST_CASE("proof cap truncates") {
  auto t = table({obj("a", 0, 0, 0.5), obj("a", 1, 0, 0.4), obj("a", 2, 0, 0.3)});
  auto query = q("exists X, Y: (object(X, \"a\") and object(Y, \"a\"))");
  auto ps = enumerate_proofs(query, t, 2);
  CHECK(ps.proofs.size() == 2);
  CHECK(ps.truncated);
  CHECK(ps.proofs[0].prob == 0.5);
  CHECK(infer_at_scale(query, t, Aggregator::max(), 2).truncated);
  CHECK_FALSE(infer_at_scale(query, t, Aggregator::max()).truncated);
}

TEST_CASE("negation factor is one minus the aggregated sub-proofs") {
  auto t = table({obj("a", 0, 1, 0.8), obj("b", 0, 0, 0.5), obj("b", 1, 0, 0.4)});
  auto query = q("exists O: (object(O, \"a\") and not exists Z: (object(Z, \"b\") and above(Z, O)))");
  CHECK(infer_at_scale(query, t, Aggregator::top_k(3)).prob == doctest::Approx(0.8 * 0.5 * 0.6));
  CHECK(infer_at_scale(query, t, Aggregator::max()).prob == doctest::Approx(0.8 * 0.5));
  CHECK(exact_probability(query, t) == doctest::Approx(0.8 * 0.5 * 0.6));
  CHECK(infer_at_scale(query, t, Aggregator::exact()).prob == doctest::Approx(0.8 * 0.5 * 0.6));

  auto ps = enumerate_proofs(query, t);
  REQUIRE(ps.proofs.size() == 1);
  CHECK(ps.proofs[0].negation == 1.0);  // not expanded yet
  apply_negations(query, t, ps.proofs[0], Aggregator::top_k(3));
  CHECK(ps.proofs[0].negation == doctest::Approx(0.3));
  CHECK(eval_negated(query.branches[0].negations[0], t, ps.proofs[0].bindings, ps.proofs[0].facts,
                     Aggregator::max()) == doctest::Approx(0.5));
}

TEST_CASE("negated variables never reuse the enclosing proof's facts") {
  auto query = q("exists O: (object(O, \"a\") and not exists Z: (object(Z, \"a\") and neighbor(Z, O)))");
  auto one = table({obj("a", 1, 1, 0.7)});
  CHECK(infer_at_scale(query, one, Aggregator::top_k(3)).prob == doctest::Approx(0.7));
  CHECK(exact_probability(query, one) == doctest::Approx(0.7));

  auto two = table({obj("a", 1, 1, 0.7), obj("a", 2, 1, 0.5)});
  // each subject cell sees the other fact as its neighbour
  auto r = infer_at_scale(query, two, Aggregator::top_k(3));
  REQUIRE(r.cells.size() == 2);
  CHECK(r.cells[0].prob == doctest::Approx(0.7 * 0.5));
  CHECK(r.cells[1].prob == doctest::Approx(0.5 * 0.3));
}

TEST_CASE("shipped tool-on-floor queries on a cabinet-between instance") {
  auto t = table({obj("tool", 0, 0, 0.9), seg("floor", 1, 0, 0.8), seg("floor", 0, 2, 0.7), obj("cabinet", 0, 1, 0.5)});
  auto literal = load_query(share("tool_on_floor_paper.sl"), std::nullopt);
  auto corrected = load_query(share("tool_on_floor_corrected.sl"), std::nullopt);
  const double body = 0.9 * 0.8 * 0.7;

  auto ps = enumerate_proofs(literal, t);
  REQUIRE(ps.proofs.size() == 1);
  apply_negations(literal, t, ps.proofs[0], Aggregator::top_k(3));
  CHECK(ps.proofs[0].negation == 1.0);
  CHECK(infer_at_scale(literal, t, Aggregator::top_k(3)).prob == doctest::Approx(body));
  CHECK(infer_at_scale(corrected, t, Aggregator::top_k(3)).prob == doctest::Approx(body * 0.5));
  CHECK(exact_probability(corrected, t) == doctest::Approx(body * 0.5));
  CHECK(exact_probability(literal, t) == doctest::Approx(body));
}

TEST_CASE("disjunctive branches each contribute proofs") {
  auto t = table({obj("a", 0, 0, 0.5), obj("b", 3, 3, 0.6)});
  auto query = q("exists X: (object(X, \"a\") or object(X, \"b\"))");
  auto ps = enumerate_proofs(query, t);
  REQUIRE(ps.proofs.size() == 2);
  CHECK(ps.proofs[0].prob == 0.6);
  CHECK(ps.proofs[0].branch == 1);
  CHECK(infer_at_scale(query, t, Aggregator::top_k(3)).prob == 0.6);
}

TEST_CASE("empty table scores zero") {
  auto r = infer_at_scale(q("exists X: object(X, \"a\")"), table({}), Aggregator::top_k(3));
  CHECK(r.prob == 0.0);
  CHECK(r.cells.empty());
  CHECK_FALSE(r.best);
}

TEST_CASE("multiscale keeps the smallest of tied scales") {
  Pyramid pyr;
  pyr[1] = table({obj("a", 0, 0, 0.5)}, 4, 1);
  pyr[2] = table({obj("a", 0, 0, 0.5)}, 2, 2);
  pyr[4] = table({obj("a", 0, 0, 0.3)}, 1, 4);
  auto r = infer_multiscale(q("exists X: object(X, \"a\")"), pyr, Aggregator::max());
  CHECK(r.scale == 1);
  CHECK(r.prob == 0.5);
  CHECK(r.per_scale == std::map<int, double>{{1, 0.5}, {2, 0.5}, {4, 0.3}});
  CHECK(r.query == "q");

  pyr[4] = table({obj("a", 0, 0, 0.8)}, 1, 4);
  r = infer_multiscale(q("exists X: object(X, \"a\")"), pyr, Aggregator::max());
  CHECK(r.scale == 4);
  CHECK(r.prob == 0.8);
}

TEST_CASE("result JSON roundtrip") {
  ConfigurationResult r;
  r.query = "tool_on_floor";
  r.prob = 0.1 + 0.2;
  r.scale = 8;
  r.cells = {{{1, 2}, 1.0 / 3.0}, {{0, 5}, 2e-300}};
  r.per_scale = {{1, 0.25}, {8, 0.1 + 0.2}};
  r.truncated = true;
  auto back = result_from_json(result_to_json(r));
  CHECK(back.query == r.query);
  CHECK(back.prob == r.prob);
  CHECK(back.scale == r.scale);
  CHECK(back.cells == r.cells);
  CHECK(back.per_scale == r.per_scale);
  CHECK(back.truncated);
  CHECK(result_to_json(back) == result_to_json(r));
  CHECK_THROWS_AS(result_from_json("{"), ValidationError);
  CHECK_THROWS_AS(result_from_json(R"({"query": 3})"), ValidationError);
}

TEST_CASE("negation-free scores grow with k and shrink when facts are removed") {
  testing::Rng rng(11);
  for (int i = 0; i < 150; ++i) {
    auto t = testing::random_table(rng, testing::uniform_int(rng, 1, 10));
    auto query = compile_text(testing::random_query(rng, testing::random_shape(rng, false)));
    double prev = 0.0;
    for (int k = 1; k <= 5; ++k) {
      double p = infer_at_scale(query, t, Aggregator::top_k(k)).prob;
      CHECK(p >= prev);
      prev = p;
    }
    auto props = t.proposals();
    props.erase(props.begin() + testing::uniform_int(rng, 0, int(props.size()) - 1));
    auto smaller = FactTable::build(t.grid(), t.epsilon(), t.max_facts(), props);
    for (auto agg : {Aggregator::max(), Aggregator::top_k(3)})
      CHECK(infer_at_scale(query, smaller, agg).prob <= infer_at_scale(query, t, agg).prob);
  }
}

}
