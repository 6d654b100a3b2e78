#include <doctest.h>

#include <functional>

#include "random_instances.hpp"
#include "scenelogic/compile.hpp"
#include "scenelogic/errors.hpp"
#include "scenelogic/harness.hpp"
#include "scenelogic/parser.hpp"

using namespace scenelogic;

namespace {

std::string share(const char* name) { return std::string(SCENELOGIC_SHARE_DIR) + "/queries/" + name; }

CompiledQuery shipped(const char* file) { return load_query(share(file), std::nullopt); }

std::size_t source_fact_atoms(const Formula& f) {
  if (f.op == Formula::Op::atom) return is_fact_predicate(f.atom.predicate) ? 1 : 0;
  std::size_t n = 0;
  for (const auto& c : f.children) n += source_fact_atoms(c);
  return n;
}

bool has_disjunction(const Formula& f) {
  if (f.op == Formula::Op::disj) return true;
  for (const auto& c : f.children)
    if (has_disjunction(c)) return true;
  return false;
}

// Every guard's slots are bound by the step it is attached to or earlier.
void check_guard_order(const ConjunctivePlan& plan) {
  std::vector<char> bound(plan.slots.size(), 0);
  for (int i = 0; i < plan.imported; ++i) bound[i] = 1;
  for (int g : plan.pre_guards)
    for (int s : plan.guards[g].slots) CHECK(bound[s]);
  std::size_t attached = plan.pre_guards.size();
  for (const auto& step : plan.steps) {
    bound[step.slot] = 1;
    for (int g : step.guards) {
      for (int s : plan.guards[g].slots) CHECK(bound[s]);
      ++attached;
    }
  }
  CHECK(attached == plan.guards.size());
  for (const auto& neg : plan.negations) {
    for (int s : neg.imports) CHECK(bound[s]);
    for (const auto& b : neg.branches) check_guard_order(b);
  }
}

}  // namespace

TEST_SUITE("compile") {

TEST_CASE("tool query compiles to one branch with a negated sub-plan") {
  CompiledQuery q = shipped("tool_on_floor_paper.sl");
  CHECK(q.name == "tool_on_floor");
  CHECK(q.subject == "O");
  REQUIRE(q.branches.size() == 1);
  const auto& b = q.branches[0];
  CHECK(b.atoms.size() == 3);
  CHECK(b.guards.size() == 2);
  CHECK(b.guards[0].label == "side");
  CHECK(b.guards[1].label == "above");
  REQUIRE(b.negations.size() == 1);
  CHECK(b.negations[0].label == "between_vert");
  CHECK(b.negations[0].imports.size() == 2);
  REQUIRE(b.negations[0].branches.size() == 1);
  // Z is bound by no fact atom, so it ranges over every proposal.
  CHECK(b.negations[0].branches[0].universe_slots().size() == 1);
  CHECK(q.required_symbols() == std::set<std::string>{"floor", "tool"});
  CHECK(b.slots[b.subject] == "O");
  check_guard_order(b);
}

TEST_CASE("corrected tool query labels its negation by the connective") {
  CompiledQuery q = shipped("tool_on_floor_corrected.sl");
  REQUIRE(q.branches.size() == 1);
  REQUIRE(q.branches[0].negations.size() == 1);
  CHECK(q.branches[0].negations[0].label == "not");
}

TEST_CASE("leaking pipe query has two atoms and a neighbor guard") {
  CompiledQuery q = shipped("leaking_pipe.sl");
  REQUIRE(q.branches.size() == 1);
  CHECK(q.branches[0].atoms.size() == 2);
  REQUIRE(q.branches[0].guards.size() == 1);
  CHECK(q.branches[0].guards[0].label == "neighbor");
  CHECK(q.required.size() == 2);
}

TEST_CASE("join order checks bound slots before binding new ones") {
  Program p = parse_program(
      "query q := exists A, B: (object(A, \"a\") and segment(B, \"s\") and object(B, \"b\") and left(A, B)).");
  CompiledQuery q = compile_query(p, "q");
  const auto& steps = q.branches[0].steps;
  REQUIRE(steps.size() == 3);
  CHECK(steps[0].binds);
  CHECK(steps[1].binds);
  CHECK_FALSE(steps[2].binds);
  check_guard_order(q.branches[0]);
}

TEST_CASE("disjunctions over facts split into branches, guard-only ones stay guards") {
  Program p = parse_program(
      "query q := exists A, B: (object(A, \"a\") and (segment(B, \"s\") or object(B, \"b\")) and"
      " (left(A, B) or right(A, B))).");
  CompiledQuery q = compile_query(p, "q");
  REQUIRE(q.branches.size() == 2);
  for (const auto& b : q.branches) {
    CHECK(b.atoms.size() == 2);
    REQUIRE(b.guards.size() == 1);
    CHECK(b.guards[0].label == "or");
  }
}

TEST_CASE("subject must appear in every branch") {
  Program p = parse_program("query q := exists A, B: (object(B, \"a\") or (object(A, \"a\") and segment(B, \"s\"))).");
  CHECK_THROWS_AS(compile_query(p, "q"), ValidationError);
}

TEST_CASE("invalid programs and unknown queries are refused") {
  Program p = parse_program("query q := exists A: (object(A, \"a\") and left(A, B)).");
  CHECK_THROWS_AS(compile_query(p, "q"), ValidationError);
  Program ok = parse_program("query q := exists A: object(A, \"a\").");
  CHECK_THROWS_AS(compile_query(ok, "r"), ValidationError);
}

TEST_CASE("inlining renames binders apart and records the rule") {
  Program p = parse_program(
      "pred has_b(A) := exists Z: (object(Z, \"b\") and left(A, Z)).\n"
      "query q := exists Z: (object(Z, \"a\") and has_b(Z)).");
  Formula f = inline_query(p, "q");
  std::set<std::string> binders;
  std::function<void(const Formula&)> walk = [&](const Formula& g) {
    for (const auto& v : g.vars) CHECK(binders.insert(v).second);
    for (const auto& c : g.children) walk(c);
  };
  walk(f);
  CHECK(binders.size() == 2);
  CompiledQuery q = compile_query(p, "q");
  REQUIRE(q.branches.size() == 1);
  CHECK(q.branches[0].atoms.size() == 2);
}

TEST_CASE("strip_spatial drops guards, negations and universe variables") {
  CompiledQuery q = strip_spatial(shipped("tool_on_floor_paper.sl"));
  REQUIRE(q.branches.size() == 1);
  CHECK(q.branches[0].guards.empty());
  CHECK(q.branches[0].negations.empty());
  CHECK(q.branches[0].atoms.size() == 3);
  for (const auto& s : q.branches[0].steps) CHECK(s.guards.empty());
}

TEST_CASE("every source fact atom lands in exactly one place of the plan") {
  testing::Rng rng(5);
  for (int i = 0; i < 300; ++i) {
    auto shape = testing::random_shape(rng, true);
    Program p = parse_program(std::string(testing::kTestRules) + testing::random_query(rng, shape));
    CompiledQuery q = compile_query(p, "q");
    Formula inlined = inline_query(p, "q");
    if (!has_disjunction(inlined)) {
      CHECK(q.branches.size() == 1);
      CHECK(count_fact_atoms(q) == source_fact_atoms(inlined));
    }
    for (const auto& b : q.branches) check_guard_order(b);
  }
}

}
