#pragma once

// Seeded random fact tables and query texts for property tests.

#include <random>
#include <string>

#include "scenelogic/grounding.hpp"

namespace scenelogic::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// `n` proposals over object "a", object "b" and segment "s" on a
/// `side`×`side` grid. Probabilities lie in (0.05, 1].
FactTable random_table(Rng& rng, int n, int side = 4);

struct QueryShape {
  int atoms = 2;           // fact atoms, 1..4
  int guards = 1;          // random relations between the atom variables
  bool guard_disjunction = false;
  bool fact_disjunction = false;
  bool negation = false;   // adds a negated existential over a fresh variable
  bool universe_negation = false;  // negated variable with no fact atom
  bool use_rules = false;  // calls side/between_vert from the prelude
};

QueryShape random_shape(Rng& rng, bool allow_negation);

/// Prenex query text `query q := exists ...: (...).` over the table symbols.
std::string random_query(Rng& rng, const QueryShape& shape);

/// Rules the generated queries may call.
inline constexpr const char* kTestRules =
    "pred side(A, B) := left(A, B) or right(A, B).\n"
    "pred between_vert(A, B, C) := above(A, B) and above(C, A).\n";

}  // namespace scenelogic::testing
