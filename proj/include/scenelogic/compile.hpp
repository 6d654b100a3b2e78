#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "scenelogic/ast.hpp"
#include "scenelogic/kind.hpp"

namespace scenelogic {

enum class Relation { left, right, above, below, neighbor };

Relation parse_relation(std::string_view name);  // throws ValidationError
std::string_view to_string(Relation r);

/// Deterministic condition over bound variable slots.
struct GuardExpr {
  enum class Op { relation, all, any, negate };

  Op op = Op::relation;
  Relation relation = Relation::left;
  int lhs = -1;
  int rhs = -1;
  std::vector<GuardExpr> children;
};

struct Guard {
  std::string label;  // rule name it was inlined from, or the relation name
  GuardExpr expr;
  std::vector<int> slots;
};

struct FactAtom {
  SymbolKind kind = SymbolKind::object;
  std::string symbol;
  int slot = -1;
};

/// One step of the join. Fact steps iterate the proposals of one symbol (or
/// check an already bound slot against it); universe steps iterate every
/// proposal in the table.
struct JoinStep {
  enum class Source { fact, universe };

  Source source = Source::fact;
  int slot = -1;
  bool binds = true;
  int atom = -1;              // index into ConjunctivePlan::atoms for fact steps
  std::vector<int> guards;    // guards that become fully bound after this step
};

struct NegatedPlan;

/// A conjunction of fact atoms, guards and negated sub-plans.
struct ConjunctivePlan {
  std::vector<std::string> slots;  // slot index -> variable name
  int imported = 0;                // leading slots bound by the enclosing plan
  std::vector<FactAtom> atoms;     // source order
  std::vector<JoinStep> steps;     // execution order
  std::vector<Guard> guards;
  std::vector<int> pre_guards;     // guards over imported slots only
  std::vector<NegatedPlan> negations;
  int subject = -1;

  int slot_of(const std::string& var) const;
  std::vector<int> universe_slots() const;
};

struct NegatedPlan {
  std::string label;
  std::vector<int> imports;  // enclosing slots; import i is slot i of every branch
  std::vector<ConjunctivePlan> branches;
};

/// Grounded evaluation plan of one query: a disjunction of conjunctive branches.
/// Queries without disjunctions over fact atoms compile to a single branch.
struct CompiledQuery {
  std::string name;
  std::string subject;
  std::vector<ConjunctivePlan> branches;
  std::vector<std::pair<SymbolKind, std::string>> required;  // sorted, unique

  std::set<std::string> required_symbols() const;
};

/// The query body with every rule call replaced by the rule body. Bound
/// variables are renamed apart so that every binder name is unique; inlined
/// subtrees carry the rule name in Formula::origin.
Formula inline_query(const Program& program, const std::string& query_name);

/// Requires an empty validation report. Throws ValidationError for an unknown
/// query name or a query whose subject is missing from some branch.
CompiledQuery compile_query(const Program& program, const std::string& query_name);

/// The same query with every guard and negated sub-plan removed (and universe
/// variables that only fed them dropped).
CompiledQuery strip_spatial(const CompiledQuery& query);

/// Number of fact atoms, including those inside negated sub-plans.
std::size_t count_fact_atoms(const CompiledQuery& query);

}  // namespace scenelogic
