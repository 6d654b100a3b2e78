#include <algorithm>
#include <cmath>
#include <set>

#include "matcher.hpp"
#include "scenelogic/inference.hpp"

namespace scenelogic {
namespace {

void collect_referenced(const ConjunctivePlan& plan, const FactTable& table, std::set<ProposalId>& ids, bool& universe) {
  for (const auto& s : plan.steps) {
    if (s.source == JoinStep::Source::universe) {
      universe = true;
    } else {
      const auto& atom = plan.atoms[s.atom];
      for (const auto& p : table.group(atom.kind, atom.symbol)) ids.insert(p.id);
    }
  }
  for (const auto& neg : plan.negations)
    for (const auto& b : neg.branches) collect_referenced(b, table, ids, universe);
}

std::vector<ProposalId> referenced(const CompiledQuery& query, const FactTable& table) {
  std::set<ProposalId> ids;
  bool universe = false;
  for (const auto& b : query.branches) collect_referenced(b, table, ids, universe);
  if (universe)
    for (const auto& p : table.proposals()) ids.insert(p.id);
  return {ids.begin(), ids.end()};
}

// Classical evaluation inside one world.
class WorldEvaluator {
 public:
  WorldEvaluator(const FactTable& table, const std::vector<char>& present) : table_(table), present_(present) {}

  bool holds(const ConjunctivePlan& plan, std::vector<ProposalId>& bindings, std::span<const ProposalId> excluded,
             int subject_slot, std::optional<Cell> subject_cell) const {
    detail::Matcher matcher(plan, table_);
    detail::MatchFilter filter;
    filter.present = &present_;
    filter.excluded = excluded;
    filter.subject_slot = subject_slot;
    filter.subject_cell = subject_cell;
    bool found = false;
    matcher.run(bindings, filter, [&](const std::vector<ProposalId>& b) {
      if (plan.negations.empty()) {
        found = true;
        return false;
      }
      std::vector<ProposalId> inner(excluded.begin(), excluded.end());
      auto fresh = detail::fresh_facts(plan, b);
      inner.insert(inner.end(), fresh.begin(), fresh.end());
      for (const auto& neg : plan.negations)
        if (negation_violated(neg, b, inner)) return true;
      found = true;
      return false;
    });
    return found;
  }

 private:
  // True when some branch of the negated sub-query is satisfied.
  bool negation_violated(const NegatedPlan& neg, std::span<const ProposalId> enclosing,
                         std::span<const ProposalId> excluded) const {
    for (const auto& branch : neg.branches) {
      std::vector<ProposalId> bindings(branch.slots.size(), kUnbound);
      for (std::size_t i = 0; i < neg.imports.size(); ++i) bindings[i] = enclosing[neg.imports[i]];
      if (holds(branch, bindings, excluded, -1, std::nullopt)) return true;
    }
    return false;
  }

  const FactTable& table_;
  const std::vector<char>& present_;
};

}  // namespace

std::size_t referenced_fact_count(const CompiledQuery& query, const FactTable& facts) {
  return referenced(query, facts).size();
}

double exact_probability(const CompiledQuery& query, const FactTable& facts, std::size_t max_facts,
                         std::optional<Cell> subject_cell) {
  const auto ids = referenced(query, facts);
  const std::size_t n = ids.size();
  if (n > max_facts || n >= 63) throw OracleLimitError(n, max_facts);

  std::vector<char> present(facts.size(), 0);
  WorldEvaluator eval(facts, present);
  double total = 0.0;
  const std::uint64_t worlds = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < worlds; ++mask) {
    double weight = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      bool on = (mask >> i) & 1u;
      present[ids[i]] = on;
      double p = facts.proposal(ids[i]).prob;
      weight *= on ? p : 1.0 - p;
    }
    if (weight == 0.0) continue;
    for (const auto& branch : query.branches) {
      std::vector<ProposalId> bindings(branch.slots.size(), kUnbound);
      if (eval.holds(branch, bindings, {}, branch.subject, subject_cell)) {
        total += weight;
        break;
      }
    }
  }
  return total;
}

}  // namespace scenelogic
