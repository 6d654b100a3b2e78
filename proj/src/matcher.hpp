#pragma once

// Backtracking join over one conjunctive plan. Shared by proof enumeration,
// negation evaluation and the possible-world oracle.

#include <algorithm>
#include <optional>
#include <span>
#include <vector>

#include "scenelogic/inference.hpp"

namespace scenelogic::detail {

bool eval_guard(const GuardExpr& e, std::span<const ProposalId> bindings, const FactTable& table);

struct MatchFilter {
  const std::vector<char>* present = nullptr;  // per proposal id; null means every fact holds
  std::span<const ProposalId> excluded;        // never bound by a fresh step
  int subject_slot = -1;
  std::optional<Cell> subject_cell;
};

class Matcher {
 public:
  Matcher(const ConjunctivePlan& plan, const FactTable& table) : plan_(plan), table_(table) {
    for (const auto& step : plan.steps) {
      if (step.source == JoinStep::Source::fact) {
        const auto& atom = plan.atoms[step.atom];
        groups_.push_back(table.group(atom.kind, atom.symbol));
      } else {
        groups_.push_back(std::span(table.proposals()));
      }
    }
  }

  /// Calls visit(bindings) for each complete assignment; visit returns false
  /// to stop. Returns false when stopped early. `bindings` must be sized to
  /// the plan's slot count with imported slots filled in.
  template <class Visit>
  bool run(std::vector<ProposalId>& bindings, const MatchFilter& filter, Visit&& visit) const {
    for (int g : plan_.pre_guards)
      if (!eval_guard(plan_.guards[g].expr, bindings, table_)) return true;
    return step(0, bindings, filter, visit);
  }

  const ConjunctivePlan& plan() const { return plan_; }

 private:
  bool guards_hold(const JoinStep& s, std::span<const ProposalId> bindings) const {
    for (int g : s.guards)
      if (!eval_guard(plan_.guards[g].expr, bindings, table_)) return false;
    return true;
  }

  template <class Visit>
  bool step(std::size_t i, std::vector<ProposalId>& bindings, const MatchFilter& filter, Visit& visit) const {
    if (i == plan_.steps.size()) return visit(static_cast<const std::vector<ProposalId>&>(bindings));
    const JoinStep& s = plan_.steps[i];
    if (!s.binds) {
      const Proposal& bound = table_.proposal(bindings[s.slot]);
      const FactAtom& atom = plan_.atoms[s.atom];
      if (bound.kind != atom.kind || bound.symbol != atom.symbol) return true;
      if (!guards_hold(s, bindings)) return true;
      return step(i + 1, bindings, filter, visit);
    }
    const bool restrict_subject = filter.subject_cell && s.slot == filter.subject_slot;
    for (const Proposal& p : groups_[i]) {
      if (filter.present && !(*filter.present)[p.id]) continue;
      if (!filter.excluded.empty() &&
          std::find(filter.excluded.begin(), filter.excluded.end(), p.id) != filter.excluded.end())
        continue;
      if (restrict_subject && !(p.cell == *filter.subject_cell)) continue;
      bindings[s.slot] = p.id;
      if (!guards_hold(s, bindings)) continue;
      if (!step(i + 1, bindings, filter, visit)) {
        bindings[s.slot] = kUnbound;
        return false;
      }
    }
    bindings[s.slot] = kUnbound;
    return true;
  }

  const ConjunctivePlan& plan_;
  const FactTable& table_;
  std::vector<std::span<const Proposal>> groups_;  // per step
};

/// Ids bound by the plan's binding steps, distinct and ascending.
std::vector<ProposalId> fresh_facts(const ConjunctivePlan& plan, std::span<const ProposalId> bindings);

}  // namespace scenelogic::detail
