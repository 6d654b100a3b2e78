#include "scenelogic/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>

#include "matcher.hpp"

namespace scenelogic {

void Aggregator::validate() const {
  if (k < 1) throw ValidationError("k must be >= 1, got " + std::to_string(k));
}

bool eval_relation(Relation relation, Cell a, Cell b) {
  switch (relation) {
    case Relation::left: return a.x < b.x;
    case Relation::right: return a.x > b.x;
    case Relation::above: return a.y < b.y;
    case Relation::below: return a.y > b.y;
    case Relation::neighbor: return std::abs(a.x - b.x) <= 1 && std::abs(a.y - b.y) <= 1;
  }
  return false;
}

bool eval_builtin(std::string_view name, Cell a, Cell b) { return eval_relation(parse_relation(name), a, b); }

namespace detail {

bool eval_guard(const GuardExpr& e, std::span<const ProposalId> bindings, const FactTable& table) {
  switch (e.op) {
    case GuardExpr::Op::relation:
      return eval_relation(e.relation, table.proposal(bindings[e.lhs]).cell, table.proposal(bindings[e.rhs]).cell);
    case GuardExpr::Op::all:
      for (const auto& c : e.children)
        if (!eval_guard(c, bindings, table)) return false;
      return true;
    case GuardExpr::Op::any:
      for (const auto& c : e.children)
        if (eval_guard(c, bindings, table)) return true;
      return false;
    case GuardExpr::Op::negate:
      return !eval_guard(e.children.front(), bindings, table);
  }
  return false;
}

std::vector<ProposalId> fresh_facts(const ConjunctivePlan& plan, std::span<const ProposalId> bindings) {
  std::vector<ProposalId> ids;
  for (const auto& s : plan.steps)
    if (s.binds) ids.push_back(bindings[s.slot]);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace detail

namespace {

// Flat candidate store; bindings live in one buffer to keep enumeration of
// large joins cheap.
class CandidatePool {
 public:
  explicit CandidatePool(std::size_t cap) : cap_(cap) {}

  void add(int branch, std::span<const ProposalId> bindings, double prob) {
    entries_.push_back({prob, branch, buffer_.size(), bindings.size()});
    buffer_.insert(buffer_.end(), bindings.begin(), bindings.end());
    ++total_;
    if (entries_.size() >= 2 * cap_ + 4096) shrink();
  }

  ProofSet finish(const CompiledQuery& query) {
    shrink();
    std::sort(entries_.begin(), entries_.end(), [this](const Entry& a, const Entry& b) { return before(a, b); });
    ProofSet out;
    out.total = total_;
    out.truncated = total_ > cap_;
    out.proofs.reserve(entries_.size());
    for (const auto& e : entries_) {
      Proof p;
      p.branch = e.branch;
      p.bindings.assign(buffer_.begin() + e.offset, buffer_.begin() + e.offset + e.size);
      p.facts = detail::fresh_facts(query.branches[e.branch], p.bindings);
      p.prob = e.prob;
      out.proofs.push_back(std::move(p));
    }
    return out;
  }

 private:
  struct Entry {
    double prob;
    int branch;
    std::size_t offset;
    std::size_t size;
  };

  bool before(const Entry& a, const Entry& b) const {
    if (a.prob != b.prob) return a.prob > b.prob;
    auto sa = buffer_.begin() + a.offset, sb = buffer_.begin() + b.offset;
    if (std::lexicographical_compare(sa, sa + a.size, sb, sb + b.size)) return true;
    if (std::lexicographical_compare(sb, sb + b.size, sa, sa + a.size)) return false;
    return a.branch < b.branch;
  }

  void shrink() {
    if (entries_.size() <= cap_) return;
    std::nth_element(entries_.begin(), entries_.begin() + static_cast<std::ptrdiff_t>(cap_), entries_.end(),
                     [this](const Entry& a, const Entry& b) { return before(a, b); });
    entries_.resize(cap_);
    std::vector<ProposalId> compact;
    compact.reserve(cap_ * (entries_.empty() ? 0 : entries_.front().size));
    for (auto& e : entries_) {
      std::size_t off = compact.size();
      compact.insert(compact.end(), buffer_.begin() + e.offset, buffer_.begin() + e.offset + e.size);
      e.offset = off;
    }
    buffer_ = std::move(compact);
  }

  std::size_t cap_;
  std::size_t total_ = 0;
  std::vector<Entry> entries_;
  std::vector<ProposalId> buffer_;
};

// Product over the distinct facts bound by the plan's own steps.
double distinct_product(const ConjunctivePlan& plan, const FactTable& table, std::span<const ProposalId> bindings) {
  double p = 1.0;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const JoinStep& s = plan.steps[i];
    if (!s.binds) continue;
    ProposalId id = bindings[s.slot];
    bool seen = false;
    for (std::size_t j = 0; j < i && !seen; ++j) seen = plan.steps[j].binds && bindings[plan.steps[j].slot] == id;
    if (!seen) p *= table.proposal(id).prob;
  }
  return p;
}

// The best scores seen so far, descending; aggregation never looks further.
class TopScores {
 public:
  explicit TopScores(std::size_t keep) : keep_(keep) {}

  void add(double v) {
    if (best_.size() == keep_) {
      if (v <= best_.back()) return;
      best_.pop_back();
    }
    best_.insert(std::upper_bound(best_.begin(), best_.end(), v, std::greater<>()), v);
  }

  std::vector<double>& values() { return best_; }

 private:
  std::size_t keep_;
  std::vector<double> best_;
};

// Best sub-proof scores of a negated plan, sorted descending.
std::vector<double> negated_scores(const NegatedPlan& negation, const FactTable& table,
                                   std::span<const ProposalId> enclosing_bindings,
                                   std::span<const ProposalId> excluded, const Aggregator& agg);

double negation_product(const ConjunctivePlan& plan, const FactTable& table, std::span<const ProposalId> bindings,
                        std::span<const ProposalId> excluded, const Aggregator& agg) {
  double factor = 1.0;
  for (const auto& neg : plan.negations) {
    auto scores = negated_scores(neg, table, bindings, excluded, agg);
    factor *= 1.0 - aggregate(scores, agg);
    if (factor == 0.0) break;
  }
  return factor;
}

std::vector<double> negated_scores(const NegatedPlan& negation, const FactTable& table,
                                   std::span<const ProposalId> enclosing_bindings,
                                   std::span<const ProposalId> excluded, const Aggregator& agg) {
  TopScores top(agg.mode == Aggregator::Mode::topk_noisy_or ? static_cast<std::size_t>(std::max(agg.k, 1)) : 1);
  std::vector<ProposalId> bindings;
  for (const auto& branch : negation.branches) {
    detail::Matcher matcher(branch, table);
    bindings.assign(branch.slots.size(), kUnbound);
    for (std::size_t i = 0; i < negation.imports.size(); ++i) bindings[i] = enclosing_bindings[negation.imports[i]];
    detail::MatchFilter filter;
    filter.excluded = excluded;
    matcher.run(bindings, filter, [&](const std::vector<ProposalId>& b) {
      double score = distinct_product(branch, table, b);
      if (!branch.negations.empty() && score > 0.0) {
        auto facts = detail::fresh_facts(branch, b);
        std::vector<ProposalId> inner(excluded.begin(), excluded.end());
        inner.insert(inner.end(), facts.begin(), facts.end());
        score *= negation_product(branch, table, b, inner, agg);
      }
      top.add(score);
      return true;
    });
  }
  return std::move(top.values());
}

}  // namespace

ProofSet enumerate_proofs(const CompiledQuery& query, const FactTable& facts, std::size_t cap) {
  CandidatePool pool(cap);
  std::vector<ProposalId> distinct;
  for (std::size_t b = 0; b < query.branches.size(); ++b) {
    const auto& branch = query.branches[b];
    detail::Matcher matcher(branch, facts);
    std::vector<ProposalId> bindings(branch.slots.size(), kUnbound);
    matcher.run(bindings, {}, [&](const std::vector<ProposalId>& bound) {
      distinct.clear();
      double prob = 1.0;
      for (const auto& s : branch.steps) {
        if (!s.binds) continue;
        ProposalId id = bound[s.slot];
        if (std::find(distinct.begin(), distinct.end(), id) != distinct.end()) continue;
        distinct.push_back(id);
        prob *= facts.proposal(id).prob;
      }
      pool.add(static_cast<int>(b), bound, prob);
      return true;
    });
  }
  return pool.finish(query);
}

double aggregate(std::span<const double> probs, const Aggregator& agg) {
  if (agg.mode == Aggregator::Mode::exact)
    throw std::invalid_argument("the exact aggregator works on fact tables, not proof lists");
  if (probs.empty()) return 0.0;
  if (agg.mode == Aggregator::Mode::max) return probs.front();
  double miss = 1.0;
  std::size_t n = std::min(probs.size(), static_cast<std::size_t>(std::max(agg.k, 1)));
  for (std::size_t i = 0; i < n; ++i) miss *= 1.0 - probs[i];
  return 1.0 - miss;
}

double aggregate(const std::vector<Proof>& proofs, const Aggregator& agg) {
  std::vector<double> probs;
  probs.reserve(proofs.size());
  for (const auto& p : proofs) probs.push_back(p.score());
  return aggregate(probs, agg);
}

double eval_negated(const NegatedPlan& negation, const FactTable& facts, std::span<const ProposalId> enclosing_bindings,
                    std::span<const ProposalId> enclosing_facts, const Aggregator& agg) {
  return 1.0 - aggregate(negated_scores(negation, facts, enclosing_bindings, enclosing_facts, agg), agg);
}

void apply_negations(const CompiledQuery& query, const FactTable& facts, Proof& proof, const Aggregator& agg) {
  const auto& branch = query.branches.at(proof.branch);
  proof.negation = branch.negations.empty() ? 1.0 : negation_product(branch, facts, proof.bindings, proof.facts, agg);
}

ScaleResult infer_at_scale(const CompiledQuery& query, const FactTable& facts, const Aggregator& agg, std::size_t cap) {
  agg.validate();
  const bool exact = agg.mode == Aggregator::Mode::exact;
  // The possible-world oracle handles negation itself; the approximate
  // complements use max aggregation only to rank proofs for the readout.
  const Aggregator neg_agg = exact ? Aggregator::max() : agg;

  ProofSet set = enumerate_proofs(query, facts, cap);
  ScaleResult out;
  out.proof_count = set.proofs.size();
  out.truncated = set.truncated;
  for (auto& p : set.proofs) apply_negations(query, facts, p, neg_agg);

  std::map<Cell, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < set.proofs.size(); ++i) {
    const Proof& p = set.proofs[i];
    groups[facts.proposal(p.bindings[query.branches[p.branch].subject]).cell].push_back(i);
  }

  const std::vector<std::size_t>* best_group = nullptr;
  for (auto& [cell, members] : groups) {
    std::stable_sort(members.begin(), members.end(),
                     [&](std::size_t a, std::size_t b) { return set.proofs[a].score() > set.proofs[b].score(); });
    double prob;
    if (exact) {
      prob = exact_probability(query, facts, 20, cell);
    } else {
      std::vector<double> scores;
      scores.reserve(members.size());
      for (std::size_t m : members) scores.push_back(set.proofs[m].score());
      prob = aggregate(scores, agg);
    }
    out.cells.push_back({cell, prob});
    if (!best_group || prob > out.prob) {
      out.prob = prob;
      best_group = &members;
    }
  }
  if (best_group) out.best = set.proofs[best_group->front()];
  return out;
}

ConfigurationResult infer_multiscale(const CompiledQuery& query, const Pyramid& pyramid, const Aggregator& agg,
                                     std::size_t cap) {
  if (pyramid.empty()) throw ValidationError("multi-scale inference needs at least one scale");
  ConfigurationResult out;
  out.query = query.name;
  bool first = true;
  for (const auto& [scale, table] : pyramid) {
    ScaleResult r = infer_at_scale(query, table, agg, cap);
    out.per_scale[scale] = r.prob;
    out.truncated = out.truncated || r.truncated;
    if (first || r.prob > out.prob) {
      out.prob = r.prob;
      out.scale = scale;
      out.cells = std::move(r.cells);
      out.best = std::move(r.best);
      first = false;
    }
  }
  return out;
}

}  // namespace scenelogic
