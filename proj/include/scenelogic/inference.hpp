#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scenelogic/compile.hpp"
#include "scenelogic/errors.hpp"
#include "scenelogic/grounding.hpp"

namespace scenelogic {

/// How proof probabilities of one subject cell are combined.
struct Aggregator {
  enum class Mode { max, topk_noisy_or, exact };

  Mode mode = Mode::topk_noisy_or;
  int k = 3;

  static Aggregator max() { return {Mode::max, 1}; }
  static Aggregator top_k(int k) { return {Mode::topk_noisy_or, k}; }
  static Aggregator exact() { return {Mode::exact, 1}; }

  void validate() const;  // k >= 1
};

inline constexpr std::size_t kDefaultProofCap = 10000;

struct Proof {
  int branch = 0;
  std::vector<ProposalId> bindings;  // slot -> proposal; kUnbound for slots no step binds
  std::vector<ProposalId> facts;     // distinct, ascending
  double prob = 0.0;                 // product of the facts' probabilities
  double negation = 1.0;             // product of negated sub-query complements

  double score() const { return prob * negation; }
};

inline constexpr ProposalId kUnbound = ~ProposalId{0};

bool eval_relation(Relation relation, Cell a, Cell b);

/// left/right/above/below are strict; neighbor is 8-connectivity plus the
/// cell itself. Throws ValidationError for other names.
bool eval_builtin(std::string_view name, Cell a, Cell b);

struct ProofSet {
  std::vector<Proof> proofs;  // descending prob, ties by binding sequence
  std::size_t total = 0;      // satisfying assignments found before truncation
  bool truncated = false;
};

/// All assignments satisfying the fact atoms and guards of every branch.
/// Negated sub-plans are not expanded. Keeps the best `cap`.
ProofSet enumerate_proofs(const CompiledQuery& query, const FactTable& facts, std::size_t cap = kDefaultProofCap);

/// `probs` must be sorted in descending order. max: first element;
/// top-k: 1 - prod(1 - p_i) over the first k. Empty input gives 0.
/// The exact mode has no proof-list form and throws std::invalid_argument.
double aggregate(std::span<const double> probs, const Aggregator& agg);
double aggregate(const std::vector<Proof>& proofs, const Aggregator& agg);

/// Probability that the negated sub-query holds: 1 - aggregate(sub-proofs),
/// with the enclosing bindings substituted and the enclosing proof's facts
/// removed from the sub-query's universe.
double eval_negated(const NegatedPlan& negation, const FactTable& facts, std::span<const ProposalId> enclosing_bindings,
                    std::span<const ProposalId> enclosing_facts, const Aggregator& agg);

/// Sets proof.negation for every negated sub-plan of the proof's branch.
void apply_negations(const CompiledQuery& query, const FactTable& facts, Proof& proof, const Aggregator& agg);

struct CellProb {
  Cell cell;
  double prob = 0.0;

  friend bool operator==(const CellProb&, const CellProb&) = default;
};

struct ScaleResult {
  double prob = 0.0;
  std::vector<CellProb> cells;  // row-major
  std::optional<Proof> best;
  std::size_t proof_count = 0;
  bool truncated = false;
};

ScaleResult infer_at_scale(const CompiledQuery& query, const FactTable& facts, const Aggregator& agg,
                           std::size_t cap = kDefaultProofCap);

struct ConfigurationResult {
  std::string query;
  double prob = 0.0;
  int scale = 1;
  std::vector<CellProb> cells;
  std::optional<Proof> best;
  std::map<int, double> per_scale;
  bool truncated = false;
};

/// Runs every scale and keeps the one with the highest probability (the
/// smallest scale on ties).
ConfigurationResult infer_multiscale(const CompiledQuery& query, const Pyramid& pyramid, const Aggregator& agg,
                                     std::size_t cap = kDefaultProofCap);

class OracleLimitError : public ValidationError {
 public:
  OracleLimitError(std::size_t count, std::size_t limit)
      : ValidationError("exact inference refused: " + std::to_string(count) + " facts exceed the limit of " +
                        std::to_string(limit)),
        count_(count) {}

  std::size_t count() const { return count_; }

 private:
  std::size_t count_;
};

/// Exact query probability by enumerating every truth assignment of the
/// referenced facts; negation is evaluated classically in each world. With
/// `subject_cell` the subject variable is restricted to that cell.
double exact_probability(const CompiledQuery& query, const FactTable& facts, std::size_t max_facts = 20,
                         std::optional<Cell> subject_cell = std::nullopt);

/// Number of distinct proposals the exact oracle would have to enumerate.
std::size_t referenced_fact_count(const CompiledQuery& query, const FactTable& facts);

/// {"query", "prob", "sigma", "cells": [{"x","y","p"}], "per_scale": {σ: p}, "truncated"}
std::string result_to_json(const ConfigurationResult& result);
/// Inverse of result_to_json (the best proof is not serialized).
ConfigurationResult result_from_json(std::string_view text);

}  // namespace scenelogic
