#include "sandwich.hpp"

#include <map>
#include <sstream>

#include "scenelogic/inference.hpp"

namespace scenelogic::testing {

std::string sandwich_violation(const CompiledQuery& query, const FactTable& table, double tol) {
  auto ps = enumerate_proofs(query, table);
  if (ps.truncated) return "proof list truncated";
  std::map<Cell, std::vector<double>> by_cell;  // descending within each cell
  for (const auto& p : ps.proofs) {
    int subject = query.branches[p.branch].subject;
    by_cell[table.proposal(p.bindings[subject]).cell].push_back(p.prob);
  }
  std::ostringstream err;
  for (const auto& [cell, probs] : by_cell) {
    double all = 1.0;
    for (double p : probs) all *= 1.0 - p;
    all = 1.0 - all;
    double mx = aggregate(probs, Aggregator::max());
    double ex = exact_probability(query, table, 20, cell);
    if (mx > ex + tol || ex > all + tol) {
      err << "cell (" << cell.x << "," << cell.y << "): max " << mx << " exact " << ex << " noisy-or " << all;
      return err.str();
    }
    double prev = 0.0;
    for (int k = 1; k <= int(probs.size()); ++k) {
      double v = aggregate(probs, Aggregator::top_k(k));
      if (v < prev) {
        err << "top-k decreases at k=" << k;
        return err.str();
      }
      prev = v;
    }
    if (prev != all) {
      err << "top-k at k=count is " << prev << ", noisy-or-all is " << all;
      return err.str();
    }
  }
  return {};
}

}  // namespace scenelogic::testing
