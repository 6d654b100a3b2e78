#include "naive_eval.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <stdexcept>

namespace scenelogic::testing {

namespace {

using Env = std::map<std::string, ProposalId>;

bool relation(const std::string& name, Cell a, Cell b) {
  if (name == "left") return a.x < b.x;
  if (name == "right") return a.x > b.x;
  if (name == "above") return a.y < b.y;
  if (name == "below") return a.y > b.y;
  if (name == "neighbor") return std::abs(a.x - b.x) <= 1 && std::abs(a.y - b.y) <= 1;
  throw std::logic_error("not a relation: " + name);
}

struct World {
  const Program& program;
  const FactTable& table;
  const std::vector<char>& present;

  // `excluded`: values forbidden for new variables; `bound`: values bound at
  // this negation depth so far.
  bool eval(const Formula& f, Env& env, const std::vector<ProposalId>& excluded, std::vector<ProposalId>& bound) const {
    switch (f.op) {
      case Formula::Op::atom:
        return eval_atom(f.atom, env, excluded, bound);
      case Formula::Op::conj:
        for (const auto& c : f.children)
          if (!eval(c, env, excluded, bound)) return false;
        return true;
      case Formula::Op::disj:
        for (const auto& c : f.children)
          if (eval(c, env, excluded, bound)) return true;
        return false;
      case Formula::Op::negation: {
        std::vector<ProposalId> inner_excluded = excluded;
        inner_excluded.insert(inner_excluded.end(), bound.begin(), bound.end());
        std::vector<ProposalId> inner_bound;
        return !eval(f.operand(), env, inner_excluded, inner_bound);
      }
      case Formula::Op::exists:
        return eval_exists(f, 0, env, excluded, bound);
    }
    return false;
  }

  bool eval_exists(const Formula& f, std::size_t i, Env& env, const std::vector<ProposalId>& excluded,
                   std::vector<ProposalId>& bound) const {
    if (i == f.vars.size()) return eval(f.operand(), env, excluded, bound);
    const std::string& var = f.vars[i];
    auto saved = env.find(var) == env.end() ? std::optional<ProposalId>() : std::optional<ProposalId>(env[var]);
    bool found = false;
    for (const auto& p : table.proposals()) {
      if (!present[p.id]) continue;
      if (std::find(excluded.begin(), excluded.end(), p.id) != excluded.end()) continue;
      if (subject && &f == top && i == 0 && !(p.cell == *subject)) continue;
      env[var] = p.id;
      bound.push_back(p.id);
      found = eval_exists(f, i + 1, env, excluded, bound);
      bound.pop_back();
      if (found) break;
    }
    if (saved)
      env[var] = *saved;
    else
      env.erase(var);
    return found;
  }

  bool eval_atom(const Atom& a, Env& env, const std::vector<ProposalId>& excluded,
                 std::vector<ProposalId>& bound) const {
    if (a.predicate == "object" || a.predicate == "segment") {
      const Proposal& p = table.proposal(env.at(a.args[0].text));
      SymbolKind kind = a.predicate == "object" ? SymbolKind::object : SymbolKind::segment;
      return present[p.id] && p.kind == kind && p.symbol == a.args[1].text;
    }
    if (const RuleDef* rule = program.find_rule(a.predicate)) {
      Env inner;
      for (std::size_t i = 0; i < rule->params.size(); ++i) inner[rule->params[i]] = env.at(a.args[i].text);
      return eval(rule->body, inner, excluded, bound);
    }
    return relation(a.predicate, table.proposal(env.at(a.args[0].text)).cell,
                    table.proposal(env.at(a.args[1].text)).cell);
  }

  std::optional<Cell> subject;
  const Formula* top = nullptr;
};

}  // namespace

bool naive_holds(const Program& program, const std::string& query, const FactTable& table,
                 const std::vector<char>& present, std::optional<Cell> subject_cell) {
  const QueryDef* q = program.find_query(query);
  if (!q) throw std::logic_error("no query " + query);
  if (q->body.op != Formula::Op::exists) throw std::logic_error("query must be prenex");
  World w{program, table, present, subject_cell, &q->body};
  Env env;
  std::vector<ProposalId> bound;
  return w.eval(q->body, env, {}, bound);
}

double naive_probability(const Program& program, const std::string& query, const FactTable& table,
                         std::optional<Cell> subject_cell) {
  const std::size_t n = table.size();
  if (n > 20) throw std::logic_error("table too large for naive enumeration");
  std::vector<char> present(n);
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double w = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      present[i] = (mask >> i) & 1u;
      double p = table.proposal(ProposalId(i)).prob;
      w *= present[i] ? p : 1.0 - p;
    }
    if (naive_holds(program, query, table, present, subject_cell)) total += w;
  }
  return total;
}

}  // namespace scenelogic::testing
