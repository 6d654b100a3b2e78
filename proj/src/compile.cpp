#include "scenelogic/compile.hpp"

#include <algorithm>
#include <map>

#include "scenelogic/errors.hpp"
#include "scenelogic/validate.hpp"

namespace scenelogic {

Relation parse_relation(std::string_view name) {
  if (name == "left") return Relation::left;
  if (name == "right") return Relation::right;
  if (name == "above") return Relation::above;
  if (name == "below") return Relation::below;
  if (name == "neighbor") return Relation::neighbor;
  throw ValidationError("unknown built-in '" + std::string(name) + "'");
}

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::left: return "left";
    case Relation::right: return "right";
    case Relation::above: return "above";
    case Relation::below: return "below";
    case Relation::neighbor: return "neighbor";
  }
  return "?";
}

int ConjunctivePlan::slot_of(const std::string& var) const {
  auto it = std::find(slots.begin(), slots.end(), var);
  return it == slots.end() ? -1 : static_cast<int>(it - slots.begin());
}

std::vector<int> ConjunctivePlan::universe_slots() const {
  std::vector<int> out;
  for (const auto& s : steps)
    if (s.source == JoinStep::Source::universe) out.push_back(s.slot);
  return out;
}

std::set<std::string> CompiledQuery::required_symbols() const {
  std::set<std::string> out;
  for (const auto& [kind, symbol] : required) out.insert(symbol);
  return out;
}

namespace {

class Inliner {
 public:
  explicit Inliner(const Program& p) : program_(p) {}

  Formula expand(const Formula& f, const std::map<std::string, std::string>& env) {
    switch (f.op) {
      case Formula::Op::atom: {
        Atom a = f.atom;
        for (auto& t : a.args)
          if (t.is_variable()) t.text = lookup(env, t.text);
        if (is_builtin(a.predicate)) {
          Formula out = Formula::make_atom(std::move(a));
          out.origin = f.origin;
          return out;
        }
        const RuleDef* rule = program_.find_rule(a.predicate);
        if (!rule) throw ValidationError("unknown predicate '" + a.predicate + "'");
        if (depth_ > 256) throw ValidationError("rule '" + a.predicate + "' is recursive");
        std::map<std::string, std::string> inner;
        for (std::size_t i = 0; i < rule->params.size(); ++i) inner[rule->params[i]] = a.args.at(i).text;
        ++depth_;
        Formula out = expand(rule->body, inner);
        --depth_;
        out.origin = rule->name;
        return out;
      }
      case Formula::Op::exists: {
        auto scoped = env;
        Formula out;
        out.op = f.op;
        out.pos = f.pos;
        out.origin = f.origin;
        for (const auto& v : f.vars) {
          std::string name = used_.count(v) ? fresh(v) : v;
          used_.insert(name);
          scoped[v] = name;
          out.vars.push_back(name);
        }
        out.children.push_back(expand(f.operand(), scoped));
        return out;
      }
      default: {
        Formula out;
        out.op = f.op;
        out.pos = f.pos;
        out.origin = f.origin;
        for (const auto& c : f.children) out.children.push_back(expand(c, env));
        return out;
      }
    }
  }

 private:
  static std::string lookup(const std::map<std::string, std::string>& env, const std::string& v) {
    auto it = env.find(v);
    return it == env.end() ? v : it->second;
  }

  std::string fresh(const std::string& base) {
    for (;;) {
      std::string name = base + "_" + std::to_string(++counter_);
      if (!used_.count(name)) return name;
    }
  }

  const Program& program_;
  std::set<std::string> used_;
  int counter_ = 0;
  int depth_ = 0;
};

bool deterministic(const Formula& f) {
  switch (f.op) {
    case Formula::Op::atom: return is_spatial_builtin(f.atom.predicate);
    case Formula::Op::exists: return false;
    default:
      return std::all_of(f.children.begin(), f.children.end(), [](const Formula& c) { return deterministic(c); });
  }
}

std::string guard_label(const Formula& f) {
  if (!f.origin.empty()) return f.origin;
  switch (f.op) {
    case Formula::Op::atom: return f.atom.predicate;
    case Formula::Op::conj: return "and";
    case Formula::Op::disj: return "or";
    default: return "not";
  }
}

std::string negation_label(const Formula& operand) {
  const Formula* g = &operand;
  while (g->op == Formula::Op::exists && g->origin.empty()) g = &g->operand();
  if (!g->origin.empty()) return g->origin;
  if (g->op == Formula::Op::atom) return g->atom.predicate;
  return "not";
}

void collect_vars(const Formula& f, std::set<std::string>& bound, std::vector<std::string>& out) {
  if (f.op == Formula::Op::atom) {
    for (const auto& t : f.atom.args)
      if (t.is_variable() && !bound.count(t.text) && std::find(out.begin(), out.end(), t.text) == out.end())
        out.push_back(t.text);
    return;
  }
  if (f.op == Formula::Op::exists) {
    std::vector<std::string> added;
    for (const auto& v : f.vars)
      if (bound.insert(v).second) added.push_back(v);
    collect_vars(f.operand(), bound, out);
    for (const auto& v : added) bound.erase(v);
    return;
  }
  for (const auto& c : f.children) collect_vars(c, bound, out);
}

std::vector<std::string> free_vars(const Formula& f) {
  std::set<std::string> bound;
  std::vector<std::string> out;
  collect_vars(f, bound, out);
  return out;
}

struct Draft {
  std::vector<std::string> vars;
  std::vector<Atom> facts;
  std::vector<std::pair<std::string, Formula>> guards;
  std::vector<std::pair<std::string, Formula>> negations;
};

Draft merge(const Draft& a, const Draft& b) {
  Draft out = a;
  out.vars.insert(out.vars.end(), b.vars.begin(), b.vars.end());
  out.facts.insert(out.facts.end(), b.facts.begin(), b.facts.end());
  out.guards.insert(out.guards.end(), b.guards.begin(), b.guards.end());
  out.negations.insert(out.negations.end(), b.negations.begin(), b.negations.end());
  return out;
}

// Disjunctive normal form, except that purely deterministic sub-formulas stay
// intact as single guards.
std::vector<Draft> to_drafts(const Formula& f) {
  if (deterministic(f)) {
    Draft d;
    d.guards.emplace_back(guard_label(f), f);
    return {d};
  }
  switch (f.op) {
    case Formula::Op::atom: {
      Draft d;
      d.facts.push_back(f.atom);
      return {d};
    }
    case Formula::Op::conj: {
      std::vector<Draft> acc{Draft{}};
      for (const auto& c : f.children) {
        std::vector<Draft> next;
        for (const auto& right : to_drafts(c))
          for (const auto& left : acc) next.push_back(merge(left, right));
        acc = std::move(next);
      }
      return acc;
    }
    case Formula::Op::disj: {
      std::vector<Draft> out;
      for (const auto& c : f.children) {
        auto part = to_drafts(c);
        out.insert(out.end(), part.begin(), part.end());
      }
      return out;
    }
    case Formula::Op::negation: {
      Draft d;
      d.negations.emplace_back(negation_label(f.operand()), f.operand());
      return {d};
    }
    case Formula::Op::exists: {
      auto drafts = to_drafts(f.operand());
      for (auto& d : drafts) d.vars.insert(d.vars.begin(), f.vars.begin(), f.vars.end());
      return drafts;
    }
  }
  return {};
}

class PlanBuilder {
 public:
  ConjunctivePlan build(const Draft& d, const std::vector<std::string>& imported, const std::string& subject) {
    ConjunctivePlan plan;
    plan.slots = imported;
    plan.imported = static_cast<int>(imported.size());

    std::set<std::string> used;
    for (const auto& a : d.facts) used.insert(a.args[0].text);
    for (const auto& [label, g] : d.guards)
      for (const auto& v : free_vars(g)) used.insert(v);
    std::vector<std::vector<std::string>> neg_free;
    for (const auto& [label, n] : d.negations) {
      neg_free.push_back(free_vars(n));
      used.insert(neg_free.back().begin(), neg_free.back().end());
    }
    for (const auto& v : d.vars)
      if (used.count(v) && plan.slot_of(v) < 0) plan.slots.push_back(v);
    for (const auto& v : used)
      if (plan.slot_of(v) < 0) throw ValidationError("variable " + v + " is not bound");

    for (const auto& a : d.facts)
      plan.atoms.push_back({parse_symbol_kind(a.predicate), a.args[1].text, plan.slot_of(a.args[0].text)});

    for (const auto& [label, g] : d.guards) {
      Guard guard;
      guard.label = label;
      guard.expr = to_guard(g, plan);
      for (const auto& v : free_vars(g)) guard.slots.push_back(plan.slot_of(v));
      std::sort(guard.slots.begin(), guard.slots.end());
      plan.guards.push_back(std::move(guard));
    }

    for (std::size_t i = 0; i < d.negations.size(); ++i) {
      const auto& [label, operand] = d.negations[i];
      NegatedPlan neg;
      neg.label = label;
      std::vector<std::string> names = neg_free[i];
      std::sort(names.begin(), names.end(),
                [&](const std::string& a, const std::string& b) { return plan.slot_of(a) < plan.slot_of(b); });
      for (const auto& n : names) neg.imports.push_back(plan.slot_of(n));
      for (const auto& sub : to_drafts(operand)) neg.branches.push_back(build(sub, names, ""));
      plan.negations.push_back(std::move(neg));
    }

    order_steps(plan);

    if (!subject.empty()) {
      plan.subject = plan.slot_of(subject);
      if (plan.subject < 0) throw ValidationError("subject variable " + subject + " is not used in every branch");
    }
    return plan;
  }

 private:
  static GuardExpr to_guard(const Formula& f, const ConjunctivePlan& plan) {
    GuardExpr e;
    switch (f.op) {
      case Formula::Op::atom:
        e.op = GuardExpr::Op::relation;
        e.relation = parse_relation(f.atom.predicate);
        e.lhs = plan.slot_of(f.atom.args[0].text);
        e.rhs = plan.slot_of(f.atom.args[1].text);
        return e;
      case Formula::Op::conj: e.op = GuardExpr::Op::all; break;
      case Formula::Op::disj: e.op = GuardExpr::Op::any; break;
      case Formula::Op::negation: e.op = GuardExpr::Op::negate; break;
      case Formula::Op::exists: throw ValidationError("quantifier inside a guard");
    }
    for (const auto& c : f.children) e.children.push_back(to_guard(c, plan));
    return e;
  }

  // Greedy join order: re-checks of bound slots first (branching 1), then
  // atoms that complete the most guards, then source order. Variables no
  // fact atom restricts range over the whole table and go last.
  static void order_steps(ConjunctivePlan& plan) {
    std::vector<bool> bound(plan.slots.size(), false);
    for (int i = 0; i < plan.imported; ++i) bound[i] = true;
    std::vector<bool> placed(plan.guards.size(), false);

    auto ready = [&](const Guard& g, int extra) {
      return std::all_of(g.slots.begin(), g.slots.end(), [&](int s) { return bound[s] || s == extra; });
    };
    auto take_ready = [&](int extra) {
      std::vector<int> out;
      for (std::size_t g = 0; g < plan.guards.size(); ++g)
        if (!placed[g] && ready(plan.guards[g], extra)) {
          placed[g] = true;
          out.push_back(static_cast<int>(g));
        }
      return out;
    };
    plan.pre_guards = take_ready(-1);

    std::vector<int> remaining(plan.atoms.size());
    for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = static_cast<int>(i);
    while (!remaining.empty()) {
      auto key = [&](int a) {
        int slot = plan.atoms[a].slot;
        int completes = 0;
        for (std::size_t g = 0; g < plan.guards.size(); ++g)
          if (!placed[g] && ready(plan.guards[g], slot)) ++completes;
        return std::make_tuple(bound[slot] ? 0 : 1, -completes, a);
      };
      auto best = std::min_element(remaining.begin(), remaining.end(), [&](int a, int b) { return key(a) < key(b); });
      int a = *best;
      remaining.erase(best);
      JoinStep step;
      step.source = JoinStep::Source::fact;
      step.slot = plan.atoms[a].slot;
      step.binds = !bound[step.slot];
      step.atom = a;
      step.guards = take_ready(step.slot);
      bound[step.slot] = true;
      plan.steps.push_back(std::move(step));
    }
    for (std::size_t s = plan.imported; s < plan.slots.size(); ++s) {
      if (bound[s]) continue;
      JoinStep step;
      step.source = JoinStep::Source::universe;
      step.slot = static_cast<int>(s);
      step.guards = take_ready(step.slot);
      bound[s] = true;
      plan.steps.push_back(std::move(step));
    }
  }
};

void collect_required(const ConjunctivePlan& plan, std::set<std::pair<SymbolKind, std::string>>& out) {
  for (const auto& a : plan.atoms) out.emplace(a.kind, a.symbol);
  for (const auto& n : plan.negations)
    for (const auto& b : n.branches) collect_required(b, out);
}

std::size_t count_atoms(const ConjunctivePlan& plan) {
  std::size_t n = plan.atoms.size();
  for (const auto& neg : plan.negations)
    for (const auto& b : neg.branches) n += count_atoms(b);
  return n;
}

}  // namespace

Formula inline_query(const Program& program, const std::string& query_name) {
  const QueryDef* q = program.find_query(query_name);
  if (!q) throw ValidationError("unknown query '" + query_name + "'");
  return Inliner(program).expand(q->body, {});
}

CompiledQuery compile_query(const Program& program, const std::string& query_name) {
  if (!program.find_query(query_name)) throw ValidationError("unknown query '" + query_name + "'");
  auto report = validate(program);
  if (!report.empty()) throw ValidationError("program is invalid:\n" + format_report(report));

  Formula body = inline_query(program, query_name);
  CompiledQuery out;
  out.name = query_name;
  out.subject = body.vars.front();

  PlanBuilder builder;
  for (const auto& d : to_drafts(body)) out.branches.push_back(builder.build(d, {}, out.subject));

  std::set<std::pair<SymbolKind, std::string>> req;
  for (const auto& b : out.branches) collect_required(b, req);
  out.required.assign(req.begin(), req.end());
  return out;
}

CompiledQuery strip_spatial(const CompiledQuery& query) {
  CompiledQuery out = query;
  for (auto& b : out.branches) {
    b.guards.clear();
    b.pre_guards.clear();
    b.negations.clear();
    std::vector<JoinStep> kept;
    for (auto& s : b.steps) {
      s.guards.clear();
      if (s.source == JoinStep::Source::universe && s.slot != b.subject) continue;
      kept.push_back(std::move(s));
    }
    b.steps = std::move(kept);
  }
  std::set<std::pair<SymbolKind, std::string>> req;
  for (const auto& b : out.branches)
    for (const auto& a : b.atoms) req.emplace(a.kind, a.symbol);
  out.required.assign(req.begin(), req.end());
  return out;
}

std::size_t count_fact_atoms(const CompiledQuery& query) {
  std::size_t n = 0;
  for (const auto& b : query.branches) n += count_atoms(b);
  return n;
}

}  // namespace scenelogic
