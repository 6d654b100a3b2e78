#include "scenelogic/validate.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace scenelogic {
namespace {

void free_vars(const Formula& f, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (f.op) {
    case Formula::Op::atom:
      for (const auto& t : f.atom.args)
        if (t.is_variable() && !bound.count(t.text)) out.insert(t.text);
      break;
    case Formula::Op::exists: {
      std::vector<std::string> added;
      for (const auto& v : f.vars)
        if (bound.insert(v).second) added.push_back(v);
      free_vars(f.operand(), bound, out);
      for (const auto& v : added) bound.erase(v);
      break;
    }
    default:
      for (const auto& c : f.children) free_vars(c, bound, out);
  }
}

class Checker {
 public:
  explicit Checker(const Program& p) : program_(p) {}

  ValidationReport run() {
    check_names();
    for (const auto& r : program_.rules) check_rule(r);
    check_recursion();
    for (const auto& q : program_.queries) check_query(q);
    return std::move(report_);
  }

 private:
  void add(std::string kind, std::string message, SourcePos pos) {
    report_.push_back({std::move(kind), std::move(message), pos});
  }

  void check_names() {
    std::set<std::string> seen;
    for (const auto& r : program_.rules) {
      if (is_builtin(r.name)) add("reserved name", "rule '" + r.name + "' redefines a built-in predicate", r.pos);
      if (!seen.insert(r.name).second) add("duplicate name", "rule '" + r.name + "' is defined twice", r.pos);
    }
    std::set<std::string> queries;
    for (const auto& q : program_.queries)
      if (!queries.insert(q.name).second) add("duplicate name", "query '" + q.name + "' is defined twice", q.pos);
  }

  void check_rule(const RuleDef& r) {
    std::set<std::string> params;
    for (const auto& p : r.params)
      if (!params.insert(p).second) add("duplicate variable", "rule '" + r.name + "' repeats parameter " + p, r.pos);
    check_atoms(r.body);
    check_scope(r.body, params, false);
  }

  void check_query(const QueryDef& q) {
    if (q.subject().empty())
      add("missing subject", "query '" + q.name + "' must start with an existential quantifier", q.pos);
    check_atoms(q.body);
    check_scope(q.body, {}, false);
  }

  void check_atoms(const Formula& f) {
    if (f.op != Formula::Op::atom) {
      for (const auto& c : f.children) check_atoms(c);
      return;
    }
    const Atom& a = f.atom;
    std::size_t arity;
    if (is_builtin(a.predicate)) {
      arity = 2;
    } else if (const RuleDef* r = program_.find_rule(a.predicate)) {
      arity = r->params.size();
    } else {
      add("unknown predicate", "unknown predicate '" + a.predicate + "'", a.pos);
      return;
    }
    if (a.args.size() != arity) {
      add("arity mismatch",
          "'" + a.predicate + "' expects " + std::to_string(arity) + " arguments, got " + std::to_string(a.args.size()),
          a.pos);
      return;
    }
    for (const auto& t : a.args)
      if (!t.is_variable() && t.text.empty()) add("empty literal", "symbol literal must not be empty", t.pos);
    if (is_fact_predicate(a.predicate)) {
      if (!a.args[0].is_variable() || a.args[1].is_variable())
        add("bad argument", "'" + a.predicate + "' takes a variable and a symbol literal", a.pos);
    } else {
      for (const auto& t : a.args)
        if (!t.is_variable()) add("bad argument", "'" + a.predicate + "' takes variables only", t.pos);
    }
  }

  // `bound` holds variables introduced by enclosing binders.
  void check_scope(const Formula& f, std::set<std::string> bound, bool quiet) {
    switch (f.op) {
      case Formula::Op::atom:
        if (quiet) return;
        for (const auto& t : f.atom.args)
          if (t.is_variable() && !bound.count(t.text))
            add("unbound variable", "variable " + t.text + " is not bound", t.pos);
        return;
      case Formula::Op::exists: {
        std::set<std::string> here;
        for (const auto& v : f.vars) {
          if (!here.insert(v).second) add("duplicate variable", "exists binds " + v + " twice", f.pos);
          bound.insert(v);
        }
        check_scope(f.operand(), std::move(bound), quiet);
        return;
      }
      case Formula::Op::negation: {
        std::set<std::string> inner_bound = bound, fv;
        free_vars(f.operand(), inner_bound, fv);
        if (!quiet && !fv.empty()) {
          add("unsafe negation", "negation over unbound variable " + *fv.begin(), f.pos);
          quiet = true;
        }
        check_scope(f.operand(), std::move(bound), quiet);
        return;
      }
      default:
        for (const auto& c : f.children) check_scope(c, bound, quiet);
    }
  }

  static void calls(const Formula& f, std::set<std::string>& out) {
    if (f.op == Formula::Op::atom) {
      if (!is_builtin(f.atom.predicate)) out.insert(f.atom.predicate);
      return;
    }
    for (const auto& c : f.children) calls(c, out);
  }

  void check_recursion() {
    std::map<std::string, std::set<std::string>> graph;
    for (const auto& r : program_.rules) calls(r.body, graph[r.name]);
    // 0 = unvisited, 1 = on stack, 2 = done
    std::map<std::string, int> state;
    std::set<std::string> reported;
    auto visit = [&](auto&& self, const std::string& n) -> void {
      state[n] = 1;
      for (const auto& m : graph[n]) {
        if (!graph.count(m)) continue;
        if (state[m] == 1) {
          if (reported.insert(m).second) {
            const RuleDef* r = program_.find_rule(m);
            add("recursion", "rule '" + m + "' is recursive", r ? r->pos : SourcePos{});
          }
        } else if (state[m] == 0) {
          self(self, m);
        }
      }
      state[n] = 2;
    };
    for (const auto& r : program_.rules)
      if (state[r.name] == 0) visit(visit, r.name);
  }

  const Program& program_;
  ValidationReport report_;
};

}  // namespace

ValidationReport validate(const Program& program) { return Checker(program).run(); }

std::string format_report(const ValidationReport& report) {
  std::ostringstream os;
  for (const auto& v : report) os << v.pos.line << ':' << v.pos.column << ": " << v.kind << ": " << v.message << '\n';
  return os.str();
}

}  // namespace scenelogic
