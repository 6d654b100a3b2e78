#pragma once

#include <string>
#include <vector>

namespace scenelogic {

struct SourcePos {
  int line = 0;
  int column = 0;
};

struct Term {
  enum class Kind { variable, symbol };

  Kind kind = Kind::variable;
  std::string text;
  SourcePos pos;

  static Term variable(std::string name, SourcePos pos = {}) { return {Kind::variable, std::move(name), pos}; }
  static Term symbol(std::string text, SourcePos pos = {}) { return {Kind::symbol, std::move(text), pos}; }

  bool is_variable() const { return kind == Kind::variable; }

  // Positions are not part of structural identity.
  friend bool operator==(const Term& a, const Term& b) { return a.kind == b.kind && a.text == b.text; }
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;
  SourcePos pos;

  friend bool operator==(const Atom& a, const Atom& b) { return a.predicate == b.predicate && a.args == b.args; }
};

/// Formula tree. `children` holds the operands of conj/disj, the single operand
/// of negation and the body of exists; `vars` is used only by exists.
struct Formula {
  enum class Op { atom, conj, disj, negation, exists };

  Op op = Op::atom;
  Atom atom;
  std::vector<Formula> children;
  std::vector<std::string> vars;
  SourcePos pos;
  // Name of the rule this subtree was inlined from; empty for source nodes.
  std::string origin;

  static Formula make_atom(Atom a);
  static Formula make_conj(std::vector<Formula> parts, SourcePos pos = {});
  static Formula make_disj(std::vector<Formula> parts, SourcePos pos = {});
  static Formula make_not(Formula inner, SourcePos pos = {});
  static Formula make_exists(std::vector<std::string> vars, Formula body, SourcePos pos = {});

  const Formula& operand() const { return children.front(); }

  friend bool operator==(const Formula& a, const Formula& b) {
    return a.op == b.op && a.atom == b.atom && a.vars == b.vars && a.children == b.children;
  }
};

struct RuleDef {
  std::string name;
  std::vector<std::string> params;
  Formula body;
  SourcePos pos;

  friend bool operator==(const RuleDef& a, const RuleDef& b) {
    return a.name == b.name && a.params == b.params && a.body == b.body;
  }
};

struct QueryDef {
  std::string name;
  Formula body;
  SourcePos pos;

  /// First variable of the outermost exists, or empty when the body is not
  /// existentially quantified.
  std::string subject() const;

  friend bool operator==(const QueryDef& a, const QueryDef& b) { return a.name == b.name && a.body == b.body; }
};

struct Program {
  std::vector<RuleDef> rules;
  std::vector<QueryDef> queries;

  const RuleDef* find_rule(const std::string& name) const;
  const QueryDef* find_query(const std::string& name) const;

  friend bool operator==(const Program&, const Program&) = default;
};

/// Fact atoms are grounded against heatmap proposals.
bool is_fact_predicate(const std::string& name);
/// Deterministic spatial relations between two cells.
bool is_spatial_builtin(const std::string& name);
bool is_builtin(const std::string& name);

}  // namespace scenelogic
