#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cqtsim/protocol.hpp"

// Line-oriented protocol scripts (".cqp"). One statement per line, `#`
// comments, straight-line execution with deterministic post-selection; the
// only branching the protocols need is the classical correction, which the
// `correct` statement applies from measured variables. Grammar:
//
//   cavity coherent <expr>
//   reset cavity coherent <expr>          # requires an unentangled cavity
//   atom <label> levels (f,g)|(f,e) init <level>
//   rotate <label> <preset>               # R_H K R5 Z_CORR X_CORR XZ_CORR IDENTITY
//   rotate <label> [[a,b],[c,d]]          # real-entry unitary
//   dispersive <label> phi=<expr>
//   inject <expr>
//   jc <label> gt=<expr>
//   measure <label> as <var>
//   postselect <label> <level>
//   correct <label> from <var>,<var>,<plus|minus>
//   expect fidelity bell(<a>,<b>,<kind>) >= <expr>
//   expect fidelity qubit(<a>,<expr>,<expr>) >= <expr>
//   report <var>[,<var>...]
//
// Expressions: numbers, pi, sqrt(), + - * / and parameter substitution
// ${name}. Parameter-free subexpressions are folded at parse time.

namespace cqt::script {

struct SourceLoc {
  int line = 0;
  int col = 0;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { constant, param, neg, add, sub, mul, div, sqrt_fn };
  Kind kind = Kind::constant;
  double value = 0.0;     // constant
  std::string param;      // param
  ExprPtr lhs, rhs;       // operands (lhs only for neg/sqrt_fn)
  SourceLoc loc;
};

double eval_expr(const Expr& e, const std::map<std::string, double>& params);
void collect_params(const Expr& e, std::vector<std::string>& out);
std::string print_expr(const Expr& e);

enum class StmtKind {
  cavity,
  reset_cavity,
  atom,
  rotate,
  dispersive,
  inject,
  jc,
  measure,
  postselect,
  correct,
  expect,
  report,
};

struct MatrixLiteral {
  std::array<ExprPtr, 4> entries;  // row-major
};

struct BraSpec {
  enum class Kind { bell, qubit };
  Kind kind;
  std::string atom1, atom2;  // atom2 only for bell
  BellKind bell = BellKind::phi_plus;
  ExprPtr zeta, xi;  // qubit only
};

struct Statement {
  StmtKind kind;
  SourceLoc loc;
  std::string label;                     // target atom
  AtomBasis basis = AtomBasis::fg;       // atom
  std::string init_level;                // atom
  std::string preset;                    // rotate (empty for matrix literal)
  std::optional<MatrixLiteral> matrix;   // rotate
  ExprPtr value;                         // cavity/inject amount, phi, gt, threshold
  std::string var;                       // measure result name
  std::string level;                     // postselect
  std::optional<BraSpec> bra;            // expect
  std::vector<std::string> vars;         // report list / correct (var, var)
  InjectionSign sign = InjectionSign::minus;  // correct
};

struct ProtocolScript {
  std::vector<Statement> statements;
};

/// Parses and validates a script: labels declared before use, level names
/// legal for the declared basis, exactly one cavity, nothing after `report`.
/// Throws ParseError with a 1-based line:column position.
ProtocolScript parse_script(std::string_view text);

/// Canonical formatter: one statement per line, single spaces, lowercase
/// keywords. parse(print(parse(x))) == parse(x) and printing is a fixed point.
std::string print_script(const ProtocolScript& script);

struct RunEvent {
  int line;
  std::string kind;  // "measure" or "postselect"
  std::string atom;
  std::string outcome;
  double probability;
};

struct ExpectResult {
  int line;
  std::string spec;
  double threshold;
  double achieved;
  bool pass;
};

struct RunReport {
  std::vector<std::pair<std::string, std::string>> measured;  // var -> level
  std::vector<RunEvent> events;
  std::vector<ExpectResult> expects;
  std::vector<std::string> reported;
  bool failed = false;  // any expect below threshold
  std::vector<std::string> site_labels;
  std::size_t dim = 0;
  double norm = 0.0;
  double cavity_top_mass = 0.0;
  std::optional<CompositeState> final_state;  // not serialized

  nlohmann::ordered_json to_json() const;
};

/// Parameter names referenced by the script but absent from `params`, with
/// the line of first use; empty when everything is bound.
std::vector<std::pair<std::string, int>> unbound_params(
    const ProtocolScript& script, const std::map<std::string, double>& params);

/// Runs a parsed script. `params` binds ${name} substitutions; the reserved
/// name "nmax" sets the cavity cutoff (default 64). Deterministic for a
/// fixed seed. Runtime failures carry the line of the offending statement.
RunReport execute_script(const ProtocolScript& script,
                         const std::map<std::string, double>& params, std::uint64_t seed);

}  // namespace cqt::script
