#pragma once

// Weighted normal logic programs and marginal inference.
//
// Supported fragment: soft facts, HARD definite rules (derived atoms), and
// soft or HARD integrity constraints. A world is a subset of the soft-fact
// atoms; derived atoms follow by closure; its weight is exp of the summed
// weights of satisfied soft rules. Worlds violating a HARD rule are
// inadmissible.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace groundsim::asp {

class ProgramError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public ProgramError {
 public:
  using ProgramError::ProgramError;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when every world violates some HARD rule.
class NoAdmissibleWorld : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Raised by solve_exact above kMaxExactBaseAtoms soft-fact atoms.
class EnumerationBoundExceeded : public SolverError {
 public:
  using SolverError::SolverError;
};

inline constexpr double kLogitEps = 1e-6;
inline constexpr int kMaxExactBaseAtoms = 22;

/// ln(s / (1 - s)) with s clamped to [eps, 1 - eps].
double logit(double s);
double sigmoid(double w);

// A term is a constant, a variable (upper-case initial) or a function
// application f(X) whose argument is a constant or variable. Function terms
// are skolem placeholders resolved during grounding.
struct Term {
  std::string name;
  std::optional<std::string> arg;

  bool is_variable() const;
  bool is_function() const { return arg.has_value(); }
  bool is_ground() const;
  auto operator<=>(const Term&) const = default;
};

struct Atom {
  std::string pred;
  std::vector<Term> args;

  bool is_ground() const;
  std::string str() const;
  auto operator<=>(const Atom&) const = default;
};

Atom make_atom(std::string pred, std::vector<std::string> args);

struct WeightedRule {
  std::optional<double> weight;  // nullopt means HARD
  std::optional<Atom> head;      // nullopt means integrity constraint
  std::vector<Atom> pos;
  std::vector<Atom> neg;

  bool hard() const { return !weight.has_value(); }
  bool is_fact() const { return head && pos.empty() && neg.empty(); }
  bool operator==(const WeightedRule&) const = default;
};

WeightedRule soft_fact(double weight, Atom head);
WeightedRule hard_rule(Atom head, std::vector<Atom> pos);
WeightedRule constraint(std::optional<double> weight, std::vector<Atom> pos, std::vector<Atom> neg = {});

struct WeightedProgram {
  std::vector<WeightedRule> rules;

  /// Ground atoms occurring anywhere in the rules, sorted.
  std::vector<std::string> atom_universe() const;
  bool is_ground() const;
  void append(const WeightedProgram& other);
  bool operator==(const WeightedProgram&) const = default;
};

/// `<weight>| <head> :- <pos>, not <neg>.` one rule per line; `#hard` for
/// HARD rules. Weights use the shortest exact decimal representation.
std::string to_text(const WeightedRule& r);
std::string to_text(const WeightedProgram& p);
WeightedProgram parse_program(std::string_view text);

using PartCandidates = std::map<std::string, std::vector<std::string>>;

/// Instantiates every variable over `entities` and every function term f(X)
/// over part_candidates[X]. Each distinct function term in a rule picks one
/// candidate. Every variable must occur in a positive body atom.
WeightedProgram ground(const WeightedProgram& lifted, const std::vector<std::string>& entities,
                       const PartCandidates& part_candidates);

/// Keeps only rules in the connected component(s) of the query atoms. Atoms
/// outside those components are independent of the query atoms.
WeightedProgram prune_to_relevant(const WeightedProgram& ground, const std::vector<std::string>& query);

struct MarginalTable {
  std::map<std::string, double> marginals;
  double log_partition = 0.0;
  bool converged = true;
  int iterations = 0;

  /// Marginal of an atom; atoms outside the universe are false in every world.
  double probability(const std::string& atom) const;
};

struct WorldProbability {
  std::vector<std::string> true_atoms;
  double probability = 0.0;
};

/// Reference semantics by exhaustive enumeration of soft-fact atom subsets.
MarginalTable solve_exact(const WeightedProgram& program);
std::vector<WorldProbability> world_distribution(const WeightedProgram& program);

struct BpOptions {
  double damping = 0.5;
  int max_iterations = 200;
  double tolerance = 1e-8;
};

/// Sum-product on the program's factor graph. Exact on acyclic graphs;
/// loopy with damping otherwise, reporting `converged = false` at the cap.
MarginalTable solve_bp(const WeightedProgram& program, const BpOptions& options = {});

/// Exact marginals by variable elimination on the factor graph. `query`
/// limits which atoms get marginals (empty: all atoms).
MarginalTable solve_elimination(const WeightedProgram& program, const std::vector<std::string>& query = {});

/// True when the factor graph of the program is a forest.
bool factor_graph_is_acyclic(const WeightedProgram& program);

}  // namespace groundsim::asp
