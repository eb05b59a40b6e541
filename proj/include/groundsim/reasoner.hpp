#pragma once

// Perception + knowledge -> weighted program -> answers.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "groundsim/asp.hpp"
#include "groundsim/logic.hpp"
#include "groundsim/perception.hpp"

namespace groundsim::reasoner {

class ReasonerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReliabilityParams {
  double ud = 0.95;
  double ua = 0.95;
};

enum class SolverKind { Elimination, Exact, BeliefPropagation };

struct InferenceOptions {
  ReliabilityParams reliability;
  SolverKind solver = SolverKind::Elimination;
  double theta_sure = 0.5;
  /// Receives the ground, pruned program of every query when set.
  std::function<void(const std::string&)> dump;
};

/// One soft fact per scored observation, nodes in graph order, concepts
/// sorted, then relation edges.
asp::WeightedProgram scene_to_program(const perception::SceneGraph& sg);

/// Lifted program for a list of generic props: aux definitions, deductive
/// constraints in KB order, then one abductive constraint per distinct
/// positive consequent.
asp::WeightedProgram kb_to_program(const std::vector<logic::Prop>& kb, const ReliabilityParams& u = {});

/// Name of the atom standing for a consequent ("haveShortStem").
std::string consequent_atom_name(const logic::Prop& p);

/// scene facts for `object` and its parts plus the KB grounded on `object`,
/// pruned to the components of `query_atoms`.
asp::WeightedProgram query_program(const perception::SceneGraph& sg, const std::vector<logic::Prop>& kb,
                                   const std::string& object, const std::vector<std::string>& query_atoms,
                                   const ReliabilityParams& u = {});

/// Marginals of pred(object) for each predicate.
std::map<std::string, double> class_marginals(const perception::SceneGraph& sg, const std::vector<logic::Prop>& kb,
                                              const std::vector<std::string>& predicates, const std::string& object,
                                              const InferenceOptions& opt = {});

/// Confidence for a ground polar question over a single unary atom.
double answer_polar(const perception::SceneGraph& sg, const std::vector<logic::Prop>& kb,
                    const logic::PolarQues& q, const InferenceOptions& opt = {});

struct ClassChoice {
  std::optional<std::string> predicate;  // nullopt: not sure
  std::map<std::string, double> marginals;
  bool not_sure() const { return !predicate.has_value(); }
};

/// Argmax over the candidates' marginals, lexicographic on ties. Not sure
/// when the best marginal is below theta_sure or no better than the
/// uninformed prior 0.5.
ClassChoice choose_class(const std::map<std::string, double>& marginals, double theta_sure = 0.5);

ClassChoice classify(const perception::SceneGraph& sg, const std::vector<logic::Prop>& kb,
                     const std::set<std::string>& candidates, const std::string& object,
                     const InferenceOptions& opt = {});

struct DiffSets {
  perception::PropertySet first_only;
  perception::PropertySet second_only;
  bool operator==(const DiffSets&) const = default;
};

DiffSets concept_diff(const std::map<std::string, perception::PropertySet>& domain, const std::string& p1,
                      const std::string& p2);

asp::MarginalTable solve(const asp::WeightedProgram& ground, const std::vector<std::string>& query,
                         SolverKind kind);

}  // namespace groundsim::reasoner
