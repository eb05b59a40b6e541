#pragma once

// First-order fragment used for propositions (PROPs) and questions (QUES):
// predicate symbols, terms with depth-1 skolem applications, conjunctions,
// generic rules and the syntactic transforms that implicature inference needs.

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace groundsim::logic {

class LogicError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PredKind { ObjectClass, Attribute, Relation };

std::string_view to_string(PredKind kind);

struct PredicateSym {
  std::string name;
  int arity = 1;
  PredKind kind = PredKind::ObjectClass;

  /// Validating constructor; relations must be binary, arity must be >= 1.
  static PredicateSym make(std::string name, int arity, PredKind kind);

  auto operator<=>(const PredicateSym&) const = default;
};

PredicateSym class_pred(std::string name);
PredicateSym attr_pred(std::string name);
PredicateSym have_pred();

struct Constant {
  std::string id;
  auto operator<=>(const Constant&) const = default;
};

struct Variable {
  std::string name;
  auto operator<=>(const Variable&) const = default;
};

// Skolem functions are identified by the (class, part) pair they were
// introduced for. An empty owner marks an instance-level description.
struct SkolemFn {
  std::string owner;
  std::string part;

  std::string id() const;
  auto operator<=>(const SkolemFn&) const = default;
};

using SkolemArg = std::variant<Constant, Variable>;

struct SkolemApp {
  SkolemFn fn;
  SkolemArg arg;
  auto operator<=>(const SkolemApp&) const = default;
};

using Term = std::variant<Constant, Variable, SkolemApp>;

Term constant(std::string id);
Term variable(std::string name);
Term skolem(SkolemFn fn, SkolemArg arg);

bool is_ground(const Term& t);

struct Atom {
  PredicateSym pred;
  std::vector<Term> args;

  Atom() = default;
  Atom(PredicateSym p, std::vector<Term> a);

  bool is_ground() const;
  auto operator<=>(const Atom&) const = default;
};

struct Literal {
  Atom atom;
  bool positive = true;
  auto operator<=>(const Literal&) const = default;
};

struct Conjunction {
  std::vector<Literal> literals;

  bool empty() const { return literals.empty(); }
  std::size_t size() const { return literals.size(); }
  auto operator<=>(const Conjunction&) const = default;
};

Conjunction conj(std::vector<Atom> atoms);

enum class ConsPolarity { Positive, Negated };

struct Prop {
  bool generic = false;
  std::vector<std::string> variables;
  Conjunction ante;
  Conjunction cons;
  ConsPolarity polarity = ConsPolarity::Positive;

  /// Generic rule "G vars. ante => cons"; checks every variable occurs on
  /// both sides.
  static Prop rule(std::vector<std::string> vars, Conjunction ante, Conjunction cons,
                   ConsPolarity polarity = ConsPolarity::Positive);
  /// Ground, non-conditional statement (empty antecedent).
  static Prop fact(Conjunction cons, ConsPolarity polarity = ConsPolarity::Positive);

  bool negated() const { return polarity == ConsPolarity::Negated; }
  auto operator<=>(const Prop&) const = default;
};

struct PolarQues {
  Prop prop;
  auto operator<=>(const PolarQues&) const = default;
};

// ?\X. body; X may stand for an entity or, as in "What is this?", a
// predicate.
struct WhQues {
  std::string variable;
  Prop body;
  auto operator<=>(const WhQues&) const = default;
};

struct ConceptDiffQues {
  PredicateSym first;
  PredicateSym second;
  auto operator<=>(const ConceptDiffQues&) const = default;
};

using Ques = std::variant<PolarQues, WhQues, ConceptDiffQues>;

Ques concept_diff_question(PredicateSym a, PredicateSym b);

// ---------------------------------------------------------------------------
// Transforms

using Binding = std::map<std::string, Term>;

Conjunction substitute(const Conjunction& c, const Binding& binding);
/// Substitutes into both sides. Quantified variables that get bound are
/// dropped from the quantifier list; a prop left without variables becomes
/// non-generic.
Prop substitute(const Prop& p, const Binding& binding);

/// psi^{a<->b}: exchanges every occurrence of the two predicates, including
/// skolem function owners.
Prop swap_predicates(const Prop& p, const PredicateSym& a, const PredicateSym& b);

/// Ante(psi^{p<->q}) => not Cons(psi^{p<->q}).
Prop derive_neg_implicature(const Prop& psi, const PredicateSym& p, const PredicateSym& q);

/// Exact-match inconsistency: same antecedent up to renaming, same
/// normalized consequent conjunction, opposite polarity.
bool contradicts(const Prop& a, const Prop& b);

Prop skolemize_part_description(const PredicateSym& cls, const PredicateSym& attr,
                                const PredicateSym& part);
/// Conjunctive form "G O. cls(O) => have(O,f(O)), a1(f(O)), ..., part(f(O))".
Prop skolemize_part_description(const PredicateSym& cls, const std::vector<PredicateSym>& attrs,
                                const PredicateSym& part);
/// Instance-level "o has an ATTR PART".
Prop skolemize_instance_description(const std::string& entity, const PredicateSym& attr,
                                    const PredicateSym& part);

/// Renames quantified variables to O, P, Q, ... in quantifier order.
Prop canonicalize(const Prop& p);

/// Order-insensitive structural equality after canonicalization.
bool equivalent(const Prop& a, const Prop& b);

/// Consequent with variables canonicalized, skolem owners erased and the
/// literals sorted. Two props whose consequents are "identical" share this.
Conjunction normalized_consequent(const Prop& p);
Conjunction normalized_antecedent(const Prop& p);

/// Predicate names mentioned anywhere in the formula.
std::set<std::string> predicates_in(const Conjunction& c);
bool mentions(const Conjunction& c, const std::string& predicate);

// ---------------------------------------------------------------------------
// Text syntax: "G O. brandyGlass(O) => have(O,f_brandyGlass_stem(O)), ..."

std::string to_string(const Term& t);
std::string to_string(const Atom& a);
std::string to_string(const Literal& l);
std::string to_string(const Conjunction& c);
std::string to_string(const Prop& p);
std::string to_string(const Ques& q);

using Signature = std::map<std::string, PredicateSym>;

Prop parse_prop(std::string_view text, const Signature& sig);
Ques parse_ques(std::string_view text, const Signature& sig);

}  // namespace groundsim::logic
