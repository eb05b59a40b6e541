#include "groundsim/reasoner.hpp"

#include <algorithm>
#include <cctype>

namespace groundsim::reasoner {

namespace L = groundsim::logic;
namespace A = groundsim::asp;
using perception::SceneGraph;
using perception::SceneNode;

namespace {

std::string cap(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

A::Term to_asp(const L::Term& t) {
  if (const auto* c = std::get_if<L::Constant>(&t)) return A::Term{c->id, std::nullopt};
  if (const auto* v = std::get_if<L::Variable>(&t)) return A::Term{v->name, std::nullopt};
  const auto& app = std::get<L::SkolemApp>(t);
  std::string arg = std::holds_alternative<L::Constant>(app.arg) ? std::get<L::Constant>(app.arg).id
                                                                  : std::get<L::Variable>(app.arg).name;
  return A::Term{"f", arg};
}

A::Atom to_asp(const L::Atom& a) {
  A::Atom out{a.pred.name, {}};
  for (const auto& t : a.args) out.args.push_back(to_asp(t));
  return out;
}

std::vector<A::Atom> positive_atoms(const L::Conjunction& c, const char* side) {
  std::vector<A::Atom> out;
  for (const auto& l : c.literals) {
    if (!l.positive) throw ReasonerError(std::string("default negation inside a ") + side + " is unsupported");
    out.push_back(to_asp(l.atom));
  }
  return out;
}

const L::SkolemApp* skolem_arg(const L::Atom& a) {
  for (const auto& t : a.args)
    if (const auto* s = std::get_if<L::SkolemApp>(&t)) return s;
  return nullptr;
}

// Single-variable atom standing for a conjunction, plus its HARD
// definition when the conjunction is not already one such atom.
struct Compiled {
  A::Atom atom;
  std::optional<A::WeightedRule> def;
};

Compiled compile_conjunction(const L::Conjunction& c, const std::string& name, const std::string& var) {
  auto atoms = positive_atoms(c, "formula");
  if (atoms.size() == 1 && atoms[0].args.size() == 1 && !atoms[0].args[0].is_function())
    return {atoms[0], std::nullopt};
  A::Atom head{name, {A::Term{var, std::nullopt}}};
  return {head, A::hard_rule(head, atoms)};
}

std::string ante_name(const L::Prop& p) {
  std::vector<std::string> names;
  for (const auto& l : p.ante.literals) names.push_back(cap(l.atom.pred.name));
  std::sort(names.begin(), names.end());
  std::string s = "ante";
  for (const auto& n : names) s += n;
  return s;
}

void append_node_facts(const SceneNode& n, A::WeightedProgram& out) {
  for (const auto& [c, s] : n.classes) out.rules.push_back(A::soft_fact(A::logit(s), A::make_atom(c, {n.id})));
  for (const auto& [a, s] : n.attributes) out.rules.push_back(A::soft_fact(A::logit(s), A::make_atom(a, {n.id})));
}

void check_generic(const L::Prop& p) {
  if (!p.generic) throw ReasonerError("KB entries must be generic: " + L::to_string(p));
  if (p.variables.size() != 1) throw ReasonerError("KB entries must quantify exactly one variable");
  if (p.ante.empty()) throw ReasonerError("KB entry without antecedent");
}

}  // namespace

std::string consequent_atom_name(const L::Prop& p) {
  // Part descriptions: have + sorted attributes + part.
  const L::SkolemApp* fn = nullptr;
  for (const auto& l : p.cons.literals)
    if ((fn = skolem_arg(l.atom))) break;
  if (fn) {
    std::vector<std::string> attrs;
    for (const auto& l : p.cons.literals) {
      if (l.atom.pred.kind == L::PredKind::Attribute) attrs.push_back(cap(l.atom.pred.name));
    }
    std::sort(attrs.begin(), attrs.end());
    std::string s = "have";
    for (const auto& a : attrs) s += a;
    return s + cap(fn->fn.part);
  }
  if (p.cons.literals.size() == 1) return p.cons.literals[0].atom.pred.name;
  std::vector<std::string> names;
  for (const auto& l : p.cons.literals) names.push_back(cap(l.atom.pred.name));
  std::sort(names.begin(), names.end());
  std::string s = "cons";
  for (const auto& n : names) s += n;
  return s;
}

A::WeightedProgram scene_to_program(const SceneGraph& sg) {
  A::WeightedProgram out;
  for (const auto& n : sg.nodes) append_node_facts(n, out);
  for (const auto& e : sg.edges)
    for (const auto& [r, s] : e.relations) out.rules.push_back(A::soft_fact(A::logit(s), A::make_atom(r, {e.from, e.to})));
  return out;
}

A::WeightedProgram kb_to_program(const std::vector<L::Prop>& kb, const ReliabilityParams& u) {
  if (u.ud < 0 || u.ud > 1 || u.ua < 0 || u.ua > 1) throw ReasonerError("reliability parameters must lie in [0,1]");
  const double wd = A::logit(u.ud), wa = A::logit(u.ua);
  std::vector<A::WeightedRule> defs, deductive;
  std::set<std::string> defined;
  struct Group {
    A::Atom cons;
    std::vector<A::Atom> antes;
  };
  std::vector<std::pair<std::string, Group>> groups;

  auto add_def = [&](const std::optional<A::WeightedRule>& d) {
    if (!d) return;
    if (defined.insert(A::to_text(*d)).second) defs.push_back(*d);
  };

  for (const auto& raw : kb) {
    check_generic(raw);
    const auto p = L::canonicalize(raw);
    const std::string var = p.variables.front();
    auto cons = compile_conjunction(p.cons, consequent_atom_name(p), var);
    add_def(cons.def);
    auto ante_atoms = positive_atoms(p.ante, "antecedent");
    if (!p.negated()) {
      deductive.push_back(A::constraint(wd, ante_atoms, {cons.atom}));
      auto ante = compile_conjunction(p.ante, ante_name(p), var);
      add_def(ante.def);
      const std::string key = L::to_string(L::normalized_consequent(p));
      auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == key; });
      if (it == groups.end()) {
        groups.push_back({key, Group{cons.atom, {}}});
        it = std::prev(groups.end());
      }
      auto& antes = it->second.antes;
      if (std::find(antes.begin(), antes.end(), ante.atom) == antes.end()) antes.push_back(ante.atom);
    } else {
      ante_atoms.push_back(cons.atom);
      deductive.push_back(A::constraint(wd, ante_atoms));
    }
  }
  A::WeightedProgram out;
  out.rules = defs;
  out.rules.insert(out.rules.end(), deductive.begin(), deductive.end());
  for (const auto& [key, g] : groups) out.rules.push_back(A::constraint(wa, {g.cons}, g.antes));
  return out;
}

A::WeightedProgram query_program(const SceneGraph& sg, const std::vector<L::Prop>& kb, const std::string& object,
                                 const std::vector<std::string>& query_atoms, const ReliabilityParams& u) {
  const auto* node = sg.node(object);
  if (!node) throw ReasonerError("no scene-graph node " + object);
  const auto parts = sg.part_candidates(object);
  A::WeightedProgram prog;
  append_node_facts(*node, prog);
  for (const auto& p : parts) {
    append_node_facts(*sg.node(p), prog);
    prog.rules.push_back(A::soft_fact(A::logit(sg.relation(object, p)), A::make_atom("have", {object, p})));
  }
  if (!kb.empty()) prog.append(A::ground(kb_to_program(kb, u), {object}, {{object, parts}}));
  return A::prune_to_relevant(prog, query_atoms);
}

A::MarginalTable solve(const A::WeightedProgram& ground, const std::vector<std::string>& query, SolverKind kind) {
  switch (kind) {
    case SolverKind::Exact:
      return A::solve_exact(ground);
    case SolverKind::BeliefPropagation:
      return A::solve_bp(ground);
    case SolverKind::Elimination:
      break;
  }
  return A::solve_elimination(ground, query);
}

std::map<std::string, double> class_marginals(const SceneGraph& sg, const std::vector<L::Prop>& kb,
                                              const std::vector<std::string>& predicates, const std::string& object,
                                              const InferenceOptions& opt) {
  std::vector<std::string> atoms;
  for (const auto& p : predicates) atoms.push_back(A::make_atom(p, {object}).str());
  auto prog = query_program(sg, kb, object, atoms, opt.reliability);
  if (opt.dump) opt.dump(A::to_text(prog));
  auto table = solve(prog, atoms, opt.solver);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < predicates.size(); ++i) out[predicates[i]] = table.probability(atoms[i]);
  return out;
}

double answer_polar(const SceneGraph& sg, const std::vector<L::Prop>& kb, const L::PolarQues& q,
                    const InferenceOptions& opt) {
  const auto& p = q.prop;
  if (p.generic || !p.ante.empty() || p.cons.literals.size() != 1 || !p.cons.literals[0].positive)
    throw ReasonerError("polar questions must ask about one ground atom");
  const auto& atom = p.cons.literals[0].atom;
  if (atom.args.size() != 1 || !std::holds_alternative<L::Constant>(atom.args[0]))
    throw ReasonerError("polar questions must ask about a unary atom on an entity");
  const std::string& pred = atom.pred.name;
  bool known = sg.vocabulary().count(pred) != 0;
  for (const auto& k : kb) known = known || L::mentions(k.ante, pred) || L::mentions(k.cons, pred);
  if (!known) throw ReasonerError("unknown predicate " + pred);
  const std::string object = std::get<L::Constant>(atom.args[0]).id;
  double m = class_marginals(sg, kb, {pred}, object, opt).at(pred);
  return p.negated() ? 1.0 - m : m;
}

ClassChoice choose_class(const std::map<std::string, double>& marginals, double theta_sure) {
  ClassChoice c;
  c.marginals = marginals;
  const std::string* best = nullptr;
  double bv = -1;
  for (const auto& [name, m] : marginals)
    if (m > bv) {
      bv = m;
      best = &name;
    }
  if (best && bv >= theta_sure && bv > 0.5) c.predicate = *best;
  return c;
}

ClassChoice classify(const SceneGraph& sg, const std::vector<L::Prop>& kb, const std::set<std::string>& candidates,
                     const std::string& object, const InferenceOptions& opt) {
  if (candidates.empty()) throw ReasonerError("classify needs at least one candidate");
  std::vector<std::string> preds(candidates.begin(), candidates.end());
  return choose_class(class_marginals(sg, kb, preds, object, opt), opt.theta_sure);
}

DiffSets concept_diff(const std::map<std::string, perception::PropertySet>& domain, const std::string& p1,
                      const std::string& p2) {
  auto a = domain.find(p1), b = domain.find(p2);
  if (a == domain.end()) throw ReasonerError("unknown class " + p1);
  if (b == domain.end()) throw ReasonerError("unknown class " + p2);
  DiffSets d;
  std::set_difference(a->second.begin(), a->second.end(), b->second.begin(), b->second.end(),
                      std::inserter(d.first_only, d.first_only.end()));
  std::set_difference(b->second.begin(), b->second.end(), a->second.begin(), a->second.end(),
                      std::inserter(d.second_only, d.second_only.end()));
  return d;
}

}  // namespace groundsim::reasoner
