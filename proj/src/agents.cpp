#include "groundsim/agents.hpp"

#include <algorithm>

namespace groundsim::agents {

namespace L = groundsim::logic;
namespace D = groundsim::dialogue;
using memory::Source;

std::string StrategyCombo::name() const {
  switch (teacher) {
    case TeacherStrategy::MinHelp:
      return "minHelp";
    case TeacherStrategy::MedHelp:
      return "medHelp";
    case TeacherStrategy::MaxHelp:
      break;
  }
  switch (learner) {
    case LearnerStrategy::SemOnly:
      return "maxHelp_semOnly";
    case LearnerStrategy::SemNeg:
      return "maxHelp_semNeg";
    case LearnerStrategy::SemNegScal:
      return "maxHelp_semNegScal";
  }
  return "?";
}

StrategyCombo StrategyCombo::parse(const std::string& name) {
  for (const auto& c : all())
    if (c.name() == name) return c;
  throw AgentError("unknown strategy " + name);
}

std::vector<StrategyCombo> StrategyCombo::all() {
  return {{TeacherStrategy::MinHelp, LearnerStrategy::SemOnly},
          {TeacherStrategy::MedHelp, LearnerStrategy::SemOnly},
          {TeacherStrategy::MaxHelp, LearnerStrategy::SemOnly},
          {TeacherStrategy::MaxHelp, LearnerStrategy::SemNeg},
          {TeacherStrategy::MaxHelp, LearnerStrategy::SemNegScal}};
}

ClassPair unordered(const std::string& a, const std::string& b) { return a < b ? ClassPair{a, b} : ClassPair{b, a}; }

namespace {

L::Prop class_fact(const std::string& cls, const std::string& object, bool positive) {
  return L::Prop::fact(L::conj({L::Atom{L::class_pred(cls), {L::constant(object)}}}),
                       positive ? L::ConsPolarity::Positive : L::ConsPolarity::Negated);
}

}  // namespace

// ---------------------------------------------------------------------------
// Teacher

Teacher::Teacher(perception::DomainSpec domain, TeacherStrategy strategy, TeacherOptions options)
    : domain_(std::move(domain)),
      strategy_(strategy),
      options_(options),
      lexicon_(memory::Lexicon::from_domain(domain_)) {}

D::Utterance Teacher::probe(const std::string& object) const {
  L::PredicateSym var{"P", 1, L::PredKind::ObjectClass};
  L::Ques q = L::WhQues{"P", L::Prop::fact(L::conj({L::Atom{var, {L::constant(object)}}}))};
  return D::make_utterance(D::Speaker::Teacher, q, lexicon_, object);
}

std::vector<D::Utterance> Teacher::respond(const std::optional<std::string>& answered, const std::string& truth,
                                           const std::string& object) const {
  auto say = [&](const D::LogicalForm& f) { return D::make_utterance(D::Speaker::Teacher, f, lexicon_, object); };
  if (answered && *answered == truth) return {say(D::Feedback::Correct)};
  if (!answered) return {say(class_fact(truth, object, true))};
  std::vector<D::Utterance> out{say(class_fact(*answered, object, false))};
  if (strategy_ != TeacherStrategy::MinHelp) out.push_back(say(class_fact(truth, object, true)));
  return out;
}

std::vector<L::Prop> Teacher::generics_for(const std::string& cls, const perception::PropertySet& props) const {
  std::vector<L::Prop> out;
  const auto c = L::class_pred(cls);
  if (options_.group_by_part) {
    for (const auto& part : domain_.parts) {
      std::vector<L::PredicateSym> attrs;
      for (const auto& p : props)
        if (p.part == part) attrs.push_back(L::attr_pred(p.attribute));
      if (!attrs.empty()) out.push_back(L::skolemize_part_description(c, attrs, L::class_pred(part)));
    }
  } else {
    for (const auto& p : props)
      out.push_back(L::skolemize_part_description(c, L::attr_pred(p.attribute), L::class_pred(p.part)));
  }
  return out;
}

std::vector<D::Utterance> Teacher::answer_concept_diff(const L::ConceptDiffQues& q) {
  if (!asked_.insert(unordered(q.first.name, q.second.name)).second) return {};
  auto d = reasoner::concept_diff(domain_.properties, q.first.name, q.second.name);
  std::vector<D::Utterance> out;
  for (const auto& p : generics_for(q.first.name, d.first_only))
    out.push_back(D::make_utterance(D::Speaker::Teacher, p, lexicon_));
  for (const auto& p : generics_for(q.second.name, d.second_only))
    out.push_back(D::make_utterance(D::Speaker::Teacher, p, lexicon_));
  return out;
}

// ---------------------------------------------------------------------------
// Learner

Learner::Learner(LearnerConfig config, perception::ExemplarBase xb, memory::Lexicon lexicon)
    : config_(std::move(config)), xb_(std::move(xb)), lexicon_(std::move(lexicon)) {}

std::vector<std::string> Learner::known_classes(const std::vector<std::string>& targets) const {
  std::vector<std::string> out;
  for (const auto& t : targets)
    if (lexicon_.by_predicate(t)) out.push_back(t);
  return out;
}

perception::SceneGraph Learner::perceive(const perception::Scene& scene, const std::vector<std::string>& targets) const {
  std::vector<std::pair<std::string, perception::Space>> extra;
  for (const auto& c : known_classes(targets)) extra.emplace_back(c, perception::Space::Class);
  return perception::build_scene_graph(scene, xb_, extra);
}

D::Utterance Learner::answer_probe(const perception::SceneGraph& sg, const std::string& object,
                                   const std::vector<std::string>& targets) const {
  auto known = known_classes(targets);
  if (known.empty()) return D::make_utterance(D::Speaker::Learner, D::Feedback::NotSure, lexicon_);
  auto choice = reasoner::classify(sg, kb_.props(), std::set<std::string>(known.begin(), known.end()), object,
                                   config_.inference);
  if (choice.not_sure()) return D::make_utterance(D::Speaker::Learner, D::Feedback::NotSure, lexicon_);
  return D::make_utterance(D::Speaker::Learner, class_fact(*choice.predicate, object, true), lexicon_, object);
}

std::vector<D::LogicalForm> Learner::absorb_feedback(const std::vector<D::Utterance>& feedback,
                                                     const perception::Vec& object_feature) {
  std::vector<D::LogicalForm> forms;
  std::optional<std::string> wrong, truth;
  for (const auto& u : feedback) {
    auto f = D::parse(u.surface, lexicon_, u.demonstratum);
    if (D::canonical(f) != D::canonical(u.form))
      throw AgentError("learner misread '" + u.surface + "' as " + D::canonical(f));
    if (const auto* p = std::get_if<L::Prop>(&f); p && !p->generic && p->cons.literals.size() == 1) {
      const auto& name = p->cons.literals[0].atom.pred.name;
      (p->negated() ? wrong : truth) = name;
    }
    forms.push_back(std::move(f));
  }
  if (wrong && truth)
    xb_.process_correction(*wrong, *truth, object_feature);
  else if (truth)
    xb_.add_exemplar(*truth, perception::Space::Class, object_feature, true);
  else if (wrong)
    xb_.add_exemplar(*wrong, perception::Space::Class, object_feature, false);
  return forms;
}

std::optional<D::Utterance> Learner::ask_concept_diff(const std::string& truth, const std::string& answered) {
  if (!asked_.insert(unordered(truth, answered)).second) return std::nullopt;
  const auto* a = lexicon_.by_predicate(truth);
  const auto* b = lexicon_.by_predicate(answered);
  if (!a || !b) throw AgentError("cannot ask about unnamed classes");
  return D::make_utterance(D::Speaker::Learner, L::concept_diff_question(a->pred, b->pred), lexicon_);
}

void Learner::kb_add(const L::Prop& prop, Source source, int episode) {
  bool fresh = kb_.add(prop, source, episode);
  kb_log_.push_back(KBChange{fresh ? KBChange::Kind::Added : KBChange::Kind::Merged, *kb_.find(prop), episode});
}

void Learner::integrate_generics(const std::vector<L::Prop>& statements, const std::string& p,
                                 const std::string& p_tilde, int episode) {
  const auto prior = kb_.props();
  const auto P = L::class_pred(p), Q = L::class_pred(p_tilde);
  for (const auto& psi : statements) kb_add(psi, Source::Explicit, episode);
  if (config_.strategy == LearnerStrategy::SemOnly) return;

  std::vector<L::Prop> negs;
  for (const auto& psi : statements) negs.push_back(L::derive_neg_implicature(psi, P, Q));
  for (const auto& n : negs) kb_add(n, Source::NegImplicature, episode);
  if (config_.strategy == LearnerStrategy::SemNeg) return;

  for (const auto& kappa : prior) {
    if (!L::mentions(kappa.ante, p) && !L::mentions(kappa.ante, p_tilde)) continue;
    auto scl = L::swap_predicates(kappa, P, Q);
    bool clash = std::any_of(statements.begin(), statements.end(), [&](const L::Prop& s) { return L::contradicts(scl, s); }) ||
                 std::any_of(negs.begin(), negs.end(), [&](const L::Prop& s) { return L::contradicts(scl, s); });
    if (!clash) kb_add(scl, Source::ScalarImplicature, episode);
  }
}

std::vector<memory::KBEntry> Learner::cancel_scalar_implicatures(int episode) {
  std::vector<memory::KBEntry> removed;
  for (const auto& e : kb_.entries()) {
    if (!e.scalar_only()) continue;
    const auto& ante = e.prop.ante.literals;
    if (ante.size() != 1 || ante[0].atom.pred.kind != L::PredKind::ObjectClass) continue;
    if (!memory::find_counterexamples(episodic_, e.prop, config_.theta_ce).empty()) removed.push_back(e);
  }
  for (const auto& e : removed) {
    kb_.remove(e.prop);
    kb_log_.push_back(KBChange{KBChange::Kind::Removed, e, episode});
  }
  return removed;
}

}  // namespace groundsim::agents
