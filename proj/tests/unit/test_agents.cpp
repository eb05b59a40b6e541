#include <algorithm>
#include <random>

#include "doctest.h"
#include "groundsim/agents.hpp"
#include "support/scenarios.hpp"

using namespace groundsim;
using namespace groundsim::agents;
using namespace groundsim::testing;
namespace D = groundsim::dialogue;
namespace M = groundsim::memory;
namespace P = groundsim::perception;

namespace {

std::vector<std::string> surfaces(const std::vector<D::Utterance>& us) {
  std::vector<std::string> out;
  for (const auto& u : us) out.push_back(u.surface);
  return out;
}

bool holds(const M::KnowledgeBase& kb, const L::Prop& p, std::set<M::Source> provenance) {
  for (const auto& e : kb.entries())
    if (L::equivalent(e.prop, p)) return e.provenance == provenance;
  return false;
}

bool entry_is(const M::KBEntry& e, const L::Prop& p, M::Source s) {
  return L::equivalent(e.prop, p) && e.provenance == std::set<M::Source>{s};
}

}  // namespace

TEST_CASE("strategy names") {
  std::vector<std::string> names;
  for (const auto& s : StrategyCombo::all()) names.push_back(s.name());
  CHECK(names == std::vector<std::string>{"minHelp", "medHelp", "maxHelp_semOnly", "maxHelp_semNeg",
                                          "maxHelp_semNegScal"});
  for (const auto& s : StrategyCombo::all()) CHECK(StrategyCombo::parse(s.name()) == s);
  CHECK_THROWS_AS(StrategyCombo::parse("maxHelp"), AgentError);
  CHECK(unordered("b", "a") == unordered("a", "b"));
}

TEST_CASE("teacher feedback") {
  auto d = P::DomainSpec::glasses();
  Teacher mn(d, TeacherStrategy::MinHelp), md(d, TeacherStrategy::MedHelp), mx(d, TeacherStrategy::MaxHelp);

  for (auto* t : {&mn, &md, &mx}) {
    CHECK(surfaces(t->respond("brandyGlass", "brandyGlass", "o1")) == std::vector<std::string>{"Correct."});
    CHECK(surfaces(t->respond(std::nullopt, "brandyGlass", "o1")) ==
          std::vector<std::string>{"This is a brandy glass."});
  }
  CHECK(surfaces(mn.respond("burgundyGlass", "brandyGlass", "o1")) ==
        std::vector<std::string>{"This is not a burgundy glass."});
  const std::vector<std::string> labelled{"This is not a burgundy glass.", "This is a brandy glass."};
  CHECK(surfaces(md.respond("burgundyGlass", "brandyGlass", "o1")) == labelled);
  CHECK(surfaces(mx.respond("burgundyGlass", "brandyGlass", "o1")) == labelled);

  auto probe = mx.probe("o1");
  CHECK(probe.surface == "What is this?");
  CHECK(probe.demonstratum == "o1");
}

TEST_CASE("teacher answers each difference question once") {
  auto d = P::DomainSpec::glasses();
  Teacher t(d, TeacherStrategy::MaxHelp);
  auto q = [](const char* a, const char* b) { return L::ConceptDiffQues{L::class_pred(a), L::class_pred(b)}; };

  CHECK(surfaces(t.answer_concept_diff(q("brandyGlass", "burgundyGlass"))) ==
        std::vector<std::string>{"Brandy glasses have short stems."});
  CHECK(t.answer_concept_diff(q("brandyGlass", "burgundyGlass")).empty());
  CHECK(t.answer_concept_diff(q("burgundyGlass", "brandyGlass")).empty());
  CHECK(t.asked_pairs().size() == 1);

  auto both = t.answer_concept_diff(q("champagneCoupe", "martiniGlass"));
  CHECK(surfaces(both) == std::vector<std::string>{"Champagne coupes have round bowls.", "Martini glasses have conic bowls."});

  SUBCASE("grouped by part") {
    auto g = t.answer_concept_diff(q("burgundyGlass", "bordeauxGlass"));
    REQUIRE(g.size() == 2);
    CHECK(L::equivalent(std::get<L::Prop>(g[0].form), part_desc("burgundyGlass", {"wide", "round"}, "bowl")));
    CHECK(L::equivalent(std::get<L::Prop>(g[1].form), part_desc("bordeauxGlass", {"elliptical"}, "bowl")));
  }
  SUBCASE("one statement per attribute") {
    Teacher flat(d, TeacherStrategy::MaxHelp, TeacherOptions{false});
    auto g = flat.answer_concept_diff(q("burgundyGlass", "bordeauxGlass"));
    CHECK(g.size() == 3);
  }
}

TEST_CASE("learner probe answers") {
  auto d = P::DomainSpec::glasses();
  P::FeatureModel m(d, P::SimParams{}, 3);
  auto scene = m.generate_scene("brandyGlass", 5);
  auto learner = blank_learner(LearnerStrategy::SemOnly, d);
  std::vector<std::string> targets(d.classes.begin(), d.classes.end());

  auto sg = learner.perceive(scene, targets);
  CHECK(learner.answer_probe(sg, "o1", targets).surface == "I am not sure.");

  D::parse("This is a brandy glass.", learner.lexicon(), "o1");
  CHECK(learner.known_classes(targets) == std::vector<std::string>{"brandyGlass"});
  sg = learner.perceive(scene, targets);
  CHECK(sg.node("o1")->classes.at("brandyGlass") == 0.5);
  CHECK(learner.answer_probe(sg, "o1", targets).surface == "I am not sure.");

  learner.xb().add_exemplar("brandyGlass", P::Space::Class, scene.objects[0].class_feature, true);
  sg = learner.perceive(scene, targets);
  auto a = learner.answer_probe(sg, "o1", targets);
  CHECK(a.surface == "This is a brandy glass.");
  CHECK(learner.answer_probe(sg, "o1", targets).surface == a.surface);
}

TEST_CASE("feedback updates the exemplar base") {
  auto d = P::DomainSpec::glasses();
  P::Vec f(16, 0.0);
  f[3] = 1.0;
  auto count = [](const Learner& l, const char* c, bool pos) -> std::size_t {
    const auto* e = l.xb().find(c);
    return e ? (pos ? e->positive.size() : e->negative.size()) : 0;
  };

  SUBCASE("label and negation: one negative for the answer, one positive for the truth") {
    auto l = blank_learner(LearnerStrategy::SemOnly, d);
    Teacher t(d, TeacherStrategy::MedHelp);
    l.absorb_feedback(t.respond("burgundyGlass", "brandyGlass", "o1"), f);
    CHECK(count(l, "brandyGlass", true) == 1);
    CHECK(count(l, "brandyGlass", false) == 0);
    CHECK(count(l, "burgundyGlass", false) == 1);
    CHECK(count(l, "burgundyGlass", true) == 0);
  }
  SUBCASE("negation only") {
    auto l = blank_learner(LearnerStrategy::SemOnly, d);
    Teacher t(d, TeacherStrategy::MinHelp);
    l.absorb_feedback(t.respond("burgundyGlass", "brandyGlass", "o1"), f);
    CHECK(count(l, "burgundyGlass", false) == 1);
    CHECK(l.xb().find("brandyGlass") == nullptr);
  }
  SUBCASE("label only") {
    auto l = blank_learner(LearnerStrategy::SemOnly, d);
    Teacher t(d, TeacherStrategy::MinHelp);
    auto forms = l.absorb_feedback(t.respond(std::nullopt, "brandyGlass", "o1"), f);
    CHECK(forms.size() == 1);
    CHECK(count(l, "brandyGlass", true) == 1);
    CHECK(l.lexicon().by_predicate("brandyGlass") != nullptr);
  }
}

TEST_CASE("learner asks about each confused pair once") {
  auto d = P::DomainSpec::glasses();
  auto l = blank_learner(LearnerStrategy::SemOnly, d);
  D::parse("This is a brandy glass.", l.lexicon(), "o1");
  D::parse("This is a burgundy glass.", l.lexicon(), "o1");
  auto q = l.ask_concept_diff("brandyGlass", "burgundyGlass");
  REQUIRE(q.has_value());
  CHECK(q->surface == "How are brandy glasses and burgundy glasses different?");
  CHECK_FALSE(l.ask_concept_diff("brandyGlass", "burgundyGlass").has_value());
  CHECK_FALSE(l.ask_concept_diff("burgundyGlass", "brandyGlass").has_value());
  CHECK_THROWS_AS(l.ask_concept_diff("brandyGlass", "martiniGlass"), AgentError);
}

TEST_CASE("strategy-dependent KB updates") {
  SUBCASE("semOnly") {
    auto added = table2_additions(LearnerStrategy::SemOnly);
    REQUIRE(added.size() == 1);
    CHECK(entry_is(added[0], part_desc("brandyGlass", {"short"}, "stem"), M::Source::Explicit));
  }
  SUBCASE("semNeg") {
    auto added = table2_additions(LearnerStrategy::SemNeg);
    REQUIRE(added.size() == 2);
    CHECK(entry_is(added[0], part_desc("brandyGlass", {"short"}, "stem"), M::Source::Explicit));
    CHECK(entry_is(added[1], negated(part_desc("burgundyGlass", {"short"}, "stem")), M::Source::NegImplicature));
  }
  SUBCASE("semNegScal") {
    auto added = table2_additions(LearnerStrategy::SemNegScal);
    REQUIRE(added.size() == 3);
    CHECK(entry_is(added[0], part_desc("brandyGlass", {"short"}, "stem"), M::Source::Explicit));
    CHECK(entry_is(added[1], negated(part_desc("burgundyGlass", {"short"}, "stem")), M::Source::NegImplicature));
    CHECK(entry_is(added[2], part_desc("burgundyGlass", {"wide"}, "bowl"), M::Source::ScalarImplicature));
  }
}

TEST_CASE("scalar implicatures that clash with what was said are skipped") {
  auto d = P::DomainSpec::glasses();
  Teacher t(d, TeacherStrategy::MaxHelp);
  auto l = blank_learner(LearnerStrategy::SemNegScal, d);
  D::parse("Brandy glasses have short stems.", l.lexicon());
  D::parse("This is a burgundy glass.", l.lexicon(), "o1");
  // a prior belief whose swap would say burgundy glasses have short stems
  l.kb().add(part_desc("brandyGlass", {"short"}, "stem"), M::Source::Explicit, 0);
  teach_difference(t, l, "brandyGlass", "burgundyGlass", 1);
  CHECK_FALSE(holds(l.kb(), part_desc("burgundyGlass", {"short"}, "stem"), {M::Source::ScalarImplicature}));
  CHECK(holds(l.kb(), negated(part_desc("burgundyGlass", {"short"}, "stem")), {M::Source::NegImplicature}));
}

TEST_CASE("KB additions are monotone across learner strategies") {
  auto d = P::DomainSpec::glasses();
  std::mt19937 rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<std::pair<std::string, std::string>> confusions;
    for (int i = 0; i < 6; ++i) {
      auto a = d.classes[rng() % d.classes.size()], b = d.classes[rng() % d.classes.size()];
      if (a != b) confusions.emplace_back(a, b);
    }
    std::vector<Learner> ls;
    std::vector<Teacher> ts;
    for (auto s : {LearnerStrategy::SemOnly, LearnerStrategy::SemNeg, LearnerStrategy::SemNegScal}) {
      ls.push_back(blank_learner(s, d));
      ts.emplace_back(d, TeacherStrategy::MaxHelp);
    }
    int ep = 0;
    for (const auto& [truth, answered] : confusions) {
      ++ep;
      for (std::size_t i = 0; i < 3; ++i) teach_difference(ts[i], ls[i], truth, answered, ep);
      for (std::size_t i = 0; i + 1 < 3; ++i)
        for (const auto& e : ls[i].kb().entries()) {
          const auto* bigger = ls[i + 1].kb().find(e.prop);
          REQUIRE(bigger != nullptr);
          CHECK(std::includes(bigger->provenance.begin(), bigger->provenance.end(), e.provenance.begin(),
                              e.provenance.end()));
        }
    }
  }
}

TEST_CASE("failure case and cancellation") {
  auto l = failure_case_learner();
  const auto& kb = l.kb();
  const auto underlined = part_desc("bordeauxGlass", {"wide", "tapered"}, "bowl");
  using S = M::Source;

  CHECK(kb.size() == 10);
  CHECK(holds(kb, part_desc("champagneCoupe", {"broad"}, "bowl"), {S::Explicit}));
  CHECK(holds(kb, part_desc("burgundyGlass", {"wide", "tapered"}, "bowl"), {S::Explicit}));
  CHECK(holds(kb, negated(part_desc("burgundyGlass", {"broad"}, "bowl")), {S::NegImplicature}));
  CHECK(holds(kb, negated(part_desc("champagneCoupe", {"wide", "tapered"}, "bowl")), {S::NegImplicature}));
  CHECK(holds(kb, part_desc("burgundyGlass", {"wide", "round"}, "bowl"), {S::Explicit}));
  CHECK(holds(kb, part_desc("bordeauxGlass", {"elliptical"}, "bowl"), {S::Explicit}));
  CHECK(holds(kb, negated(part_desc("bordeauxGlass", {"wide", "round"}, "bowl")), {S::NegImplicature}));
  CHECK(holds(kb, negated(part_desc("burgundyGlass", {"elliptical"}, "bowl")), {S::NegImplicature}));
  CHECK(holds(kb, underlined, {S::ScalarImplicature}));
  CHECK(holds(kb, negated(part_desc("bordeauxGlass", {"broad"}, "bowl")), {S::ScalarImplicature}));

  SUBCASE("no evidence, nothing removed") {
    CHECK(l.cancel_scalar_implicatures(3).empty());
    CHECK(l.kb().size() == 10);
  }
  SUBCASE("a narrow-bowled bordeaux glass refutes the unintended rule only") {
    l.episodic().append(confirmed_episode(3, "bordeauxGlass", bowl_snapshot({{"elliptical", 0.9}, {"tapered", 0.9}})));
    auto removed = l.cancel_scalar_implicatures(3);
    REQUIRE(removed.size() == 1);
    CHECK(L::equivalent(removed[0].prop, underlined));
    CHECK(l.kb().size() == 9);
    CHECK(l.kb_log().back().kind == KBChange::Kind::Removed);
    CHECK(holds(l.kb(), negated(part_desc("bordeauxGlass", {"broad"}, "bowl")), {S::ScalarImplicature}));
  }
  SUBCASE("explicit entries survive contradicting episodes") {
    // a burgundy glass seen with a narrow, round bowl and a broad, wide one
    l.episodic().append(confirmed_episode(3, "burgundyGlass", bowl_snapshot({{"round", 0.9}})));
    l.episodic().append(confirmed_episode(4, "champagneCoupe", bowl_snapshot({{"wide", 0.9}, {"tapered", 0.9}})));
    CHECK(l.cancel_scalar_implicatures(4).empty());
    CHECK(l.kb().size() == 10);
  }
}

TEST_CASE("every KB change is logged") {
  auto l = failure_case_learner();
  std::size_t added = 0;
  for (const auto& c : l.kb_log())
    if (c.kind == KBChange::Kind::Added) ++added;
  CHECK(added == l.kb().size());
}
