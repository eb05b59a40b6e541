#include <random>

#include "doctest.h"
#include "groundsim/logic.hpp"

using namespace groundsim::logic;

namespace {

const PredicateSym brandy = class_pred("brandyGlass");
const PredicateSym burgundy = class_pred("burgundyGlass");
const PredicateSym champagne = class_pred("champagneCoupe");
const PredicateSym bordeaux = class_pred("bordeauxGlass");
const PredicateSym stem = class_pred("stem");
const PredicateSym bowl = class_pred("bowl");
const PredicateSym shortA = attr_pred("short");
const PredicateSym wide = attr_pred("wide");
const PredicateSym tapered = attr_pred("tapered");
const PredicateSym roundA = attr_pred("round");
const PredicateSym broad = attr_pred("broad");
const PredicateSym haveSS = class_pred("haveShortStem");

Signature glasses_sig() {
  Signature s;
  for (const auto& p : {brandy, burgundy, champagne, bordeaux, stem, bowl, shortA, wide, tapered, roundA, broad,
                        haveSS, have_pred()})
    s[p.name] = p;
  return s;
}

Prop simple_rule(const PredicateSym& a, const PredicateSym& c, ConsPolarity pol = ConsPolarity::Positive) {
  return Prop::rule({"O"}, conj({Atom{a, {variable("O")}}}), conj({Atom{c, {variable("O")}}}), pol);
}

}  // namespace

TEST_CASE("predicate symbols validate arity and kind") {
  CHECK_THROWS_AS(PredicateSym::make("near", 1, PredKind::Relation), LogicError);
  CHECK_THROWS_AS(PredicateSym::make("x", 0, PredKind::Attribute), LogicError);
  CHECK_THROWS_AS((Atom{brandy, {constant("a"), constant("b")}}), LogicError);
}

TEST_CASE("substitute") {
  SUBCASE("direct replacement") {
    auto c = conj({Atom{brandy, {variable("O")}}});
    auto out = substitute(c, {{"O", constant("o1")}});
    CHECK(to_string(out) == "brandyGlass(o1)");
  }
  SUBCASE("empty binding is identity") {
    auto p = skolemize_part_description(brandy, shortA, stem);
    CHECK(substitute(p, {}) == p);
  }
  SUBCASE("replacement under skolem") {
    Term fo = skolem(SkolemFn{"", "stem"}, Variable{"O"});
    auto c = conj({Atom{shortA, {fo}}});
    CHECK(to_string(substitute(c, {{"O", constant("o1")}})) == "short(f_stem(o1))");
  }
  SUBCASE("skolem argument cannot bind to a skolem term") {
    auto p = skolemize_part_description(brandy, shortA, stem);
    CHECK_THROWS_AS(substitute(p, {{"O", skolem(SkolemFn{"", "bowl"}, Constant{"o2"})}}), LogicError);
  }
  SUBCASE("binding a variable that does not occur is rejected") {
    auto c = conj({Atom{brandy, {variable("O")}}});
    CHECK_THROWS_AS(substitute(c, {{"X", constant("o1")}}), LogicError);
  }
  SUBCASE("grounding the quantified variable yields a non-generic prop") {
    auto p = substitute(simple_rule(brandy, haveSS), {{"O", constant("o1")}});
    CHECK_FALSE(p.generic);
    CHECK(to_string(p) == "brandyGlass(o1) => haveShortStem(o1)");
  }
}

TEST_CASE("rename then inverse rename is identity") {
  std::mt19937 rng(3);
  const std::vector<PredicateSym> classes{brandy, burgundy, champagne, bordeaux};
  const std::vector<PredicateSym> attrs{shortA, wide, tapered, roundA, broad};
  for (int i = 0; i < 50; ++i) {
    auto p = skolemize_part_description(classes[rng() % 4], attrs[rng() % 5], rng() % 2 ? stem : bowl);
    auto renamed = substitute(p, {{"O", variable("Z")}});
    CHECK(renamed.variables == std::vector<std::string>{"Z"});
    CHECK(substitute(renamed, {{"Z", variable("O")}}) == p);
  }
}

TEST_CASE("swap_predicates") {
  auto psi = simple_rule(brandy, haveSS);
  CHECK(to_string(swap_predicates(psi, brandy, burgundy)) == "G O. burgundyGlass(O) => haveShortStem(O)");
  CHECK(swap_predicates(psi, brandy, brandy) == psi);
  CHECK(swap_predicates(psi, champagne, bordeaux) == psi);
  CHECK_THROWS_AS(swap_predicates(psi, brandy, shortA), LogicError);

  SUBCASE("skolem owners follow the swap") {
    auto p = skolemize_part_description(brandy, shortA, stem);
    auto s = swap_predicates(p, brandy, burgundy);
    CHECK(s == skolemize_part_description(burgundy, shortA, stem));
  }
}

TEST_CASE("swap is an involution") {
  std::mt19937 rng(11);
  const std::vector<PredicateSym> classes{brandy, burgundy, champagne, bordeaux};
  const std::vector<PredicateSym> attrs{shortA, wide, tapered, roundA, broad};
  for (int i = 0; i < 200; ++i) {
    auto p = skolemize_part_description(classes[rng() % 4], attrs[rng() % 5], rng() % 2 ? stem : bowl);
    if (rng() % 2) p.polarity = ConsPolarity::Negated;
    const auto& a = classes[rng() % 4];
    const auto& b = classes[rng() % 4];
    CHECK(swap_predicates(swap_predicates(p, a, b), a, b) == p);
  }
}

TEST_CASE("derive_neg_implicature") {
  auto psi = simple_rule(brandy, haveSS);
  auto neg = derive_neg_implicature(psi, brandy, burgundy);
  CHECK(to_string(neg) == "G O. burgundyGlass(O) => ~haveShortStem(O)");
  CHECK(neg.generic);
  CHECK(derive_neg_implicature(neg, burgundy, brandy) == psi);

  auto coupe = simple_rule(champagne, class_pred("haveBroadBowl"));
  CHECK(to_string(derive_neg_implicature(coupe, champagne, burgundy)) ==
        "G O. burgundyGlass(O) => ~haveBroadBowl(O)");

  CHECK_THROWS_AS(derive_neg_implicature(Prop::fact(conj({Atom{brandy, {constant("o1")}}})), brandy, burgundy),
                  LogicError);
  CHECK_THROWS_AS(derive_neg_implicature(psi, champagne, bordeaux), LogicError);
}

TEST_CASE("derive_neg_implicature keeps the swapped antecedent and flips only polarity") {
  auto psi = skolemize_part_description(brandy, shortA, stem);
  auto neg = derive_neg_implicature(psi, brandy, burgundy);
  auto swapped = swap_predicates(psi, brandy, burgundy);
  CHECK(neg.ante == swapped.ante);
  CHECK(neg.cons == swapped.cons);
  CHECK(neg.polarity == ConsPolarity::Negated);
}

TEST_CASE("contradicts") {
  auto b = class_pred("b");
  auto c = class_pred("c");
  auto s = class_pred("s");
  CHECK(contradicts(simple_rule(b, s), simple_rule(b, s, ConsPolarity::Negated)));
  CHECK_FALSE(contradicts(simple_rule(b, s), simple_rule(c, s, ConsPolarity::Negated)));
  CHECK_FALSE(contradicts(simple_rule(b, s), simple_rule(b, s)));

  // Partial overlap of conjunctive consequents is not a contradiction.
  auto wide_round = skolemize_part_description(bordeaux, {wide, roundA}, bowl);
  wide_round.polarity = ConsPolarity::Negated;
  auto wide_tapered = skolemize_part_description(bordeaux, {wide, tapered}, bowl);
  CHECK_FALSE(contradicts(wide_round, wide_tapered));

  SUBCASE("symmetric, irreflexive, insensitive to renaming and literal order") {
    auto p = skolemize_part_description(bordeaux, {wide, tapered}, bowl);
    auto q = skolemize_part_description(bordeaux, {tapered, wide}, bowl);
    q = substitute(q, {{"O", variable("X")}});
    q.polarity = ConsPolarity::Negated;
    CHECK(contradicts(p, q));
    CHECK(contradicts(q, p));
    CHECK_FALSE(contradicts(p, p));
  }
  SUBCASE("skolem owners do not matter") {
    auto p = skolemize_part_description(burgundy, shortA, stem);
    auto q = p;
    for (auto& l : q.cons.literals)
      for (auto& t : l.atom.args)
        if (auto* s = std::get_if<SkolemApp>(&t)) s->fn.owner = "someoneElse";
    q.polarity = ConsPolarity::Negated;
    CHECK(contradicts(p, q));
  }
}

TEST_CASE("skolemize_part_description") {
  auto p = skolemize_part_description(brandy, shortA, stem);
  CHECK(to_string(p) ==
        "G O. brandyGlass(O) => have(O,f_brandyGlass_stem(O)), short(f_brandyGlass_stem(O)), "
        "stem(f_brandyGlass_stem(O))");
  auto q = skolemize_part_description(burgundy, wide, bowl);
  auto fn_of = [](const Prop& x) { return std::get<SkolemApp>(x.cons.literals[1].atom.args[0]).fn; };
  CHECK(fn_of(q).id() == "f_burgundyGlass_bowl");
  CHECK(fn_of(q) != fn_of(p));
  CHECK(fn_of(skolemize_part_description(brandy, shortA, stem)) == fn_of(p));
  CHECK_THROWS_AS(skolemize_part_description(shortA, brandy, stem), LogicError);
  CHECK_THROWS_AS(skolemize_part_description(brandy, stem, stem), LogicError);
}

TEST_CASE("text syntax round-trips") {
  const auto sig = glasses_sig();
  std::vector<Prop> props{
      skolemize_part_description(brandy, shortA, stem),
      derive_neg_implicature(skolemize_part_description(brandy, shortA, stem), brandy, burgundy),
      derive_neg_implicature(skolemize_part_description(burgundy, {wide, roundA}, bowl), burgundy, bordeaux),
      Prop::fact(conj({Atom{brandy, {constant("o1")}}})),
      Prop::fact(conj({Atom{burgundy, {constant("o1")}}}), ConsPolarity::Negated),
      skolemize_instance_description("o3", wide, bowl),
      simple_rule(brandy, haveSS),
  };
  for (const auto& p : props) {
    CAPTURE(to_string(p));
    CHECK(parse_prop(to_string(p), sig) == p);
  }
  std::vector<Ques> qs{
      PolarQues{Prop::fact(conj({Atom{brandy, {constant("o1")}}}))},
      WhQues{"P", Prop::fact(conj({Atom{PredicateSym{"P", 1, PredKind::ObjectClass}, {constant("o1")}}}))},
      concept_diff_question(brandy, burgundy),
  };
  for (const auto& q : qs) {
    CAPTURE(to_string(q));
    CHECK(parse_ques(to_string(q), sig) == q);
  }
  CHECK(to_string(qs[1]) == "?\\P. P(o1)");
  CHECK(to_string(qs[2]) == "?conceptDiff(brandyGlass, burgundyGlass)");
  CHECK_THROWS_AS(parse_prop("G O. unknownThing(O) => stem(O)", sig), SyntaxError);
  CHECK_THROWS_AS(parse_prop("brandyGlass(o1) extra", sig), SyntaxError);
  CHECK_THROWS_AS(concept_diff_question(brandy, shortA), LogicError);
}

TEST_CASE("equivalence ignores variable names and literal order") {
  auto p = skolemize_part_description(burgundy, {wide, tapered}, bowl);
  auto q = substitute(skolemize_part_description(burgundy, {tapered, wide}, bowl), {{"O", variable("Y")}});
  CHECK(equivalent(p, q));
  CHECK_FALSE(equivalent(p, skolemize_part_description(burgundy, {wide}, bowl)));
}
