#include <chrono>
#include <cmath>
#include <random>

#include "doctest.h"
#include "groundsim/asp.hpp"
#include "support/asp_programs.hpp"

using namespace groundsim::asp;
using namespace groundsim::testing;

namespace {

// Arbitrary (possibly cyclic) programs over a few atoms.
WeightedProgram random_program(std::mt19937& rng, int n_base) {
  std::uniform_real_distribution<double> w(-3.0, 3.0);
  WeightedProgram p;
  auto base = [&](int i) { return make_atom("b" + std::to_string(i), {}); };
  for (int i = 0; i < n_base; ++i) p.rules.push_back(soft_fact(w(rng), base(i)));
  int n_derived = static_cast<int>(rng() % 3);
  for (int d = 0; d < n_derived; ++d) {
    int bodies = 1 + static_cast<int>(rng() % 2);
    for (int k = 0; k < bodies; ++k)
      p.rules.push_back(hard_rule(make_atom("d" + std::to_string(d), {}),
                                  {base(static_cast<int>(rng() % n_base)), base(static_cast<int>(rng() % n_base))}));
  }
  int n_con = 1 + static_cast<int>(rng() % 5);
  for (int c = 0; c < n_con; ++c) {
    std::vector<Atom> pos, neg;
    int len = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < len; ++k) {
      bool derived = n_derived > 0 && rng() % 3 == 0;
      Atom a = derived ? make_atom("d" + std::to_string(rng() % n_derived), {}) : base(static_cast<int>(rng() % n_base));
      (rng() % 2 ? pos : neg).push_back(a);
    }
    p.rules.push_back(constraint(w(rng), pos, neg));
  }
  return p;
}

}  // namespace

TEST_CASE("logit") {
  CHECK(logit(0.5) == doctest::Approx(0.0));
  CHECK(logit(0.95) == doctest::Approx(std::log(19.0)).epsilon(1e-12));
  CHECK(std::isfinite(logit(1.0)));
  CHECK(logit(1.0) == doctest::Approx(std::log((1 - kLogitEps) / kLogitEps)));
  CHECK(logit(0.0) == doctest::Approx(-logit(1.0)));
  CHECK_THROWS_AS(logit(1.5), ProgramError);
  CHECK_THROWS_AS(logit(-0.1), ProgramError);
}

TEST_CASE("program text format") {
  const std::string text =
      "#hard| haveShortStem(O) :- have(O,f(O)), short(f(O)), stem(f(O)).\n"
      "2.9444389791664403| :- brandyGlass(O), not haveShortStem(O).\n"
      "-0.25| a.\n"
      "#hard| :- not b, c(x,y).\n";
  auto p = parse_program(text);
  REQUIRE(p.rules.size() == 4);
  CHECK(p.rules[0].hard());
  CHECK(p.rules[0].pos[0].args[1].arg == std::optional<std::string>("O"));
  CHECK(*p.rules[1].weight == std::log(19.0));
  CHECK(p.rules[3].neg.size() == 1);
  CHECK(to_text(p) == "#hard| haveShortStem(O) :- have(O,f(O)), short(f(O)), stem(f(O)).\n"
                      "2.9444389791664403| :- brandyGlass(O), not haveShortStem(O).\n"
                      "-0.25| a.\n"
                      "#hard| :- c(x,y), not b.\n");
  CHECK(parse_program(to_text(p)) == p);
  CHECK(parse_program("% comment\n\n") == WeightedProgram{});
  CHECK_THROWS_AS(parse_program("1.0 a."), ParseError);
  CHECK_THROWS_AS(parse_program("x| a."), ParseError);
  CHECK_THROWS_AS(parse_program("1| :- ."), ParseError);
  CHECK_THROWS_AS(parse_program("1| a"), ParseError);
}

TEST_CASE("ground") {
  SUBCASE("per-entity instantiation") {
    WeightedProgram lifted;
    lifted.rules.push_back(constraint(1.0, {va("brandyGlass")}, {va("haveShortStem")}));
    auto g = ground(lifted, {"o1", "o2"}, {});
    REQUIRE(g.rules.size() == 2);
    CHECK(to_text(g) == "1| :- brandyGlass(o1), not haveShortStem(o1).\n"
                        "1| :- brandyGlass(o2), not haveShortStem(o2).\n");
  }
  SUBCASE("skolem consequent expands over part candidates") {
    auto lifted = parse_program(
        "#hard| haveShortStem(O) :- have(O,f(O)), short(f(O)), stem(f(O)).\n"
        "#hard| :- brandyGlass(O), not haveShortStem(O).\n");
    auto g = ground(lifted, {"o1"}, {{"o1", {"p1", "p2"}}});
    CHECK(to_text(g) ==
          "#hard| haveShortStem(o1) :- have(o1,p1), short(p1), stem(p1).\n"
          "#hard| haveShortStem(o1) :- have(o1,p2), short(p2), stem(p2).\n"
          "#hard| :- brandyGlass(o1), not haveShortStem(o1).\n");
  }
  SUBCASE("empty entity set") {
    WeightedProgram lifted;
    lifted.rules.push_back(constraint(1.0, {va("brandyGlass")}, {va("haveShortStem")}));
    CHECK(ground(lifted, {}, {}).rules.empty());
  }
  SUBCASE("unrestricted variable") {
    WeightedProgram lifted;
    lifted.rules.push_back(constraint(1.0, {}, {va("haveShortStem")}));
    CHECK_THROWS_AS(ground(lifted, {"o1"}, {}), ProgramError);
  }
  SUBCASE("ground rules pass through") {
    WeightedProgram p;
    p.rules.push_back(soft_fact(0.3, ga("a", "o1")));
    CHECK(ground(p, {}, {}) == p);
  }
}

TEST_CASE("solve_exact reproduces the worked examples") {
  auto t0 = std::chrono::steady_clock::now();
  auto ex1 = solve_exact(example_program(0.90, false));
  CHECK(ex1.probability("brandyGlass(o1)") == doctest::Approx(0.91).epsilon(0).scale(0).epsilon(0.005 / 0.91));
  CHECK(std::abs(ex1.probability("brandyGlass(o1)") - 0.91) <= 0.005);
  CHECK(std::abs(ex1.probability("burgundyGlass(o1)") - 0.62) <= 0.005);

  auto ex2 = solve_exact(example_program(0.10, false));
  CHECK(std::abs(ex2.probability("brandyGlass(o1)") - 0.20) <= 0.005);
  CHECK(std::abs(ex2.probability("burgundyGlass(o1)") - 0.62) <= 0.005);

  auto ex3 = solve_exact(example_program(0.90, true));
  CHECK(std::abs(ex3.probability("brandyGlass(o1)") - 0.61) <= 0.005);
  CHECK(std::abs(ex3.probability("burgundyGlass(o1)") - 0.19) <= 0.005);
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(1));
}

TEST_CASE("fact-only programs return the source probability") {
  for (double s : {0.01, 0.3, 0.5, 0.77, 0.999}) {
    WeightedProgram p;
    p.rules.push_back(soft_fact(logit(s), make_atom("a", {})));
    // Two worlds: {} with weight 1 and {a} with weight e^w.
    double w = logit(s);
    double hand = std::exp(w) / (1 + std::exp(w));
    CHECK(solve_exact(p).probability("a") == doctest::Approx(hand).epsilon(1e-12));
    CHECK(std::abs(solve_exact(p).probability("a") - s) <= 1e-9);
  }
}

TEST_CASE("world probabilities are normalized") {
  std::mt19937 rng(5);
  for (int i = 0; i < 30; ++i) {
    auto p = random_program(rng, 1 + static_cast<int>(rng() % 6));
    double sum = 0;
    for (const auto& w : world_distribution(p)) sum += w.probability;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("derived atoms follow by closure") {
  auto p = parse_program(
      "0| a.\n"
      "#hard| d :- a.\n"
      "#hard| e :- d.\n");
  auto t = solve_exact(p);
  CHECK(t.probability("d") == doctest::Approx(0.5));
  CHECK(t.probability("e") == doctest::Approx(0.5));
  auto worlds = world_distribution(p);
  CHECK(worlds.size() == 2);
}

TEST_CASE("unsupported support yields false atoms") {
  auto p = parse_program("1| :- a.\n0.5| b.\n");
  auto t = solve_exact(p);
  CHECK(t.probability("a") == 0.0);
  CHECK(t.probability("b") == doctest::Approx(sigmoid(0.5)));
}

TEST_CASE("fragment and admissibility errors") {
  CHECK_THROWS_AS(solve_exact(parse_program("1| a :- b.\n")), ProgramError);
  CHECK_THROWS_AS(solve_exact(parse_program("#hard| a :- not b.\n")), ProgramError);
  CHECK_THROWS_AS(solve_exact(parse_program("1| a.\n#hard| a :- b.\n")), ProgramError);
  CHECK_THROWS_AS(solve_exact(parse_program("1| a(X).\n")), ProgramError);
  auto unsat = parse_program("1| a.\n#hard| :- a.\n#hard| :- not a.\n");
  CHECK_THROWS_AS(solve_exact(unsat), NoAdmissibleWorld);
  CHECK_THROWS_AS(solve_bp(unsat), NoAdmissibleWorld);
  CHECK_THROWS_AS(solve_elimination(unsat), NoAdmissibleWorld);

  WeightedProgram big;
  for (int i = 0; i <= kMaxExactBaseAtoms; ++i) big.rules.push_back(soft_fact(0.1, make_atom("a" + std::to_string(i), {})));
  CHECK_THROWS_AS(solve_exact(big), EnumerationBoundExceeded);
  CHECK(solve_elimination(big).probability("a3") == doctest::Approx(sigmoid(0.1)));
}

TEST_CASE("monotonicity in a fact's weight") {
  std::mt19937 rng(17);
  for (int i = 0; i < 40; ++i) {
    auto p = random_program(rng, 1 + static_cast<int>(rng() % 5));
    double before = solve_exact(p).probability("b0");
    p.rules[0].weight = *p.rules[0].weight + 0.7;
    double after = solve_exact(p).probability("b0");
    CHECK(after >= before - 1e-12);
  }
}

TEST_CASE("independence of predicates not linked by the KB") {
  for (double q : {0.2, 0.62, 0.9}) {
    WeightedProgram p = example_program(0.9, false);
    p.rules[1].weight = logit(q);
    CHECK(std::abs(solve_exact(p).probability("burgundyGlass(o1)") - q) <= 1e-9);
  }
}

TEST_CASE("a HARD constraint no admissible world violates changes nothing") {
  auto p = example_program(0.9, false);
  auto before = solve_exact(p);
  // The derived atom is never true, so the constraint never fires.
  p.rules.push_back(hard_rule(make_atom("never", {}), {make_atom("unsupported", {})}));
  p.rules.push_back(constraint(std::nullopt, {make_atom("never", {})}));
  auto after = solve_exact(p);
  for (const auto& [atom, m] : before.marginals) CHECK(after.probability(atom) == doctest::Approx(m).epsilon(1e-12));
}

TEST_CASE("solve_bp") {
  SUBCASE("single soft fact") {
    WeightedProgram p;
    p.rules.push_back(soft_fact(logit(0.9), make_atom("a", {})));
    auto t = solve_bp(p);
    CHECK(t.converged);
    CHECK(t.probability("a") == doctest::Approx(0.9).epsilon(1e-12));
  }
  SUBCASE("worked example matches the exact solver") {
    auto p = example_program(0.9, false);
    CHECK(factor_graph_is_acyclic(p));
    auto bp = solve_bp(p);
    auto ex = solve_exact(p);
    for (const auto& [atom, m] : ex.marginals) CHECK(std::abs(bp.probability(atom) - m) <= 1e-6);
    CHECK(bp.log_partition == doctest::Approx(ex.log_partition).epsilon(1e-9));
  }
  SUBCASE("chain fact -> constraint -> fact") {
    auto p = parse_program("1.2| a.\n-0.4| b.\n2.0| :- a, not b.\n");
    auto bp = solve_bp(p);
    auto ex = solve_exact(p);
    for (const auto& [atom, m] : ex.marginals) CHECK(std::abs(bp.probability(atom) - m) <= 1e-6);
  }
  SUBCASE("cyclic graphs run loopy BP and report convergence") {
    auto p = parse_program(
        "0.3| a.\n0.2| b.\n-0.1| c.\n"
        "1.0| :- a, not b.\n1.0| :- b, not c.\n1.0| :- c, not a.\n");
    CHECK_FALSE(factor_graph_is_acyclic(p));
    auto t = solve_bp(p);
    CHECK(t.iterations > 0);
    for (const auto& [atom, m] : t.marginals) {
      CHECK(m >= 0.0);
      CHECK(m <= 1.0);
    }
    BpOptions tight;
    tight.max_iterations = 1;
    CHECK_FALSE(solve_bp(p, tight).converged);
  }
}

TEST_CASE("solve_bp agrees with solve_exact on random acyclic programs") {
  std::mt19937 rng(2024);
  int checked = 0;
  while (checked < 200) {
    auto p = random_tree_program(rng, 2 + static_cast<int>(rng() % 9));
    REQUIRE(factor_graph_is_acyclic(p));
    auto ex = solve_exact(p);
    auto bp = solve_bp(p);
    CHECK(bp.converged);
    for (const auto& [atom, m] : ex.marginals) CHECK(std::abs(bp.probability(atom) - m) <= 1e-6);
    ++checked;
  }
}

TEST_CASE("solve_elimination agrees with solve_exact on random programs") {
  std::mt19937 rng(99);
  for (int i = 0; i < 150; ++i) {
    auto p = random_program(rng, 1 + static_cast<int>(rng() % 8));
    MarginalTable ex;
    try {
      ex = solve_exact(p);
    } catch (const NoAdmissibleWorld&) {
      CHECK_THROWS_AS(solve_elimination(p), NoAdmissibleWorld);
      continue;
    }
    auto ve = solve_elimination(p);
    CHECK(ve.log_partition == doctest::Approx(ex.log_partition).epsilon(1e-9));
    for (const auto& [atom, m] : ex.marginals) CHECK(std::abs(ve.probability(atom) - m) <= 1e-9);
    auto q = solve_elimination(p, {"b0"});
    CHECK(q.marginals.size() == 1);
    CHECK(std::abs(q.probability("b0") - ex.probability("b0")) <= 1e-9);
  }
}

TEST_CASE("recursive definitions are rejected by factor solvers but closed by enumeration") {
  auto p = parse_program("0.5| a.\n#hard| d :- a.\n#hard| d :- e.\n#hard| e :- d.\n");
  auto t = solve_exact(p);
  CHECK(t.probability("e") == doctest::Approx(t.probability("a")));
  CHECK_THROWS_AS(solve_bp(p), SolverError);
  CHECK_THROWS_AS(solve_elimination(p), SolverError);
}

TEST_CASE("pruning to the query component preserves its marginals") {
  std::mt19937 rng(7);
  for (int i = 0; i < 40; ++i) {
    auto p = random_program(rng, 2 + static_cast<int>(rng() % 6));
    WeightedProgram extra;
    extra.rules.push_back(soft_fact(0.4, make_atom("island", {})));
    extra.rules.push_back(constraint(1.5, {make_atom("island", {})}));
    p.append(extra);
    MarginalTable full;
    try {
      full = solve_exact(p);
    } catch (const NoAdmissibleWorld&) {
      continue;
    }
    auto pruned = prune_to_relevant(p, {"b0"});
    CHECK(pruned.rules.size() < p.rules.size());
    CHECK(std::abs(solve_exact(pruned).probability("b0") - full.probability("b0")) <= 1e-9);
  }
}
