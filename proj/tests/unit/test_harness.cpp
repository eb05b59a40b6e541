#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "groundsim/harness.hpp"

using namespace groundsim;
using namespace groundsim::harness;
namespace P = groundsim::perception;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  auto c = ExperimentConfig::preset("fineEasy");
  c.total_mistakes = 10;
  c.exam_interval = 5;
  c.test_per_class = 4;
  c.seeds = {3, 8};
  c.strategies = {agents::StrategyCombo::parse("medHelp"), agents::StrategyCombo::parse("maxHelp_semNegScal")};
  c.threads = 2;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  return out;
}

}  // namespace

TEST_CASE("average precision") {
  CHECK(*average_precision({{.9, true}, {.8, true}, {.7, false}, {.6, true}}) == doctest::Approx(2.75 / 3));
  CHECK(*average_precision({{.9, true}, {.8, true}, {.3, false}, {.1, false}}) == doctest::Approx(1.0));
  for (int n : {1, 2, 5, 20}) {
    std::vector<std::pair<double, bool>> r;
    for (int i = 0; i < n - 1; ++i) r.emplace_back(1.0 - 0.01 * i, false);
    r.emplace_back(0.0, true);
    CHECK(*average_precision(r) == doctest::Approx(1.0 / n));
  }
  CHECK_FALSE(average_precision({{.9, false}, {.1, false}}).has_value());
  CHECK_FALSE(average_precision({}).has_value());

  SUBCASE("ties keep input order") {
    CHECK(*average_precision({{.5, false}, {.5, true}}) == doctest::Approx(0.5));
    CHECK(*average_precision({{.5, true}, {.5, false}}) == doctest::Approx(1.0));
  }
  SUBCASE("interpolation lifts earlier positives") {
    // precision 1/2 at the first positive, 2/3 at the second
    CHECK(*average_precision({{.9, false}, {.8, true}, {.7, true}}) == doctest::Approx((2.0 / 3 + 2.0 / 3) / 2));
  }
  SUBCASE("oracle scores give a mean of one") {
    std::vector<std::string> classes{"a", "b", "c"};
    double sum = 0;
    for (const auto& p : classes) {
      std::vector<std::pair<double, bool>> r;
      for (int i = 0; i < 30; ++i) {
        const auto& truth = classes[static_cast<std::size_t>(i) % 3];
        r.emplace_back(truth == p ? 1.0 : 0.0, truth == p);
      }
      sum += *average_precision(r);
    }
    CHECK(sum / 3 == doctest::Approx(1.0));
  }
}

TEST_CASE("confusion matrix") {
  ConfusionMatrix m({"a", "b", "c"});
  for (const char* c : {"a", "b", "c"})
    for (int i = 0; i < 4; ++i) m.add(c, std::string(c));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(m.rates()[i][j] == (i == j ? 1.0 : 0.0));

  m.add("a", std::string("b"));
  m.add("a", std::nullopt);
  m.add("c", std::nullopt);
  for (const auto& row : m.rates()) CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(m.rate("a", "b") == doctest::Approx(1.0 / 6));
  CHECK(m.rate("a", ConfusionMatrix::kNotSure) == doctest::Approx(1.0 / 6));
  CHECK(m.to_json()["columns"].back() == "notSure");
  CHECK_THROWS_AS(m.add("d", std::nullopt), HarnessError);
  CHECK_THROWS_AS(m.rate("a", "d"), HarnessError);

  ConfusionMatrix empty({"a"});
  CHECK(empty.rates()[0] == std::vector<double>{0.0, 0.0});
}

TEST_CASE("experiment configuration") {
  auto e = ExperimentConfig::preset("fineEasy");
  CHECK(e.classes == std::vector<std::string>{"brandyGlass", "burgundyGlass", "champagneCoupe"});
  CHECK(e.total_mistakes == 30);
  CHECK(e.exam_interval == 5);
  CHECK(e.exam_count() == 6);
  CHECK(e.seeds.size() == 40);
  CHECK(e.strategies.size() == 5);
  auto h = ExperimentConfig::preset("fineHard");
  CHECK(h.classes.size() == 5);
  CHECK(h.exam_count() == 6);
  CHECK_THROWS_AS(ExperimentConfig::preset("coarse"), HarnessError);

  auto j = e.to_json();
  CHECK(ExperimentConfig::from_json(j, ExperimentConfig::preset("fineHard")).to_json() == j);
  CHECK(ExperimentConfig::from_json({{"seeds", 3}}, e).seeds == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(ExperimentConfig::from_json({{"seeds", {7, 9}}}, e).seeds == std::vector<std::uint64_t>{7, 9});

  auto switched = ExperimentConfig::from_json({{"difficulty", "fineHard"}, {"theta_ce", 0.9}}, e);
  CHECK(switched.total_mistakes == 60);
  CHECK(switched.theta_ce == 0.9);

  CHECK_THROWS_AS(ExperimentConfig::from_json({{"seed", 3}}, e), HarnessError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"classifier", {{"gamma", 1}}}}, e), HarnessError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"exam_interval", 40}}, e), HarnessError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"classes", {"brandyGlass"}}}, e), HarnessError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"strategies", {"maxHelp"}}}, e), agents::AgentError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"solver", "gibbs"}}, e), HarnessError);
}

TEST_CASE("episodes") {
  auto config = small_config();
  auto domain = P::DomainSpec::glasses();
  auto world = make_world(config, domain, 5);

  for (auto strategy : {agents::StrategyCombo::parse("medHelp"), agents::StrategyCombo::parse("maxHelp_semNeg")}) {
    agents::Learner learner({strategy.learner, config.inference, config.theta_ce}, world.priors,
                            memory::Lexicon::prior_vocabulary(domain));
    SimulatedTeacher teacher(agents::Teacher(domain, strategy.teacher));
    int correct = 0, wrong = 0;
    for (int k = 0; k < 60; ++k) {
      const auto& target = config.classes[static_cast<std::size_t>(k) % 3];
      auto scene = world.model.generate_scene(target, 1000 + static_cast<std::uint64_t>(k));
      auto xb = learner.xb();
      auto kb = learner.kb();
      auto lex = learner.lexicon();
      auto out = run_episode(teacher, learner, scene, config.classes, k + 1);

      CHECK(learner.episodic().size() == static_cast<std::size_t>(k + 1));
      CHECK(learner.episodic().records().back().confirmed_class == target);
      if (!out.mistake()) {
        ++correct;
        CHECK(learner.xb() == xb);
        CHECK(learner.kb() == kb);
        CHECK(learner.lexicon() == lex);
        CHECK(out.transcript.back().surface == "Correct.");
      } else {
        CHECK_FALSE(learner.xb() == xb);
        if (out.outcome == memory::Outcome::Incorrect) ++wrong;
        if (strategy.teacher == agents::TeacherStrategy::MedHelp) CHECK(learner.kb() == kb);
      }
    }
    CHECK(correct > 0);
    CHECK(wrong > 0);
    if (strategy.teacher == agents::TeacherStrategy::MaxHelp) CHECK_FALSE(learner.kb().empty());
  }
}

TEST_CASE("exams are read-only and scores stay in range") {
  auto config = small_config();
  auto domain = P::DomainSpec::glasses();
  auto world = make_world(config, domain, 5);
  CHECK(world.test_set.size() == 12);
  agents::Learner learner({agents::LearnerStrategy::SemOnly, config.inference, config.theta_ce}, world.priors,
                          memory::Lexicon::prior_vocabulary(domain));

  auto before = learner.xb();
  ConfusionMatrix cm(config.classes);
  auto r = run_exam(learner, world.test_set, config.classes, 0, &cm);
  CHECK(learner.xb() == before);
  // nothing is named yet: every concept scores 0.5 and the learner is never sure
  for (const auto& p : config.classes) CHECK(r.ap.at(p).has_value());
  CHECK(cm.rate("brandyGlass", ConfusionMatrix::kNotSure) == 1.0);

  SimulatedTeacher teacher(agents::Teacher(domain, agents::TeacherStrategy::MedHelp));
  for (int k = 0; k < 12; ++k) {
    auto scene = world.model.generate_scene(config.classes[static_cast<std::size_t>(k) % 3], 50 + static_cast<std::uint64_t>(k));
    run_episode(teacher, learner, scene, config.classes, k + 1);
  }
  auto opt = learner.config().inference;
  for (const auto& scene : world.test_set) {
    auto sg = learner.perceive(scene, config.classes);
    for (const auto& [p, m] :
         reasoner::class_marginals(sg, learner.kb().props(), learner.known_classes(config.classes), "o1", opt)) {
      CHECK(m >= 0.0);
      CHECK(m <= 1.0);
    }
  }
  auto r2 = run_exam(learner, world.test_set, config.classes, 12);
  CHECK(r2.map >= 0.0);
  CHECK(r2.map <= 1.0);
  double sum = 0;
  for (const auto& [p, ap] : r2.ap) sum += *ap;
  CHECK(r2.map == doctest::Approx(sum / 3));
}

TEST_CASE("sequences") {
  auto config = small_config();
  auto domain = P::DomainSpec::glasses();
  auto a = run_sequence(config, domain, config.strategies[1], 3);
  auto b = run_sequence(config, domain, config.strategies[1], 3);

  REQUIRE(a.exams.size() == 2);
  CHECK(a.exams[0].mistakes == 5);
  CHECK(a.exams[1].mistakes == 10);
  CHECK(a.mistakes == 10);
  CHECK(a.transcript == b.transcript);
  CHECK(a.episodes_jsonl == b.episodes_jsonl);
  CHECK(a.final_kb == b.final_kb);
  CHECK(a.confusion.counts() == b.confusion.counts());

  long tested = 0;
  for (const auto& row : a.confusion.counts()) tested += std::accumulate(row.begin(), row.end(), 0L);
  CHECK(tested == 12);

  int headers = 0;
  for (const auto& line : a.transcript) headers += line.rfind("# episode ", 0) == 0;
  CHECK(headers == a.episodes);

  SUBCASE("episode cap") {
    auto capped = config;
    capped.episode_cap_factor = 1;
    capped.total_mistakes = 30;
    auto c = run_sequence(capped, domain, config.strategies[1], 3);
    CHECK(c.episodes <= 30);
    CHECK(c.exams.size() == 6);
    if (c.mistakes < 30) CHECK(c.exams.back().after_cap);
  }
}

TEST_CASE("suites are deterministic and thread-count independent") {
  auto config = small_config();
  auto domain = P::DomainSpec::glasses();
  auto r1 = run_suite(config, domain);
  config.threads = 1;
  auto r2 = run_suite(config, domain);

  CHECK(r1.cells.size() == 4);
  CHECK(r1.aggregate.size() == static_cast<std::size_t>(config.exam_count()) * config.strategies.size());
  CHECK(r1.cells[1].strategy == "medHelp");
  CHECK(r1.cells[1].seed == 8);
  CHECK(r1.cells[2].strategy == "maxHelp_semNegScal");
  for (std::size_t i = 0; i < r1.cells.size(); ++i) CHECK(r1.cells[i].transcript == r2.cells[i].transcript);
  for (const auto& row : r1.aggregate) {
    CHECK(row.n == 2);
    CHECK(row.ci95 >= 0.0);
  }
  CHECK(r1.final_map("medHelp") == r2.final_map("medHelp"));

  auto dir = fs::temp_directory_path() / "groundsim_harness_test";
  fs::remove_all(dir);
  write_outputs(r1, config, (dir / "a").string());
  write_outputs(r2, config, (dir / "b").string());
  auto ta = tree(dir / "a"), tb = tree(dir / "b");
  CHECK(ta == tb);
  for (const char* f : {"curves.csv", "curves_aggregate.csv", "summary.json", "confusion_medHelp.json",
                        "transcripts/medHelp_3.log", "episodes/maxHelp_semNegScal_8.jsonl"})
    CHECK_MESSAGE(ta.count(f), f);
  CHECK(ta["curves.csv"].rfind("strategy,seed,mistakes,concept,AP,mAP\n", 0) == 0);
  // header plus strategies x seeds x exams x concepts
  CHECK(std::count(ta["curves.csv"].begin(), ta["curves.csv"].end(), '\n') == 1 + 2 * 2 * 2 * 3);
  fs::remove_all(dir);

  auto bad = config;
  bad.classes = {"brandyGlass", "teacup"};
  CHECK_THROWS_AS(run_suite(bad, domain), HarnessError);
}
