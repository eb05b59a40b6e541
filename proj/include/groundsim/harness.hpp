#pragma once

// Episode loop, exams, metrics and multi-seed suites.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "groundsim/agents.hpp"
#include "json.hpp"

namespace groundsim::harness {

class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string difficulty = "fineEasy";
  std::vector<std::string> classes;  // target concepts, C = classes.size()
  int total_mistakes = 30;           // N_t
  int exam_interval = 5;             // N_m
  int test_per_class = 20;
  int episode_cap_factor = 20;       // at most factor * N_t episodes
  std::vector<std::uint64_t> seeds;
  std::vector<agents::StrategyCombo> strategies;

  perception::SimParams sim;
  perception::ClassifierParams classifier;
  int prior_exemplars = 30;  // positives per prior concept
  double prior_negative_ratio = 3.0;  // negatives per positive when seeding prior concepts
  reasoner::InferenceOptions inference;
  double theta_ce = 0.8;
  agents::TeacherOptions teacher;

  int threads = 0;  // 0: hardware concurrency
  bool dump_programs = false;

  /// fineEasy or fineHard with 40 seeds and every strategy.
  static ExperimentConfig preset(const std::string& difficulty);
  /// Overrides on top of `base`; unknown keys are rejected.
  static ExperimentConfig from_json(const nlohmann::json& j, ExperimentConfig base);
  nlohmann::json to_json() const;
  void validate() const;
  int exam_count() const { return total_mistakes / exam_interval; }
};

/// Simulated or human teacher behind the episode loop.
class TeacherPort {
 public:
  virtual ~TeacherPort() = default;
  virtual dialogue::Utterance probe(const std::string& object) = 0;
  virtual std::vector<dialogue::Utterance> respond(const std::optional<std::string>& answered,
                                                   const std::string& truth, const std::string& object) = 0;
  virtual bool answers_concept_diff() const = 0;
  virtual std::vector<dialogue::Utterance> answer_concept_diff(const dialogue::Utterance& question) = 0;
};

class SimulatedTeacher : public TeacherPort {
 public:
  explicit SimulatedTeacher(agents::Teacher t) : teacher_(std::move(t)) {}
  dialogue::Utterance probe(const std::string& object) override { return teacher_.probe(object); }
  std::vector<dialogue::Utterance> respond(const std::optional<std::string>& answered, const std::string& truth,
                                           const std::string& object) override {
    return teacher_.respond(answered, truth, object);
  }
  bool answers_concept_diff() const override { return teacher_.strategy() == agents::TeacherStrategy::MaxHelp; }
  std::vector<dialogue::Utterance> answer_concept_diff(const dialogue::Utterance& question) override;
  const agents::Teacher& teacher() const { return teacher_; }

 private:
  agents::Teacher teacher_;
};

struct EpisodeOutcome {
  int id = 0;
  std::string truth;
  std::optional<std::string> answered;
  memory::Outcome outcome = memory::Outcome::Correct;
  bool mistake() const { return outcome != memory::Outcome::Correct; }
  std::vector<dialogue::Utterance> transcript;
  std::vector<memory::KBEntry> removed;
};

/// One probe-answer-feedback round on `scene` (objects[0] is the target).
EpisodeOutcome run_episode(TeacherPort& teacher, agents::Learner& learner, const perception::Scene& scene,
                           const std::vector<std::string>& targets, int episode_id);

/// Area under the interpolated precision-recall curve; nullopt without positives.
std::optional<double> average_precision(const std::vector<std::pair<double, bool>>& ranked);

class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<std::string> classes = {});

  static constexpr const char* kNotSure = "notSure";

  void add(const std::string& truth, const std::optional<std::string>& predicted);
  /// Columns: classes then notSure. Rows sum to 1 (or 0 for an empty row).
  std::vector<std::vector<double>> rates() const;
  double rate(const std::string& truth, const std::string& predicted) const;
  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<std::vector<long>>& counts() const { return counts_; }
  nlohmann::json to_json() const;

 private:
  std::vector<std::string> classes_;
  std::vector<std::vector<long>> counts_;
};

struct ExamResult {
  int mistakes = 0;
  bool after_cap = false;  // taken from the final state after the episode cap
  std::map<std::string, std::optional<double>> ap;
  double map = 0;
};

/// Read-only evaluation over a fixed test set.
ExamResult run_exam(const agents::Learner& learner, const std::vector<perception::Scene>& test_set,
                    const std::vector<std::string>& targets, int mistakes, ConfusionMatrix* confusion = nullptr);

struct SequenceResult {
  std::string strategy;
  std::uint64_t seed = 0;
  std::vector<ExamResult> exams;
  ConfusionMatrix confusion;
  int episodes = 0;
  int mistakes = 0;
  std::vector<std::string> transcript;  // one line per utterance, episodes separated by headers
  std::string episodes_jsonl;
  std::vector<agents::KBChange> kb_log;
  nlohmann::json final_kb;
  std::string programs;  // ground programs, when dumping
};

/// Seed-derived model and test set shared by every strategy of one seed.
struct SeedWorld {
  perception::FeatureModel model;
  perception::ExemplarBase priors;
  std::vector<perception::Scene> test_set;
};

SeedWorld make_world(const ExperimentConfig& config, const perception::DomainSpec& domain, std::uint64_t seed);

SequenceResult run_sequence(const ExperimentConfig& config, const perception::DomainSpec& domain,
                            const agents::StrategyCombo& strategy, std::uint64_t seed,
                            const SeedWorld* world = nullptr);

struct AggregateRow {
  std::string strategy;
  int mistakes = 0;
  double mean_map = 0;
  double ci95 = 0;  // half-width
  int n = 0;
};

struct SuiteResult {
  std::vector<SequenceResult> cells;  // ordered by (strategy, seed) as configured
  std::vector<AggregateRow> aggregate;
  std::map<std::string, std::vector<std::vector<double>>> mean_confusion;  // per strategy

  const SequenceResult& cell(const std::string& strategy, std::uint64_t seed) const;
  double final_map(const std::string& strategy) const;
  /// Mean over seeds of the final-exam rate truth -> predicted.
  double confusion_rate(const std::string& strategy, const std::string& truth, const std::string& predicted) const;
};

SuiteResult run_suite(const ExperimentConfig& config, const perception::DomainSpec& domain);

/// curves.csv, curves_aggregate.csv, confusion_<strategy>.json, transcripts/,
/// episodes/, summary.json and, when dumping, programs/.
void write_outputs(const SuiteResult& result, const ExperimentConfig& config, const std::string& out_dir);

}  // namespace groundsim::harness
