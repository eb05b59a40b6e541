#pragma once

// Teacher and learner agents.

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "groundsim/dialogue.hpp"
#include "groundsim/memory.hpp"
#include "groundsim/perception.hpp"
#include "groundsim/reasoner.hpp"

namespace groundsim::agents {

class AgentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TeacherStrategy { MinHelp, MedHelp, MaxHelp };
enum class LearnerStrategy { SemOnly, SemNeg, SemNegScal };

struct StrategyCombo {
  TeacherStrategy teacher = TeacherStrategy::MaxHelp;
  LearnerStrategy learner = LearnerStrategy::SemOnly;

  /// minHelp, medHelp, maxHelp_semOnly, maxHelp_semNeg, maxHelp_semNegScal.
  std::string name() const;
  static StrategyCombo parse(const std::string& name);
  static std::vector<StrategyCombo> all();
  bool operator==(const StrategyCombo&) const = default;
};

using ClassPair = std::pair<std::string, std::string>;

/// Unordered pair in canonical (sorted) order.
ClassPair unordered(const std::string& a, const std::string& b);

struct TeacherOptions {
  /// One generic per part, with that part's differing attributes conjoined.
  /// When false: one generic per (attribute, part) pair.
  bool group_by_part = true;
};

class Teacher {
 public:
  Teacher(perception::DomainSpec domain, TeacherStrategy strategy, TeacherOptions options = {});

  TeacherStrategy strategy() const { return strategy_; }
  const memory::Lexicon& lexicon() const { return lexicon_; }
  const std::set<ClassPair>& asked_pairs() const { return asked_; }

  dialogue::Utterance probe(const std::string& object) const;

  /// Feedback after the learner's answer; `answered` is nullopt for "not sure".
  std::vector<dialogue::Utterance> respond(const std::optional<std::string>& answered, const std::string& truth,
                                           const std::string& object) const;

  /// Generic statements realizing the symmetric difference. Empty when the
  /// pair was already answered.
  std::vector<dialogue::Utterance> answer_concept_diff(const logic::ConceptDiffQues& q);

  /// Generic props for one side of a difference.
  std::vector<logic::Prop> generics_for(const std::string& cls, const perception::PropertySet& props) const;

 private:
  perception::DomainSpec domain_;
  TeacherStrategy strategy_;
  TeacherOptions options_;
  memory::Lexicon lexicon_;
  std::set<ClassPair> asked_;
};

struct LearnerConfig {
  LearnerStrategy strategy = LearnerStrategy::SemOnly;
  reasoner::InferenceOptions inference;
  double theta_ce = 0.8;
};

struct KBChange {
  enum class Kind { Added, Merged, Removed } kind;
  memory::KBEntry entry;
  int episode = 0;
};

class Learner {
 public:
  Learner(LearnerConfig config, perception::ExemplarBase xb, memory::Lexicon lexicon);

  const LearnerConfig& config() const { return config_; }
  perception::ExemplarBase& xb() { return xb_; }
  const perception::ExemplarBase& xb() const { return xb_; }
  memory::KnowledgeBase& kb() { return kb_; }
  const memory::KnowledgeBase& kb() const { return kb_; }
  memory::EpisodicMemory& episodic() { return episodic_; }
  const memory::EpisodicMemory& episodic() const { return episodic_; }
  memory::Lexicon& lexicon() { return lexicon_; }
  const memory::Lexicon& lexicon() const { return lexicon_; }
  const std::set<ClassPair>& asked_pairs() const { return asked_; }
  const std::vector<KBChange>& kb_log() const { return kb_log_; }

  /// Target classes the learner has a word for.
  std::vector<std::string> known_classes(const std::vector<std::string>& targets) const;

  perception::SceneGraph perceive(const perception::Scene& scene, const std::vector<std::string>& targets) const;

  /// "This is a(n) X." or "I am not sure." over the known target classes.
  dialogue::Utterance answer_probe(const perception::SceneGraph& sg, const std::string& object,
                                   const std::vector<std::string>& targets) const;

  /// Applies label feedback to the exemplar base. Returns the parsed forms.
  std::vector<dialogue::LogicalForm> absorb_feedback(const std::vector<dialogue::Utterance>& feedback,
                                                     const perception::Vec& object_feature);

  /// The conceptDiff question for a first-time confusion, else nullopt.
  std::optional<dialogue::Utterance> ask_concept_diff(const std::string& truth, const std::string& answered);

  /// KB update from generics answering ?conceptDiff(p, p~).
  void integrate_generics(const std::vector<logic::Prop>& statements, const std::string& p, const std::string& p_tilde,
                          int episode);

  /// Drops scalar-only entries with counterexamples. Returns them.
  std::vector<memory::KBEntry> cancel_scalar_implicatures(int episode);

 private:
  void kb_add(const logic::Prop& prop, memory::Source source, int episode);

  LearnerConfig config_;
  perception::ExemplarBase xb_;
  memory::KnowledgeBase kb_;
  memory::EpisodicMemory episodic_;
  memory::Lexicon lexicon_;
  std::set<ClassPair> asked_;
  std::vector<KBChange> kb_log_;
};

}  // namespace groundsim::agents
