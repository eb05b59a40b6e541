#pragma once

// Long-term stores: symbolic KB with provenance, episodic memory, lexicon.

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "groundsim/logic.hpp"
#include "groundsim/perception.hpp"
#include "json.hpp"

namespace groundsim::memory {

class MemoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Source { Explicit, NegImplicature, ScalarImplicature };

std::string to_string(Source s);
Source source_from_string(const std::string& s);

struct KBEntry {
  logic::Prop prop;
  std::set<Source> provenance;
  std::vector<int> origin_episodes;

  bool scalar_only() const { return provenance == std::set<Source>{Source::ScalarImplicature}; }
  bool operator==(const KBEntry&) const = default;
};

class KnowledgeBase {
 public:
  /// Inserts a generic prop or merges provenance into an equivalent entry.
  /// Returns true when a new entry was created.
  bool add(const logic::Prop& prop, Source source, int episode);
  bool remove(const logic::Prop& prop);

  const KBEntry* find(const logic::Prop& prop) const;
  const std::vector<KBEntry>& entries() const { return entries_; }
  std::vector<logic::Prop> props() const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  nlohmann::json to_json() const;
  bool operator==(const KnowledgeBase&) const = default;

 private:
  std::vector<KBEntry> entries_;
};

/// Free-function form: returns the updated KB.
KnowledgeBase kb_add(KnowledgeBase kb, const logic::Prop& prop, Source source, int episode);

enum class Outcome { Correct, Incorrect, NotSure };

std::string to_string(Outcome o);
Outcome outcome_from_string(const std::string& s);

struct EpisodicRecord {
  int id = 0;
  std::string object;
  std::string confirmed_class;
  perception::SceneGraph snapshot;  // at answer time, before any update
  std::vector<std::string> transcript;
  std::string answer;  // predicate name, or empty for "not sure"
  Outcome outcome = Outcome::Correct;

  nlohmann::json to_json() const;
  static EpisodicRecord from_json(const nlohmann::json& j);
  bool operator==(const EpisodicRecord&) const = default;
};

class EpisodicMemory {
 public:
  /// Append-only; ids must strictly increase.
  void append(EpisodicRecord r);
  const std::vector<EpisodicRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  void write_jsonl(std::ostream& out) const;
  static EpisodicMemory read_jsonl(std::istream& in);
  bool operator==(const EpisodicMemory&) const = default;

 private:
  std::vector<EpisodicRecord> records_;
};

/// Per-conjunct scores of a consequent for one object. Skolem terms resolve
/// to the part candidate with the highest score for the part kind.
std::vector<double> consequent_scores(const perception::SceneGraph& sg, const std::string& object,
                                      const logic::Prop& prop);

/// Episodes whose confirmed class is the prop's antecedent class and whose
/// snapshot contradicts the consequent at confidence theta_ce.
std::vector<int> find_counterexamples(const EpisodicMemory& episodic, const logic::Prop& prop,
                                      double theta_ce = 0.8);

enum class PartOfSpeech { Noun, Adjective };

struct LexiconEntry {
  std::string surface;  // singular
  PartOfSpeech pos = PartOfSpeech::Noun;
  logic::PredicateSym pred;
  bool operator==(const LexiconEntry&) const = default;
};

class Lexicon {
 public:
  /// Adds an entry; re-adding an identical entry is a no-op. Throws when
  /// the surface form already maps to another predicate.
  void add(const std::string& surface, PartOfSpeech pos, const logic::PredicateSym& pred);
  const LexiconEntry* by_surface(const std::string& surface, PartOfSpeech pos) const;
  const LexiconEntry* by_predicate(const std::string& name) const;
  std::size_t size() const { return entries_.size(); }
  const std::vector<LexiconEntry>& entries() const { return entries_; }
  logic::Signature signature() const;

  /// Irregular forms first, then the -s / -es rules on the last word.
  static std::string plural(const std::string& noun);
  static std::string singular(const std::string& plural_noun);
  /// "brandy glass" -> "brandyGlass".
  static std::string predicate_name(const std::string& surface);

  /// Every class, part and attribute of a domain.
  static Lexicon from_domain(const perception::DomainSpec& d);
  /// Parts and attributes only: the vocabulary prior knowledge covers.
  static Lexicon prior_vocabulary(const perception::DomainSpec& d);

  bool operator==(const Lexicon&) const = default;

 private:
  std::vector<LexiconEntry> entries_;
};

}  // namespace groundsim::memory
