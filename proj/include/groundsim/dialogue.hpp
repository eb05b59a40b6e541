#pragma once

// Closed template grammar between constrained English and PROP/QUES forms.
//
//   This is a(n) X.            This is not a(n) X.        This has a(n) ADJ PART.
//   Xs have ADJ PARTs.         Xs have ADJ and ADJ PARTs. Xs have ADJ, ADJ and ADJ PARTs.
//   What is this?              Is this a(n) X?            How are Xs and Ys different?
//   Correct.                   I am not sure.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "groundsim/logic.hpp"
#include "groundsim/memory.hpp"

namespace groundsim::dialogue {

class ParseFailure : public std::runtime_error {
 public:
  ParseFailure(const std::string& what, std::string span) : std::runtime_error(what), span_(std::move(span)) {}
  const std::string& span() const { return span_; }

 private:
  std::string span_;
};

class RealizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Feedback { Correct, NotSure };

using LogicalForm = std::variant<logic::Prop, logic::Ques, Feedback>;

enum class Speaker { Teacher, Learner };

std::string to_string(Speaker s);

struct Utterance {
  Speaker speaker = Speaker::Teacher;
  std::string surface;
  LogicalForm form;
  std::optional<std::string> demonstratum;
};

/// Unknown content words are added to the lexicon before the form is built.
LogicalForm parse(std::string_view surface, memory::Lexicon& lexicon,
                  const std::optional<std::string>& demonstratum = std::nullopt);

std::string realize(const LogicalForm& form, const memory::Lexicon& lexicon);

/// Canonical text of a logical form: props and questions in the logic
/// syntax, feedback as "Correct" / "NotSure".
std::string canonical(const LogicalForm& form);

/// speaker, surface and canonical form separated by the unit separator 0x1F.
std::string transcript_line(const Utterance& u);

inline constexpr char kFieldSeparator = '\x1f';

/// Realizes a form and packages it as an utterance.
Utterance make_utterance(Speaker s, const LogicalForm& form, const memory::Lexicon& lexicon,
                         std::optional<std::string> demonstratum = std::nullopt);

struct DialogueState {
  std::vector<Utterance> history;
  std::optional<logic::Ques> pending;
  std::optional<std::pair<std::string, std::string>> salient_pair;

  /// Questions become pending; any non-question answers and clears them.
  void record(const Utterance& u);
};

}  // namespace groundsim::dialogue
