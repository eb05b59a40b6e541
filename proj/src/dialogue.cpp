#include "groundsim/dialogue.hpp"

#include <algorithm>
#include <cctype>

namespace groundsim::dialogue {

namespace L = groundsim::logic;
using memory::Lexicon;
using memory::PartOfSpeech;

std::string to_string(Speaker s) { return s == Speaker::Teacher ? "teacher" : "learner"; }

namespace {

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }
bool ends_with(std::string_view s, std::string_view p) {
  return s.size() >= p.size() && s.substr(s.size() - p.size()) == p;
}

std::string lower_first(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
  return s;
}

std::string upper_first(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string article(const std::string& noun) {
  return !noun.empty() && std::string_view("aeiou").find(noun[0]) != std::string_view::npos ? "an" : "a";
}

std::string normalize(std::string_view in) {
  std::string out;
  bool space = false;
  for (char c : in) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

void check_words(const std::string& phrase, const std::string& sentence) {
  if (phrase.empty()) throw ParseFailure("empty slot in '" + sentence + "'", phrase);
  for (char c : phrase)
    if (!(std::islower(static_cast<unsigned char>(c)) || c == ' ' || c == '-'))
      throw ParseFailure("unexpected characters in '" + phrase + "'", phrase);
}

L::PredicateSym noun(Lexicon& lex, const std::string& surface, const std::string& sentence) {
  check_words(surface, sentence);
  if (const auto* e = lex.by_surface(surface, PartOfSpeech::Noun)) return e->pred;
  auto pred = L::class_pred(Lexicon::predicate_name(surface));
  lex.add(surface, PartOfSpeech::Noun, pred);
  return pred;
}

L::PredicateSym adjective(Lexicon& lex, const std::string& surface, const std::string& sentence) {
  check_words(surface, sentence);
  if (surface.find(' ') != std::string::npos) throw ParseFailure("adjectives are single words", surface);
  if (const auto* e = lex.by_surface(surface, PartOfSpeech::Adjective)) return e->pred;
  auto pred = L::attr_pred(Lexicon::predicate_name(surface));
  lex.add(surface, PartOfSpeech::Adjective, pred);
  return pred;
}

const std::string& need_this(const std::optional<std::string>& d, const std::string& sentence) {
  if (!d) throw ParseFailure("'this' needs a demonstratum", sentence);
  return *d;
}

// Strips "a " / "an " from the front of a noun phrase.
std::optional<std::string> drop_article(const std::string& s) {
  if (starts_with(s, "an ")) return s.substr(3);
  if (starts_with(s, "a ")) return s.substr(2);
  return std::nullopt;
}

L::Prop class_fact(const L::PredicateSym& p, const std::string& entity, bool positive) {
  return L::Prop::fact(L::conj({L::Atom{p, {L::constant(entity)}}}),
                       positive ? L::ConsPolarity::Positive : L::ConsPolarity::Negated);
}

std::vector<std::string> split_adjectives(const std::string& s) {
  std::vector<std::string> out;
  std::string rest = s;
  auto and_pos = rest.rfind(" and ");
  std::string last;
  if (and_pos != std::string::npos) {
    last = rest.substr(and_pos + 5);
    rest = rest.substr(0, and_pos);
  }
  std::size_t start = 0;
  while (true) {
    auto comma = rest.find(", ", start);
    out.push_back(rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 2;
  }
  if (and_pos != std::string::npos) out.push_back(last);
  return out;
}

std::string join_adjectives(const std::vector<std::string>& a) {
  std::string s;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i > 0) s += (i + 1 == a.size()) ? " and " : ", ";
    s += a[i];
  }
  return s;
}

const memory::LexiconEntry& lexical(const Lexicon& lex, const std::string& pred) {
  const auto* e = lex.by_predicate(pred);
  if (!e) throw RealizeError("no lexicon entry for " + pred);
  return *e;
}

std::optional<std::string> constant_of(const L::Term& t) {
  if (const auto* c = std::get_if<L::Constant>(&t)) return c->id;
  return std::nullopt;
}

// Unary class atom on a constant, the only shape instance templates take.
std::optional<std::pair<L::PredicateSym, std::string>> class_atom(const L::Conjunction& c) {
  if (c.literals.size() != 1 || !c.literals[0].positive) return std::nullopt;
  const auto& a = c.literals[0].atom;
  if (a.pred.kind != L::PredKind::ObjectClass || a.args.size() != 1) return std::nullopt;
  auto id = constant_of(a.args[0]);
  if (!id) return std::nullopt;
  return std::make_pair(a.pred, *id);
}

std::string realize_prop(const L::Prop& p, const Lexicon& lex) {
  if (!p.generic) {
    if (p.ante.empty()) {
      if (auto ca = class_atom(p.cons)) {
        const auto& s = lexical(lex, ca->first.name).surface;
        return std::string(p.negated() ? "This is not " : "This is ") + article(s) + " " + s + ".";
      }
      // Instance description: have(c, f_part(c)), attr(f), part(f).
      if (!p.negated() && p.cons.literals.size() == 3) {
        const auto& lits = p.cons.literals;
        auto entity = constant_of(lits[0].atom.args[0]);
        if (entity) {
          auto expect = L::skolemize_instance_description(*entity, lits[1].atom.pred, lits[2].atom.pred);
          if (expect == p) {
            const auto& adj = lexical(lex, lits[1].atom.pred.name).surface;
            const auto& part = lexical(lex, lits[2].atom.pred.name).surface;
            return "This has " + article(adj) + " " + adj + " " + part + ".";
          }
        }
      }
    }
    throw RealizeError("no template for " + L::to_string(p));
  }
  if (!p.negated() && p.ante.literals.size() == 1 && p.cons.literals.size() >= 3) {
    const auto& cls = p.ante.literals[0].atom.pred;
    const auto& lits = p.cons.literals;
    std::vector<L::PredicateSym> attrs;
    for (std::size_t i = 1; i + 1 < lits.size(); ++i) attrs.push_back(lits[i].atom.pred);
    const auto& part = lits.back().atom.pred;
    try {
      if (L::skolemize_part_description(cls, attrs, part) == p) {
        std::vector<std::string> adjs;
        for (const auto& a : attrs) adjs.push_back(lexical(lex, a.name).surface);
        return upper_first(Lexicon::plural(lexical(lex, cls.name).surface)) + " have " + join_adjectives(adjs) + " " +
               Lexicon::plural(lexical(lex, part.name).surface) + ".";
      }
    } catch (const L::LogicError&) {
    }
  }
  throw RealizeError("no template for " + L::to_string(p));
}

}  // namespace

LogicalForm parse(std::string_view raw, Lexicon& lex, const std::optional<std::string>& demonstratum) {
  const std::string s = normalize(raw);
  if (s == "Correct.") return Feedback::Correct;
  if (s == "I am not sure.") return Feedback::NotSure;
  if (s == "What is this?") {
    const auto& o = need_this(demonstratum, s);
    L::PredicateSym var{"P", 1, L::PredKind::ObjectClass};
    return L::Ques{L::WhQues{"P", L::Prop::fact(L::conj({L::Atom{var, {L::constant(o)}}}))}};
  }
  if (starts_with(s, "Is this ") && ends_with(s, "?")) {
    auto np = drop_article(s.substr(8, s.size() - 9));
    if (!np) throw ParseFailure("expected an article in '" + s + "'", s.substr(8, s.size() - 9));
    const auto& o = need_this(demonstratum, s);
    return L::Ques{L::PolarQues{class_fact(noun(lex, *np, s), o, true)}};
  }
  if (starts_with(s, "This is not ") && ends_with(s, ".")) {
    auto np = drop_article(s.substr(12, s.size() - 13));
    if (!np) throw ParseFailure("expected an article in '" + s + "'", s.substr(12, s.size() - 13));
    const auto& o = need_this(demonstratum, s);
    return class_fact(noun(lex, *np, s), o, false);
  }
  if (starts_with(s, "This is ") && ends_with(s, ".")) {
    auto np = drop_article(s.substr(8, s.size() - 9));
    if (!np) throw ParseFailure("expected an article in '" + s + "'", s.substr(8, s.size() - 9));
    const auto& o = need_this(demonstratum, s);
    return class_fact(noun(lex, *np, s), o, true);
  }
  if (starts_with(s, "This has ") && ends_with(s, ".")) {
    auto np = drop_article(s.substr(9, s.size() - 10));
    if (!np) throw ParseFailure("expected an article in '" + s + "'", s.substr(9, s.size() - 10));
    auto sp = np->find(' ');
    if (sp == std::string::npos) throw ParseFailure("expected 'ADJ PART' in '" + s + "'", *np);
    const auto& o = need_this(demonstratum, s);
    auto attr = adjective(lex, np->substr(0, sp), s);
    auto part = noun(lex, np->substr(sp + 1), s);
    return L::skolemize_instance_description(o, attr, part);
  }
  if (starts_with(s, "How are ") && ends_with(s, " different?")) {
    std::string mid = s.substr(8, s.size() - 8 - 11);
    auto and_pos = mid.find(" and ");
    if (and_pos == std::string::npos) throw ParseFailure("expected 'Xs and Ys' in '" + s + "'", mid);
    auto a = noun(lex, Lexicon::singular(mid.substr(0, and_pos)), s);
    auto b = noun(lex, Lexicon::singular(mid.substr(and_pos + 5)), s);
    return L::concept_diff_question(a, b);
  }
  if (auto hv = s.find(" have "); hv != std::string::npos && ends_with(s, ".")) {
    std::string subject = lower_first(s.substr(0, hv));
    std::string rest = s.substr(hv + 6, s.size() - hv - 7);
    auto sp = rest.rfind(' ');
    if (sp == std::string::npos) throw ParseFailure("expected 'ADJ PARTs' in '" + s + "'", rest);
    std::string part_pl = rest.substr(sp + 1);
    auto cls = noun(lex, Lexicon::singular(subject), s);
    std::vector<L::PredicateSym> attrs;
    for (const auto& a : split_adjectives(rest.substr(0, sp))) attrs.push_back(adjective(lex, a, s));
    auto part = noun(lex, Lexicon::singular(part_pl), s);
    return L::skolemize_part_description(cls, attrs, part);
  }
  throw ParseFailure("sentence matches no template", s);
}

std::string realize(const LogicalForm& form, const Lexicon& lex) {
  if (const auto* f = std::get_if<Feedback>(&form)) return *f == Feedback::Correct ? "Correct." : "I am not sure.";
  if (const auto* p = std::get_if<L::Prop>(&form)) return realize_prop(*p, lex);
  const auto& q = std::get<L::Ques>(form);
  if (const auto* wh = std::get_if<L::WhQues>(&q)) {
    const auto& lits = wh->body.cons.literals;
    if (lits.size() == 1 && lits[0].atom.pred.name == wh->variable && lits[0].atom.args.size() == 1 &&
        constant_of(lits[0].atom.args[0]))
      return "What is this?";
    throw RealizeError("no template for " + L::to_string(q));
  }
  if (const auto* pq = std::get_if<L::PolarQues>(&q)) {
    auto ca = class_atom(pq->prop.cons);
    if (!ca || pq->prop.generic || pq->prop.negated() || !pq->prop.ante.empty())
      throw RealizeError("no template for " + L::to_string(q));
    const auto& s = lexical(lex, ca->first.name).surface;
    return "Is this " + article(s) + " " + s + "?";
  }
  const auto& d = std::get<L::ConceptDiffQues>(q);
  return "How are " + Lexicon::plural(lexical(lex, d.first.name).surface) + " and " +
         Lexicon::plural(lexical(lex, d.second.name).surface) + " different?";
}

std::string canonical(const LogicalForm& form) {
  if (const auto* f = std::get_if<Feedback>(&form)) return *f == Feedback::Correct ? "Correct" : "NotSure";
  if (const auto* p = std::get_if<L::Prop>(&form)) return L::to_string(*p);
  return L::to_string(std::get<L::Ques>(form));
}

std::string transcript_line(const Utterance& u) {
  return to_string(u.speaker) + kFieldSeparator + u.surface + kFieldSeparator + canonical(u.form);
}

Utterance make_utterance(Speaker s, const LogicalForm& form, const Lexicon& lexicon,
                         std::optional<std::string> demonstratum) {
  return Utterance{s, realize(form, lexicon), form, std::move(demonstratum)};
}

void DialogueState::record(const Utterance& u) {
  history.push_back(u);
  if (const auto* q = std::get_if<L::Ques>(&u.form)) {
    pending = *q;
    if (const auto* d = std::get_if<L::ConceptDiffQues>(q)) salient_pair = std::make_pair(d->first.name, d->second.name);
  } else {
    pending.reset();
  }
}

}  // namespace groundsim::dialogue
