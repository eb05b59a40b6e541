#include "groundsim/memory.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>

namespace groundsim::memory {

namespace L = groundsim::logic;
using nlohmann::json;

std::string to_string(Source s) {
  switch (s) {
    case Source::Explicit:
      return "explicit";
    case Source::NegImplicature:
      return "neg-implicature";
    case Source::ScalarImplicature:
      return "scalar-implicature";
  }
  return "?";
}

Source source_from_string(const std::string& s) {
  if (s == "explicit") return Source::Explicit;
  if (s == "neg-implicature") return Source::NegImplicature;
  if (s == "scalar-implicature") return Source::ScalarImplicature;
  throw MemoryError("unknown source " + s);
}

// ---------------------------------------------------------------------------
// KB

bool KnowledgeBase::add(const L::Prop& prop, Source source, int episode) {
  if (!prop.generic) throw MemoryError("only generic props enter the KB: " + L::to_string(prop));
  for (auto& e : entries_) {
    if (!L::equivalent(e.prop, prop)) continue;
    e.provenance.insert(source);
    if (std::find(e.origin_episodes.begin(), e.origin_episodes.end(), episode) == e.origin_episodes.end())
      e.origin_episodes.push_back(episode);
    return false;
  }
  entries_.push_back(KBEntry{prop, {source}, {episode}});
  return true;
}

bool KnowledgeBase::remove(const L::Prop& prop) {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const KBEntry& e) { return L::equivalent(e.prop, prop); });
  if (it == entries_.end()) return false;
  entries_.erase(it);
  return true;
}

const KBEntry* KnowledgeBase::find(const L::Prop& prop) const {
  for (const auto& e : entries_)
    if (L::equivalent(e.prop, prop)) return &e;
  return nullptr;
}

std::vector<L::Prop> KnowledgeBase::props() const {
  std::vector<L::Prop> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.prop);
  return out;
}

json KnowledgeBase::to_json() const {
  json arr = json::array();
  for (const auto& e : entries_) {
    json prov = json::array();
    for (auto s : e.provenance) prov.push_back(to_string(s));
    arr.push_back({{"prop", L::to_string(e.prop)}, {"provenance", prov}, {"episodes", e.origin_episodes}});
  }
  return arr;
}

KnowledgeBase kb_add(KnowledgeBase kb, const L::Prop& prop, Source source, int episode) {
  kb.add(prop, source, episode);
  return kb;
}

// ---------------------------------------------------------------------------
// Episodic memory

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Correct:
      return "correct";
    case Outcome::Incorrect:
      return "incorrect";
    case Outcome::NotSure:
      return "not-sure";
  }
  return "?";
}

Outcome outcome_from_string(const std::string& s) {
  if (s == "correct") return Outcome::Correct;
  if (s == "incorrect") return Outcome::Incorrect;
  if (s == "not-sure") return Outcome::NotSure;
  throw MemoryError("unknown outcome " + s);
}

json EpisodicRecord::to_json() const {
  return {{"id", id},
          {"object", object},
          {"confirmed_class", confirmed_class},
          {"answer", answer},
          {"outcome", to_string(outcome)},
          {"transcript", transcript},
          {"snapshot", snapshot.to_json()}};
}

EpisodicRecord EpisodicRecord::from_json(const json& j) {
  EpisodicRecord r;
  r.id = j.at("id");
  r.object = j.at("object");
  r.confirmed_class = j.at("confirmed_class");
  r.answer = j.at("answer");
  r.outcome = outcome_from_string(j.at("outcome"));
  j.at("transcript").get_to(r.transcript);
  r.snapshot = perception::SceneGraph::from_json(j.at("snapshot"));
  return r;
}

void EpisodicMemory::append(EpisodicRecord r) {
  if (!records_.empty() && r.id <= records_.back().id) throw MemoryError("episode ids must increase");
  records_.push_back(std::move(r));
}

void EpisodicMemory::write_jsonl(std::ostream& out) const {
  for (const auto& r : records_) out << r.to_json().dump() << '\n';
}

EpisodicMemory EpisodicMemory::read_jsonl(std::istream& in) {
  EpisodicMemory m;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) m.append(EpisodicRecord::from_json(json::parse(line)));
  return m;
}

namespace {

double node_score(const perception::SceneGraph& sg, const std::string& entity, const std::string& pred) {
  const auto* n = sg.node(entity);
  if (!n) return 0.0;
  if (auto it = n->classes.find(pred); it != n->classes.end()) return it->second;
  if (auto it = n->attributes.find(pred); it != n->attributes.end()) return it->second;
  return 0.5;
}

}  // namespace

std::vector<double> consequent_scores(const perception::SceneGraph& sg, const std::string& object, const L::Prop& prop) {
  std::map<L::SkolemFn, std::optional<std::string>> resolved;
  auto resolve = [&](const L::Term& t) -> std::optional<std::string> {
    if (const auto* c = std::get_if<L::Constant>(&t)) return c->id;
    if (std::holds_alternative<L::Variable>(t)) return object;
    const auto& app = std::get<L::SkolemApp>(t);
    auto it = resolved.find(app.fn);
    if (it != resolved.end()) return it->second;
    std::optional<std::string> best;
    double bv = -1;
    for (const auto& p : sg.part_candidates(object)) {
      double s = node_score(sg, p, app.fn.part);
      if (s > bv) {
        bv = s;
        best = p;
      }
    }
    resolved[app.fn] = best;
    return best;
  };
  std::vector<double> out;
  for (const auto& l : prop.cons.literals) {
    const auto& a = l.atom;
    double s = 0.0;
    if (a.args.size() == 1) {
      if (auto e = resolve(a.args[0])) s = node_score(sg, *e, a.pred.name);
    } else if (a.args.size() == 2) {
      auto x = resolve(a.args[0]), y = resolve(a.args[1]);
      if (x && y) s = sg.relation(*x, *y, a.pred.name);
    }
    out.push_back(l.positive ? s : 1.0 - s);
  }
  return out;
}

std::vector<int> find_counterexamples(const EpisodicMemory& episodic, const L::Prop& prop, double theta_ce) {
  if (!prop.generic || prop.ante.literals.size() != 1 || !prop.ante.literals[0].positive ||
      prop.ante.literals[0].atom.pred.kind != L::PredKind::ObjectClass)
    throw MemoryError("counterexample search needs a generic prop with a class antecedent");
  const std::string& cls = prop.ante.literals[0].atom.pred.name;
  std::vector<int> out;
  for (const auto& r : episodic.records()) {
    if (r.confirmed_class != cls) continue;
    auto scores = consequent_scores(r.snapshot, r.object, prop);
    bool contradicted;
    if (!prop.negated())
      contradicted = std::any_of(scores.begin(), scores.end(), [&](double s) { return s <= 1.0 - theta_ce; });
    else
      contradicted = std::all_of(scores.begin(), scores.end(), [&](double s) { return s >= theta_ce; });
    if (contradicted) out.push_back(r.id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lexicon

namespace {

const std::map<std::string, std::string>& irregular_plurals() {
  static const std::map<std::string, std::string> table{
      {"knife", "knives"}, {"shelf", "shelves"}, {"leaf", "leaves"}, {"foot", "feet"}, {"vase", "vases"}};
  return table;
}

bool ends_with(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

}  // namespace

void Lexicon::add(const std::string& surface, PartOfSpeech pos, const L::PredicateSym& pred) {
  if (const auto* e = by_surface(surface, pos)) {
    if (e->pred == pred) return;
    throw MemoryError("surface form '" + surface + "' already names " + e->pred.name);
  }
  entries_.push_back(LexiconEntry{surface, pos, pred});
}

const LexiconEntry* Lexicon::by_surface(const std::string& surface, PartOfSpeech pos) const {
  for (const auto& e : entries_)
    if (e.surface == surface && e.pos == pos) return &e;
  return nullptr;
}

const LexiconEntry* Lexicon::by_predicate(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.pred.name == name) return &e;
  return nullptr;
}

L::Signature Lexicon::signature() const {
  L::Signature s;
  for (const auto& e : entries_) s[e.pred.name] = e.pred;
  auto h = L::have_pred();
  s[h.name] = h;
  return s;
}

std::string Lexicon::plural(const std::string& noun) {
  auto sp = noun.rfind(' ');
  std::string head = sp == std::string::npos ? "" : noun.substr(0, sp + 1);
  std::string last = sp == std::string::npos ? noun : noun.substr(sp + 1);
  if (auto it = irregular_plurals().find(last); it != irregular_plurals().end()) return head + it->second;
  for (const char* suf : {"s", "sh", "ch", "x", "z"})
    if (ends_with(last, suf)) return head + last + "es";
  return head + last + "s";
}

std::string Lexicon::singular(const std::string& plural_noun) {
  auto sp = plural_noun.rfind(' ');
  std::string head = sp == std::string::npos ? "" : plural_noun.substr(0, sp + 1);
  std::string last = sp == std::string::npos ? plural_noun : plural_noun.substr(sp + 1);
  for (const auto& [sg, pl] : irregular_plurals())
    if (pl == last) return head + sg;
  for (const char* suf : {"ses", "shes", "ches", "xes", "zes"})
    if (ends_with(last, suf)) return head + last.substr(0, last.size() - 2);
  if (ends_with(last, "s") && last.size() > 1) return head + last.substr(0, last.size() - 1);
  return plural_noun;
}

std::string Lexicon::predicate_name(const std::string& surface) {
  std::string out;
  bool up = false;
  for (char c : surface) {
    if (c == ' ' || c == '-') {
      up = true;
      continue;
    }
    out += up ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c;
    up = false;
  }
  return out;
}

Lexicon Lexicon::prior_vocabulary(const perception::DomainSpec& d) {
  Lexicon lex;
  for (const auto& p : d.parts) lex.add(d.surface.at(p), PartOfSpeech::Noun, L::class_pred(p));
  for (const auto& a : d.attributes) lex.add(d.surface.at(a), PartOfSpeech::Adjective, L::attr_pred(a));
  return lex;
}

Lexicon Lexicon::from_domain(const perception::DomainSpec& d) {
  Lexicon lex = prior_vocabulary(d);
  for (const auto& c : d.classes) lex.add(d.surface.at(c), PartOfSpeech::Noun, L::class_pred(c));
  return lex;
}

}  // namespace groundsim::memory
