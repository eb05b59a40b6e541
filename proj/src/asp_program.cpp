#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>
#include <system_error>

#include "groundsim/asp.hpp"

namespace groundsim::asp {

double logit(double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw ProgramError("logit argument outside [0,1]: " + std::to_string(s));
  s = std::clamp(s, kLogitEps, 1.0 - kLogitEps);
  return std::log(s / (1.0 - s));
}

double sigmoid(double w) {
  if (w >= 0) return 1.0 / (1.0 + std::exp(-w));
  double e = std::exp(w);
  return e / (1.0 + e);
}

bool Term::is_variable() const {
  return !is_function() && !name.empty() && std::isupper(static_cast<unsigned char>(name[0]));
}

bool Term::is_ground() const {
  if (is_function()) return !(!arg->empty() && std::isupper(static_cast<unsigned char>((*arg)[0])));
  return !is_variable();
}

bool Atom::is_ground() const {
  return std::all_of(args.begin(), args.end(), [](const Term& t) { return t.is_ground(); });
}

std::string Atom::str() const {
  if (args.empty()) return pred;
  std::string out = pred + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ",";
    out += args[i].name;
    if (args[i].arg) out += "(" + *args[i].arg + ")";
  }
  return out + ")";
}

Atom make_atom(std::string pred, std::vector<std::string> args) {
  Atom a{std::move(pred), {}};
  for (auto& s : args) a.args.push_back(Term{std::move(s), std::nullopt});
  return a;
}

WeightedRule soft_fact(double weight, Atom head) { return WeightedRule{weight, std::move(head), {}, {}}; }

WeightedRule hard_rule(Atom head, std::vector<Atom> pos) {
  return WeightedRule{std::nullopt, std::move(head), std::move(pos), {}};
}

WeightedRule constraint(std::optional<double> weight, std::vector<Atom> pos, std::vector<Atom> neg) {
  return WeightedRule{weight, std::nullopt, std::move(pos), std::move(neg)};
}

std::vector<std::string> WeightedProgram::atom_universe() const {
  std::set<std::string> atoms;
  for (const auto& r : rules) {
    if (r.head) atoms.insert(r.head->str());
    for (const auto& a : r.pos) atoms.insert(a.str());
    for (const auto& a : r.neg) atoms.insert(a.str());
  }
  return {atoms.begin(), atoms.end()};
}

bool WeightedProgram::is_ground() const {
  auto ground_all = [](const std::vector<Atom>& v) {
    return std::all_of(v.begin(), v.end(), [](const Atom& a) { return a.is_ground(); });
  };
  return std::all_of(rules.begin(), rules.end(), [&](const WeightedRule& r) {
    return (!r.head || r.head->is_ground()) && ground_all(r.pos) && ground_all(r.neg);
  });
}

void WeightedProgram::append(const WeightedProgram& other) {
  rules.insert(rules.end(), other.rules.begin(), other.rules.end());
}

// ---------------------------------------------------------------------------
// Text format

namespace {

std::string format_weight(double w) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), w);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string to_text(const WeightedRule& r) {
  std::string out = r.hard() ? "#hard" : format_weight(*r.weight);
  out += "|";
  if (r.head) out += " " + r.head->str();
  if (!r.pos.empty() || !r.neg.empty() || !r.head) {
    out += " :-";
    bool first = true;
    for (const auto& a : r.pos) {
      out += first ? " " : ", ";
      out += a.str();
      first = false;
    }
    for (const auto& a : r.neg) {
      out += first ? " not " : ", not ";
      out += a.str();
      first = false;
    }
  }
  return out + ".";
}

std::string to_text(const WeightedProgram& p) {
  std::string out;
  for (const auto& r : p.rules) out += to_text(r) + "\n";
  return out;
}

namespace {

class RuleParser {
 public:
  RuleParser(std::string_view line, int lineno) : s_(line), lineno_(lineno) {}

  WeightedRule rule() {
    WeightedRule r;
    skip();
    auto bar = s_.find('|');
    if (bar == std::string_view::npos) fail("missing '|' after weight");
    auto wtext = trim(s_.substr(0, bar));
    if (wtext == "#hard") {
      r.weight.reset();
    } else {
      double w = 0;
      auto res = std::from_chars(wtext.data(), wtext.data() + wtext.size(), w);
      if (res.ec != std::errc() || res.ptr != wtext.data() + wtext.size())
        fail("bad weight '" + std::string(wtext) + "'");
      r.weight = w;
    }
    pos_ = bar + 1;
    skip();
    if (!starts(":-")) r.head = atom();
    skip();
    if (starts(":-")) {
      pos_ += 2;
      do {
        skip();
        bool negative = false;
        if (starts("not ")) {
          negative = true;
          pos_ += 4;
          skip();
        }
        (negative ? r.neg : r.pos).push_back(atom());
        skip();
      } while (accept(','));
      if (!r.head && r.pos.empty() && r.neg.empty()) fail("empty constraint body");
    } else if (!r.head) {
      fail("rule needs a head or a body");
    }
    skip();
    if (!accept('.')) fail("missing final '.'");
    skip();
    if (pos_ != s_.size()) fail("trailing characters");
    return r;
  }

 private:
  Atom atom() {
    Atom a;
    a.pred = ident();
    if (accept('(')) {
      do {
        skip();
        Term t{ident(), std::nullopt};
        if (accept('(')) {
          t.arg = ident();
          if (!accept(')')) fail("missing ')' in function term");
        }
        a.args.push_back(std::move(t));
        skip();
      } while (accept(','));
      if (!accept(')')) fail("missing ')'");
    }
    return a;
  }

  std::string ident() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    if (start == pos_) fail("expected identifier");
    return std::string(s_.substr(start, pos_ - start));
  }

  static std::string_view trim(std::string_view v) {
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
    return v;
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool starts(std::string_view t) const { return s_.substr(pos_, t.size()) == t; }
  bool accept(char c) {
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("line " + std::to_string(lineno_) + ": " + what);
  }

  std::string_view s_;
  int lineno_;
  std::size_t pos_ = 0;
};

}  // namespace

WeightedProgram parse_program(std::string_view text) {
  WeightedProgram p;
  int lineno = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || line[first] == '%') continue;
    if (line.back() == '\r') line.remove_suffix(1);
    p.rules.push_back(RuleParser(line, lineno).rule());
  }
  return p;
}

// ---------------------------------------------------------------------------
// Grounding

namespace {

void rule_vars(const WeightedRule& r, std::vector<std::string>& vars, std::vector<Term>& fns) {
  auto visit = [&](const Atom& a) {
    for (const auto& t : a.args) {
      if (t.is_variable()) {
        if (std::find(vars.begin(), vars.end(), t.name) == vars.end()) vars.push_back(t.name);
      } else if (t.is_function()) {
        if (std::find(fns.begin(), fns.end(), t) == fns.end()) fns.push_back(t);
        const auto& arg = *t.arg;
        if (!arg.empty() && std::isupper(static_cast<unsigned char>(arg[0])) &&
            std::find(vars.begin(), vars.end(), arg) == vars.end())
          vars.push_back(arg);
      }
    }
  };
  if (r.head) visit(*r.head);
  for (const auto& a : r.pos) visit(a);
  for (const auto& a : r.neg) visit(a);
}

bool occurs_positively(const WeightedRule& r, const std::string& var) {
  for (const auto& a : r.pos)
    for (const auto& t : a.args)
      if ((t.is_variable() && t.name == var) || (t.is_function() && *t.arg == var)) return true;
  return false;
}

Atom instantiate(const Atom& a, const std::map<std::string, std::string>& vars,
                 const std::map<Term, std::string>& fns) {
  Atom out{a.pred, {}};
  for (const auto& t : a.args) {
    if (t.is_variable()) {
      out.args.push_back(Term{vars.at(t.name), std::nullopt});
    } else if (t.is_function()) {
      out.args.push_back(Term{fns.at(t), std::nullopt});
    } else {
      out.args.push_back(t);
    }
  }
  return out;
}

}  // namespace

WeightedProgram ground(const WeightedProgram& lifted, const std::vector<std::string>& entities,
                       const PartCandidates& part_candidates) {
  WeightedProgram out;
  for (const auto& r : lifted.rules) {
    std::vector<std::string> vars;
    std::vector<Term> fns;
    rule_vars(r, vars, fns);
    for (const auto& v : vars)
      if (!occurs_positively(r, v))
        throw ProgramError("variable " + v + " is not range-restricted in rule: " + to_text(r));

    std::map<std::string, std::string> binding;
    // Odometer over variable assignments, then over function-term choices.
    std::vector<std::size_t> vi(vars.size(), 0);
    if (!vars.empty() && entities.empty()) continue;
    while (true) {
      for (std::size_t i = 0; i < vars.size(); ++i) binding[vars[i]] = entities[vi[i]];

      std::vector<const std::vector<std::string>*> choices;
      bool empty_choice = false;
      static const std::vector<std::string> kNone;
      for (const auto& f : fns) {
        std::string arg = *f.arg;
        if (auto it = binding.find(arg); it != binding.end()) arg = it->second;
        auto pc = part_candidates.find(arg);
        const auto* list = pc == part_candidates.end() ? &kNone : &pc->second;
        if (list->empty()) empty_choice = true;
        choices.push_back(list);
      }
      if (!empty_choice) {
        std::vector<std::size_t> fi(fns.size(), 0);
        while (true) {
          std::map<Term, std::string> fb;
          for (std::size_t i = 0; i < fns.size(); ++i) fb[fns[i]] = (*choices[i])[fi[i]];
          WeightedRule g{r.weight, std::nullopt, {}, {}};
          if (r.head) g.head = instantiate(*r.head, binding, fb);
          for (const auto& a : r.pos) g.pos.push_back(instantiate(a, binding, fb));
          for (const auto& a : r.neg) g.neg.push_back(instantiate(a, binding, fb));
          out.rules.push_back(std::move(g));
          std::size_t k = 0;
          while (k < fns.size() && ++fi[k] == choices[k]->size()) fi[k++] = 0;
          if (k == fns.size()) break;
        }
      }
      std::size_t k = 0;
      while (k < vars.size() && ++vi[k] == entities.size()) vi[k++] = 0;
      if (k == vars.size()) break;
    }
  }
  return out;
}

WeightedProgram prune_to_relevant(const WeightedProgram& ground, const std::vector<std::string>& query) {
  // Union-find over atoms; every rule ties its atoms together.
  std::map<std::string, std::size_t> index;
  std::vector<std::size_t> parent;
  auto id = [&](const std::string& s) {
    auto [it, inserted] = index.try_emplace(s, parent.size());
    if (inserted) parent.push_back(parent.size());
    return it->second;
  };
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<std::vector<std::size_t>> rule_atoms;
  for (const auto& r : ground.rules) {
    std::vector<std::size_t> ids;
    if (r.head) ids.push_back(id(r.head->str()));
    for (const auto& a : r.pos) ids.push_back(id(a.str()));
    for (const auto& a : r.neg) ids.push_back(id(a.str()));
    for (std::size_t i = 1; i < ids.size(); ++i) parent[find(ids[i])] = find(ids[0]);
    rule_atoms.push_back(std::move(ids));
  }
  std::set<std::size_t> roots;
  for (const auto& q : query)
    if (auto it = index.find(q); it != index.end()) roots.insert(find(it->second));
  WeightedProgram out;
  for (std::size_t i = 0; i < ground.rules.size(); ++i)
    if (!rule_atoms[i].empty() && roots.count(find(rule_atoms[i][0]))) out.rules.push_back(ground.rules[i]);
  return out;
}

double MarginalTable::probability(const std::string& atom) const {
  auto it = marginals.find(atom);
  return it == marginals.end() ? 0.0 : it->second;
}

}  // namespace groundsim::asp
