#include "groundsim/logic.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace groundsim::logic {

std::string_view to_string(PredKind kind) {
  switch (kind) {
    case PredKind::ObjectClass: return "object-class";
    case PredKind::Attribute: return "attribute";
    case PredKind::Relation: return "relation";
  }
  return "?";
}

PredicateSym PredicateSym::make(std::string name, int arity, PredKind kind) {
  if (name.empty()) throw LogicError("predicate name must be non-empty");
  if (arity < 1) throw LogicError("predicate '" + name + "' must have arity >= 1");
  if (kind == PredKind::Relation && arity != 2)
    throw LogicError("relation predicate '" + name + "' must be binary");
  return PredicateSym{std::move(name), arity, kind};
}

PredicateSym class_pred(std::string name) {
  return PredicateSym::make(std::move(name), 1, PredKind::ObjectClass);
}
PredicateSym attr_pred(std::string name) {
  return PredicateSym::make(std::move(name), 1, PredKind::Attribute);
}
PredicateSym have_pred() { return PredicateSym::make("have", 2, PredKind::Relation); }

std::string SkolemFn::id() const {
  return owner.empty() ? "f_" + part : "f_" + owner + "_" + part;
}

Term constant(std::string id) { return Constant{std::move(id)}; }
Term variable(std::string name) { return Variable{std::move(name)}; }
Term skolem(SkolemFn fn, SkolemArg arg) { return SkolemApp{std::move(fn), std::move(arg)}; }

bool is_ground(const Term& t) {
  if (std::holds_alternative<Constant>(t)) return true;
  if (std::holds_alternative<Variable>(t)) return false;
  return std::holds_alternative<Constant>(std::get<SkolemApp>(t).arg);
}

Atom::Atom(PredicateSym p, std::vector<Term> a) : pred(std::move(p)), args(std::move(a)) {
  if (static_cast<int>(args.size()) != pred.arity)
    throw LogicError("atom " + pred.name + " expects " + std::to_string(pred.arity) +
                     " argument(s), got " + std::to_string(args.size()));
}

bool Atom::is_ground() const {
  return std::all_of(args.begin(), args.end(), [](const Term& t) { return logic::is_ground(t); });
}

Conjunction conj(std::vector<Atom> atoms) {
  Conjunction c;
  for (auto& a : atoms) c.literals.push_back(Literal{std::move(a), true});
  return c;
}

namespace {

void collect_vars(const Term& t, std::set<std::string>& out) {
  if (const auto* v = std::get_if<Variable>(&t)) {
    out.insert(v->name);
  } else if (const auto* s = std::get_if<SkolemApp>(&t)) {
    if (const auto* av = std::get_if<Variable>(&s->arg)) out.insert(av->name);
  }
}

std::set<std::string> vars_of(const Conjunction& c) {
  std::set<std::string> out;
  for (const auto& l : c.literals)
    for (const auto& t : l.atom.args) collect_vars(t, out);
  return out;
}

bool conj_ground(const Conjunction& c) {
  return std::all_of(c.literals.begin(), c.literals.end(),
                     [](const Literal& l) { return l.atom.is_ground(); });
}

Term subst_term(const Term& t, const Binding& b) {
  if (const auto* v = std::get_if<Variable>(&t)) {
    auto it = b.find(v->name);
    return it == b.end() ? t : it->second;
  }
  if (const auto* s = std::get_if<SkolemApp>(&t)) {
    const auto* av = std::get_if<Variable>(&s->arg);
    if (!av) return t;
    auto it = b.find(av->name);
    if (it == b.end()) return t;
    if (const auto* c = std::get_if<Constant>(&it->second)) return SkolemApp{s->fn, *c};
    if (const auto* nv = std::get_if<Variable>(&it->second)) return SkolemApp{s->fn, *nv};
    throw LogicError("variable " + av->name + " is a skolem argument and must bind to an entity, not " +
                     to_string(it->second));
  }
  return t;
}

Conjunction subst_conj(const Conjunction& c, const Binding& b) {
  Conjunction out;
  out.literals.reserve(c.literals.size());
  for (const auto& l : c.literals) {
    std::vector<Term> args;
    args.reserve(l.atom.args.size());
    for (const auto& t : l.atom.args) args.push_back(subst_term(t, b));
    out.literals.push_back(Literal{Atom{l.atom.pred, std::move(args)}, l.positive});
  }
  return out;
}

void check_binding_keys(const std::set<std::string>& present, const Binding& b) {
  for (const auto& [k, _] : b)
    if (!present.count(k)) throw LogicError("binding key " + k + " does not occur in formula");
}

// Applies fn to every predicate and skolem owner in the conjunction.
template <typename PredMap, typename OwnerMap>
Conjunction map_preds(const Conjunction& c, PredMap pm, OwnerMap om) {
  Conjunction out;
  for (const auto& l : c.literals) {
    std::vector<Term> args;
    for (const auto& t : l.atom.args) {
      if (const auto* s = std::get_if<SkolemApp>(&t)) {
        args.push_back(SkolemApp{SkolemFn{om(s->fn.owner), s->fn.part}, s->arg});
      } else {
        args.push_back(t);
      }
    }
    out.literals.push_back(Literal{Atom{pm(l.atom.pred), std::move(args)}, l.positive});
  }
  return out;
}

Conjunction sorted(Conjunction c) {
  std::sort(c.literals.begin(), c.literals.end());
  c.literals.erase(std::unique(c.literals.begin(), c.literals.end()), c.literals.end());
  return c;
}

std::string canonical_var_name(std::size_t i) {
  static constexpr std::string_view kNames = "OPQRSTUVW";
  if (i < kNames.size()) return std::string(1, kNames[i]);
  return "X" + std::to_string(i);
}

}  // namespace

Prop Prop::rule(std::vector<std::string> vars, Conjunction ante, Conjunction cons,
                ConsPolarity polarity) {
  if (vars.empty()) throw LogicError("generic prop needs at least one quantified variable");
  if (cons.empty()) throw LogicError("generic prop needs a consequent");
  auto av = vars_of(ante);
  auto cv = vars_of(cons);
  bool shared = false;
  for (const auto& v : vars) {
    if (!av.count(v) && !cv.count(v)) throw LogicError("quantified variable " + v + " is unused");
    if (av.count(v) && cv.count(v)) shared = true;
  }
  if (!shared) throw LogicError("generic prop must share a variable between antecedent and consequent");
  return Prop{true, std::move(vars), std::move(ante), std::move(cons), polarity};
}

Prop Prop::fact(Conjunction cons, ConsPolarity polarity) {
  if (cons.empty()) throw LogicError("fact needs a consequent");
  if (!conj_ground(cons)) throw LogicError("non-generic prop must be ground: " + to_string(cons));
  return Prop{false, {}, {}, std::move(cons), polarity};
}

Ques concept_diff_question(PredicateSym a, PredicateSym b) {
  if (a.kind != PredKind::ObjectClass || b.kind != PredKind::ObjectClass)
    throw LogicError("conceptDiff arguments must be object-class predicates");
  return ConceptDiffQues{std::move(a), std::move(b)};
}

Conjunction substitute(const Conjunction& c, const Binding& binding) {
  check_binding_keys(vars_of(c), binding);
  return subst_conj(c, binding);
}

Prop substitute(const Prop& p, const Binding& binding) {
  auto present = vars_of(p.ante);
  present.merge(vars_of(p.cons));
  check_binding_keys(present, binding);
  Prop out = p;
  out.ante = subst_conj(p.ante, binding);
  out.cons = subst_conj(p.cons, binding);
  out.variables.clear();
  for (const auto& v : p.variables) {
    auto it = binding.find(v);
    if (it == binding.end()) {
      out.variables.push_back(v);
    } else if (const auto* nv = std::get_if<Variable>(&it->second)) {
      out.variables.push_back(nv->name);
    }
  }
  if (out.variables.empty()) out.generic = false;
  return out;
}

Prop swap_predicates(const Prop& p, const PredicateSym& a, const PredicateSym& b) {
  if (a.arity != b.arity || a.kind != b.kind)
    throw LogicError("cannot swap " + a.name + " and " + b.name + ": arity or kind differs");
  if (a == b) return p;
  auto pm = [&](const PredicateSym& s) {
    if (s == a) return b;
    if (s == b) return a;
    return s;
  };
  auto om = [&](const std::string& owner) {
    if (owner == a.name) return b.name;
    if (owner == b.name) return a.name;
    return owner;
  };
  Prop out = p;
  out.ante = map_preds(p.ante, pm, om);
  out.cons = map_preds(p.cons, pm, om);
  return out;
}

Prop derive_neg_implicature(const Prop& psi, const PredicateSym& p, const PredicateSym& q) {
  if (!psi.generic) throw LogicError("negative implicature requires a generic prop");
  bool has_p = mentions(psi.ante, p.name);
  bool has_q = mentions(psi.ante, q.name);
  if (has_p == has_q)
    throw LogicError("exactly one of " + p.name + ", " + q.name + " must occur in the antecedent of " +
                     to_string(psi));
  Prop out = swap_predicates(psi, p, q);
  out.polarity = psi.negated() ? ConsPolarity::Positive : ConsPolarity::Negated;
  return out;
}

Prop canonicalize(const Prop& p) {
  if (!p.generic) return p;
  Binding b;
  for (std::size_t i = 0; i < p.variables.size(); ++i) b[p.variables[i]] = Variable{canonical_var_name(i)};
  Prop out = p;
  out.ante = subst_conj(p.ante, b);
  out.cons = subst_conj(p.cons, b);
  for (std::size_t i = 0; i < p.variables.size(); ++i) out.variables[i] = canonical_var_name(i);
  return out;
}

bool equivalent(const Prop& a, const Prop& b) {
  auto ca = canonicalize(a);
  auto cb = canonicalize(b);
  return ca.generic == cb.generic && ca.polarity == cb.polarity && ca.variables == cb.variables &&
         sorted(ca.ante) == sorted(cb.ante) && sorted(ca.cons) == sorted(cb.cons);
}

Conjunction normalized_consequent(const Prop& p) {
  auto c = canonicalize(p);
  auto erase = [](const std::string&) { return std::string(); };
  auto id = [](const PredicateSym& s) { return s; };
  return sorted(map_preds(c.cons, id, erase));
}

Conjunction normalized_antecedent(const Prop& p) {
  auto c = canonicalize(p);
  auto erase = [](const std::string&) { return std::string(); };
  auto id = [](const PredicateSym& s) { return s; };
  return sorted(map_preds(c.ante, id, erase));
}

bool contradicts(const Prop& a, const Prop& b) {
  if (!a.generic || !b.generic) return false;
  if (a.polarity == b.polarity) return false;
  if (a.variables.size() != b.variables.size()) return false;
  return normalized_antecedent(a) == normalized_antecedent(b) &&
         normalized_consequent(a) == normalized_consequent(b);
}

Prop skolemize_part_description(const PredicateSym& cls, const PredicateSym& attr,
                                const PredicateSym& part) {
  return skolemize_part_description(cls, std::vector<PredicateSym>{attr}, part);
}

Prop skolemize_part_description(const PredicateSym& cls, const std::vector<PredicateSym>& attrs,
                                const PredicateSym& part) {
  if (cls.kind != PredKind::ObjectClass || cls.arity != 1)
    throw LogicError(cls.name + " is not a unary object-class predicate");
  if (part.kind != PredKind::ObjectClass || part.arity != 1)
    throw LogicError(part.name + " is not a unary object-class (part) predicate");
  if (attrs.empty()) throw LogicError("part description needs at least one attribute");
  const Term o = Variable{"O"};
  const Term fo = SkolemApp{SkolemFn{cls.name, part.name}, Variable{"O"}};
  std::vector<Atom> cons{Atom{have_pred(), {o, fo}}};
  for (const auto& a : attrs) {
    if (a.kind != PredKind::Attribute || a.arity != 1)
      throw LogicError(a.name + " is not a unary attribute predicate");
    cons.emplace_back(a, std::vector<Term>{fo});
  }
  cons.emplace_back(part, std::vector<Term>{fo});
  return Prop::rule({"O"}, conj({Atom{cls, {o}}}), conj(std::move(cons)));
}

Prop skolemize_instance_description(const std::string& entity, const PredicateSym& attr,
                                    const PredicateSym& part) {
  if (attr.kind != PredKind::Attribute) throw LogicError(attr.name + " is not an attribute");
  if (part.kind != PredKind::ObjectClass) throw LogicError(part.name + " is not a part class");
  const Term o = Constant{entity};
  const Term fo = SkolemApp{SkolemFn{"", part.name}, Constant{entity}};
  return Prop::fact(conj({Atom{have_pred(), {o, fo}}, Atom{attr, {fo}}, Atom{part, {fo}}}));
}

std::set<std::string> predicates_in(const Conjunction& c) {
  std::set<std::string> out;
  for (const auto& l : c.literals) out.insert(l.atom.pred.name);
  return out;
}

bool mentions(const Conjunction& c, const std::string& predicate) {
  return std::any_of(c.literals.begin(), c.literals.end(),
                     [&](const Literal& l) { return l.atom.pred.name == predicate; });
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string arg_string(const SkolemArg& a) {
  if (const auto* c = std::get_if<Constant>(&a)) return c->id;
  return std::get<Variable>(a).name;
}

}  // namespace

std::string to_string(const Term& t) {
  if (const auto* c = std::get_if<Constant>(&t)) return c->id;
  if (const auto* v = std::get_if<Variable>(&t)) return v->name;
  const auto& s = std::get<SkolemApp>(t);
  return s.fn.id() + "(" + arg_string(s.arg) + ")";
}

std::string to_string(const Atom& a) {
  std::string out = a.pred.name + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) out += ",";
    out += to_string(a.args[i]);
  }
  return out + ")";
}

std::string to_string(const Literal& l) { return (l.positive ? "" : "not ") + to_string(l.atom); }

std::string to_string(const Conjunction& c) {
  std::string out;
  for (std::size_t i = 0; i < c.literals.size(); ++i) {
    if (i) out += ", ";
    out += to_string(c.literals[i]);
  }
  return out;
}

std::string to_string(const Prop& p) {
  std::string out;
  if (p.generic) {
    out += "G";
    for (const auto& v : p.variables) out += " " + v;
    out += ". ";
  }
  if (!p.ante.empty()) out += to_string(p.ante) + " => ";
  if (p.negated()) {
    out += p.cons.size() == 1 ? "~" + to_string(p.cons) : "~(" + to_string(p.cons) + ")";
  } else {
    out += to_string(p.cons);
  }
  return out;
}

std::string to_string(const Ques& q) {
  if (const auto* pq = std::get_if<PolarQues>(&q)) return "?" + to_string(pq->prop);
  if (const auto* wq = std::get_if<WhQues>(&q)) return "?\\" + wq->variable + ". " + to_string(wq->body);
  const auto& cd = std::get<ConceptDiffQues>(q);
  return "?conceptDiff(" + cd.first.name + ", " + cd.second.name + ")";
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
 public:
  Parser(std::string_view text, const Signature& sig) : text_(text), sig_(sig) {}

  Prop prop() {
    bool generic = false;
    std::vector<std::string> vars;
    skip_ws();
    std::size_t save = pos_;
    if (peek_ident() == "G") {
      ident();
      skip_ws();
      while (pos_ < text_.size() && std::isupper(static_cast<unsigned char>(text_[pos_]))) {
        vars.push_back(ident());
        skip_ws();
      }
      if (!vars.empty() && accept('.')) {
        generic = true;
      } else {
        pos_ = save;
        vars.clear();
      }
    }
    Conjunction first;
    ConsPolarity pol = ConsPolarity::Positive;
    Conjunction ante;
    Conjunction cons;
    if (peek('~')) {
      cons = negated_cons(pol);
    } else {
      first = conjunction();
      skip_ws();
      if (accept_str("=>")) {
        ante = std::move(first);
        skip_ws();
        if (peek('~')) {
          cons = negated_cons(pol);
        } else {
          cons = conjunction();
        }
      } else {
        cons = std::move(first);
      }
    }
    if (generic) return Prop::rule(std::move(vars), std::move(ante), std::move(cons), pol);
    if (!ante.empty()) return Prop{false, {}, std::move(ante), std::move(cons), pol};
    return Prop::fact(std::move(cons), pol);
  }

  Ques ques() {
    skip_ws();
    expect('?');
    skip_ws();
    if (accept('\\')) {
      std::string var = ident();
      skip_ws();
      expect('.');
      pred_var_ = var;
      Prop body = prop();
      pred_var_.clear();
      return WhQues{var, std::move(body)};
    }
    std::size_t save = pos_;
    if (peek_ident() == "conceptDiff") {
      ident();
      skip_ws();
      if (accept('(')) {
        auto a = lookup(ident(), 1);
        skip_ws();
        expect(',');
        skip_ws();
        auto b = lookup(ident(), 1);
        skip_ws();
        expect(')');
        return concept_diff_question(a, b);
      }
      pos_ = save;
    }
    return PolarQues{prop()};
  }

  void finish() {
    skip_ws();
    if (pos_ != text_.size()) fail("trailing input");
  }

 private:
  Conjunction negated_cons(ConsPolarity& pol) {
    expect('~');
    pol = ConsPolarity::Negated;
    skip_ws();
    if (accept('(')) {
      auto c = conjunction();
      skip_ws();
      expect(')');
      return c;
    }
    Conjunction c;
    c.literals.push_back(literal());
    return c;
  }

  Conjunction conjunction() {
    Conjunction c;
    c.literals.push_back(literal());
    skip_ws();
    while (accept(',')) {
      c.literals.push_back(literal());
      skip_ws();
    }
    return c;
  }

  Literal literal() {
    skip_ws();
    bool positive = true;
    std::size_t save = pos_;
    if (peek_ident() == "not") {
      ident();
      if (pos_ < text_.size() && text_[pos_] == ' ') {
        positive = false;
      } else {
        pos_ = save;
      }
    }
    return Literal{atom(), positive};
  }

  Atom atom() {
    skip_ws();
    std::string name = ident();
    skip_ws();
    expect('(');
    std::vector<Term> args;
    do {
      skip_ws();
      args.push_back(term());
      skip_ws();
    } while (accept(','));
    expect(')');
    return Atom{lookup(name, static_cast<int>(args.size())), std::move(args)};
  }

  Term term() {
    std::string name = ident();
    skip_ws();
    if (accept('(')) {
      skip_ws();
      std::string arg = ident();
      skip_ws();
      expect(')');
      if (name.rfind("f_", 0) != 0) fail("function term must be a skolem 'f_...': " + name);
      std::string rest = name.substr(2);
      SkolemFn fn;
      auto us = rest.rfind('_');
      if (us == std::string::npos) {
        fn.part = rest;
      } else {
        fn.owner = rest.substr(0, us);
        fn.part = rest.substr(us + 1);
      }
      SkolemArg a = is_var(arg) ? SkolemArg{Variable{arg}} : SkolemArg{Constant{arg}};
      return SkolemApp{std::move(fn), std::move(a)};
    }
    if (is_var(name)) return Variable{name};
    return Constant{name};
  }

  PredicateSym lookup(const std::string& name, int arity) {
    auto it = sig_.find(name);
    if (it == sig_.end()) {
      if (!pred_var_.empty() && name == pred_var_) return PredicateSym{name, arity, PredKind::ObjectClass};
      fail("unknown predicate '" + name + "'");
    }
    if (it->second.arity != arity)
      fail("predicate '" + name + "' has arity " + std::to_string(it->second.arity));
    return it->second;
  }

  static bool is_var(const std::string& s) {
    return !s.empty() && std::isupper(static_cast<unsigned char>(s[0]));
  }

  std::string peek_ident() {
    std::size_t save = pos_;
    std::string s;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      s += text_[pos_++];
    pos_ = save;
    return s;
  }

  std::string ident() {
    std::string s = peek_ident();
    if (s.empty()) fail("expected identifier");
    pos_ += s.size();
    return s;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool peek(char c) const { return pos_ < text_.size() && text_[pos_] == c; }
  bool accept(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }
  bool accept_str(std::string_view s) {
    if (text_.substr(pos_, s.size()) != s) return false;
    pos_ += s.size();
    return true;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw SyntaxError(what + " at offset " + std::to_string(pos_) + " in \"" + std::string(text_) + "\"");
  }

  std::string_view text_;
  const Signature& sig_;
  std::size_t pos_ = 0;
  std::string pred_var_;
};

}  // namespace

Prop parse_prop(std::string_view text, const Signature& sig) {
  Parser p(text, sig);
  auto out = p.prop();
  p.finish();
  return out;
}

Ques parse_ques(std::string_view text, const Signature& sig) {
  Parser p(text, sig);
  auto out = p.ques();
  p.finish();
  return out;
}

}  // namespace groundsim::logic
