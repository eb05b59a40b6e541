#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <limits>
#include <numeric>

#include "groundsim/asp.hpp"

namespace groundsim::asp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Streaming log-sum-exp accumulator.
struct LogSum {
  double max = kNegInf;
  double sum = 0.0;

  void add(double x) {
    if (x == kNegInf) return;
    if (x > max) {
      sum = sum * std::exp(max - x) + 1.0;
      max = x;
    } else {
      sum += std::exp(x - max);
    }
  }
  double value() const { return max == kNegInf ? kNegInf : max + std::log(sum); }
};

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Ground program split into the pieces of the supported fragment.
struct Compiled {
  struct Def {
    int head;
    std::vector<int> body;
  };
  struct Con {
    std::optional<double> weight;
    std::vector<int> pos;
    std::vector<int> neg;
  };

  std::vector<std::string> names;
  std::vector<int> base;             // atom ids of soft-fact heads
  std::vector<double> base_weight;   // summed weight per base entry
  std::vector<char> is_base;
  std::vector<char> is_derived;
  std::vector<Def> defs;
  std::vector<Con> cons;
};

Compiled compile(const WeightedProgram& program) {
  if (!program.is_ground()) throw ProgramError("solver input must be ground");
  Compiled c;
  c.names = program.atom_universe();
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < c.names.size(); ++i) index[c.names[i]] = static_cast<int>(i);
  auto ids = [&](const std::vector<Atom>& atoms) {
    std::vector<int> out;
    for (const auto& a : atoms) out.push_back(index.at(a.str()));
    return out;
  };
  c.is_base.assign(c.names.size(), 0);
  c.is_derived.assign(c.names.size(), 0);
  std::map<int, std::size_t> base_slot;
  for (const auto& r : program.rules) {
    if (r.head) {
      int h = index.at(r.head->str());
      if (!r.hard()) {
        if (!r.pos.empty() || !r.neg.empty())
          throw ProgramError("soft rules with a head and a body are outside the supported fragment: " + to_text(r));
        auto [it, inserted] = base_slot.try_emplace(h, c.base.size());
        if (inserted) {
          c.base.push_back(h);
          c.base_weight.push_back(0.0);
        }
        c.base_weight[it->second] += *r.weight;
        c.is_base[h] = 1;
      } else {
        if (!r.neg.empty())
          throw ProgramError("HARD rules with default negation are outside the supported fragment: " + to_text(r));
        c.defs.push_back({h, ids(r.pos)});
        c.is_derived[h] = 1;
      }
    } else {
      c.cons.push_back({r.weight, ids(r.pos), ids(r.neg)});
    }
  }
  for (std::size_t i = 0; i < c.names.size(); ++i)
    if (c.is_base[i] && c.is_derived[i])
      throw ProgramError("atom " + c.names[i] + " is both a soft fact and a derived atom");
  return c;
}

void close_world(const Compiled& c, std::vector<char>& truth) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& d : c.defs) {
      if (truth[d.head]) continue;
      if (std::all_of(d.body.begin(), d.body.end(), [&](int b) { return truth[b] != 0; })) {
        truth[d.head] = 1;
        changed = true;
      }
    }
  }
}

bool violated(const Compiled::Con& k, const std::vector<char>& truth) {
  for (int p : k.pos)
    if (!truth[p]) return false;
  for (int n : k.neg)
    if (truth[n]) return false;
  return true;
}

// Calls fn(truth, log_weight) for each admissible world.
template <typename Fn>
void enumerate_worlds(const Compiled& c, Fn fn) {
  const std::size_t n = c.base.size();
  if (n > static_cast<std::size_t>(kMaxExactBaseAtoms))
    throw EnumerationBoundExceeded("exact enumeration over " + std::to_string(n) + " base atoms exceeds the bound of " +
                                   std::to_string(kMaxExactBaseAtoms));
  std::vector<char> truth(c.names.size(), 0);
  const std::uint64_t worlds = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < worlds; ++mask) {
    std::fill(truth.begin(), truth.end(), 0);
    double logw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) {
        truth[c.base[i]] = 1;
        logw += c.base_weight[i];
      }
    }
    close_world(c, truth);
    bool admissible = true;
    for (const auto& k : c.cons) {
      bool v = violated(k, truth);
      if (k.weight) {
        if (!v) logw += *k.weight;
      } else if (v) {
        admissible = false;
        break;
      }
    }
    if (admissible) fn(truth, logw);
  }
}

}  // namespace

MarginalTable solve_exact(const WeightedProgram& program) {
  auto c = compile(program);
  LogSum z;
  std::vector<LogSum> per_atom(c.names.size());
  enumerate_worlds(c, [&](const std::vector<char>& truth, double logw) {
    z.add(logw);
    for (std::size_t i = 0; i < truth.size(); ++i)
      if (truth[i]) per_atom[i].add(logw);
  });
  if (z.value() == kNegInf) throw NoAdmissibleWorld("no world satisfies the HARD rules");
  MarginalTable t;
  t.log_partition = z.value();
  for (std::size_t i = 0; i < c.names.size(); ++i) {
    double lp = per_atom[i].value();
    t.marginals[c.names[i]] = lp == kNegInf ? 0.0 : std::exp(lp - t.log_partition);
  }
  return t;
}

std::vector<WorldProbability> world_distribution(const WeightedProgram& program) {
  auto c = compile(program);
  std::vector<WorldProbability> out;
  std::vector<double> logs;
  LogSum z;
  enumerate_worlds(c, [&](const std::vector<char>& truth, double logw) {
    WorldProbability w;
    for (std::size_t i = 0; i < truth.size(); ++i)
      if (truth[i]) w.true_atoms.push_back(c.names[i]);
    out.push_back(std::move(w));
    logs.push_back(logw);
    z.add(logw);
  });
  if (out.empty()) throw NoAdmissibleWorld("no world satisfies the HARD rules");
  for (std::size_t i = 0; i < out.size(); ++i) out[i].probability = std::exp(logs[i] - z.value());
  return out;
}

// ---------------------------------------------------------------------------
// Factor graph over binary atom variables.

namespace {

constexpr std::size_t kMaxFactorVars = 24;

struct Factor {
  std::vector<int> vars;      // sorted variable ids; bit i of an index is vars[i]
  std::vector<double> logv;   // size 2^vars.size()
};

struct FactorGraph {
  std::vector<std::string> var_names;
  std::vector<int> atom_var;  // per compiled atom: variable id, or -1 when constantly false
  std::vector<Factor> factors;
  double log_offset = 0.0;
};

template <typename Pred>
Factor tabulate(std::vector<int> vars, Pred value) {
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  if (vars.size() > kMaxFactorVars) throw SolverError("factor scope too large for tabulation");
  Factor f{vars, std::vector<double>(std::size_t{1} << vars.size())};
  for (std::size_t x = 0; x < f.logv.size(); ++x) {
    auto bit = [&](int v) {
      auto pos = std::lower_bound(f.vars.begin(), f.vars.end(), v) - f.vars.begin();
      return (x >> pos & 1) != 0;
    };
    f.logv[x] = value(bit);
  }
  return f;
}

// Folds each factor into another whose scope contains it. Parallel factors
// over the same atoms would otherwise form spurious cycles.
void absorb_subsumed(FactorGraph& g) {
  std::vector<char> gone(g.factors.size(), 0);
  for (std::size_t f = 0; f < g.factors.size(); ++f) {
    const auto& small = g.factors[f];
    for (std::size_t h = 0; h < g.factors.size(); ++h) {
      if (h == f || gone[h]) continue;
      auto& big = g.factors[h];
      if (big.vars.size() < small.vars.size()) continue;
      if (!std::includes(big.vars.begin(), big.vars.end(), small.vars.begin(), small.vars.end())) continue;
      std::vector<std::size_t> pos;
      for (int v : small.vars) pos.push_back(std::lower_bound(big.vars.begin(), big.vars.end(), v) - big.vars.begin());
      for (std::size_t x = 0; x < big.logv.size(); ++x) {
        std::size_t y = 0;
        for (std::size_t i = 0; i < pos.size(); ++i) y |= (x >> pos[i] & 1) << i;
        big.logv[x] += small.logv[y];
      }
      gone[f] = 1;
      break;
    }
  }
  std::vector<Factor> kept;
  for (std::size_t f = 0; f < g.factors.size(); ++f)
    if (!gone[f]) kept.push_back(std::move(g.factors[f]));
  g.factors = std::move(kept);
}

FactorGraph build_factor_graph(const Compiled& c) {
  const std::size_t n = c.names.size();
  // Atoms that can be true in some world.
  std::vector<char> possible(n, 0);
  for (int b : c.base) possible[b] = 1;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& d : c.defs) {
      if (possible[d.head]) continue;
      if (std::all_of(d.body.begin(), d.body.end(), [&](int b) { return possible[b] != 0; })) {
        possible[d.head] = 1;
        changed = true;
      }
    }
  }

  // Definitions must be non-recursive so that the completion equals closure.
  {
    std::vector<int> state(n, 0);
    std::vector<std::vector<int>> deps(n);
    for (const auto& d : c.defs)
      for (int b : d.body)
        if (c.is_derived[b]) deps[d.head].push_back(b);
    std::function<void(int)> visit = [&](int a) {
      if (state[a] == 2) return;
      if (state[a] == 1) throw SolverError("recursive derived atom " + c.names[a] + " is unsupported by factor solvers");
      state[a] = 1;
      for (int b : deps[a]) visit(b);
      state[a] = 2;
    };
    for (std::size_t a = 0; a < n; ++a)
      if (c.is_derived[a]) visit(static_cast<int>(a));
  }

  FactorGraph g;
  g.atom_var.assign(n, -1);
  for (std::size_t a = 0; a < n; ++a) {
    if (possible[a]) {
      g.atom_var[a] = static_cast<int>(g.var_names.size());
      g.var_names.push_back(c.names[a]);
    }
  }

  for (std::size_t i = 0; i < c.base.size(); ++i) {
    double w = c.base_weight[i];
    g.factors.push_back(Factor{{g.atom_var[c.base[i]]}, {0.0, w}});
  }

  std::map<int, std::vector<const Compiled::Def*>> defs_by_head;
  for (const auto& d : c.defs) {
    if (!possible[d.head]) continue;
    if (std::all_of(d.body.begin(), d.body.end(), [&](int b) { return possible[b] != 0; }))
      defs_by_head[d.head].push_back(&d);
  }
  for (const auto& entry : defs_by_head) {
    const int head = entry.first;
    const auto& defs = entry.second;
    std::vector<int> vars{g.atom_var[head]};
    for (const auto* d : defs)
      for (int b : d->body) vars.push_back(g.atom_var[b]);
    const int hv = g.atom_var[head];
    g.factors.push_back(tabulate(vars, [&](auto bit) {
      bool any = false;
      for (const auto* d : defs) {
        if (std::all_of(d->body.begin(), d->body.end(), [&](int b) { return bit(g.atom_var[b]); })) {
          any = true;
          break;
        }
      }
      return bit(hv) == any ? 0.0 : kNegInf;
    }));
  }

  for (const auto& k : c.cons) {
    bool never = std::any_of(k.pos.begin(), k.pos.end(), [&](int p) { return !possible[p]; });
    for (int p : k.pos)
      if (std::find(k.neg.begin(), k.neg.end(), p) != k.neg.end()) never = true;
    if (never) {
      if (k.weight) g.log_offset += *k.weight;
      continue;
    }
    std::vector<int> pos, neg;
    for (int p : k.pos) pos.push_back(g.atom_var[p]);
    for (int q : k.neg)
      if (possible[q]) neg.push_back(g.atom_var[q]);
    if (pos.empty() && neg.empty()) {
      if (!k.weight) throw NoAdmissibleWorld("a HARD constraint with an always-true body is violated in every world");
      continue;
    }
    std::vector<int> vars = pos;
    vars.insert(vars.end(), neg.begin(), neg.end());
    const auto weight = k.weight;
    g.factors.push_back(tabulate(vars, [&](auto bit) {
      bool viol = std::all_of(pos.begin(), pos.end(), [&](int v) { return bit(v); }) &&
                  std::none_of(neg.begin(), neg.end(), [&](int v) { return bit(v); });
      if (weight) return viol ? 0.0 : *weight;
      return viol ? kNegInf : 0.0;
    }));
  }
  absorb_subsumed(g);
  return g;
}

MarginalTable table_from(const Compiled& c, const FactorGraph& g, const std::vector<double>& var_marginal,
                         const std::vector<char>& have, double log_z) {
  MarginalTable t;
  t.log_partition = log_z;
  for (std::size_t a = 0; a < c.names.size(); ++a) {
    int v = g.atom_var[a];
    if (v < 0) {
      t.marginals[c.names[a]] = 0.0;
    } else if (have[v]) {
      t.marginals[c.names[a]] = var_marginal[v];
    }
  }
  return t;
}

bool graph_is_forest(const FactorGraph& g) {
  const std::size_t nv = g.var_names.size();
  const std::size_t nodes = nv + g.factors.size();
  std::vector<std::size_t> parent(nodes);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t f = 0; f < g.factors.size(); ++f) {
    for (int v : g.factors[f].vars) {
      auto a = find(nv + f);
      auto b = find(static_cast<std::size_t>(v));
      if (a == b) return false;
      parent[a] = b;
    }
  }
  return true;
}

}  // namespace

bool factor_graph_is_acyclic(const WeightedProgram& program) {
  auto c = compile(program);
  return graph_is_forest(build_factor_graph(c));
}

// ---------------------------------------------------------------------------
// Belief propagation

MarginalTable solve_bp(const WeightedProgram& program, const BpOptions& options) {
  auto c = compile(program);
  auto g = build_factor_graph(c);
  const std::size_t nv = g.var_names.size();
  const bool tree = graph_is_forest(g);

  struct Edge {
    int factor;
    int slot;  // position within factor vars
    int var;
  };
  std::vector<Edge> edges;
  std::vector<std::vector<int>> var_edges(nv);
  std::vector<std::vector<int>> factor_edges(g.factors.size());
  for (std::size_t f = 0; f < g.factors.size(); ++f) {
    for (std::size_t s = 0; s < g.factors[f].vars.size(); ++s) {
      int v = g.factors[f].vars[s];
      int e = static_cast<int>(edges.size());
      edges.push_back({static_cast<int>(f), static_cast<int>(s), v});
      var_edges[v].push_back(e);
      factor_edges[f].push_back(e);
    }
  }
  // Potentials in probability space, scaled per factor.
  std::vector<std::vector<double>> psi(g.factors.size());
  for (std::size_t f = 0; f < g.factors.size(); ++f) {
    const auto& lv = g.factors[f].logv;
    double m = *std::max_element(lv.begin(), lv.end());
    if (m == kNegInf) throw NoAdmissibleWorld("a factor admits no assignment");
    psi[f].resize(lv.size());
    for (std::size_t x = 0; x < lv.size(); ++x) psi[f][x] = lv[x] == kNegInf ? 0.0 : std::exp(lv[x] - m);
  }

  using Msg = std::array<double, 2>;
  auto normalize = [](Msg m) {
    double s = m[0] + m[1];
    if (!(s > 0)) throw NoAdmissibleWorld("belief propagation found no admissible assignment");
    return Msg{m[0] / s, m[1] / s};
  };
  std::vector<Msg> to_factor(edges.size(), Msg{0.5, 0.5});
  std::vector<Msg> to_var(edges.size(), Msg{0.5, 0.5});

  const double damping = tree ? 0.0 : options.damping;
  const int cap = tree ? std::max<int>(options.max_iterations, static_cast<int>(nv + g.factors.size()) + 2)
                       : options.max_iterations;
  int iter = 0;
  bool converged = false;
  while (iter < cap) {
    ++iter;
    for (std::size_t v = 0; v < nv; ++v) {
      for (int e : var_edges[v]) {
        Msg m{1.0, 1.0};
        for (int e2 : var_edges[v]) {
          if (e2 == e) continue;
          m[0] *= to_var[e2][0];
          m[1] *= to_var[e2][1];
        }
        to_factor[e] = normalize(m);
      }
    }
    double delta = 0.0;
    for (std::size_t f = 0; f < g.factors.size(); ++f) {
      const auto& fe = factor_edges[f];
      const std::size_t k = fe.size();
      for (std::size_t i = 0; i < k; ++i) {
        Msg m{0.0, 0.0};
        for (std::size_t x = 0; x < psi[f].size(); ++x) {
          if (psi[f][x] == 0.0) continue;
          double p = psi[f][x];
          for (std::size_t j = 0; j < k && p != 0.0; ++j) {
            if (j == i) continue;
            p *= to_factor[fe[j]][x >> j & 1];
          }
          m[x >> i & 1] += p;
        }
        Msg nm = normalize(m);
        Msg& old = to_var[fe[i]];
        nm = Msg{damping * old[0] + (1 - damping) * nm[0], damping * old[1] + (1 - damping) * nm[1]};
        delta = std::max({delta, std::abs(nm[0] - old[0]), std::abs(nm[1] - old[1])});
        old = nm;
      }
    }
    if (delta < options.tolerance) {
      converged = true;
      break;
    }
  }

  std::vector<double> marg(nv, 0.0);
  std::vector<Msg> belief(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    Msg m{1.0, 1.0};
    for (int e : var_edges[v]) {
      m[0] *= to_var[e][0];
      m[1] *= to_var[e][1];
    }
    belief[v] = normalize(m);
    marg[v] = belief[v][1];
  }

  // Bethe estimate of log Z (exact on forests).
  auto xlogx = [](double p) { return p > 0 ? p * std::log(p) : 0.0; };
  double log_z = g.log_offset;
  for (std::size_t f = 0; f < g.factors.size(); ++f) {
    const auto& fe = factor_edges[f];
    std::vector<double> b(psi[f].size());
    double s = 0.0;
    for (std::size_t x = 0; x < b.size(); ++x) {
      double p = psi[f][x];
      for (std::size_t j = 0; j < fe.size() && p != 0.0; ++j) p *= to_factor[fe[j]][x >> j & 1];
      b[x] = p;
      s += p;
    }
    if (!(s > 0)) throw NoAdmissibleWorld("belief propagation found no admissible assignment");
    for (std::size_t x = 0; x < b.size(); ++x) {
      double p = b[x] / s;
      if (p > 0) log_z += p * g.factors[f].logv[x] - xlogx(p);
    }
  }
  for (std::size_t v = 0; v < nv; ++v) {
    double h = -(xlogx(belief[v][0]) + xlogx(belief[v][1]));
    log_z -= (static_cast<double>(var_edges[v].size()) - 1.0) * h;
  }

  std::vector<char> have(nv, 1);
  auto t = table_from(c, g, marg, have, log_z);
  t.converged = converged;
  t.iterations = iter;
  return t;
}

// ---------------------------------------------------------------------------
// Variable elimination

namespace {

// Multiplies `fs` and sums out `elim` (or nothing when elim < 0).
Factor combine(const std::vector<const Factor*>& fs, int elim) {
  std::vector<int> scope;
  for (const auto* f : fs) scope.insert(scope.end(), f->vars.begin(), f->vars.end());
  std::sort(scope.begin(), scope.end());
  scope.erase(std::unique(scope.begin(), scope.end()), scope.end());
  if (scope.size() > kMaxFactorVars) throw SolverError("elimination produced an oversized factor");

  std::vector<std::vector<int>> pos(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (int v : fs[i]->vars)
      pos[i].push_back(static_cast<int>(std::lower_bound(scope.begin(), scope.end(), v) - scope.begin()));

  std::vector<double> prod(std::size_t{1} << scope.size(), 0.0);
  for (std::size_t x = 0; x < prod.size(); ++x) {
    double s = 0.0;
    for (std::size_t i = 0; i < fs.size() && s != kNegInf; ++i) {
      std::size_t idx = 0;
      for (std::size_t j = 0; j < pos[i].size(); ++j) idx |= (x >> pos[i][j] & 1) << j;
      s += fs[i]->logv[idx];
    }
    prod[x] = s;
  }
  if (elim < 0) return Factor{scope, std::move(prod)};

  int epos = static_cast<int>(std::lower_bound(scope.begin(), scope.end(), elim) - scope.begin());
  Factor out;
  for (int v : scope)
    if (v != elim) out.vars.push_back(v);
  out.logv.assign(std::size_t{1} << out.vars.size(), kNegInf);
  const std::size_t low = (std::size_t{1} << epos) - 1;
  for (std::size_t y = 0; y < out.logv.size(); ++y) {
    std::size_t x0 = (y & low) | ((y & ~low) << 1);
    std::size_t x1 = x0 | (std::size_t{1} << epos);
    out.logv[y] = log_add(prod[x0], prod[x1]);
  }
  return out;
}

// Eliminates every variable except `keep` (or all, if keep < 0) and returns
// the residual factor.
Factor eliminate_all_but(std::vector<Factor> factors, std::size_t nv, int keep) {
  std::vector<char> done(nv, 0);
  if (keep >= 0) done[keep] = 1;
  while (true) {
    // Greedy min-scope choice.
    int best = -1;
    std::size_t best_size = std::numeric_limits<std::size_t>::max();
    for (std::size_t v = 0; v < nv; ++v) {
      if (done[v]) continue;
      std::vector<int> scope;
      bool present = false;
      for (const auto& f : factors) {
        if (!std::binary_search(f.vars.begin(), f.vars.end(), static_cast<int>(v))) continue;
        present = true;
        scope.insert(scope.end(), f.vars.begin(), f.vars.end());
      }
      if (!present) {
        done[v] = 1;
        continue;
      }
      std::sort(scope.begin(), scope.end());
      scope.erase(std::unique(scope.begin(), scope.end()), scope.end());
      if (scope.size() < best_size) {
        best_size = scope.size();
        best = static_cast<int>(v);
      }
    }
    if (best < 0) break;
    std::vector<const Factor*> touching;
    std::vector<Factor> rest;
    for (const auto& f : factors)
      if (std::binary_search(f.vars.begin(), f.vars.end(), best)) touching.push_back(&f);
    Factor merged = combine(touching, best);
    for (auto& f : factors)
      if (!std::binary_search(f.vars.begin(), f.vars.end(), best)) rest.push_back(std::move(f));
    rest.push_back(std::move(merged));
    factors = std::move(rest);
    done[best] = 1;
  }
  std::vector<const Factor*> all;
  for (const auto& f : factors) all.push_back(&f);
  if (all.empty()) return Factor{{}, {0.0}};
  return combine(all, -1);
}

}  // namespace

MarginalTable solve_elimination(const WeightedProgram& program, const std::vector<std::string>& query) {
  auto c = compile(program);
  auto g = build_factor_graph(c);
  const std::size_t nv = g.var_names.size();

  std::vector<int> targets;
  if (query.empty()) {
    targets.resize(nv);
    std::iota(targets.begin(), targets.end(), 0);
  } else {
    std::map<std::string, int> by_name;
    for (std::size_t v = 0; v < nv; ++v) by_name[g.var_names[v]] = static_cast<int>(v);
    for (const auto& q : query)
      if (auto it = by_name.find(q); it != by_name.end()) targets.push_back(it->second);
  }

  Factor whole = eliminate_all_but(g.factors, nv, -1);
  double log_z = whole.logv[0];
  if (log_z == kNegInf) throw NoAdmissibleWorld("no world satisfies the HARD rules");

  std::vector<double> marg(nv, 0.0);
  std::vector<char> have(nv, 0);
  for (int v : targets) {
    Factor r = eliminate_all_but(g.factors, nv, v);
    // r is over {v} (v always has its own factor).
    double l0 = r.logv[0], l1 = r.logv[1];
    marg[v] = std::exp(l1 - log_add(l0, l1));
    have[v] = 1;
  }
  auto t = table_from(c, g, marg, have, log_z + g.log_offset);
  if (!query.empty()) {
    // Keep only requested atoms (constant-false ones included).
    MarginalTable q;
    q.log_partition = t.log_partition;
    for (const auto& name : query)
      if (auto it = t.marginals.find(name); it != t.marginals.end()) q.marginals[name] = it->second;
    return q;
  }
  return t;
}

}  // namespace groundsim::asp
