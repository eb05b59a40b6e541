#include "groundsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace groundsim::harness {

namespace L = groundsim::logic;
namespace D = groundsim::dialogue;
namespace P = groundsim::perception;
using nlohmann::json;

namespace {

// Seed streams.
enum : std::uint64_t { kGeometry = 1, kPriors = 2, kTest = 3, kTestOrder = 4, kCycle = 5, kProbe = 6 };

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

const char* solver_name(reasoner::SolverKind k) {
  switch (k) {
    case reasoner::SolverKind::Elimination:
      return "elimination";
    case reasoner::SolverKind::Exact:
      return "exact";
    case reasoner::SolverKind::BeliefPropagation:
      return "bp";
  }
  return "?";
}

reasoner::SolverKind solver_from(const std::string& s) {
  if (s == "elimination") return reasoner::SolverKind::Elimination;
  if (s == "exact") return reasoner::SolverKind::Exact;
  if (s == "bp") return reasoner::SolverKind::BeliefPropagation;
  throw HarnessError("unknown solver " + s);
}

std::optional<std::string> class_of(const D::LogicalForm& f, bool positive) {
  const auto* p = std::get_if<L::Prop>(&f);
  if (!p || p->generic || p->cons.literals.size() != 1) return std::nullopt;
  const auto& lit = p->cons.literals[0];
  if (lit.atom.pred.kind != L::PredKind::ObjectClass || lit.positive != positive) return std::nullopt;
  return lit.atom.pred.name;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

ExperimentConfig ExperimentConfig::preset(const std::string& difficulty) {
  ExperimentConfig c;
  c.difficulty = difficulty;
  if (difficulty == "fineEasy") {
    c.classes = {"brandyGlass", "burgundyGlass", "champagneCoupe"};
    c.total_mistakes = 30;
    c.exam_interval = 5;
  } else if (difficulty == "fineHard") {
    c.classes = {"brandyGlass", "burgundyGlass", "champagneCoupe", "bordeauxGlass", "martiniGlass"};
    c.total_mistakes = 60;
    c.exam_interval = 10;
  } else {
    throw HarnessError("unknown difficulty " + difficulty);
  }
  for (std::uint64_t s = 1; s <= 40; ++s) c.seeds.push_back(s);
  c.strategies = agents::StrategyCombo::all();
  return c;
}

ExperimentConfig ExperimentConfig::from_json(const json& j, ExperimentConfig c) {
  if (!j.is_object()) throw HarnessError("config must be a JSON object");
  if (j.contains("difficulty") && j.at("difficulty") != c.difficulty) {
    auto fresh = preset(j.at("difficulty"));
    c.difficulty = fresh.difficulty;
    c.classes = fresh.classes;
    c.total_mistakes = fresh.total_mistakes;
    c.exam_interval = fresh.exam_interval;
  }
  for (const auto& [key, v] : j.items()) {
    if (key == "difficulty") continue;
    else if (key == "classes") c.classes = v.get<std::vector<std::string>>();
    else if (key == "total_mistakes") c.total_mistakes = v;
    else if (key == "exam_interval") c.exam_interval = v;
    else if (key == "test_per_class") c.test_per_class = v;
    else if (key == "episode_cap_factor") c.episode_cap_factor = v;
    else if (key == "seeds") {
      c.seeds.clear();
      if (v.is_number()) {
        for (std::uint64_t s = 1; s <= v.get<std::uint64_t>(); ++s) c.seeds.push_back(s);
      } else {
        c.seeds = v.get<std::vector<std::uint64_t>>();
      }
    } else if (key == "strategies") {
      c.strategies.clear();
      for (const auto& s : v) c.strategies.push_back(agents::StrategyCombo::parse(s));
    } else if (key == "sim") c.sim = P::SimParams::from_json(v, c.sim);
    else if (key == "classifier") {
      for (const auto& [k, x] : v.items()) {
        if (k == "one_sided_positive") c.classifier.one_sided_positive = x;
        else if (k == "one_sided_negative") c.classifier.one_sided_negative = x;
        else if (k == "beta") c.classifier.beta = x;
        else if (k == "delta") c.classifier.delta = x;
        else if (k == "bandwidth_floor") c.classifier.bandwidth_floor = x;
        else if (k == "neighbors") c.classifier.neighbors = x;
        else throw HarnessError("unknown classifier key " + k);
      }
    } else if (key == "prior_exemplars") c.prior_exemplars = v;
    else if (key == "prior_negative_ratio") c.prior_negative_ratio = v;
    else if (key == "ud") c.inference.reliability.ud = v;
    else if (key == "ua") c.inference.reliability.ua = v;
    else if (key == "theta_sure") c.inference.theta_sure = v;
    else if (key == "theta_ce") c.theta_ce = v;
    else if (key == "solver") c.inference.solver = solver_from(v);
    else if (key == "group_by_part") c.teacher.group_by_part = v;
    else if (key == "threads") c.threads = v;
    else if (key == "dump_programs") c.dump_programs = v;
    else throw HarnessError("unknown config key " + key);
  }
  c.validate();
  return c;
}

json ExperimentConfig::to_json() const {
  json strategies_j = json::array();
  for (const auto& s : strategies) strategies_j.push_back(s.name());
  return {{"difficulty", difficulty},
          {"classes", classes},
          {"total_mistakes", total_mistakes},
          {"exam_interval", exam_interval},
          {"test_per_class", test_per_class},
          {"episode_cap_factor", episode_cap_factor},
          {"seeds", seeds},
          {"strategies", strategies_j},
          {"sim", sim.to_json()},
          {"classifier",
           {{"one_sided_positive", classifier.one_sided_positive},
            {"one_sided_negative", classifier.one_sided_negative},
            {"beta", classifier.beta},
            {"delta", classifier.delta},
            {"bandwidth_floor", classifier.bandwidth_floor},
            {"neighbors", classifier.neighbors}}},
          {"prior_exemplars", prior_exemplars},
          {"prior_negative_ratio", prior_negative_ratio},
          {"ud", inference.reliability.ud},
          {"ua", inference.reliability.ua},
          {"theta_sure", inference.theta_sure},
          {"theta_ce", theta_ce},
          {"solver", solver_name(inference.solver)},
          {"group_by_part", teacher.group_by_part}};
}

void ExperimentConfig::validate() const {
  if (classes.size() < 2) throw HarnessError("need at least two target classes");
  if (total_mistakes <= 0 || exam_interval <= 0 || exam_interval > total_mistakes)
    throw HarnessError("need 0 < N_m <= N_t");
  if (test_per_class <= 0) throw HarnessError("test_per_class must be positive");
  if (episode_cap_factor <= 0) throw HarnessError("episode_cap_factor must be positive");
  if (seeds.empty()) throw HarnessError("no seeds");
  if (strategies.empty()) throw HarnessError("no strategies");
}

// ---------------------------------------------------------------------------
// Episode

std::vector<D::Utterance> SimulatedTeacher::answer_concept_diff(const D::Utterance& question) {
  const auto* q = std::get_if<L::Ques>(&question.form);
  const auto* diff = q ? std::get_if<L::ConceptDiffQues>(q) : nullptr;
  if (!diff) throw HarnessError("not a concept-difference question: " + question.surface);
  return teacher_.answer_concept_diff(*diff);
}

EpisodeOutcome run_episode(TeacherPort& teacher, agents::Learner& learner, const P::Scene& scene,
                           const std::vector<std::string>& targets, int episode_id) {
  const auto& obj = scene.objects.at(0);
  EpisodeOutcome out;
  out.id = episode_id;
  out.truth = obj.cls;

  auto probe = teacher.probe(obj.id);
  D::parse(probe.surface, learner.lexicon(), probe.demonstratum);
  out.transcript.push_back(probe);

  auto sg = learner.perceive(scene, targets);
  auto answer = learner.answer_probe(sg, obj.id, targets);
  out.transcript.push_back(answer);
  out.answered = class_of(answer.form, true);
  out.outcome = !out.answered                ? memory::Outcome::NotSure
                : *out.answered == out.truth ? memory::Outcome::Correct
                                             : memory::Outcome::Incorrect;

  auto feedback = teacher.respond(out.answered, out.truth, obj.id);
  out.transcript.insert(out.transcript.end(), feedback.begin(), feedback.end());

  std::string confirmed = out.outcome == memory::Outcome::Correct ? out.truth : "";
  if (out.mistake()) {
    for (const auto& f : learner.absorb_feedback(feedback, obj.class_feature))
      if (auto c = class_of(f, true)) confirmed = *c;

    if (out.answered && !confirmed.empty() && confirmed != *out.answered && teacher.answers_concept_diff()) {
      if (auto q = learner.ask_concept_diff(confirmed, *out.answered)) {
        out.transcript.push_back(*q);
        auto generics = teacher.answer_concept_diff(*q);
        std::vector<L::Prop> statements;
        for (const auto& g : generics) {
          out.transcript.push_back(g);
          auto f = D::parse(g.surface, learner.lexicon(), g.demonstratum);
          if (const auto* p = std::get_if<L::Prop>(&f); p && p->generic) statements.push_back(*p);
        }
        if (!statements.empty()) learner.integrate_generics(statements, confirmed, *out.answered, episode_id);
      }
    }
  }

  memory::EpisodicRecord rec;
  rec.id = episode_id;
  rec.object = obj.id;
  rec.confirmed_class = confirmed;
  rec.snapshot = std::move(sg);
  for (const auto& u : out.transcript) rec.transcript.push_back(D::transcript_line(u));
  rec.answer = out.answered.value_or("");
  rec.outcome = out.outcome;
  learner.episodic().append(std::move(rec));

  if (out.mistake()) out.removed = learner.cancel_scalar_implicatures(episode_id);
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

std::optional<double> average_precision(const std::vector<std::pair<double, bool>>& ranked) {
  std::vector<std::size_t> idx(ranked.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return ranked[a].first > ranked[b].first; });
  std::vector<double> precision(idx.size());
  std::vector<std::size_t> positives;
  int tp = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (ranked[idx[i]].second) {
      ++tp;
      positives.push_back(i);
    }
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  if (positives.empty()) return std::nullopt;
  // interpolated: best precision at this rank or deeper
  for (std::size_t i = precision.size() - 1; i-- > 0;) precision[i] = std::max(precision[i], precision[i + 1]);
  double sum = 0;
  for (auto i : positives) sum += precision[i];
  return sum / static_cast<double>(positives.size());
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> classes)
    : classes_(std::move(classes)), counts_(classes_.size(), std::vector<long>(classes_.size() + 1, 0)) {}

void ConfusionMatrix::add(const std::string& truth, const std::optional<std::string>& predicted) {
  auto row = std::find(classes_.begin(), classes_.end(), truth);
  if (row == classes_.end()) throw HarnessError("unknown class " + truth);
  std::size_t col = classes_.size();
  if (predicted) {
    auto it = std::find(classes_.begin(), classes_.end(), *predicted);
    if (it == classes_.end()) throw HarnessError("unknown class " + *predicted);
    col = static_cast<std::size_t>(it - classes_.begin());
  }
  ++counts_[static_cast<std::size_t>(row - classes_.begin())][col];
}

std::vector<std::vector<double>> ConfusionMatrix::rates() const {
  std::vector<std::vector<double>> out;
  for (const auto& row : counts_) {
    long n = std::accumulate(row.begin(), row.end(), 0L);
    std::vector<double> r(row.size(), 0.0);
    if (n > 0)
      for (std::size_t i = 0; i < row.size(); ++i) r[i] = static_cast<double>(row[i]) / static_cast<double>(n);
    out.push_back(std::move(r));
  }
  return out;
}

double ConfusionMatrix::rate(const std::string& truth, const std::string& predicted) const {
  auto r = std::find(classes_.begin(), classes_.end(), truth);
  if (r == classes_.end()) throw HarnessError("unknown class " + truth);
  std::size_t col = classes_.size();
  if (predicted != kNotSure) {
    auto c = std::find(classes_.begin(), classes_.end(), predicted);
    if (c == classes_.end()) throw HarnessError("unknown class " + predicted);
    col = static_cast<std::size_t>(c - classes_.begin());
  }
  return rates()[static_cast<std::size_t>(r - classes_.begin())][col];
}

json ConfusionMatrix::to_json() const {
  auto cols = classes_;
  cols.push_back(kNotSure);
  return {{"rows", classes_}, {"columns", cols}, {"counts", counts_}, {"rates", rates()}};
}

ExamResult run_exam(const agents::Learner& learner, const std::vector<P::Scene>& test_set,
                    const std::vector<std::string>& targets, int mistakes, ConfusionMatrix* confusion) {
  auto opt = learner.config().inference;
  opt.dump = nullptr;
  const auto kb = learner.kb().props();
  const auto known = learner.known_classes(targets);

  std::map<std::string, std::vector<std::pair<double, bool>>> ranked;
  for (const auto& scene : test_set) {
    const auto& obj = scene.objects.at(0);
    auto sg = learner.perceive(scene, targets);
    std::map<std::string, double> marg;
    if (!known.empty()) marg = reasoner::class_marginals(sg, kb, known, obj.id, opt);
    for (const auto& p : targets) {
      auto it = marg.find(p);
      ranked[p].emplace_back(it == marg.end() ? 0.5 : it->second, obj.cls == p);
    }
    if (confusion) {
      std::optional<std::string> pred;
      if (!known.empty()) pred = reasoner::choose_class(marg, opt.theta_sure).predicate;
      confusion->add(obj.cls, pred);
    }
  }

  ExamResult r;
  r.mistakes = mistakes;
  double sum = 0;
  int n = 0;
  for (const auto& p : targets) {
    r.ap[p] = average_precision(ranked[p]);
    if (r.ap[p]) {
      sum += *r.ap[p];
      ++n;
    }
  }
  r.map = n ? sum / n : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Sequences

SeedWorld make_world(const ExperimentConfig& config, const P::DomainSpec& domain, std::uint64_t seed) {
  P::FeatureModel model(domain, config.sim, derive_seed({seed, kGeometry}));
  P::ExemplarBase xb(config.sim.dim_class, config.sim.dim_attr, config.classifier);
  P::init_priors(xb, model, derive_seed({seed, kPriors}), config.prior_exemplars,
                config.prior_negative_ratio);
  std::vector<P::Scene> test;
  for (std::size_t c = 0; c < config.classes.size(); ++c)
    for (int i = 0; i < config.test_per_class; ++i)
      test.push_back(model.generate_scene(config.classes[c], derive_seed({seed, kTest, c, static_cast<std::uint64_t>(i)})));
  Rng rng(derive_seed({seed, kTestOrder}));
  std::shuffle(test.begin(), test.end(), rng);
  return SeedWorld{std::move(model), std::move(xb), std::move(test)};
}

SequenceResult run_sequence(const ExperimentConfig& config, const P::DomainSpec& domain,
                            const agents::StrategyCombo& strategy, std::uint64_t seed, const SeedWorld* world) {
  std::optional<SeedWorld> own;
  if (!world) world = &own.emplace(make_world(config, domain, seed));

  SequenceResult res;
  res.strategy = strategy.name();
  res.seed = seed;
  res.confusion = ConfusionMatrix(config.classes);

  agents::LearnerConfig lc{strategy.learner, config.inference, config.theta_ce};
  if (config.dump_programs)
    lc.inference.dump = [&res](const std::string& program) {
      res.programs += "% query\n";
      res.programs += program;
    };
  else
    lc.inference.dump = nullptr;
  agents::Learner learner(lc, world->priors, memory::Lexicon::prior_vocabulary(domain));
  SimulatedTeacher teacher(agents::Teacher(domain, strategy.teacher, config.teacher));

  const auto& targets = config.classes;
  const int exams = config.exam_count();
  const int cap = config.episode_cap_factor * config.total_mistakes;
  std::vector<std::string> order;
  std::size_t pos = 0;
  std::uint64_t cycle = 0;

  while (res.mistakes < config.total_mistakes && res.episodes < cap) {
    if (pos == order.size()) {
      order = targets;
      Rng rng(derive_seed({seed, kCycle, cycle++}));
      std::shuffle(order.begin(), order.end(), rng);
      pos = 0;
    }
    const auto& target = order[pos++];
    auto scene = world->model.generate_scene(target, derive_seed({seed, kProbe, static_cast<std::uint64_t>(res.episodes)}));
    ++res.episodes;
    auto out = run_episode(teacher, learner, scene, targets, res.episodes);

    res.transcript.push_back("# episode " + std::to_string(out.id) + " " + out.truth);
    for (const auto& u : out.transcript) res.transcript.push_back(D::transcript_line(u));
    if (!out.mistake()) continue;
    ++res.mistakes;
    if (res.mistakes % config.exam_interval == 0 && static_cast<int>(res.exams.size()) < exams) {
      bool last = static_cast<int>(res.exams.size()) + 1 == exams;
      res.exams.push_back(run_exam(learner, world->test_set, targets, res.mistakes, last ? &res.confusion : nullptr));
    }
  }
  // Episode cap reached: the remaining exams see the final state.
  if (static_cast<int>(res.exams.size()) < exams) {
    auto final_exam = run_exam(learner, world->test_set, targets, 0, &res.confusion);
    final_exam.after_cap = true;
    while (static_cast<int>(res.exams.size()) < exams) {
      final_exam.mistakes = static_cast<int>(res.exams.size() + 1) * config.exam_interval;
      res.exams.push_back(final_exam);
    }
  }

  std::ostringstream jsonl;
  learner.episodic().write_jsonl(jsonl);
  res.episodes_jsonl = jsonl.str();
  res.kb_log = learner.kb_log();
  res.final_kb = learner.kb().to_json();
  return res;
}

// ---------------------------------------------------------------------------
// Suites

const SequenceResult& SuiteResult::cell(const std::string& strategy, std::uint64_t seed) const {
  for (const auto& c : cells)
    if (c.strategy == strategy && c.seed == seed) return c;
  throw HarnessError("no cell " + strategy + "/" + std::to_string(seed));
}

double SuiteResult::final_map(const std::string& strategy) const {
  double sum = 0;
  int n = 0;
  for (const auto& c : cells)
    if (c.strategy == strategy && !c.exams.empty()) {
      sum += c.exams.back().map;
      ++n;
    }
  if (!n) throw HarnessError("no cells for " + strategy);
  return sum / n;
}

double SuiteResult::confusion_rate(const std::string& strategy, const std::string& truth,
                                   const std::string& predicted) const {
  double sum = 0;
  int n = 0;
  for (const auto& c : cells)
    if (c.strategy == strategy) {
      sum += c.confusion.rate(truth, predicted);
      ++n;
    }
  if (!n) throw HarnessError("no cells for " + strategy);
  return sum / n;
}

namespace {

template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) f(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace

SuiteResult run_suite(const ExperimentConfig& config, const P::DomainSpec& domain) {
  config.validate();
  for (const auto& c : config.classes)
    if (!domain.has_class(c)) throw HarnessError("class " + c + " is not in the domain");

  std::vector<std::optional<SeedWorld>> worlds(config.seeds.size());
  std::vector<std::string> errors(config.seeds.size() * (config.strategies.size() + 1));
  parallel_for(config.seeds.size(), config.threads, [&](std::size_t i) {
    try {
      worlds[i].emplace(make_world(config, domain, config.seeds[i]));
    } catch (const std::exception& e) {
      errors[i] = "seed " + std::to_string(config.seeds[i]) + ": " + e.what();
    }
  });

  const std::size_t ns = config.seeds.size();
  SuiteResult out;
  out.cells.resize(config.strategies.size() * ns);
  parallel_for(out.cells.size(), config.threads, [&](std::size_t i) {
    const auto& strategy = config.strategies[i / ns];
    const auto& w = worlds[i % ns];
    if (!w) return;
    try {
      out.cells[i] = run_sequence(config, domain, strategy, config.seeds[i % ns], &*w);
    } catch (const std::exception& e) {
      errors[ns + i] = strategy.name() + "/" + std::to_string(config.seeds[i % ns]) + ": " + e.what();
    }
  });

  std::string report;
  for (const auto& e : errors)
    if (!e.empty()) report += "  " + e + "\n";
  if (!report.empty()) throw HarnessError("suite cells failed:\n" + report);

  for (const auto& s : config.strategies) {
    const auto name = s.name();
    for (int k = 0; k < config.exam_count(); ++k) {
      std::vector<double> v;
      for (const auto& c : out.cells)
        if (c.strategy == name) v.push_back(c.exams[static_cast<std::size_t>(k)].map);
      AggregateRow row{name, (k + 1) * config.exam_interval, 0, 0, static_cast<int>(v.size())};
      row.mean_map = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      if (v.size() > 1) {
        double ss = 0;
        for (double x : v) ss += (x - row.mean_map) * (x - row.mean_map);
        row.ci95 = 1.96 * std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
      }
      out.aggregate.push_back(row);
    }
    std::vector<std::vector<double>> mean;
    int n = 0;
    for (const auto& c : out.cells) {
      if (c.strategy != name) continue;
      auto r = c.confusion.rates();
      if (mean.empty()) mean.assign(r.size(), std::vector<double>(r.empty() ? 0 : r[0].size(), 0.0));
      for (std::size_t a = 0; a < r.size(); ++a)
        for (std::size_t b = 0; b < r[a].size(); ++b) mean[a][b] += r[a][b];
      ++n;
    }
    for (auto& row : mean)
      for (auto& x : row) x /= n;
    out.mean_confusion[name] = std::move(mean);
  }
  return out;
}

void write_outputs(const SuiteResult& result, const ExperimentConfig& config, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path root(out_dir);
  fs::create_directories(root / "transcripts");
  fs::create_directories(root / "episodes");
  auto open = [](const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw HarnessError("cannot write " + p.string());
    return f;
  };

  {
    auto f = open(root / "curves.csv");
    f << "strategy,seed,mistakes,concept,AP,mAP\n";
    for (const auto& c : result.cells)
      for (const auto& e : c.exams)
        for (const auto& p : config.classes) {
          const auto& ap = e.ap.at(p);
          f << c.strategy << ',' << c.seed << ',' << e.mistakes << ',' << p << ',' << (ap ? fmt(*ap) : "") << ','
            << fmt(e.map) << '\n';
        }
  }
  {
    auto f = open(root / "curves_aggregate.csv");
    f << "strategy,mistakes,mAP_mean,mAP_ci95,seeds\n";
    for (const auto& r : result.aggregate)
      f << r.strategy << ',' << r.mistakes << ',' << fmt(r.mean_map) << ',' << fmt(r.ci95) << ',' << r.n << '\n';
  }
  auto columns = config.classes;
  columns.push_back(ConfusionMatrix::kNotSure);
  json summary{{"config", config.to_json()}, {"strategies", json::object()}};
  for (const auto& [name, mean] : result.mean_confusion) {
    json m{{"rows", config.classes}, {"columns", columns}, {"rates", mean}};
    json removals = json::array();
    int explicit_removed = 0;
    int seeds = 0;
    for (const auto& c : result.cells) {
      if (c.strategy != name) continue;
      ++seeds;
      for (const auto& ch : c.kb_log) {
        if (ch.kind != agents::KBChange::Kind::Removed) continue;
        json prov = json::array();
        for (auto s : ch.entry.provenance) prov.push_back(memory::to_string(s));
        if (ch.entry.provenance.count(memory::Source::Explicit)) ++explicit_removed;
        removals.push_back({{"seed", c.seed}, {"episode", ch.episode}, {"prop", L::to_string(ch.entry.prop)},
                            {"provenance", prov}});
      }
    }
    m["seeds"] = seeds;
    auto f = open(root / ("confusion_" + name + ".json"));
    f << m.dump(2) << '\n';
    summary["strategies"][name] = {{"final_mAP", result.final_map(name)},
                                   {"explicit_removals", explicit_removed},
                                   {"removals", removals}};
  }
  {
    auto f = open(root / "summary.json");
    f << summary.dump(2) << '\n';
  }
  for (const auto& c : result.cells) {
    const auto stem = c.strategy + "_" + std::to_string(c.seed);
    {
      auto f = open(root / "transcripts" / (stem + ".log"));
      for (const auto& line : c.transcript) f << line << '\n';
    }
    {
      auto f = open(root / "episodes" / (stem + ".jsonl"));
      f << c.episodes_jsonl;
    }
    if (config.dump_programs) {
      fs::create_directories(root / "programs");
      auto f = open(root / "programs" / (stem + ".lp"));
      f << c.programs;
    }
  }
}

}  // namespace groundsim::harness
