// groundsim: experiment runner, interactive teacher REPL and program solver.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "groundsim/asp.hpp"
#include "groundsim/harness.hpp"

namespace {

namespace D = groundsim::dialogue;
namespace H = groundsim::harness;
namespace L = groundsim::logic;

// A person at the terminal plays the teacher. They see the true class.
class HumanTeacher : public H::TeacherPort {
 public:
  HumanTeacher(groundsim::memory::Lexicon lexicon, std::istream& in, std::ostream& out)
      : lexicon_(std::move(lexicon)), in_(in), out_(out) {}

  bool quit() const { return quit_; }
  void show_truth(const std::string& cls) { truth_ = cls; }

  D::Utterance probe(const std::string& object) override {
    out_ << "\n[" << object << " is a " << surface(truth_) << "]\n";
    auto lines = read("probe (blank line: \"What is this?\")", true, object);
    if (lines.empty()) {
      L::PredicateSym var{"P", 1, L::PredKind::ObjectClass};
      L::Ques q = L::WhQues{"P", L::Prop::fact(L::conj({L::Atom{var, {L::constant(object)}}}))};
      return D::make_utterance(D::Speaker::Teacher, q, lexicon_, object);
    }
    return lines.front();
  }

  std::vector<D::Utterance> respond(const std::optional<std::string>& answered, const std::string&,
                                    const std::string& object) override {
    D::LogicalForm said = D::Feedback::NotSure;
    if (answered)
      said = L::Prop::fact(L::conj({L::Atom{L::class_pred(*answered), {L::constant(object)}}}));
    out_ << "learner: " << D::realize(said, lexicon_) << "\n";
    return read("feedback, one sentence per line, blank line to finish", false, object);
  }

  bool answers_concept_diff() const override { return true; }

  std::vector<D::Utterance> answer_concept_diff(const D::Utterance& question) override {
    out_ << "learner: " << question.surface << "\n";
    return read("generic statements, blank line to finish", false, std::nullopt);
  }

 private:
  std::string surface(const std::string& pred) const {
    const auto* e = lexicon_.by_predicate(pred);
    return e ? e->surface : pred;
  }

  std::vector<D::Utterance> read(const std::string& prompt, bool single, const std::optional<std::string>& object) {
    std::vector<D::Utterance> got;
    out_ << "(" << prompt << ")\n";
    std::string line;
    while (!quit_) {
      out_ << "teacher> " << std::flush;
      if (!std::getline(in_, line) || line == "quit") {
        quit_ = true;
        break;
      }
      if (line.empty()) break;
      try {
        auto form = D::parse(line, lexicon_, object);
        got.push_back(D::Utterance{D::Speaker::Teacher, D::realize(form, lexicon_), form, object});
        if (single) break;
      } catch (const D::ParseFailure& e) {
        out_ << "  not understood: " << e.what() << " [" << e.span() << "]\n";
      }
    }
    return got;
  }

  groundsim::memory::Lexicon lexicon_;
  std::istream& in_;
  std::ostream& out_;
  std::string truth_;
  bool quit_ = false;
};

int run_interactive(const H::ExperimentConfig& config, const groundsim::perception::DomainSpec& domain,
                    const std::string& out_dir) {
  const auto strategy = config.strategies.front();
  const auto seed = config.seeds.front();
  auto world = H::make_world(config, domain, seed);
  groundsim::agents::LearnerConfig lc{strategy.learner, config.inference, config.theta_ce};
  lc.inference.dump = nullptr;
  groundsim::agents::Learner learner(lc, world.priors, groundsim::memory::Lexicon::prior_vocabulary(domain));
  HumanTeacher teacher(groundsim::memory::Lexicon::from_domain(domain), std::cin, std::cout);

  std::vector<std::string> log;
  int mistakes = 0;
  for (int k = 0; mistakes < config.total_mistakes && !teacher.quit(); ++k) {
    const auto& target = config.classes[static_cast<std::size_t>(k) % config.classes.size()];
    auto scene = world.model.generate_scene(target, groundsim::derive_seed({seed, 99, static_cast<std::uint64_t>(k)}));
    teacher.show_truth(target);
    auto out = H::run_episode(teacher, learner, scene, config.classes, k + 1);
    log.push_back("# episode " + std::to_string(out.id) + " " + out.truth);
    for (const auto& u : out.transcript) log.push_back(D::transcript_line(u));
    if (out.mistake()) ++mistakes;
    for (const auto& e : out.removed) std::cout << "  (dropped " << L::to_string(e.prop) << ")\n";
  }

  std::filesystem::create_directories(std::filesystem::path(out_dir) / "transcripts");
  std::ofstream f(std::filesystem::path(out_dir) / "transcripts" / ("interactive_" + std::to_string(seed) + ".log"));
  for (const auto& line : log) f << line << '\n';
  std::cout << "\nknowledge base:\n" << learner.kb().to_json().dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated interactive concept learning with weighted logic programs"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment suite");
  std::string difficulty = "fineEasy", strategy = "all", out_dir = "results", config_file, domain_file;
  int seeds = 40, threads = 0;
  bool dump = false, interactive = false;
  run->add_option("--difficulty", difficulty)->check(CLI::IsMember({"fineEasy", "fineHard"}));
  run->add_option("--strategy", strategy, "Strategy name or 'all'");
  run->add_option("--seeds", seeds, "Number of shared seeds")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir);
  run->add_option("--config", config_file, "JSON overrides");
  run->add_option("--domain", domain_file, "Domain JSON (default: built-in glasses)");
  run->add_option("--threads", threads);
  run->add_flag("--dump-program", dump, "Write every ground query program");
  run->add_flag("--interactive", interactive, "Teach the learner from the terminal");

  auto* solve = app.add_subcommand("solve", "Print marginals of a weighted program");
  std::string program_file, solver = "exact";
  solve->add_option("file", program_file)->required()->check(CLI::ExistingFile);
  solve->add_option("--solver", solver)->check(CLI::IsMember({"exact", "bp", "elimination"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) {
      std::ifstream in(program_file);
      std::stringstream ss;
      ss << in.rdbuf();
      auto program = groundsim::asp::parse_program(ss.str());
      auto table = solver == "exact" ? groundsim::asp::solve_exact(program)
                   : solver == "bp"  ? groundsim::asp::solve_bp(program)
                                     : groundsim::asp::solve_elimination(program);
      for (const auto& [atom, p] : table.marginals) std::cout << atom << " " << p << "\n";
      if (!table.converged) std::cerr << "warning: belief propagation did not converge\n";
      return 0;
    }

    auto config = H::ExperimentConfig::preset(difficulty);
    config.seeds.clear();
    for (int s = 1; s <= seeds; ++s) config.seeds.push_back(static_cast<std::uint64_t>(s));
    if (strategy != "all") config.strategies = {groundsim::agents::StrategyCombo::parse(strategy)};
    config.threads = threads;
    config.dump_programs = dump;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw std::runtime_error("cannot read " + config_file);
      config = H::ExperimentConfig::from_json(nlohmann::json::parse(in), config);
    }
    auto domain = domain_file.empty() ? groundsim::perception::DomainSpec::glasses()
                                      : groundsim::perception::DomainSpec::load(domain_file);

    if (interactive) return run_interactive(config, domain, out_dir);

    auto result = H::run_suite(config, domain);
    H::write_outputs(result, config, out_dir);
    for (const auto& s : config.strategies)
      std::cout << s.name() << " final mAP " << result.final_map(s.name()) << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
