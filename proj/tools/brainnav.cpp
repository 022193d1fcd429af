// brainnav command line: run / bench / replay / plan / gen-suite.
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "brainnav/executor.hpp"
#include "brainnav/harness.hpp"
#include "brainnav/suites.hpp"

using namespace brainnav;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitAbort = 2;
constexpr int kExitDivergence = 3;

struct CommonEpisodeArgs {
  std::string policy = "oracle";
  std::uint64_t seed = 0;
  std::string ablate;
  int max_steps = 200;
  double radius = 1.0;
  std::string experience;
};

void add_common(CLI::App* cmd, CommonEpisodeArgs& a) {
  cmd->add_option("--policy", a.policy, "oracle | llm")->check(CLI::IsMember({"oracle", "llm"}));
  cmd->add_option("--seed", a.seed, "Base seed");
  cmd->add_option("--ablate", a.ablate, "Comma list of memory,spatial,perception,decision,executor");
  cmd->add_option("--max-steps", a.max_steps, "Macro-action budget per episode")->check(CLI::PositiveNumber);
  cmd->add_option("--success-radius", a.radius, "Success radius in meters");
  cmd->add_option("--experience", a.experience, "Trajectory store file to reuse and update");
}

// Holds the remote client alive for the duration of a command.
struct LlmBinding {
  std::unique_ptr<HttpChatClient> http;
  std::unique_ptr<BoundedChatClient> bounded;
};

EpisodeConfig make_config(const CommonEpisodeArgs& a, LlmBinding& llm, TrajectoryStore* store) {
  EpisodeConfig cfg;
  cfg.policy = parse_policy(a.policy);
  cfg.ablations = Ablations::parse(a.ablate);
  cfg.max_steps = a.max_steps;
  cfg.seed = a.seed;
  cfg.success_radius_m = a.radius;
  cfg.experience = store;
  if (cfg.policy == PolicyKind::Llm) {
    auto endpoint = RemoteModelEndpoint::from_env();
    if (!endpoint) throw std::invalid_argument("policy llm needs BRAINNAV_LLM_URL and BRAINNAV_LLM_KEY");
    llm.http = std::make_unique<HttpChatClient>(*endpoint);
    llm.bounded = std::make_unique<BoundedChatClient>(*llm.http);
    cfg.llm = llm.bounded.get();
  }
  return cfg;
}

void print_result(const EpisodeResult& r, std::ostream& os) {
  os << "scenario:      " << r.scenario << '\n'
     << "instruction:   " << r.instruction << '\n'
     << "category:      " << category_name(r.category) << '\n'
     << "success:       " << (r.success ? "yes" : "no") << '\n'
     << "steps:         " << r.steps << '\n'
     << "shortest:      " << r.shortest << '\n'
     << "final_error_m: " << r.final_error_m << '\n'
     << "revisited:     " << (r.revisited ? "yes" : "no") << '\n'
     << "seed:          " << r.seed << '\n';
  if (r.aborted_reason) os << "aborted:       " << *r.aborted_reason << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid-world vision-and-language navigation agent simulator"};
  app.require_subcommand(1);

  CommonEpisodeArgs run_args;
  std::string run_scenario;
  std::size_t run_instruction = 0;
  std::string run_trace;
  auto* run = app.add_subcommand("run", "Run one episode");
  run->add_option("--scenario", run_scenario, "Scenario JSON file")->required();
  run->add_option("--instruction", run_instruction, "Instruction index");
  run->add_option("--trace", run_trace, "Write the step trace here");
  add_common(run, run_args);

  CommonEpisodeArgs bench_args;
  std::string bench_suite;
  std::string bench_report;
  std::string bench_format;
  int bench_reps = 1;
  int bench_parallel = 1;
  bool bench_interactive = false;
  auto* bench = app.add_subcommand("bench", "Run a scenario suite and report metrics");
  bench->add_option("--suite", bench_suite, "Directory of scenario files")->required();
  bench->add_option("--episodes-per-instruction", bench_reps, "Repetitions")->check(CLI::PositiveNumber);
  bench->add_option("--report", bench_report, "Report output file");
  bench->add_option("--format", bench_format, "table | csv (default: from --report extension)")
      ->check(CLI::IsMember({"table", "csv"}));
  bench->add_option("--parallel", bench_parallel, "Concurrent episodes")->check(CLI::PositiveNumber);
  bench->add_flag("--include-interactive", bench_interactive, "Also run Interactive Navigation instructions");
  add_common(bench, bench_args);

  std::string replay_trace;
  std::string replay_scenario;
  auto* replay_cmd = app.add_subcommand("replay", "Re-execute a trace and verify every pose");
  replay_cmd->add_option("--trace", replay_trace, "Trace file")->required();
  replay_cmd->add_option("--scenario", replay_scenario, "Override the scenario path stored in the trace");

  std::string plan_scenario;
  NodeId plan_from = 0;
  NodeId plan_to = 0;
  bool plan_list = false;
  auto* plan = app.add_subcommand("plan", "Print the backtrack path between two nodes of the full map");
  plan->add_option("--scenario", plan_scenario, "Scenario JSON file")->required();
  plan->add_option("--from", plan_from, "Source node id");
  plan->add_option("--to", plan_to, "Target node id");
  plan->add_flag("--list", plan_list, "List node ids and their cells instead");

  std::string gen_kind = "open";
  std::string gen_out;
  int gen_count = 100;
  int gen_size = 10;
  std::uint64_t gen_seed = 1;
  auto* gen = app.add_subcommand("gen-suite", "Generate a seeded scenario suite");
  gen->add_option("--kind", gen_kind, "open | maze")->check(CLI::IsMember({"open", "maze"}));
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--count", gen_count, "Number of scenarios")->check(CLI::PositiveNumber);
  gen->add_option("--size", gen_size, "Room side (open) or maze cells per side (maze)")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const Scenario scenario = load_scenario_file(run_scenario);
      if (run_instruction >= scenario.instructions.size()) {
        throw std::invalid_argument("--instruction " + std::to_string(run_instruction) + " out of range (scenario has " +
                                    std::to_string(scenario.instructions.size()) + ")");
      }
      TrajectoryStore store = run_args.experience.empty() ? TrajectoryStore{} : TrajectoryStore::load(run_args.experience);
      LlmBinding llm;
      const EpisodeConfig cfg = make_config(run_args, llm, run_args.experience.empty() ? nullptr : &store);
      const EpisodeRun out = run_episode(scenario, run_instruction, cfg);
      if (!run_trace.empty()) {
        std::ofstream f(run_trace, std::ios::binary | std::ios::trunc);
        if (!f) throw std::invalid_argument("cannot write trace to " + run_trace);
        f << out.trace;
      }
      if (!run_args.experience.empty()) store.write(run_args.experience);
      print_result(out.result, std::cout);
      std::cout << "decision_calls: " << out.decision_calls << (out.reused_experience ? " (experience reuse)" : "")
                << '\n';
      return out.result.aborted_reason ? kExitAbort : kExitOk;
    }

    if (*bench) {
      const auto suite = load_suite(bench_suite);
      if (suite.empty()) throw std::invalid_argument("no scenario files in " + bench_suite);
      TrajectoryStore store =
          bench_args.experience.empty() ? TrajectoryStore{} : TrajectoryStore::load(bench_args.experience);
      LlmBinding llm;
      SuiteConfig cfg;
      cfg.episode = make_config(bench_args, llm, bench_args.experience.empty() ? nullptr : &store);
      cfg.episodes_per_instruction = bench_reps;
      cfg.parallel = bench_parallel;
      cfg.skip_interactive = !bench_interactive;
      const auto results = run_suite(suite, cfg);
      if (results.empty()) throw std::invalid_argument("suite has no runnable instructions");
      if (!bench_args.experience.empty()) store.write(bench_args.experience);
      const MetricsReport report = build_report(results);
      ReportFormat fmt = ReportFormat::Table;
      if (bench_format == "csv" || (bench_format.empty() && std::filesystem::path(bench_report).extension() == ".csv")) {
        fmt = ReportFormat::Csv;
      }
      if (!bench_report.empty()) emit_report(report, fmt, bench_report);
      std::cout << render_report(report, ReportFormat::Table);
      int aborted = 0;
      for (const auto& r : results) aborted += r.aborted_reason ? 1 : 0;
      if (aborted > 0) std::cerr << aborted << " episode(s) aborted\n";
      return aborted > 0 ? kExitAbort : kExitOk;
    }

    if (*replay_cmd) {
      try {
        const EpisodeResult r = replay_file(replay_trace, replay_scenario.empty()
                                                              ? std::nullopt
                                                              : std::optional<std::filesystem::path>(replay_scenario));
        std::ifstream f(replay_trace, std::ios::binary);
        std::stringstream buf;
        buf << f.rdbuf();
        const EpisodeResult recorded = recorded_result(buf.str());
        print_result(r, std::cout);
        if (!(r == recorded)) {
          std::cerr << "replayed result differs from the recorded result\n";
          return kExitDivergence;
        }
        std::cout << "replay: ok\n";
        return kExitOk;
      } catch (const ReplayDivergence& e) {
        std::cerr << "divergence at step " << e.step() << ": " << e.what() << '\n';
        return kExitDivergence;
      } catch (const ReplayError& e) {
        std::cerr << "replay failed: " << e.what() << '\n';
        return kExitDivergence;
      }
    }

    if (*plan) {
      const Scenario scenario = load_scenario_file(plan_scenario);
      CoordinateMap cmap;
      TopoGraph graph;
      build_full_map(scenario.world, cmap, graph);
      if (plan_list) {
        for (NodeId n : graph.nodes()) std::cout << "Place " << n << ' ' << to_string(cmap.cell_of(n)) << '\n';
        return kExitOk;
      }
      const auto path = plan_backtrack(graph, plan_from, plan_to);
      for (std::size_t i = 0; i < path.size(); ++i) {
        std::cout << (i ? " -> " : "") << path[i] << ' ' << to_string(cmap.cell_of(path[i]));
      }
      std::cout << '\n';
      return kExitOk;
    }

    if (*gen) {
      const auto suite = gen_kind == "open" ? generate_open_suite(gen_count, gen_size, gen_size, gen_seed)
                                            : generate_maze_suite(gen_count, gen_size, gen_seed);
      write_suite(gen_out, suite);
      std::cout << "wrote " << suite.size() << " scenarios to " << gen_out << '\n';
      return kExitOk;
    }
  } catch (const ScenarioError& e) {
    std::cerr << "invalid scenario: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NoPathError& e) {
    std::cerr << e.what() << '\n';
    return kExitValidation;
  } catch (const GraphError& e) {
    std::cerr << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}
