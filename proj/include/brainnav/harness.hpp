#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "brainnav/decision.hpp"
#include "brainnav/memory.hpp"
#include "brainnav/metrics.hpp"
#include "brainnav/perception.hpp"
#include "brainnav/remote.hpp"
#include "brainnav/scenario.hpp"

namespace brainnav {

inline constexpr int kTraceVersion = 1;

/// Modules switched off for an ablation run.
struct Ablations {
  bool memory = false;
  bool spatial = false;
  bool perception = false;
  bool decision = false;
  bool executor = false;

  /// Comma-separated subset of memory,spatial,perception,decision,executor.
  /// Throws std::invalid_argument on an unknown name.
  static Ablations parse(std::string_view list);
  std::vector<std::string> names() const;
  bool operator==(const Ablations&) const = default;
};

enum class PolicyKind { Oracle, Llm };

std::string_view policy_name(PolicyKind p);
PolicyKind parse_policy(std::string_view name);

struct EpisodeConfig {
  PolicyKind policy = PolicyKind::Oracle;
  Ablations ablations;
  /// Cap on executed macro actions, and on decision cycles.
  int max_steps = 200;
  std::uint64_t seed = 0;
  double success_radius_m = 1.0;
  PerceptorConfig perception;
  std::size_t history_k = 10;
  /// Required for PolicyKind::Llm.
  ChatClient* llm = nullptr;
  RetryPolicy llm_retry;
  /// Optional cross-episode store. Consulted before the loop and updated
  /// after a success unless memory is ablated.
  TrajectoryStore* experience = nullptr;
};

struct EpisodeRun {
  EpisodeResult result;
  /// Line-delimited JSON: header, one record per executed macro action,
  /// result.
  std::string trace;
  int decision_calls = 0;
  bool reused_experience = false;
};

/// Runs one instruction of `scenario` through the perceive -> map -> decide
/// -> execute loop. Never throws for in-episode failures; an unavailable
/// decision model sets `aborted_reason`.
EpisodeRun run_episode(const Scenario& scenario, std::size_t instruction_index, const EpisodeConfig& config);

class ReplayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ReplayDivergence : public ReplayError {
 public:
  ReplayDivergence(int t, const std::string& what) : ReplayError(what), t_(t) {}
  int step() const { return t_; }

 private:
  int t_;
};

/// Re-executes the recorded macro actions against `scenario`, checking every
/// recorded pose, and recomputes the result. Throws ReplayError on a version
/// or fingerprint mismatch and ReplayDivergence on a pose mismatch.
EpisodeResult replay(std::string_view trace, const Scenario& scenario);

/// Loads the scenario named in the trace header (or `scenario_override`)
/// and replays.
EpisodeResult replay_file(const std::filesystem::path& trace_path,
                          const std::optional<std::filesystem::path>& scenario_override = std::nullopt);

/// The result record stored at the end of a trace.
EpisodeResult recorded_result(std::string_view trace);

/// Shortest path length used for SPL: the declared optimal_path_cells, or a
/// grid BFS from the start pose.
int shortest_path_cells(const Scenario& scenario, const Instruction& instruction);

/// Registers every open cell reachable from the start (BFS, N/E/S/W order)
/// and connects 4-neighbours.
void build_full_map(const GridWorld& world, CoordinateMap& cmap, TopoGraph& graph);

struct SuiteConfig {
  EpisodeConfig episode;
  int episodes_per_instruction = 1;
  int parallel = 1;
  bool skip_interactive = true;
};

/// Every *.json scenario in `dir`, sorted by file name.
std::vector<Scenario> load_suite(const std::filesystem::path& dir);

/// Runs every (scenario, instruction, repetition) triple. Results come back
/// in that order regardless of `parallel`. Seeds are derived from
/// config.episode.seed and the triple.
std::vector<EpisodeResult> run_suite(const std::vector<Scenario>& suite, const SuiteConfig& config);

std::uint64_t episode_seed(std::uint64_t base, std::size_t scenario, std::size_t instruction, int repetition);

}  // namespace brainnav
