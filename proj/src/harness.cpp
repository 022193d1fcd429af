#include "brainnav/harness.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <fstream>
#include <sstream>
#include <thread>

#include "brainnav/executor.hpp"
#include "brainnav/spatial.hpp"
#include "json.hpp"

namespace brainnav {

namespace {

using ojson = nlohmann::ordered_json;

ojson pose_json(const AgentPose& p) {
  return {{"x", p.cell.x}, {"y", p.cell.y}, {"heading", p.heading.degrees()}};
}

AgentPose pose_from_json(const nlohmann::json& j) {
  return {{j.at("x").get<int>(), j.at("y").get<int>()}, Heading::from_degrees(j.at("heading").get<int>())};
}

ojson result_json(const EpisodeResult& r) {
  ojson j;
  j["type"] = "result";
  j["scenario"] = r.scenario;
  j["instruction"] = r.instruction;
  j["category"] = std::string(category_name(r.category));
  j["success"] = r.success;
  j["steps"] = r.steps;
  j["shortest"] = r.shortest;
  j["final_error_m"] = r.final_error_m;
  j["revisited"] = r.revisited;
  j["backtracked_then_succeeded"] = r.backtracked_then_succeeded;
  j["seed"] = r.seed;
  j["aborted_reason"] = r.aborted_reason ? ojson(*r.aborted_reason) : ojson(nullptr);
  return j;
}

EpisodeResult result_from_json(const nlohmann::json& j) {
  EpisodeResult r;
  r.scenario = j.at("scenario").get<std::string>();
  r.instruction = j.at("instruction").get<std::string>();
  r.category = parse_category(j.at("category").get<std::string>());
  r.success = j.at("success").get<bool>();
  r.steps = j.at("steps").get<int>();
  r.shortest = j.at("shortest").get<int>();
  r.final_error_m = j.at("final_error_m").get<double>();
  r.revisited = j.at("revisited").get<bool>();
  r.backtracked_then_succeeded = j.at("backtracked_then_succeeded").get<bool>();
  r.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("aborted_reason").is_null()) r.aborted_reason = j.at("aborted_reason").get<std::string>();
  return r;
}

std::vector<nlohmann::json> parse_lines(std::string_view trace) {
  std::vector<nlohmann::json> out;
  std::size_t pos = 0;
  while (pos < trace.size()) {
    auto end = trace.find('\n', pos);
    if (end == std::string_view::npos) end = trace.size();
    const auto line = trace.substr(pos, end - pos);
    if (!line.empty()) {
      try {
        out.push_back(nlohmann::json::parse(line));
      } catch (const nlohmann::json::parse_error& e) {
        throw ReplayError(std::string("malformed trace line: ") + e.what());
      }
    }
    pos = end + 1;
  }
  return out;
}

ojson motions_json(const std::vector<MotionCommand>& ms) {
  auto arr = ojson::array();
  for (const auto& m : ms) arr.push_back(to_string(m));
  return arr;
}

/// Revisit bookkeeping shared by the live runner and replay: a decision
/// cycle that ends on a different node that was already arrived at (or is
/// the start node) counts as a revisit.
class RevisitTracker {
 public:
  explicit RevisitTracker(NodeId start) : start_(start) {}

  bool on_step(NodeId before, NodeId after, const ActionHistory& history) {
    const bool hit = after != before && (after == start_ || history.detect_revisit(after));
    revisited_ = revisited_ || hit;
    return hit;
  }
  bool revisited() const { return revisited_; }

 private:
  NodeId start_;
  bool revisited_ = false;
};

}  // namespace

Ablations Ablations::parse(std::string_view list) {
  Ablations a;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    auto end = list.find(',', pos);
    if (end == std::string_view::npos) end = list.size();
    auto name = list.substr(pos, end - pos);
    while (!name.empty() && name.front() == ' ') name.remove_prefix(1);
    while (!name.empty() && name.back() == ' ') name.remove_suffix(1);
    if (name == "memory") {
      a.memory = true;
    } else if (name == "spatial") {
      a.spatial = true;
    } else if (name == "perception") {
      a.perception = true;
    } else if (name == "decision") {
      a.decision = true;
    } else if (name == "executor") {
      a.executor = true;
    } else if (!name.empty() && name != "none") {
      throw std::invalid_argument("unknown module '" + std::string(name) + "' in ablation list");
    }
    pos = end + 1;
  }
  return a;
}

std::vector<std::string> Ablations::names() const {
  std::vector<std::string> out;
  if (memory) out.emplace_back("memory");
  if (spatial) out.emplace_back("spatial");
  if (perception) out.emplace_back("perception");
  if (decision) out.emplace_back("decision");
  if (executor) out.emplace_back("executor");
  return out;
}

std::string_view policy_name(PolicyKind p) { return p == PolicyKind::Oracle ? "oracle" : "llm"; }

PolicyKind parse_policy(std::string_view name) {
  if (name == "oracle") return PolicyKind::Oracle;
  if (name == "llm") return PolicyKind::Llm;
  throw std::invalid_argument("unknown policy '" + std::string(name) + "' (expected oracle or llm)");
}

int shortest_path_cells(const Scenario& scenario, const Instruction& instruction) {
  if (instruction.optimal_path_cells) return *instruction.optimal_path_cells;
  const auto l =
      grid_shortest_path(scenario.world, scenario.world.start().cell, goal_cells(scenario.world, instruction.goal));
  return l.value_or(0);
}

void build_full_map(const GridWorld& world, CoordinateMap& cmap, TopoGraph& graph) {
  const Cell start = world.start().cell;
  graph.add_node(cmap.node_id_for(start));
  std::deque<Cell> queue{start};
  std::set<Cell> seen{start};
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    for (int h = 0; h < 360; h += 90) {
      const Cell n = c + Heading::from_degrees(h).offset();
      if (!world.is_open(n)) continue;
      graph.connect(cmap.node_id_for(c), cmap.node_id_for(n));
      if (seen.insert(n).second) queue.push_back(n);
    }
  }
}

EpisodeRun run_episode(const Scenario& scenario, std::size_t instruction_index, const EpisodeConfig& config) {
  const GridWorld& world = scenario.world;
  const Instruction& ins = scenario.instructions.at(instruction_index);
  const auto goals = goal_cells(world, ins.goal);
  const Ablations& abl = config.ablations;
  if (config.policy == PolicyKind::Llm && config.llm == nullptr && !abl.decision) {
    throw std::invalid_argument("run_episode: llm policy requires a chat client");
  }

  EpisodeRun run;
  EpisodeResult& result = run.result;
  result.scenario = world.name();
  result.instruction = ins.text;
  result.category = ins.category;
  result.seed = config.seed;
  result.shortest = shortest_path_cells(scenario, ins);

  std::ostringstream trace;
  {
    ojson h;
    h["type"] = "header";
    h["version"] = kTraceVersion;
    h["scenario"] = world.name();
    h["scenario_path"] = scenario.source_path;
    h["fingerprint"] = scenario.fingerprint;
    h["instruction_index"] = instruction_index;
    h["instruction"] = ins.text;
    h["policy"] = std::string(policy_name(config.policy));
    h["seed"] = config.seed;
    h["ablations"] = abl.names();
    h["max_steps"] = config.max_steps;
    h["success_radius_m"] = config.success_radius_m;
    h["perception_range"] = config.perception.range;
    trace << h.dump() << '\n';
  }

  AgentPose pose = world.start();
  CoordinateMap cmap;
  TopoGraph graph;
  ActionHistory history;
  const NodeId start_node = cmap.node_id_for(pose.cell);
  graph.add_node(start_node);
  std::set<NodeId> visited{start_node};
  RevisitTracker revisits(start_node);
  std::vector<MacroAction> executed;
  bool stopped = false;
  bool budget_spent = false;

  // Executes one primitive action and writes its trace line. Returns false
  // once the episode must not execute anything further in this cycle.
  auto execute = [&](int t, int k, MacroAction a, ojson line) -> std::pair<bool, bool> {
    const AgentPose before = pose;
    const NodeId node_before = cmap.node_id_for(pose.cell);
    bool collided = false;
    bool keep_going = true;
    std::vector<MotionCommand> motions;
    if (abl.executor) {
      motions = {MotionCommand::halt()};
    } else if (a.kind == MacroKind::Stop) {
      motions = to_motion(a);
      stopped = true;
      keep_going = false;
      executed.push_back(a);
    } else {
      motions = to_motion(a);
      const StepOutcome out = apply_macro(world, pose, a);
      ++result.steps;
      executed.push_back(a);
      pose = out.pose_after;
      collided = out.collided;
      if (out.moved) {
        const NodeId n = cmap.node_id_for(pose.cell);
        if (n != node_before) graph.connect(node_before, n);
        visited.insert(n);
      }
      if (collided) keep_going = false;
      if (result.steps >= config.max_steps) {
        budget_spent = true;
        keep_going = false;
      }
    }
    ojson rec;
    rec["type"] = "step";
    rec["t"] = t;
    rec["k"] = k;
    rec["action"] = to_string(a);
    rec["motion_commands"] = motions_json(motions);
    rec["pose_before"] = pose_json(before);
    rec["pose_after"] = pose_json(pose);
    rec["node_before"] = node_before;
    rec["node_after"] = cmap.node_id_for(pose.cell);
    rec["collided"] = collided;
    for (auto& [key, value] : line.items()) rec[key] = value;
    trace << rec.dump() << '\n';
    return {keep_going, collided};
  };

  std::optional<ExperienceKey> key;
  if (!abl.memory && config.experience != nullptr) key = ExperienceKey::make(scenario.fingerprint, ins.text);

  if (key) {
    if (auto stored = config.experience->lookup(*key)) {
      run.reused_experience = true;
      if (stored->empty() || stored->back().kind != MacroKind::Stop) stored->push_back(MacroAction::stop());
      const NodeId node_before = start_node;
      std::vector<MacroAction> done;
      bool collided = false;
      for (std::size_t k = 0; k < stored->size(); ++k) {
        ojson extra;
        extra["source"] = "experience";
        const auto [more, hit] = execute(1, static_cast<int>(k), (*stored)[k], extra);
        done.push_back((*stored)[k]);
        collided = collided || hit;
        if (!more) break;
      }
      const NodeId node_after = cmap.node_id_for(pose.cell);
      revisits.on_step(node_before, node_after, history);
      history.record_step({1, done, node_before, node_after, "experience reuse", collided});
    }
  }

  bool collided_last = false;
  for (int t = 1; !run.reused_experience && !stopped && !budget_spent && t <= config.max_steps; ++t) {
    const NodeId node_before = cmap.node_id_for(pose.cell);
    for (const auto& c : gen_candidates(pose)) cmap.node_id_for(c.cell);

    PerceptorConfig pcfg = config.perception;
    pcfg.seed = mix64(config.seed ^ mix64(static_cast<std::uint64_t>(t)));
    const SemanticObservation obs = perceive(world, pose, cmap, pcfg);
    for (const auto& v : abl.perception ? decltype(obs.views){} : obs.views) {
      NodeId prev = node_before;
      for (NodeId n : v.path_nodes) {
        graph.connect(prev, n);
        prev = n;
      }
    }

    DecisionInput input;
    input.instruction = ins.text;
    input.category = ins.category;
    input.observation = obs;
    if (abl.perception) {
      for (int i = 0; i < 4; ++i) {
        input.observation.views[i] = ViewObservation{};
        input.observation.views[i].caption = "nothing perceived";
      }
    } else if (abl.spatial) {
      for (auto& v : input.observation.views) v.path_nodes.clear();
    }
    input.current_node = node_before;
    if (!abl.spatial) input.topo_snapshot = graph.snapshot_text();
    if (!abl.memory && !abl.spatial) {
      for (NodeId n : graph.nodes()) {
        if (!visited.count(n)) input.unvisited.insert(n);
      }
    }
    if (!abl.memory) input.history_digest = history.digest(config.history_k);
    input.collided_last = collided_last;

    const std::uint64_t step_seed = mix64(config.seed + 0x5bd1e995ULL * static_cast<std::uint64_t>(t));
    ActionPlan plan;
    ojson extra;
    try {
      if (abl.decision) {
        plan = decide_random(input, step_seed);
        extra["source"] = "random";
      } else if (config.policy == PolicyKind::Oracle) {
        plan = decide_oracle(input, graph, cmap, ins.goal, {!abl.memory && !abl.spatial, !abl.spatial, step_seed});
        extra["source"] = "oracle";
      } else {
        const LlmDecision d =
            decide_llm(input, graph, cmap, ins.goal, *config.llm, config.llm_retry, {!abl.memory && !abl.spatial, !abl.spatial, step_seed});
        plan = d.plan;
        extra["source"] = "llm";
        extra["prompt"] = d.prompt;
        extra["responses"] = d.responses;
        extra["retries"] = d.retries;
        extra["fallback"] = d.fallback;
      }
    } catch (const DecisionUnavailable& e) {
      result.aborted_reason = e.what();
      break;
    }
    ++run.decision_calls;
    extra["observation"] = obs.digest();
    extra["decision"] = plan.decision;
    auto planned = ojson::array();
    for (const auto& m : plan.motion_commands) planned.push_back(to_string(m));
    extra["plan"] = planned;
    extra["declared_done"] = plan.declared_done;

    std::vector<MacroAction> done;
    bool collided_step = false;
    int k = 0;
    bool more = true;
    for (const auto& m : plan.motion_commands) {
      std::vector<MacroAction> expanded{m};
      if (m.kind == MacroKind::BacktrackTo) {
        try {
          const auto path = plan_backtrack(graph, cmap.node_id_for(pose.cell), m.target);
          expanded = execute_backtrack(path, pose, cmap);
        } catch (const std::runtime_error&) {
          expanded.clear();
        }
      }
      for (const auto& a : expanded) {
        ojson line = k == 0 ? extra : ojson{{"source", extra["source"]}};
        const auto [go_on, hit] = execute(t, k++, a, std::move(line));
        done.push_back(a);
        collided_step = collided_step || hit;
        if (!go_on) {
          more = false;
          break;
        }
      }
      if (!more) break;
    }
    if (done.empty()) {
      // Nothing executable in the plan: record an explicit halt for this cycle.
      ojson line = extra;
      execute(t, 0, MacroAction::stop(), std::move(line));
      done.push_back(MacroAction::stop());
    }
    const NodeId node_after = cmap.node_id_for(pose.cell);
    revisits.on_step(node_before, node_after, history);
    history.record_step({t, std::move(done), node_before, node_after, obs.digest(), collided_step});
    collided_last = collided_step;
  }

  result.final_error_m = goal_error_m(world, pose, goals);
  result.success = stopped && !result.aborted_reason && result.final_error_m <= config.success_radius_m;
  result.revisited = revisits.revisited();
  result.backtracked_then_succeeded = result.revisited && result.success;

  if (key && result.success && !run.reused_experience) {
    try {
      config.experience->save(*key, executed, world, goals, config.success_radius_m);
    } catch (const ExperienceRejected&) {
    }
  }

  ojson r = result_json(result);
  r["decision_calls"] = run.decision_calls;
  r["reused_experience"] = run.reused_experience;
  trace << r.dump() << '\n';
  run.trace = trace.str();
  return run;
}

EpisodeResult recorded_result(std::string_view trace) {
  const auto lines = parse_lines(trace);
  if (lines.empty() || lines.back().value("type", "") != "result") throw ReplayError("trace has no result record");
  return result_from_json(lines.back());
}

EpisodeResult replay(std::string_view trace, const Scenario& scenario) {
  const auto lines = parse_lines(trace);
  if (lines.empty() || lines.front().value("type", "") != "header") throw ReplayError("trace has no header record");
  const auto& header = lines.front();
  if (header.value("version", -1) != kTraceVersion) {
    throw ReplayError("trace version " + std::to_string(header.value("version", -1)) + " is not supported (expected " +
                      std::to_string(kTraceVersion) + ")");
  }
  if (header.value("fingerprint", "") != scenario.fingerprint) {
    throw ReplayError("scenario fingerprint mismatch: the trace was recorded against a different scenario file");
  }
  const auto index = header.at("instruction_index").get<std::size_t>();
  if (index >= scenario.instructions.size()) throw ReplayError("instruction index out of range");
  const Instruction& ins = scenario.instructions[index];
  const GridWorld& world = scenario.world;
  const double radius = header.at("success_radius_m").get<double>();

  EpisodeResult result;
  result.scenario = world.name();
  result.instruction = ins.text;
  result.category = ins.category;
  result.seed = header.at("seed").get<std::uint64_t>();
  result.shortest = shortest_path_cells(scenario, ins);
  if (lines.back().value("type", "") == "result" && !lines.back().at("aborted_reason").is_null()) {
    result.aborted_reason = lines.back().at("aborted_reason").get<std::string>();
  }

  AgentPose pose = world.start();
  CoordinateMap cmap;
  ActionHistory history;
  const NodeId start_node = cmap.node_id_for(pose.cell);
  RevisitTracker revisits(start_node);
  bool stopped = false;

  int current_t = 0;
  NodeId cycle_start = start_node;
  std::vector<MacroAction> cycle_actions;
  auto close_cycle = [&]() {
    if (current_t == 0) return;
    const NodeId after = cmap.node_id_for(pose.cell);
    revisits.on_step(cycle_start, after, history);
    history.record_step({static_cast<int>(history.size()) + 1, cycle_actions, cycle_start, after, {}, false});
    cycle_actions.clear();
  };

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.value("type", "") != "step") continue;
    const int t = line.at("t").get<int>();
    if (t != current_t) {
      close_cycle();
      current_t = t;
      cycle_start = cmap.node_id_for(pose.cell);
    }
    const MacroAction a = parse_macro(line.at("action").get<std::string>());
    const auto motions = line.at("motion_commands");
    const bool halted = motions.size() == 1 && motions[0] == "Halt" && a.kind != MacroKind::Stop;
    if (pose_from_json(line.at("pose_before")) != pose) {
      throw ReplayDivergence(t, "pose before step " + std::to_string(t) + " diverges: recorded " +
                                    to_string(pose_from_json(line.at("pose_before"))) + ", replayed " +
                                    to_string(pose));
    }
    if (a.kind == MacroKind::Stop) {
      if (motions.size() == 1 && motions[0] == "Halt" && header.contains("ablations") &&
          std::find(header["ablations"].begin(), header["ablations"].end(), "executor") != header["ablations"].end()) {
        // Executor ablated: Stop was never carried out.
      } else {
        stopped = true;
      }
    } else if (!halted) {
      pose = apply_macro(world, pose, a).pose_after;
      ++result.steps;
    }
    cycle_actions.push_back(a);
    const AgentPose recorded_after = pose_from_json(line.at("pose_after"));
    if (recorded_after != pose) {
      throw ReplayDivergence(t, "pose after step " + std::to_string(t) + " diverges: recorded " +
                                    to_string(recorded_after) + ", replayed " + to_string(pose));
    }
  }
  close_cycle();

  result.final_error_m = goal_error_m(world, pose, goal_cells(world, ins.goal));
  result.success = stopped && !result.aborted_reason && result.final_error_m <= radius;
  result.revisited = revisits.revisited();
  result.backtracked_then_succeeded = result.revisited && result.success;
  return result;
}

EpisodeResult replay_file(const std::filesystem::path& trace_path,
                          const std::optional<std::filesystem::path>& scenario_override) {
  std::ifstream in(trace_path, std::ios::binary);
  if (!in) throw ReplayError("cannot read trace " + trace_path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::filesystem::path scenario_path;
  if (scenario_override) {
    scenario_path = *scenario_override;
  } else {
    const auto lines = parse_lines(text);
    if (lines.empty()) throw ReplayError("empty trace");
    scenario_path = lines.front().value("scenario_path", "");
    if (scenario_path.empty()) throw ReplayError("trace does not name its scenario file; pass one explicitly");
  }
  return replay(text, load_scenario_file(scenario_path));
}

std::vector<Scenario> load_suite(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Scenario> suite;
  suite.reserve(files.size());
  for (const auto& f : files) {
    try {
      suite.push_back(load_scenario_file(f));
    } catch (const ScenarioError& e) {
      throw ScenarioError(f.filename().string() + ":" + e.field(), e.what());
    }
  }
  return suite;
}

std::uint64_t episode_seed(std::uint64_t base, std::size_t scenario, std::size_t instruction, int repetition) {
  return mix64(base ^ mix64((static_cast<std::uint64_t>(scenario) << 32) ^ (static_cast<std::uint64_t>(instruction) << 16) ^
                            static_cast<std::uint64_t>(repetition)));
}

std::vector<EpisodeResult> run_suite(const std::vector<Scenario>& suite, const SuiteConfig& config) {
  struct Task {
    std::size_t scenario;
    std::size_t instruction;
    int repetition;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < suite.size(); ++s) {
    for (std::size_t i = 0; i < suite[s].instructions.size(); ++i) {
      if (config.skip_interactive && suite[s].instructions[i].category == Category::Interactive) continue;
      for (int r = 0; r < config.episodes_per_instruction; ++r) tasks.push_back({s, i, r});
    }
  }
  std::vector<EpisodeResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t idx = next++; idx < tasks.size(); idx = next++) {
      const Task& task = tasks[idx];
      EpisodeConfig cfg = config.episode;
      cfg.seed = episode_seed(config.episode.seed, task.scenario, task.instruction, task.repetition);
      results[idx] = run_episode(suite[task.scenario], task.instruction, cfg).result;
    }
  };
  const int threads = std::max(1, config.parallel);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  return results;
}

}  // namespace brainnav
