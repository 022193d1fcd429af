#include "brainnav/decision.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <optional>
#include <regex>
#include <sstream>
#include <thread>

#include "brainnav/memory.hpp"

namespace brainnav {

namespace {

constexpr const char* kMovePhrases[4] = {"Move forward", "Turn right and move", "Turn around and move",
                                         "Turn left and move"};
constexpr std::size_t kMaxOptions = 26;
constexpr double kAdjacent = 1.0 + 1e-9;

ActionPlan stop_plan(std::string why, bool done) {
  return ActionPlan{std::move(why), {"stop"}, {MacroAction::stop()}, done};
}

std::string view_target(const ViewObservation& v) {
  return v.path_nodes.empty() ? std::string("the next place") : "Place " + std::to_string(v.path_nodes.front());
}

ActionPlan move_plan(int view, const ViewObservation& v, std::string why) {
  std::string step = kMovePhrases[view];
  step += " to " + view_target(v);
  return ActionPlan{std::move(why), {std::move(step)}, motions_for_view(view), false};
}

bool view_usable(const DecisionInput& input, int view) {
  return input.observation.views[view].traversable && !(view == 0 && input.collided_last);
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

std::vector<MacroAction> motions_for_view(int view) {
  switch (view) {
    case 0: return {MacroAction::forward()};
    case 1: return {MacroAction::turn_right(), MacroAction::forward()};
    case 2: return {MacroAction::backward()};
    case 3: return {MacroAction::turn_left(), MacroAction::forward()};
    default: throw std::invalid_argument("view index must be 0..3");
  }
}

ActionPlan decide_oracle(const DecisionInput& input, const TopoGraph& graph, const CoordinateMap& cmap,
                         const Goal& goal, const OracleOptions& options) {
  const auto& views = input.observation.views;

  if (const auto* og = std::get_if<ObjectGoal>(&goal)) {
    std::optional<int> best_view;
    double best = std::numeric_limits<double>::infinity();
    double nearest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) {
      for (const auto& obj : views[i].objects) {
        if (!labels_match(obj.label, og->label)) continue;
        nearest = std::min(nearest, obj.distance);
        if (view_usable(input, i) && obj.distance < best) {
          best = obj.distance;
          best_view = i;
        }
      }
    }
    if (nearest <= kAdjacent) return stop_plan("The " + og->label + " is right next to me.", true);
    if (best_view) {
      return move_plan(*best_view, views[*best_view],
                       "I can see the " + og->label + " " + std::to_string(static_cast<int>(std::lround(best))) +
                           " cells away; heading toward it.");
    }
  } else if (options.use_map) {
    const Cell target = std::get<CellGoal>(goal).cell;
    const Cell here = cmap.cell_of(input.current_node);
    if (manhattan(here, target) <= 1) return stop_plan("I have reached the goal location.", true);
    if (options.use_memory) {
      if (const auto node = cmap.find(target); node && graph.contains(*node)) {
        try {
          plan_backtrack(graph, input.current_node, *node);
          return ActionPlan{"The goal location is on the map; following the shortest known route.",
                            {"go to Place " + std::to_string(*node)},
                            {MacroAction::backtrack_to(*node)},
                            false};
        } catch (const NoPathError&) {
        }
      }
    }
  }

  if (options.use_memory) {
    for (NodeId n : input.unvisited) {
      std::vector<NodeId> path;
      try {
        path = plan_backtrack(graph, input.current_node, n);
      } catch (const NoPathError&) {
        continue;
      }
      if (input.collided_last && path.size() > 1 && !views[0].path_nodes.empty() &&
          path[1] == views[0].path_nodes.front()) {
        continue;
      }
      std::ostringstream why;
      why << "Exploring: the earliest unvisited place is Place " << n << ", " << (path.size() - 1)
          << " hops away.";
      return ActionPlan{why.str(), {"backtrack to Place " + std::to_string(n)}, {MacroAction::backtrack_to(n)}, false};
    }
    return stop_plan("Every reachable place has been explored.", false);
  }

  std::vector<int> open;
  for (int i = 0; i < 4; ++i) {
    if (view_usable(input, i)) open.push_back(i);
  }
  if (open.empty()) return stop_plan("No walkable direction.", false);
  const int pick = open[mix64(options.wander_seed) % open.size()];
  return move_plan(pick, views[pick], "No memory of where I have been; picking a walkable direction.");
}

ActionPlan decide_random(const DecisionInput& input, std::uint64_t seed) {
  std::vector<int> open;
  for (int i = 0; i < 4; ++i) {
    if (input.observation.views[i].traversable) open.push_back(i);
  }
  if (open.empty()) return stop_plan("No walkable direction.", false);
  const int pick = open[mix64(seed) % open.size()];
  return move_plan(pick, input.observation.views[pick], "random choice");
}

std::vector<ActionOption> enumerate_options(const DecisionInput& input) {
  std::vector<ActionOption> out;
  std::set<NodeId> offered;
  for (int i = 0; i < 4; ++i) {
    const auto& v = input.observation.views[i];
    if (!v.traversable) continue;
    ActionOption opt;
    opt.description = std::string(kMovePhrases[i]) + " to " + view_target(v);
    opt.motions = motions_for_view(i);
    if (!v.path_nodes.empty()) offered.insert(v.path_nodes.front());
    out.push_back(std::move(opt));
  }
  for (NodeId n : input.unvisited) {
    if (out.size() + 1 >= kMaxOptions) break;
    if (offered.count(n) != 0) continue;
    out.push_back({'?', "Backtrack to Place " + std::to_string(n), {MacroAction::backtrack_to(n)}, false});
  }
  out.push_back({'?', "Stop here", {MacroAction::stop()}, true});
  for (std::size_t i = 0; i < out.size(); ++i) out[i].letter = static_cast<char>('A' + i);
  return out;
}

Prompt build_prompt(const DecisionInput& input) {
  Prompt p;
  p.options = enumerate_options(input);
  std::ostringstream os;
  os << "You are the decision module of a mobile robot navigating a real indoor environment. Use the "
        "perception, map and history below to choose the next action.\n\n";
  os << "Instruction: " << input.instruction << '\n';
  os << "Task category: " << category_name(input.category) << "\n\n";
  os << "Perception:\n";
  for (const auto& v : input.observation.views) os << "  " << v.caption << '\n';
  os << "\nTopological map:\n";
  if (input.topo_snapshot.empty()) {
    os << "  (unavailable)\n";
  } else {
    std::istringstream lines(input.topo_snapshot);
    for (std::string line; std::getline(lines, line);) os << "  " << line << '\n';
  }
  os << "Current place: Place " << input.current_node << '\n';
  os << "Unvisited places:";
  if (input.unvisited.empty()) os << " none";
  bool first = true;
  for (NodeId n : input.unvisited) {
    os << (first ? " " : ", ") << "Place " << n;
    first = false;
  }
  os << "\n\nNavigation history:\n";
  if (input.history_digest.empty()) os << "  (none)\n";
  for (const auto& h : input.history_digest) os << "  " << h << '\n';
  os << "Last motion collided: " << (input.collided_last ? "yes" : "no") << "\n\n";
  os << "Options:\n";
  for (const auto& o : p.options) os << "  " << o.letter << ". " << o.description << '\n';
  os << "\nThink step by step about which option best follows the instruction, then finish with a line of "
        "the form \"Action: <letter>\".\n";
  p.text = os.str();
  return p;
}

ActionPlan parse_response(std::string_view text, std::span<const ActionOption> options) {
  static const std::regex kToken(R"(\baction\s*:\s*\**\s*\(?([A-Za-z])\b)", std::regex::icase);
  const std::string raw(text);
  std::smatch m;
  if (!std::regex_search(raw, m, kToken)) throw ResponseParseError("no 'Action: <letter>' token in response", raw);
  const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(m[1].str()[0])));
  const auto it = std::find_if(options.begin(), options.end(), [&](const ActionOption& o) { return o.letter == letter; });
  if (it == options.end()) {
    throw ResponseParseError(std::string("action letter '") + letter + "' is not among the options", raw);
  }
  ActionPlan plan;
  plan.decision = trim(std::string_view(raw).substr(0, static_cast<std::size_t>(m.position(0))));
  plan.action_sequence = {it->description};
  plan.motion_commands = it->motions;
  plan.declared_done = it->stop;
  return plan;
}

std::string render_response(char letter, std::string_view rationale) {
  return "Thought: " + std::string(rationale) + "\nAction: " + std::string(1, letter) + "\n";
}

std::string corrective_suffix() {
  return "\n\nYour previous reply could not be parsed. Reply again and end with exactly one line of the form "
         "\"Action: <letter>\" using one of the option letters above.";
}

LlmDecision decide_llm(const DecisionInput& input, const TopoGraph& graph, const CoordinateMap& cmap,
                       const Goal& goal, ChatClient& client, const RetryPolicy& retry, const OracleOptions& oracle) {
  const Prompt prompt = build_prompt(input);
  LlmDecision out;
  out.prompt = prompt.text;
  int parse_failures = 0;
  int transport_failures = 0;
  auto backoff = retry.backoff;
  std::string text = prompt.text;
  while (true) {
    std::string reply;
    try {
      reply = client.complete({{"user", text, {}}});
    } catch (const TransportError& e) {
      if (++transport_failures > retry.max_retries) {
        throw DecisionUnavailable(std::string("decision model unavailable: ") + e.what());
      }
      if (backoff.count() > 0) {
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
      continue;
    }
    out.responses.push_back(reply);
    try {
      out.plan = parse_response(reply, prompt.options);
      return out;
    } catch (const ResponseParseError&) {
      if (parse_failures == retry.max_retries) break;
      ++parse_failures;
      out.retries = parse_failures;
      text = prompt.text + corrective_suffix();
    }
  }
  out.fallback = true;
  out.plan = decide_oracle(input, graph, cmap, goal, oracle);
  return out;
}

}  // namespace brainnav
