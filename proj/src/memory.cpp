#include "brainnav/memory.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include "brainnav/scenario.hpp"
#include "json.hpp"

namespace brainnav {

void ActionHistory::record_step(StepRecord record) {
  const int expected = static_cast<int>(steps_.size()) + 1;
  if (record.t != expected) {
    throw std::invalid_argument("step index " + std::to_string(record.t) + " does not follow " +
                                std::to_string(expected - 1));
  }
  if (record.actions.empty()) throw std::invalid_argument("step record must carry at least one action");
  arrived_.insert(record.node_after);
  steps_.push_back(std::move(record));
}

bool ActionHistory::detect_revisit(NodeId node) const { return arrived_.count(node) != 0; }

std::vector<std::string> ActionHistory::digest(std::size_t k) const {
  std::vector<std::string> out;
  const std::size_t first = steps_.size() > k ? steps_.size() - k : 0;
  for (std::size_t i = first; i < steps_.size(); ++i) {
    const auto& s = steps_[i];
    std::ostringstream os;
    os << "t=" << s.t << ": ";
    for (std::size_t j = 0; j < s.actions.size(); ++j) os << (j ? "," : "") << to_string(s.actions[j]);
    os << " (Place " << s.node_before << " -> Place " << s.node_after << ")";
    if (s.collided) os << " collided";
    out.push_back(os.str());
  }
  return out;
}

std::vector<NodeId> plan_backtrack(const TopoGraph& graph, NodeId from, NodeId to) {
  if (!graph.contains(from)) throw GraphError("unknown node " + std::to_string(from));
  if (!graph.contains(to)) throw GraphError("unknown node " + std::to_string(to));
  if (from == to) return {from};

  // Hop distances to `to`; the greedy smallest-id descent from `from` then
  // yields the lexicographically smallest shortest path.
  std::unordered_map<NodeId, int> dist{{to, 0}};
  std::deque<NodeId> queue{to};
  while (!queue.empty() && !dist.count(from)) {
    const NodeId v = queue.front();
    queue.pop_front();
    for (NodeId n : graph.neighbors(v)) {
      if (dist.try_emplace(n, dist[v] + 1).second) queue.push_back(n);
    }
  }
  const auto it = dist.find(from);
  if (it == dist.end()) {
    throw NoPathError("no path from node " + std::to_string(from) + " to node " + std::to_string(to));
  }

  std::vector<NodeId> path{from};
  NodeId cur = from;
  for (int remaining = it->second; remaining > 0; --remaining) {
    for (NodeId n : graph.neighbors(cur)) {  // ascending
      const auto d = dist.find(n);
      if (d != dist.end() && d->second == remaining - 1) {
        cur = n;
        break;
      }
    }
    path.push_back(cur);
  }
  return path;
}

std::string normalize_instruction(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::optional<std::vector<MacroAction>> TrajectoryStore::lookup(const ExperienceKey& key) const {
  std::shared_lock lock(mu_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void TrajectoryStore::save(const ExperienceKey& key, const std::vector<MacroAction>& actions, const GridWorld& world,
                           const std::vector<Cell>& goals, double success_radius_m) {
  AgentPose pose = world.start();
  for (const auto& a : actions) {
    if (a.kind == MacroKind::BacktrackTo) {
      throw ExperienceRejected("stored trajectories must contain primitive actions only");
    }
    pose = apply_macro(world, pose, a).pose_after;
  }
  const double err = goal_error_m(world, pose, goals);
  if (!(err <= success_radius_m)) {
    throw ExperienceRejected("replayed trajectory ends " + std::to_string(err) + " m from the goal");
  }
  std::unique_lock lock(mu_);
  entries_[key] = actions;
}

std::size_t TrajectoryStore::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

TrajectoryStore TrajectoryStore::load(const std::filesystem::path& path) {
  TrajectoryStore store;
  std::ifstream in(path);
  if (!in) return store;
  const auto doc = nlohmann::json::parse(in);
  if (doc.value("version", 0) != 1) throw std::runtime_error("unsupported experience file version in " + path.string());
  for (const auto& e : doc.at("entries")) {
    ExperienceKey key{e.at("fingerprint").get<std::string>(), e.at("instruction").get<std::string>()};
    std::vector<MacroAction> actions;
    for (const auto& a : e.at("actions")) actions.push_back(parse_macro(a.get<std::string>()));
    store.entries_[std::move(key)] = std::move(actions);
  }
  return store;
}

void TrajectoryStore::write(const std::filesystem::path& path) const {
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["entries"] = nlohmann::ordered_json::array();
  {
    std::shared_lock lock(mu_);
    for (const auto& [key, actions] : entries_) {
      nlohmann::ordered_json e;
      e["fingerprint"] = key.scenario_fingerprint;
      e["instruction"] = key.instruction_norm;
      e["actions"] = nlohmann::ordered_json::array();
      for (const auto& a : actions) e["actions"].push_back(to_string(a));
      doc["entries"].push_back(std::move(e));
    }
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write experience file " + tmp.string());
    out << doc.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace brainnav
