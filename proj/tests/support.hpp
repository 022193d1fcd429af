#pragma once

#include <deque>
#include <map>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "brainnav/harness.hpp"
#include "brainnav/remote.hpp"
#include "brainnav/world.hpp"

namespace testkit {

using namespace brainnav;

inline GridWorld make_world(int w, int h, std::vector<Cell> obstacles = {}, std::vector<SimObject> objects = {},
                            AgentPose start = {{0, 0}, Heading::north()}) {
  return GridWorld("test", w, h, 0.5, std::move(obstacles), std::move(objects), start);
}

inline Scenario make_scenario(const GridWorld& world, std::vector<Instruction> instructions) {
  return load_scenario(scenario_to_text(world, instructions));
}

// Canned chat model: each call pops the next scripted reply. A reply equal
// to kFail throws TransportError instead.
class ScriptedChat : public ChatClient {
 public:
  static constexpr const char* kFail = "\x01transport-failure";

  explicit ScriptedChat(std::vector<std::string> replies, std::string fallback_reply = kFail)
      : replies_(replies.begin(), replies.end()), fallback_(std::move(fallback_reply)) {}

  std::string complete(const std::vector<ChatMessage>& messages) override {
    requests.push_back(messages);
    std::string r = fallback_;
    if (!replies_.empty()) {
      r = replies_.front();
      replies_.pop_front();
    }
    if (r == kFail) throw TransportError("scripted transport failure");
    return r;
  }

  std::vector<std::vector<ChatMessage>> requests;

 private:
  std::deque<std::string> replies_;
  std::string fallback_;
};

// Plain BFS hop distance, used as an oracle against plan_backtrack.
inline int bfs_hops(const std::map<NodeId, std::set<NodeId>>& adj, NodeId from, NodeId to) {
  std::map<NodeId, int> d{{from, 0}};
  std::deque<NodeId> q{from};
  while (!q.empty()) {
    const NodeId v = q.front();
    q.pop_front();
    if (v == to) return d[v];
    for (NodeId n : adj.at(v)) {
      if (d.emplace(n, d[v] + 1).second) q.push_back(n);
    }
  }
  return -1;
}

// Lexicographically smallest shortest simple path, by exhaustive DFS over
// every simple path. Empty when unreachable.
inline std::vector<NodeId> brute_force_path(const std::map<NodeId, std::set<NodeId>>& adj, NodeId from, NodeId to) {
  std::vector<NodeId> best;
  std::vector<NodeId> cur{from};
  std::set<NodeId> on{from};
  auto dfs = [&](auto&& self, NodeId v) -> void {
    if (v == to) {
      if (best.empty() || cur.size() < best.size() || (cur.size() == best.size() && cur < best)) best = cur;
      return;
    }
    for (NodeId n : adj.at(v)) {
      if (on.count(n)) continue;
      on.insert(n);
      cur.push_back(n);
      self(self, n);
      cur.pop_back();
      on.erase(n);
    }
  };
  dfs(dfs, from);
  return best;
}

inline EpisodeResult result(bool success, int steps, int shortest, double err = 0.0, bool revisited = false) {
  EpisodeResult r;
  r.success = success;
  r.steps = steps;
  r.shortest = shortest;
  r.final_error_m = err;
  r.revisited = revisited;
  r.backtracked_then_succeeded = revisited && success;
  return r;
}

}  // namespace testkit
