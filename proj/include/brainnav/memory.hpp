#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "brainnav/core.hpp"
#include "brainnav/spatial.hpp"
#include "brainnav/world.hpp"

namespace brainnav {

/// One decision cycle. A cycle may carry several consecutive macro actions.
struct StepRecord {
  int t = 0;
  std::vector<MacroAction> actions;
  NodeId node_before = 0;
  NodeId node_after = 0;
  std::string observation_digest;
  bool collided = false;
};

class ActionHistory {
 public:
  /// Throws std::invalid_argument unless record.t == size() + 1 and the
  /// record carries at least one action.
  void record_step(StepRecord record);

  /// True iff `node` is the node_after of some already recorded step.
  bool detect_revisit(NodeId node) const;

  const std::vector<StepRecord>& steps() const { return steps_; }
  std::size_t size() const { return steps_.size(); }
  bool empty() const { return steps_.empty(); }

  /// One-line summaries of the last `k` steps, oldest first.
  std::vector<std::string> digest(std::size_t k) const;

 private:
  std::vector<StepRecord> steps_;
  std::set<NodeId> arrived_;
};

class NoPathError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Minimum-hop path `from` .. `to` inclusive. Among equally short paths the
/// lexicographically smallest node sequence wins. Throws GraphError for an
/// unknown node and NoPathError when the nodes are disconnected.
std::vector<NodeId> plan_backtrack(const TopoGraph& graph, NodeId from, NodeId to);

/// Case-folded, whitespace-collapsed, trimmed.
std::string normalize_instruction(std::string_view text);

struct ExperienceKey {
  std::string scenario_fingerprint;
  std::string instruction_norm;

  static ExperienceKey make(std::string fingerprint, std::string_view instruction) {
    return {std::move(fingerprint), normalize_instruction(instruction)};
  }
  auto operator<=>(const ExperienceKey&) const = default;
};

class ExperienceRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cross-episode store of successful macro-action sequences. Readers share,
/// writers are exclusive; every write replaces a whole entry.
class TrajectoryStore {
 public:
  TrajectoryStore() = default;
  TrajectoryStore(TrajectoryStore&& other) noexcept : entries_(std::move(other.entries_)) {}

  std::optional<std::vector<MacroAction>> lookup(const ExperienceKey& key) const;

  /// Replays `actions` from the world's start pose and inserts (or
  /// overwrites) the entry only if the final pose lies within
  /// `success_radius_m` of a goal cell. Throws ExperienceRejected otherwise.
  void save(const ExperienceKey& key, const std::vector<MacroAction>& actions, const GridWorld& world,
            const std::vector<Cell>& goals, double success_radius_m);

  std::size_t size() const;

  /// Loads entries from `path`; a missing file yields an empty store.
  static TrajectoryStore load(const std::filesystem::path& path);
  /// Writes the whole store to `path` via a temporary file and rename.
  void write(const std::filesystem::path& path) const;

 private:
  mutable std::shared_mutex mu_;
  std::map<ExperienceKey, std::vector<MacroAction>> entries_;
};

}  // namespace brainnav
