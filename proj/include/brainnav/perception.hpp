#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "brainnav/core.hpp"
#include "brainnav/remote.hpp"
#include "brainnav/spatial.hpp"
#include "brainnav/world.hpp"

namespace brainnav {

struct ObservedObject {
  std::string label;
  double distance = 0.0;  // cells
};

/// What one of the four directional frames shows. View i looks along
/// heading + 90 i, matching candidate point i.
struct ViewObservation {
  std::vector<ObservedObject> objects;
  bool traversable = false;
  /// Ids of consecutive open cells straight ahead, nearest first.
  std::vector<NodeId> path_nodes;
  std::string caption;
};

struct SemanticObservation {
  std::array<ViewObservation, 4> views;
  /// Set when some field fell back to its conservative default.
  bool warning = false;

  /// Compact single-line summary used in histories and traces.
  std::string digest() const;
};

enum class DistanceNoise { None, UniformOneCell };

struct PerceptorConfig {
  int range = 6;
  DistanceNoise noise = DistanceNoise::None;
  std::uint64_t seed = 0;
};

/// Ground-truth perceptor. Registers the ids of every open cell on each view
/// line in `cmap` as a side effect; otherwise a pure function of its inputs.
SemanticObservation perceive(const GridWorld& world, const AgentPose& pose, CoordinateMap& cmap,
                             const PerceptorConfig& cfg);

class PerceptionUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Three prompts sent per observation, in order.
std::string object_list_prompt();
std::string traversability_prompt();
std::string distance_prompt(const std::array<std::vector<std::string>, 4>& labels);

/// Remote vision-model perceptor: object list, then traversability, then
/// distances. A stage whose reply never parses within the retry budget falls
/// back to its conservative default and sets `warning`. Transport failures
/// that outlast the budget raise PerceptionUnavailable.
SemanticObservation perceive_remote(const std::array<ImageFrame, 4>& frames, ChatClient& client,
                                    const RetryPolicy& retry = {});

SemanticObservation perceive_remote(const std::array<ImageFrame, 4>& frames, const RemoteModelEndpoint& endpoint,
                                    const RetryPolicy& retry = {});

}  // namespace brainnav
