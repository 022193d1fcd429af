#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "brainnav/core.hpp"
#include "brainnav/perception.hpp"
#include "brainnav/remote.hpp"
#include "brainnav/scenario.hpp"
#include "brainnav/spatial.hpp"

namespace brainnav {

struct DecisionInput {
  std::string instruction;
  Category category = Category::TargetedSearch;
  SemanticObservation observation;
  std::string topo_snapshot;
  NodeId current_node = 0;
  /// Graph nodes not yet stood on; never contains current_node.
  std::set<NodeId> unvisited;
  std::vector<std::string> history_digest;
  bool collided_last = false;
};

/// The three outputs of a decision: rationale, high-level step list and the
/// macro actions to run. declared_done plans end with Stop.
struct ActionPlan {
  std::string decision;
  std::vector<std::string> action_sequence;
  std::vector<MacroAction> motion_commands;
  bool declared_done = false;

  bool operator==(const ActionPlan&) const = default;
};

/// Macro actions that face view `view` (0 front .. 3 left) and step once.
std::vector<MacroAction> motions_for_view(int view);

struct OracleOptions {
  /// Without memory the oracle has no frontier list and wanders.
  bool use_memory = true;
  /// Without the map the oracle cannot localise cell goals.
  bool use_map = true;
  /// Picks the wander direction; derive one per step.
  std::uint64_t wander_seed = 0;
};

/// Deterministic reference policy: stop next to the goal, walk toward a
/// visible goal object, otherwise backtrack to the smallest reachable
/// unvisited node. Exhausted exploration yields Stop with declared_done
/// false.
ActionPlan decide_oracle(const DecisionInput& input, const TopoGraph& graph, const CoordinateMap& cmap,
                         const Goal& goal, const OracleOptions& options = {});

/// Seeded uniform choice over traversable views; never declares done.
ActionPlan decide_random(const DecisionInput& input, std::uint64_t seed);

struct ActionOption {
  char letter = 'A';
  std::string description;
  std::vector<MacroAction> motions;
  bool stop = false;

  bool operator==(const ActionOption&) const = default;
};

struct Prompt {
  std::string text;
  std::vector<ActionOption> options;
};

/// Lettered options: one move per traversable view (view order), then a
/// backtrack entry per remaining unvisited node (ascending), then Stop.
std::vector<ActionOption> enumerate_options(const DecisionInput& input);

Prompt build_prompt(const DecisionInput& input);

class ResponseParseError : public std::runtime_error {
 public:
  ResponseParseError(const std::string& what, std::string raw) : std::runtime_error(what), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

/// Finds the first `Action: <letter>` (any case) and maps it through
/// `options`. Prose before the token becomes the rationale.
ActionPlan parse_response(std::string_view text, std::span<const ActionOption> options);

/// A model-style reply selecting `letter`.
std::string render_response(char letter, std::string_view rationale);

/// Appended to the prompt after an unparseable reply.
std::string corrective_suffix();

class DecisionUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LlmDecision {
  ActionPlan plan;
  int retries = 0;
  bool fallback = false;
  std::string prompt;
  std::vector<std::string> responses;
};

/// build_prompt -> model -> parse_response. Unparseable replies are retried
/// with a corrective suffix up to `retry.max_retries` times, after which the
/// oracle decides and `fallback` is set. Transport failures past the same
/// budget raise DecisionUnavailable.
LlmDecision decide_llm(const DecisionInput& input, const TopoGraph& graph, const CoordinateMap& cmap,
                       const Goal& goal, ChatClient& client, const RetryPolicy& retry = {},
                       const OracleOptions& oracle = {});

}  // namespace brainnav
