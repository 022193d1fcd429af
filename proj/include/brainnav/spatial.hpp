#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "brainnav/core.hpp"

namespace brainnav {

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One of the four points around a pose. Index 0 is front, 1 right, 2 back,
/// 3 left; heading_i = (heading + 90 i) mod 360.
struct CandidatePoint {
  int index = 0;
  Cell cell;
  Heading heading;
  std::optional<NodeId> node;
};

/// Candidates are produced for all four directions whether or not the cells
/// are open; traversability is perception's concern.
std::array<CandidatePoint, 4> gen_candidates(const AgentPose& pose);

/// Cell -> node id registry. Ids are handed out densely from 0 in the order
/// cells are first seen, so revisiting a cell reuses its id.
class CoordinateMap {
 public:
  NodeId node_id_for(Cell c);
  std::optional<NodeId> find(Cell c) const;
  /// Throws GraphError for an unregistered id.
  Cell cell_of(NodeId id) const;
  NodeId next_id() const { return static_cast<NodeId>(cells_.size()); }
  std::size_t size() const { return cells_.size(); }
  const std::map<Cell, NodeId>& registry() const { return ids_; }

 private:
  std::map<Cell, NodeId> ids_;
  std::vector<Cell> cells_;
};

/// Undirected place graph. `edges()` and `roadgraph()` are two views of the
/// same relation and are kept in lockstep by every mutation.
class TopoGraph {
 public:
  void add_node(NodeId v);
  /// Adds both endpoints if needed and the edge {a, b}. Throws GraphError on
  /// a self-loop. Idempotent.
  void connect(NodeId a, NodeId b);

  bool contains(NodeId v) const { return roadgraph_.count(v) != 0; }
  bool has_edge(NodeId a, NodeId b) const;
  /// Throws GraphError for an unknown node.
  const std::set<NodeId>& neighbors(NodeId v) const;

  std::vector<NodeId> nodes() const;
  const std::set<std::pair<NodeId, NodeId>>& edges() const { return edges_; }
  const std::map<NodeId, std::set<NodeId>>& roadgraph() const { return roadgraph_; }
  std::size_t node_count() const { return roadgraph_.size(); }

  /// "Place 4 connects to Place 6, Place 8" per node, ascending, one per line.
  std::string snapshot_text() const;

  /// Full scan of the E <-> roadgraph equivalence.
  bool consistent() const;

 private:
  std::set<std::pair<NodeId, NodeId>> edges_;  // stored as (min, max)
  std::map<NodeId, std::set<NodeId>> roadgraph_;
};

}  // namespace brainnav
