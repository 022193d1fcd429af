#include "brainnav/spatial.hpp"

#include <sstream>

namespace brainnav {

std::array<CandidatePoint, 4> gen_candidates(const AgentPose& pose) {
  std::array<CandidatePoint, 4> out;
  for (int i = 0; i < 4; ++i) {
    const Heading h = pose.heading.rotated(90 * i);
    out[i] = CandidatePoint{i, pose.cell + h.offset(), h, std::nullopt};
  }
  return out;
}

NodeId CoordinateMap::node_id_for(Cell c) {
  const auto [it, inserted] = ids_.try_emplace(c, static_cast<NodeId>(cells_.size()));
  if (inserted) cells_.push_back(c);
  return it->second;
}

std::optional<NodeId> CoordinateMap::find(Cell c) const {
  const auto it = ids_.find(c);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

Cell CoordinateMap::cell_of(NodeId id) const {
  if (id >= cells_.size()) throw GraphError("node " + std::to_string(id) + " is not registered in the coordinate map");
  return cells_[id];
}

void TopoGraph::add_node(NodeId v) { roadgraph_.try_emplace(v); }

void TopoGraph::connect(NodeId a, NodeId b) {
  if (a == b) throw GraphError("refusing self-loop on node " + std::to_string(a));
  edges_.emplace(std::min(a, b), std::max(a, b));
  roadgraph_[a].insert(b);
  roadgraph_[b].insert(a);
}

bool TopoGraph::has_edge(NodeId a, NodeId b) const {
  return edges_.count({std::min(a, b), std::max(a, b)}) != 0;
}

const std::set<NodeId>& TopoGraph::neighbors(NodeId v) const {
  const auto it = roadgraph_.find(v);
  if (it == roadgraph_.end()) throw GraphError("unknown node " + std::to_string(v));
  return it->second;
}

std::vector<NodeId> TopoGraph::nodes() const {
  std::vector<NodeId> out;
  out.reserve(roadgraph_.size());
  for (const auto& [v, _] : roadgraph_) out.push_back(v);
  return out;
}

std::string TopoGraph::snapshot_text() const {
  std::ostringstream os;
  for (const auto& [v, adj] : roadgraph_) {
    os << "Place " << v << " connects to ";
    if (adj.empty()) {
      os << "nothing";
    } else {
      bool first = true;
      for (NodeId n : adj) {
        os << (first ? "" : ", ") << "Place " << n;
        first = false;
      }
    }
    os << '\n';
  }
  return os.str();
}

bool TopoGraph::consistent() const {
  std::size_t half_edges = 0;
  for (const auto& [v, adj] : roadgraph_) {
    for (NodeId n : adj) {
      if (n == v || !has_edge(v, n)) return false;
      const auto other = roadgraph_.find(n);
      if (other == roadgraph_.end() || other->second.count(v) == 0) return false;
      ++half_edges;
    }
  }
  for (const auto& [a, b] : edges_) {
    if (!contains(a) || !contains(b)) return false;
  }
  return half_edges == 2 * edges_.size();
}

}  // namespace brainnav
