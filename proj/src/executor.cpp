#include "brainnav/executor.hpp"

namespace brainnav {

MotionCommand MotionCommand::rotate(int deg) {
  if (deg != 90 && deg != -90 && deg != 180) {
    throw std::invalid_argument("rotation must be +90, -90 or 180 (got " + std::to_string(deg) + ")");
  }
  return {Kind::Rotate, deg};
}

std::string to_string(const MotionCommand& m) {
  switch (m.kind) {
    case MotionCommand::Kind::Advance: return "Advance";
    case MotionCommand::Kind::Halt: return "Halt";
    case MotionCommand::Kind::Rotate:
      return m.degrees == 180 ? "Rotate(180)" : (m.degrees > 0 ? "Rotate(+90)" : "Rotate(-90)");
  }
  return "?";
}

std::vector<MotionCommand> to_motion(const MacroAction& action) {
  switch (action.kind) {
    case MacroKind::Forward: return {MotionCommand::advance()};
    case MacroKind::Backward: return {MotionCommand::rotate(180), MotionCommand::advance()};
    case MacroKind::TurnLeft: return {MotionCommand::rotate(-90)};
    case MacroKind::TurnRight: return {MotionCommand::rotate(90)};
    case MacroKind::Stop: return {MotionCommand::halt()};
    case MacroKind::BacktrackTo: break;
  }
  throw ExecutionError("BacktrackTo must be expanded with execute_backtrack");
}

Heading delta_to_heading(int dx, int dy) {
  if (dx == 0 && dy == 1) return Heading::north();
  if (dx == 1 && dy == 0) return Heading::east();
  if (dx == 0 && dy == -1) return Heading::south();
  if (dx == -1 && dy == 0) return Heading::west();
  throw ExecutionError("(" + std::to_string(dx) + "," + std::to_string(dy) + ") is not a unit grid step");
}

Heading heading_after(Heading current, int delta) { return current.rotated(delta); }

std::vector<MacroAction> execute_backtrack(std::span<const NodeId> path, const AgentPose& pose,
                                           const CoordinateMap& cmap) {
  std::vector<MacroAction> out;
  if (path.empty()) return out;
  if (cmap.cell_of(path.front()) != pose.cell) {
    throw ExecutionError("backtrack path starts at node " + std::to_string(path.front()) +
                         " but the agent is at " + to_string(pose.cell));
  }
  Cell cur = pose.cell;
  Heading heading = pose.heading;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Cell next = cmap.cell_of(path[i]);
    const Cell d = next - cur;
    Heading target;
    try {
      target = delta_to_heading(d.x, d.y);
    } catch (const ExecutionError&) {
      throw ExecutionError("nodes " + std::to_string(path[i - 1]) + " and " + std::to_string(path[i]) +
                           " are not adjacent cells");
    }
    const int turn = ((target.degrees() - heading.degrees()) % 360 + 360) % 360;
    if (turn == 90) {
      out.push_back(MacroAction::turn_right());
    } else if (turn == 270) {
      out.push_back(MacroAction::turn_left());
    } else if (turn == 180) {
      out.push_back(MacroAction::turn_right());
      out.push_back(MacroAction::turn_right());
    }
    out.push_back(MacroAction::forward());
    heading = heading_after(heading, turn);
    cur = next;
  }
  return out;
}

}  // namespace brainnav
