#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "brainnav/core.hpp"
#include "brainnav/spatial.hpp"

namespace brainnav {

/// Low-level motor verb. Rotate degrees are +90 (clockwise), -90 or 180.
struct MotionCommand {
  enum class Kind { Advance, Rotate, Halt };
  Kind kind = Kind::Halt;
  int degrees = 0;

  static MotionCommand advance() { return {Kind::Advance, 0}; }
  static MotionCommand rotate(int deg);
  static MotionCommand halt() { return {Kind::Halt, 0}; }

  bool operator==(const MotionCommand&) const = default;
};

/// "Advance", "Rotate(+90)", "Rotate(-90)", "Rotate(180)", "Halt".
std::string to_string(const MotionCommand& m);

class ExecutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws ExecutionError for BacktrackTo, which expands via execute_backtrack.
std::vector<MotionCommand> to_motion(const MacroAction& action);

/// Absolute heading of a unit step. Throws ExecutionError for anything but
/// the four unit offsets.
Heading delta_to_heading(int dx, int dy);

/// (current + delta) mod 360. Throws std::invalid_argument unless delta is a
/// multiple of 90.
Heading heading_after(Heading current, int delta);

/// Macro actions that walk `path` starting from `pose`, reorienting by
/// absolute heading before every hop. A 180° turn is two TurnRight actions.
/// Throws ExecutionError when the path does not start at the pose's node or
/// two consecutive nodes are not adjacent cells.
std::vector<MacroAction> execute_backtrack(std::span<const NodeId> path, const AgentPose& pose,
                                           const CoordinateMap& cmap);

}  // namespace brainnav
