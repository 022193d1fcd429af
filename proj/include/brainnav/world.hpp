#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "brainnav/core.hpp"

namespace brainnav {

/// Raised for any scenario or world validation problem. `field()` carries the
/// path of the offending field, e.g. "obstacles[3]" or "start.heading".
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct SimObject {
  std::string label;
  Cell cell;
};

/// Immutable ground-truth grid. Objects are markers and do not block motion.
class GridWorld {
 public:
  GridWorld(std::string name, int width, int height, double cell_size_m, std::vector<Cell> obstacles,
            std::vector<SimObject> objects, AgentPose start);

  const std::string& name() const { return name_; }
  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size_m() const { return cell_size_m_; }
  const std::vector<Cell>& obstacles() const { return obstacles_; }
  const std::vector<SimObject>& objects() const { return objects_; }
  const AgentPose& start() const { return start_; }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  bool is_obstacle(Cell c) const { return in_bounds(c) && blocked_[index(c)] != 0; }
  /// In bounds and not an obstacle.
  bool is_open(Cell c) const { return in_bounds(c) && blocked_[index(c)] == 0; }

 private:
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }

  std::string name_;
  int width_;
  int height_;
  double cell_size_m_;
  std::vector<Cell> obstacles_;
  std::vector<SimObject> objects_;
  AgentPose start_;
  std::vector<unsigned char> blocked_;
};

struct StepOutcome {
  AgentPose pose_after;
  bool moved = false;
  bool collided = false;
};

/// Ground-truth dynamics of one primitive macro action. Collisions are
/// reported in the outcome; the pose stays put. Throws std::invalid_argument
/// for BacktrackTo, which must be expanded by the executor first.
StepOutcome apply_macro(const GridWorld& world, const AgentPose& pose, MacroAction action);

struct VisibleObject {
  std::string label;
  Cell cell;
  double distance = 0.0;  // Euclidean, in cells
};

/// Objects inside the 90° sector centred on `view` within `range` cells,
/// nearest first (ties by label, then cell). An obstacle on the rasterised
/// line strictly between agent and object hides it.
std::vector<VisibleObject> visible_objects(const GridWorld& world, const AgentPose& pose, Heading view, int range);

/// Euclidean distance between the pose's cell and `goal`, in meters.
double goal_distance_m(const GridWorld& world, const AgentPose& pose, Cell goal);

/// Cells strictly between a and b on the Bresenham line.
std::vector<Cell> line_between(Cell a, Cell b);

}  // namespace brainnav
