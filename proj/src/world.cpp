#include "brainnav/world.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

namespace brainnav {

GridWorld::GridWorld(std::string name, int width, int height, double cell_size_m, std::vector<Cell> obstacles,
                     std::vector<SimObject> objects, AgentPose start)
    : name_(std::move(name)),
      width_(width),
      height_(height),
      cell_size_m_(cell_size_m),
      obstacles_(std::move(obstacles)),
      objects_(std::move(objects)),
      start_(start) {
  if (width_ <= 0) throw ScenarioError("width", "must be a positive integer");
  if (height_ <= 0) throw ScenarioError("height", "must be a positive integer");
  if (!(cell_size_m_ > 0.0) || !std::isfinite(cell_size_m_)) {
    throw ScenarioError("cell_size_m", "must be a positive number");
  }
  blocked_.assign(static_cast<std::size_t>(width_) * height_, 0);
  for (std::size_t i = 0; i < obstacles_.size(); ++i) {
    if (!in_bounds(obstacles_[i])) {
      throw ScenarioError("obstacles[" + std::to_string(i) + "]",
                          "cell " + to_string(obstacles_[i]) + " is outside the " + std::to_string(width_) + "x" +
                              std::to_string(height_) + " grid");
    }
    blocked_[index(obstacles_[i])] = 1;
  }
  std::set<std::pair<std::string, Cell>> seen;
  for (std::size_t i = 0; i < objects_.size(); ++i) {
    const auto& obj = objects_[i];
    const std::string path = "objects[" + std::to_string(i) + "]";
    if (obj.label.empty()) throw ScenarioError(path + ".label", "must be non-empty");
    if (!in_bounds(obj.cell)) {
      throw ScenarioError(path, "cell " + to_string(obj.cell) + " is outside the grid");
    }
    if (!seen.emplace(obj.label, obj.cell).second) {
      throw ScenarioError(path, "duplicate object '" + obj.label + "' at " + to_string(obj.cell));
    }
  }
  if (!in_bounds(start_.cell)) throw ScenarioError("start", "start cell is outside the grid");
  if (is_obstacle(start_.cell)) throw ScenarioError("start", "start cell is an obstacle");
}

StepOutcome apply_macro(const GridWorld& world, const AgentPose& pose, MacroAction action) {
  auto advance = [&](AgentPose p) {
    const Cell target = p.cell + p.heading.offset();
    if (!world.is_open(target)) return StepOutcome{p, false, true};
    return StepOutcome{{target, p.heading}, true, false};
  };
  switch (action.kind) {
    case MacroKind::Forward: return advance(pose);
    case MacroKind::Backward: {
      // Rotate the base 180° then advance. A blocked advance keeps the rotation.
      return advance({pose.cell, pose.heading.rotated(180)});
    }
    case MacroKind::TurnLeft: return {{pose.cell, pose.heading.rotated(270)}, false, false};
    case MacroKind::TurnRight: return {{pose.cell, pose.heading.rotated(90)}, false, false};
    case MacroKind::Stop: return {pose, false, false};
    case MacroKind::BacktrackTo: break;
  }
  throw std::invalid_argument("apply_macro: BacktrackTo must be expanded into primitive actions first");
}

std::vector<Cell> line_between(Cell a, Cell b) {
  std::vector<Cell> out;
  int x = a.x;
  int y = a.y;
  const int dx = std::abs(b.x - a.x);
  const int dy = -std::abs(b.y - a.y);
  const int sx = a.x < b.x ? 1 : -1;
  const int sy = a.y < b.y ? 1 : -1;
  int err = dx + dy;
  while (true) {
    if (x == b.x && y == b.y) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
    if (x == b.x && y == b.y) break;
    out.push_back({x, y});
  }
  return out;
}

std::vector<VisibleObject> visible_objects(const GridWorld& world, const AgentPose& pose, Heading view, int range) {
  std::vector<VisibleObject> out;
  if (range < 1) return out;
  const Cell fwd = view.offset();
  for (const auto& obj : world.objects()) {
    const Cell d = obj.cell - pose.cell;
    const int ahead = d.x * fwd.x + d.y * fwd.y;
    const int lateral = d.x * fwd.y - d.y * fwd.x;
    if (ahead < 1 || std::abs(lateral) > ahead) continue;
    const double dist = std::hypot(static_cast<double>(d.x), static_cast<double>(d.y));
    if (dist > static_cast<double>(range)) continue;
    const auto between = line_between(pose.cell, obj.cell);
    const bool occluded =
        std::any_of(between.begin(), between.end(), [&](Cell c) { return world.is_obstacle(c); });
    if (occluded) continue;
    out.push_back({obj.label, obj.cell, dist});
  }
  std::sort(out.begin(), out.end(), [](const VisibleObject& a, const VisibleObject& b) {
    return std::tie(a.distance, a.label, a.cell) < std::tie(b.distance, b.label, b.cell);
  });
  return out;
}

double goal_distance_m(const GridWorld& world, const AgentPose& pose, Cell goal) {
  const Cell d = goal - pose.cell;
  return std::hypot(static_cast<double>(d.x), static_cast<double>(d.y)) * world.cell_size_m();
}

}  // namespace brainnav
