#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "brainnav/world.hpp"

namespace brainnav {

/// Instruction categories of the benchmark command table.
enum class Category {
  TargetedSearch,
  PathNavigation,
  MultiTarget,
  MultiStep,
  BarrierAvoidance,
  Interactive,
};

std::string_view category_name(Category c);
/// Accepts the display name ("Targeted Search Navigation"). Throws
/// std::invalid_argument otherwise.
Category parse_category(std::string_view name);

struct ObjectGoal {
  std::string label;
};

struct CellGoal {
  Cell cell;
};

using Goal = std::variant<ObjectGoal, CellGoal>;

struct Instruction {
  std::string text;
  Category category = Category::TargetedSearch;
  Goal goal;
  std::optional<int> optimal_path_cells;
};

struct Scenario {
  GridWorld world;
  std::vector<Instruction> instructions;
  /// Hex SHA-256 of the scenario text as loaded.
  std::string fingerprint;
  /// Where the scenario was read from; empty for in-memory text.
  std::string source_path;
};

/// Parses and validates scenario text. Every failure is a ScenarioError
/// carrying the offending field path.
Scenario load_scenario(std::string_view text);
Scenario load_scenario_file(const std::filesystem::path& path);

/// Serialises a world plus instructions in the scenario schema.
std::string scenario_to_text(const GridWorld& world, const std::vector<Instruction>& instructions);

std::string sha256_hex(std::string_view bytes);

/// Cells that satisfy `goal` in `world`: every object with a matching label
/// (case-insensitive), or the single goal cell.
std::vector<Cell> goal_cells(const GridWorld& world, const Goal& goal);

/// Distance in meters from the pose to the nearest goal cell.
double goal_error_m(const GridWorld& world, const AgentPose& pose, const std::vector<Cell>& goals);

/// 4-connected BFS step count from `from` to the nearest of `goals` over open
/// cells; goal cells themselves are always enterable. Empty when unreachable.
std::optional<int> grid_shortest_path(const GridWorld& world, Cell from, const std::vector<Cell>& goals);

bool labels_match(std::string_view a, std::string_view b);

}  // namespace brainnav
