#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace brainnav {

struct GeneratedScenario {
  std::string file_name;
  std::string text;
};

// Obstacle-free width x height rooms, one goal object each, random start.
std::vector<GeneratedScenario> generate_open_suite(int count, int width, int height, std::uint64_t seed);

// Braided mazes of (2 * cells + 1)^2 grid cells. The goal object sits in the
// far part of the maze relative to the start; one or two distractor objects.
std::vector<GeneratedScenario> generate_maze_suite(int count, int cells, std::uint64_t seed);

// Writes each scenario into `dir` (created if needed).
void write_suite(const std::filesystem::path& dir, const std::vector<GeneratedScenario>& suite);

}  // namespace brainnav
