#include "brainnav/suites.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>

#include "brainnav/scenario.hpp"

namespace brainnav {

namespace {

const std::vector<std::string> kLabels{"chair",   "blue trash can", "potted plant", "fire extinguisher",
                                       "printer", "backpack",       "whiteboard",   "water dispenser"};

std::string numbered(const char* prefix, int i) {
  std::string n = std::to_string(i);
  return std::string(prefix) + std::string(3 - std::min<std::size_t>(3, n.size()), '0') + n;
}

Heading random_heading(std::mt19937_64& rng) { return Heading::from_degrees(90 * static_cast<int>(rng() % 4)); }

std::map<Cell, int> bfs_distances(int w, int h, const std::vector<std::vector<bool>>& open, Cell from) {
  std::map<Cell, int> dist{{from, 0}};
  std::deque<Cell> q{from};
  while (!q.empty()) {
    const Cell c = q.front();
    q.pop_front();
    for (int d = 0; d < 360; d += 90) {
      const Cell n = c + Heading::from_degrees(d).offset();
      if (n.x < 0 || n.y < 0 || n.x >= w || n.y >= h || !open[n.y][n.x] || dist.count(n)) continue;
      dist[n] = dist[c] + 1;
      q.push_back(n);
    }
  }
  return dist;
}

}  // namespace

std::vector<GeneratedScenario> generate_open_suite(int count, int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<GeneratedScenario> out;
  for (int i = 0; i < count; ++i) {
    const Cell start{static_cast<int>(rng() % width), static_cast<int>(rng() % height)};
    Cell goal = start;
    while (goal == start) goal = {static_cast<int>(rng() % width), static_cast<int>(rng() % height)};
    const std::string label = kLabels[rng() % kLabels.size()];
    const std::string name = numbered("open", i);
    GridWorld world(name, width, height, 0.5, {}, {{label, goal}}, {start, random_heading(rng)});
    Instruction ins{"Find the " + label + ".", Category::TargetedSearch, ObjectGoal{label}, std::nullopt};
    out.push_back({name + ".json", scenario_to_text(world, {ins})});
  }
  return out;
}

std::vector<GeneratedScenario> generate_maze_suite(int count, int cells, std::uint64_t seed) {
  if (cells < 2) throw std::invalid_argument("maze needs at least 2x2 cells");
  std::mt19937_64 rng(seed);
  const int side = 2 * cells + 1;
  std::vector<GeneratedScenario> out;
  for (int i = 0; i < count; ++i) {
    std::vector<std::vector<bool>> open(side, std::vector<bool>(side, false));
    std::vector<std::vector<bool>> seen(cells, std::vector<bool>(cells, false));
    std::vector<Cell> stack{{0, 0}};
    seen[0][0] = true;
    open[1][1] = true;
    while (!stack.empty()) {
      const Cell c = stack.back();
      std::vector<Cell> next;
      for (int d = 0; d < 360; d += 90) {
        const Cell n = c + Heading::from_degrees(d).offset();
        if (n.x >= 0 && n.y >= 0 && n.x < cells && n.y < cells && !seen[n.y][n.x]) next.push_back(n);
      }
      if (next.empty()) {
        stack.pop_back();
        continue;
      }
      const Cell n = next[rng() % next.size()];
      seen[n.y][n.x] = true;
      open[2 * n.y + 1][2 * n.x + 1] = true;
      open[c.y + n.y + 1][c.x + n.x + 1] = true;
      stack.push_back(n);
    }
    // Knock out a few interior walls so the maze has loops.
    const int extra = cells;
    for (int k = 0; k < extra; ++k) {
      const int x = 1 + static_cast<int>(rng() % (side - 2));
      const int y = 1 + static_cast<int>(rng() % (side - 2));
      if ((x + y) % 2 == 1) open[y][x] = true;
    }

    std::vector<Cell> passages;
    std::vector<Cell> obstacles;
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) (open[y][x] ? passages : obstacles).push_back({x, y});
    }
    const Cell start = passages[rng() % passages.size()];
    const auto dist = bfs_distances(side, side, open, start);
    int far = 0;
    for (const auto& [c, d] : dist) far = std::max(far, d);
    std::vector<Cell> goal_pool;
    std::vector<Cell> near_pool;
    for (const auto& [c, d] : dist) {
      const Cell off = c - start;
      // Far along the corridors and more than 1 m away in a straight line.
      const bool remote = 2 * d >= far && off.x * off.x + off.y * off.y > 4;
      (remote ? goal_pool : near_pool).push_back(c);
    }
    const std::string label = kLabels[rng() % kLabels.size()];
    std::vector<SimObject> objects{{label, goal_pool[rng() % goal_pool.size()]}};
    const int distractors = 1 + static_cast<int>(rng() % 2);
    for (int k = 0; k < distractors && !near_pool.empty(); ++k) {
      std::string other = kLabels[rng() % kLabels.size()];
      const bool taken = std::any_of(objects.begin(), objects.end(), [&](const SimObject& o) { return o.label == other; });
      if (taken) continue;
      objects.push_back({other, near_pool[rng() % near_pool.size()]});
    }
    const std::string name = numbered("maze", i);
    GridWorld world(name, side, side, 0.5, obstacles, objects, {start, random_heading(rng)});
    const bool barrier = i % 2 == 1;
    Instruction ins{barrier ? "Avoid the walls and find the " + label + "." : "Search the maze for the " + label + ".",
                    barrier ? Category::BarrierAvoidance : Category::TargetedSearch, ObjectGoal{label}, std::nullopt};
    out.push_back({name + ".json", scenario_to_text(world, {ins})});
  }
  return out;
}

void write_suite(const std::filesystem::path& dir, const std::vector<GeneratedScenario>& suite) {
  std::filesystem::create_directories(dir);
  for (const auto& s : suite) {
    std::ofstream f(dir / s.file_name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (dir / s.file_name).string());
    f << s.text;
  }
}

}  // namespace brainnav
