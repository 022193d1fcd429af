#include "brainnav/scenario.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace brainnav {

namespace {

using nlohmann::json;

constexpr std::array<std::pair<Category, std::string_view>, 6> kCategoryNames{{
    {Category::TargetedSearch, "Targeted Search Navigation"},
    {Category::PathNavigation, "Path Navigation"},
    {Category::MultiTarget, "Multi-target Navigation"},
    {Category::MultiStep, "Multi-step Navigation"},
    {Category::BarrierAvoidance, "Barrier Avoidance Navigation"},
    {Category::Interactive, "Interactive Navigation"},
}};

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw ScenarioError(path + key, "missing required field");
  return obj.at(key);
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ScenarioError(path, "expected an integer");
  const auto i = v.get<long long>();
  if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max()) {
    throw ScenarioError(path, "integer out of range");
  }
  return static_cast<int>(i);
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ScenarioError(path, "expected a string");
  return v.get<std::string>();
}

Cell as_pair_cell(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) throw ScenarioError(path, "expected [x, y]");
  return {as_int(v[0], path + "[0]"), as_int(v[1], path + "[1]")};
}

Cell as_object_cell(const json& v, const std::string& path) {
  return {as_int(require(v, "x", path + "."), path + ".x"), as_int(require(v, "y", path + "."), path + ".y")};
}

}  // namespace

std::string_view category_name(Category c) {
  for (const auto& [cat, name] : kCategoryNames) {
    if (cat == c) return name;
  }
  return "?";
}

Category parse_category(std::string_view name) {
  for (const auto& [cat, n] : kCategoryNames) {
    if (n == name) return cat;
  }
  throw std::invalid_argument("unknown instruction category '" + std::string(name) + "'");
}

bool labels_match(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

Scenario load_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("$", std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ScenarioError("$", "top level must be an object");

  const std::string name = as_string(require(doc, "name", ""), "name");
  const int width = as_int(require(doc, "width", ""), "width");
  const int height = as_int(require(doc, "height", ""), "height");
  double cell_size = 0.5;
  if (doc.contains("cell_size_m")) {
    if (!doc["cell_size_m"].is_number()) throw ScenarioError("cell_size_m", "expected a number");
    cell_size = doc["cell_size_m"].get<double>();
  }

  std::vector<Cell> obstacles;
  if (doc.contains("obstacles")) {
    const auto& arr = doc["obstacles"];
    if (!arr.is_array()) throw ScenarioError("obstacles", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      obstacles.push_back(as_pair_cell(arr[i], "obstacles[" + std::to_string(i) + "]"));
    }
  }

  std::vector<SimObject> objects;
  if (doc.contains("objects")) {
    const auto& arr = doc["objects"];
    if (!arr.is_array()) throw ScenarioError("objects", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "objects[" + std::to_string(i) + "]";
      objects.push_back({as_string(require(arr[i], "label", path + "."), path + ".label"),
                         as_object_cell(arr[i], path)});
    }
  }

  const auto& start_json = require(doc, "start", "");
  AgentPose start;
  start.cell = as_object_cell(start_json, "start");
  const int heading = as_int(require(start_json, "heading", "start."), "start.heading");
  try {
    start.heading = Heading::from_degrees(heading);
  } catch (const std::invalid_argument& e) {
    throw ScenarioError("start.heading", e.what());
  }

  GridWorld world(name, width, height, cell_size, std::move(obstacles), std::move(objects), start);

  std::vector<Instruction> instructions;
  const auto& arr = require(doc, "instructions", "");
  if (!arr.is_array()) throw ScenarioError("instructions", "expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "instructions[" + std::to_string(i) + "]";
    const auto& item = arr[i];
    Instruction ins;
    ins.text = as_string(require(item, "text", path + "."), path + ".text");
    if (ins.text.empty()) throw ScenarioError(path + ".text", "must be non-empty");
    const std::string cat = as_string(require(item, "category", path + "."), path + ".category");
    try {
      ins.category = parse_category(cat);
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(path + ".category", e.what());
    }
    const auto& goal = require(item, "goal", path + ".");
    if (goal.is_object() && goal.contains("label")) {
      const std::string label = as_string(goal["label"], path + ".goal.label");
      ins.goal = ObjectGoal{label};
      if (goal_cells(world, ins.goal).empty()) {
        throw ScenarioError(path + ".goal.label", "no object labelled '" + label + "' in the world");
      }
    } else if (goal.is_object() && goal.contains("x")) {
      const Cell c = as_object_cell(goal, path + ".goal");
      if (!world.in_bounds(c)) throw ScenarioError(path + ".goal", "cell " + to_string(c) + " is outside the grid");
      ins.goal = CellGoal{c};
    } else {
      throw ScenarioError(path + ".goal", "expected {label} or {x, y}");
    }
    if (item.contains("optimal_path_cells") && !item["optimal_path_cells"].is_null()) {
      const int l = as_int(item["optimal_path_cells"], path + ".optimal_path_cells");
      if (l < 0) throw ScenarioError(path + ".optimal_path_cells", "must be non-negative");
      ins.optimal_path_cells = l;
    }
    instructions.push_back(std::move(ins));
  }

  return Scenario{std::move(world), std::move(instructions), sha256_hex(text), {}};
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("$", "cannot read scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  Scenario s = load_scenario(buf.str());
  s.source_path = path.string();
  return s;
}

std::string scenario_to_text(const GridWorld& world, const std::vector<Instruction>& instructions) {
  nlohmann::ordered_json doc;
  doc["name"] = world.name();
  doc["width"] = world.width();
  doc["height"] = world.height();
  doc["cell_size_m"] = world.cell_size_m();
  auto obstacles = nlohmann::ordered_json::array();
  for (const auto& c : world.obstacles()) obstacles.push_back({c.x, c.y});
  doc["obstacles"] = obstacles;
  auto objects = nlohmann::ordered_json::array();
  for (const auto& o : world.objects()) objects.push_back({{"label", o.label}, {"x", o.cell.x}, {"y", o.cell.y}});
  doc["objects"] = objects;
  doc["start"] = {{"x", world.start().cell.x}, {"y", world.start().cell.y},
                  {"heading", world.start().heading.degrees()}};
  auto ins = nlohmann::ordered_json::array();
  for (const auto& i : instructions) {
    nlohmann::ordered_json item;
    item["text"] = i.text;
    item["category"] = std::string(category_name(i.category));
    if (const auto* og = std::get_if<ObjectGoal>(&i.goal)) {
      item["goal"] = {{"label", og->label}};
    } else {
      const auto& cg = std::get<CellGoal>(i.goal);
      item["goal"] = {{"x", cg.cell.x}, {"y", cg.cell.y}};
    }
    if (i.optimal_path_cells) item["optimal_path_cells"] = *i.optimal_path_cells;
    ins.push_back(item);
  }
  doc["instructions"] = ins;
  return doc.dump(2) + "\n";
}

std::vector<Cell> goal_cells(const GridWorld& world, const Goal& goal) {
  std::vector<Cell> out;
  if (const auto* og = std::get_if<ObjectGoal>(&goal)) {
    for (const auto& obj : world.objects()) {
      if (labels_match(obj.label, og->label)) out.push_back(obj.cell);
    }
  } else {
    out.push_back(std::get<CellGoal>(goal).cell);
  }
  return out;
}

double goal_error_m(const GridWorld& world, const AgentPose& pose, const std::vector<Cell>& goals) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& g : goals) best = std::min(best, goal_distance_m(world, pose, g));
  return best;
}

std::optional<int> grid_shortest_path(const GridWorld& world, Cell from, const std::vector<Cell>& goals) {
  if (goals.empty()) return std::nullopt;
  auto is_goal = [&](Cell c) { return std::find(goals.begin(), goals.end(), c) != goals.end(); };
  if (is_goal(from)) return 0;
  std::vector<int> dist(static_cast<std::size_t>(world.width()) * world.height(), -1);
  auto idx = [&](Cell c) { return static_cast<std::size_t>(c.y) * world.width() + c.x; };
  std::deque<Cell> queue{from};
  dist[idx(from)] = 0;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    for (int h = 0; h < 360; h += 90) {
      const Cell n = c + Heading::from_degrees(h).offset();
      if (!world.in_bounds(n) || dist[idx(n)] >= 0) continue;
      if (is_goal(n)) return dist[idx(c)] + 1;
      if (!world.is_open(n)) continue;
      dist[idx(n)] = dist[idx(c)] + 1;
      queue.push_back(n);
    }
  }
  return std::nullopt;
}

}  // namespace brainnav
