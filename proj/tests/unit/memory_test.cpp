#include <filesystem>
#include <random>

#include "../support.hpp"
#include "doctest.h"

using namespace brainnav;
using testkit::make_world;

namespace {

StepRecord step(int t, NodeId before, NodeId after) {
  return {t, {MacroAction::forward()}, before, after, "", false};
}

TopoGraph from_edges(std::initializer_list<std::pair<NodeId, NodeId>> edges) {
  TopoGraph g;
  for (auto [a, b] : edges) g.connect(a, b);
  return g;
}

}  // namespace

TEST_SUITE("memory") {
  TEST_CASE("record_step enforces consecutive indices") {
    ActionHistory h;
    h.record_step(step(1, 0, 1));
    CHECK(h.size() == 1);
    CHECK_THROWS_AS(h.record_step(step(3, 1, 2)), std::invalid_argument);
    CHECK_THROWS_AS(h.record_step({2, {}, 1, 2, "", false}), std::invalid_argument);
    for (int t = 2; t <= 50; ++t) h.record_step(step(t, 0, 0));
    for (int t = 1; t <= 50; ++t) CHECK(h.steps()[t - 1].t == t);
  }

  TEST_CASE("detect_revisit looks at earlier arrivals only") {
    ActionHistory h;
    CHECK_FALSE(h.detect_revisit(5));
    h.record_step(step(1, 0, 3));
    h.record_step(step(2, 3, 5));
    for (int t = 3; t < 7; ++t) h.record_step(step(t, 5, 6));
    CHECK(h.detect_revisit(5));
    CHECK_FALSE(h.detect_revisit(0));  // only ever a node_before
    CHECK_FALSE(h.detect_revisit(9));
  }

  TEST_CASE("history digest keeps the last k steps") {
    ActionHistory h;
    h.record_step({1, {MacroAction::turn_right(), MacroAction::forward()}, 4, 7, "", false});
    h.record_step({2, {MacroAction::forward()}, 7, 7, "", true});
    const auto d = h.digest(1);
    REQUIRE(d.size() == 1);
    CHECK(d[0] == "t=2: Forward (Place 7 -> Place 7) collided");
    CHECK(h.digest(10).front() == "t=1: TurnRight,Forward (Place 4 -> Place 7)");
  }

  TEST_CASE("plan_backtrack examples") {
    const auto chain = from_edges({{0, 1}, {1, 2}, {2, 3}});
    CHECK(plan_backtrack(chain, 3, 0) == std::vector<NodeId>{3, 2, 1, 0});
    CHECK(plan_backtrack(chain, 2, 2) == std::vector<NodeId>{2});
    auto split = from_edges({{0, 1}, {5, 6}});
    CHECK_THROWS_AS(plan_backtrack(split, 0, 6), NoPathError);
    CHECK_THROWS_AS(plan_backtrack(split, 0, 9), GraphError);
  }

  TEST_CASE("plan_backtrack breaks ties lexicographically") {
    // Diamond: 0-4-9 and 0-2-9 both take two hops.
    const auto g = from_edges({{0, 4}, {4, 9}, {0, 2}, {2, 9}});
    CHECK(plan_backtrack(g, 0, 9) == std::vector<NodeId>{0, 2, 9});
    CHECK(plan_backtrack(g, 9, 0) == std::vector<NodeId>{9, 2, 0});
  }

  TEST_CASE("property: plan_backtrack equals the brute-force path on random graphs") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 300; ++trial) {
      const int n = 2 + static_cast<int>(rng() % 9);
      TopoGraph g;
      for (NodeId v = 0; v < static_cast<NodeId>(n); ++v) g.add_node(v);
      const int m = static_cast<int>(rng() % (n * 2));
      for (int e = 0; e < m; ++e) {
        const NodeId a = static_cast<NodeId>(rng() % n);
        const NodeId b = static_cast<NodeId>(rng() % n);
        if (a != b) g.connect(a, b);
      }
      const NodeId from = static_cast<NodeId>(rng() % n);
      const NodeId to = static_cast<NodeId>(rng() % n);
      const auto expect = testkit::brute_force_path(g.roadgraph(), from, to);
      if (expect.empty()) {
        CHECK_THROWS_AS(plan_backtrack(g, from, to), NoPathError);
      } else {
        const auto got = plan_backtrack(g, from, to);
        CHECK(got == expect);
        for (std::size_t i = 0; i + 1 < got.size(); ++i) CHECK(g.has_edge(got[i], got[i + 1]));
      }
    }
  }

  TEST_CASE("instruction normalisation and experience keys") {
    CHECK(normalize_instruction("  Find   the\tBlue Trash can ") == "find the blue trash can");
    CHECK(ExperienceKey::make("f", "Find the chair") == ExperienceKey::make("f", " find  THE chair"));
    CHECK_FALSE(ExperienceKey::make("f", "Find the chair") == ExperienceKey::make("g", "Find the chair"));
  }

  TEST_CASE("trajectory store: save, lookup, reject, overwrite") {
    const auto w = make_world(5, 5, {}, {{"chair", {0, 4}}}, {{0, 0}, Heading::north()});
    const auto goals = goal_cells(w, ObjectGoal{"chair"});
    TrajectoryStore store;
    const auto key = ExperienceKey::make("fp", "Find the chair");
    CHECK_FALSE(store.lookup(key).has_value());
    const std::vector<MacroAction> route{MacroAction::forward(), MacroAction::forward(), MacroAction::forward(),
                                         MacroAction::stop()};
    store.save(key, route, w, goals, 1.0);
    REQUIRE(store.lookup(key).has_value());
    CHECK(*store.lookup(key) == route);
    CHECK_FALSE(store.lookup(ExperienceKey::make("fp", "Find the red chair")).has_value());
    CHECK_THROWS_AS(store.save(key, {MacroAction::turn_right(), MacroAction::forward()}, w, goals, 1.0),
                    ExperienceRejected);
    CHECK_THROWS_AS(store.save(key, {MacroAction::backtrack_to(3)}, w, goals, 1.0), ExperienceRejected);
    const std::vector<MacroAction> shorter{MacroAction::forward(), MacroAction::forward(), MacroAction::stop()};
    store.save(key, shorter, w, goals, 1.0);
    CHECK(*store.lookup(key) == shorter);
    CHECK(store.size() == 1);
  }

  TEST_CASE("trajectory store persists to disk") {
    const auto w = make_world(3, 3, {}, {{"cup", {0, 2}}});
    const auto path = std::filesystem::temp_directory_path() / "brainnav_store_test.json";
    std::filesystem::remove(path);
    CHECK(TrajectoryStore::load(path).size() == 0);
    TrajectoryStore store;
    const auto key = ExperienceKey::make("abc", "Find the cup");
    store.save(key, {MacroAction::forward(), MacroAction::stop()}, w, goal_cells(w, ObjectGoal{"cup"}), 1.0);
    store.write(path);
    const auto loaded = TrajectoryStore::load(path);
    REQUIRE(loaded.lookup(key).has_value());
    CHECK(loaded.lookup(key)->size() == 2);
    std::filesystem::remove(path);
  }
}
