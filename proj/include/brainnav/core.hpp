#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace brainnav {

using NodeId = std::uint32_t;

/// Integer grid cell. +x is East, +y is North.
struct Cell {
  int x = 0;
  int y = 0;

  auto operator<=>(const Cell&) const = default;

  Cell operator+(Cell o) const { return {x + o.x, y + o.y}; }
  Cell operator-(Cell o) const { return {x - o.x, y - o.y}; }
};

struct CellHash {
  std::size_t operator()(Cell c) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.x)) << 32) |
                                      static_cast<std::uint32_t>(c.y));
  }
};

inline int manhattan(Cell a, Cell b) {
  const int dx = a.x - b.x;
  const int dy = a.y - b.y;
  return (dx < 0 ? -dx : dx) + (dy < 0 ? -dy : dy);
}

/// Compass heading in degrees. 0 = North, clockwise positive; always one of
/// {0, 90, 180, 270}.
class Heading {
 public:
  constexpr Heading() = default;

  /// Throws std::invalid_argument unless deg is a multiple of 90 in [0, 360).
  static Heading from_degrees(int deg);

  static constexpr Heading north() { return Heading(0); }
  static constexpr Heading east() { return Heading(90); }
  static constexpr Heading south() { return Heading(180); }
  static constexpr Heading west() { return Heading(270); }

  constexpr int degrees() const { return deg_; }

  /// (heading + delta) mod 360. delta must be a multiple of 90 (any sign).
  Heading rotated(int delta) const;

  /// Unit cell offset of one step along this heading.
  Cell offset() const;

  auto operator<=>(const Heading&) const = default;

 private:
  explicit constexpr Heading(int deg) : deg_(deg) {}
  int deg_ = 0;
};

struct AgentPose {
  Cell cell;
  Heading heading;

  auto operator<=>(const AgentPose&) const = default;
};

std::string to_string(Cell c);
std::string to_string(const AgentPose& p);

enum class MacroKind { Forward, Backward, TurnLeft, TurnRight, Stop, BacktrackTo };

/// High-level robot command. `target` is only meaningful for BacktrackTo.
struct MacroAction {
  MacroKind kind = MacroKind::Stop;
  NodeId target = 0;

  static MacroAction forward() { return {MacroKind::Forward}; }
  static MacroAction backward() { return {MacroKind::Backward}; }
  static MacroAction turn_left() { return {MacroKind::TurnLeft}; }
  static MacroAction turn_right() { return {MacroKind::TurnRight}; }
  static MacroAction stop() { return {MacroKind::Stop}; }
  static MacroAction backtrack_to(NodeId n) { return {MacroKind::BacktrackTo, n}; }

  bool operator==(const MacroAction& o) const {
    return kind == o.kind && (kind != MacroKind::BacktrackTo || target == o.target);
  }
};

/// "Forward", "TurnLeft", ..., "BacktrackTo(7)".
std::string to_string(const MacroAction& a);

/// Inverse of to_string. Throws std::invalid_argument on unknown names.
MacroAction parse_macro(std::string_view name);

/// splitmix64 finalizer; used to derive per-step streams from a seed.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace brainnav
