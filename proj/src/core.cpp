#include "brainnav/core.hpp"

#include <charconv>
#include <stdexcept>

namespace brainnav {

Heading Heading::from_degrees(int deg) {
  if (deg < 0 || deg >= 360 || deg % 90 != 0) {
    throw std::invalid_argument("heading must be one of 0, 90, 180, 270 (got " + std::to_string(deg) + ")");
  }
  return Heading(deg);
}

Heading Heading::rotated(int delta) const {
  if (delta % 90 != 0) {
    throw std::invalid_argument("rotation must be a multiple of 90 degrees (got " + std::to_string(delta) + ")");
  }
  int d = (deg_ + delta) % 360;
  if (d < 0) d += 360;
  return Heading(d);
}

Cell Heading::offset() const {
  switch (deg_) {
    case 0: return {0, 1};
    case 90: return {1, 0};
    case 180: return {0, -1};
    default: return {-1, 0};
  }
}

std::string to_string(Cell c) {
  return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")";
}

std::string to_string(const AgentPose& p) {
  return "(" + std::to_string(p.cell.x) + "," + std::to_string(p.cell.y) + "," +
         std::to_string(p.heading.degrees()) + ")";
}

std::string to_string(const MacroAction& a) {
  switch (a.kind) {
    case MacroKind::Forward: return "Forward";
    case MacroKind::Backward: return "Backward";
    case MacroKind::TurnLeft: return "TurnLeft";
    case MacroKind::TurnRight: return "TurnRight";
    case MacroKind::Stop: return "Stop";
    case MacroKind::BacktrackTo: return "BacktrackTo(" + std::to_string(a.target) + ")";
  }
  return "?";
}

MacroAction parse_macro(std::string_view name) {
  if (name == "Forward") return MacroAction::forward();
  if (name == "Backward") return MacroAction::backward();
  if (name == "TurnLeft") return MacroAction::turn_left();
  if (name == "TurnRight") return MacroAction::turn_right();
  if (name == "Stop") return MacroAction::stop();
  constexpr std::string_view prefix = "BacktrackTo(";
  if (name.size() > prefix.size() + 1 && name.substr(0, prefix.size()) == prefix && name.back() == ')') {
    const auto digits = name.substr(prefix.size(), name.size() - prefix.size() - 1);
    NodeId id = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
    if (ec == std::errc{} && ptr == digits.data() + digits.size()) return MacroAction::backtrack_to(id);
  }
  throw std::invalid_argument("unknown macro action '" + std::string(name) + "'");
}

}  // namespace brainnav
