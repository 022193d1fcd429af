#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brainnav/scenario.hpp"

namespace brainnav {

struct EpisodeResult {
  std::string scenario;
  std::string instruction;
  Category category = Category::TargetedSearch;
  bool success = false;
  /// Executed macro actions, Stop excluded.
  int steps = 0;
  /// Shortest start-to-goal path, in cells.
  int shortest = 0;
  double final_error_m = 0.0;
  bool revisited = false;
  bool backtracked_then_succeeded = false;
  std::uint64_t seed = 0;
  std::optional<std::string> aborted_reason;

  bool operator==(const EpisodeResult&) const = default;
};

/// 100 * mean of S_i * l_i / max(p_i, l_i). A term with p_i = l_i = 0 counts
/// as 1 when successful. Throws std::invalid_argument on empty input.
double compute_spl(std::span<const EpisodeResult> results);

struct CoreMetrics {
  double ne = 0.0;  // meters
  double tl = 0.0;  // macro actions
  double sr = 0.0;  // percent
};
CoreMetrics compute_core_metrics(std::span<const EpisodeResult> results);

struct BacktrackingMetrics {
  double btr = 0.0;
  std::optional<double> bscr;  // absent when nothing revisited
};
BacktrackingMetrics compute_backtracking_metrics(std::span<const EpisodeResult> results);

struct MetricsRow {
  std::string category;
  std::size_t n = 0;
  CoreMetrics core;
  double spl = 0.0;
  BacktrackingMetrics backtracking;
};

/// One row per category present (in category order) and, when more than one
/// category is present, a final "All" row.
struct MetricsReport {
  std::vector<MetricsRow> rows;
};

MetricsReport build_report(std::span<const EpisodeResult> results);

enum class ReportFormat { Table, Csv };

/// Columns: category, N, NE, TL, SR, SPL, BTR, BSCR; two decimals; an
/// absent BSCR is an empty cell.
std::string render_report(const MetricsReport& report, ReportFormat format);

/// Throws std::runtime_error when the path cannot be written.
void emit_report(const MetricsReport& report, ReportFormat format, const std::filesystem::path& path);

}  // namespace brainnav
