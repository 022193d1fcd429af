#include "brainnav/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

namespace brainnav {

namespace {

void require_non_empty(std::span<const EpisodeResult> results, const char* what) {
  if (results.empty()) throw std::invalid_argument(std::string(what) + ": no episode results");
}

std::string fixed2(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

MetricsRow make_row(std::string category, std::span<const EpisodeResult> results) {
  return MetricsRow{std::move(category), results.size(), compute_core_metrics(results), compute_spl(results),
                    compute_backtracking_metrics(results)};
}

}  // namespace

double compute_spl(std::span<const EpisodeResult> results) {
  require_non_empty(results, "compute_spl");
  double sum = 0.0;
  for (const auto& r : results) {
    if (!r.success) continue;
    const int denom = std::max(r.steps, r.shortest);
    sum += denom == 0 ? 1.0 : static_cast<double>(r.shortest) / denom;
  }
  return 100.0 * sum / static_cast<double>(results.size());
}

CoreMetrics compute_core_metrics(std::span<const EpisodeResult> results) {
  require_non_empty(results, "compute_core_metrics");
  CoreMetrics m;
  for (const auto& r : results) {
    m.ne += r.final_error_m;
    m.tl += r.steps;
    m.sr += r.success ? 1.0 : 0.0;
  }
  const auto n = static_cast<double>(results.size());
  m.ne /= n;
  m.tl /= n;
  m.sr = 100.0 * m.sr / n;
  return m;
}

BacktrackingMetrics compute_backtracking_metrics(std::span<const EpisodeResult> results) {
  require_non_empty(results, "compute_backtracking_metrics");
  std::size_t revisited = 0;
  std::size_t corrected = 0;
  for (const auto& r : results) {
    if (!r.revisited) continue;
    ++revisited;
    if (r.success) ++corrected;
  }
  BacktrackingMetrics m;
  m.btr = 100.0 * static_cast<double>(revisited) / static_cast<double>(results.size());
  if (revisited > 0) m.bscr = 100.0 * static_cast<double>(corrected) / static_cast<double>(revisited);
  return m;
}

MetricsReport build_report(std::span<const EpisodeResult> results) {
  require_non_empty(results, "build_report");
  std::map<Category, std::vector<EpisodeResult>> by_category;
  for (const auto& r : results) by_category[r.category].push_back(r);
  MetricsReport report;
  for (const auto& [cat, rs] : by_category) report.rows.push_back(make_row(std::string(category_name(cat)), rs));
  if (by_category.size() > 1) report.rows.push_back(make_row("All", results));
  return report;
}

std::string render_report(const MetricsReport& report, ReportFormat format) {
  static const std::vector<std::string> kHeader{"category", "N", "NE", "TL", "SR", "SPL", "BTR", "BSCR"};
  std::vector<std::vector<std::string>> rows{kHeader};
  for (const auto& r : report.rows) {
    rows.push_back({r.category, std::to_string(r.n), fixed2(r.core.ne), fixed2(r.core.tl), fixed2(r.core.sr),
                    fixed2(r.spl), fixed2(r.backtracking.btr),
                    r.backtracking.bscr ? fixed2(*r.backtracking.bscr) : std::string()});
  }
  std::ostringstream os;
  if (format == ReportFormat::Csv) {
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        const bool quote = row[i].find_first_of(",\"") != std::string::npos;
        if (i) os << ',';
        if (quote) {
          os << '"';
          for (char c : row[i]) os << (c == '"' ? "\"\"" : std::string(1, c));
          os << '"';
        } else {
          os << row[i];
        }
      }
      os << '\n';
    }
    return os.str();
  }
  std::vector<std::size_t> width(kHeader.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i == 0) {
        os << std::left << std::setw(static_cast<int>(width[i])) << row[i];
      } else {
        os << "  " << std::right << std::setw(static_cast<int>(width[i])) << row[i];
      }
    }
    os << '\n';
  }
  return os.str();
}

void emit_report(const MetricsReport& report, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write report to " + path.string());
  out << render_report(report, format);
  if (!out) throw std::runtime_error("failed writing report to " + path.string());
}

}  // namespace brainnav
