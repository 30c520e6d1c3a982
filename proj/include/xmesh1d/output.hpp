// Run orchestration and artifact emission: CSV time series, field snapshots,
// residual tables, five-element stage tables and optional SVG line plots.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "xmesh1d/config.hpp"

namespace xmesh1d {

/// Fixed CSV number format: 17 significant digits.
std::string format_number(double v);

/// The 10 evenly spaced increments that get a field snapshot.
std::vector<int> snapshot_steps(int increments);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Self-contained SVG line plot.
std::string svg_line_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                          const std::vector<Series>& series);

struct RunReport {
  int exit_code = 0;  // 0 all converged, 2 otherwise
  int increments = 0;
  int nonconverged = 0;
  bool broken = false;
  double U_star = 0;
  std::vector<std::filesystem::path> files;
};

/// Runs the configured study and writes its artifacts into cfg.out_dir.
/// Anything written is removed again when the run aborts.
RunReport execute(const RunConfig& cfg, std::ostream& log);

struct StepRow {
  int step = 0;
  double U = 0;
  double sigma = 0;
  double d0 = 0;
  double h0 = 0;
  double K = 0;
  double Wd = 0;
  double err2 = 0;
  bool broken = false;
  std::string status;
  double kkt = 0;
};

std::vector<StepRow> read_steps(const std::filesystem::path& run_dir);

struct RunSummary {
  double final_Wd = 0;
  bool broken = false;
  double U_star = 0;  // NaN when never broken
};

RunSummary summarize(const std::vector<StepRow>& rows);

struct CompareReport {
  RunSummary a;
  RunSummary b;
  double max_err2_gap = 0;
  double max_sigma_gap = 0;
  std::filesystem::path merged;
  std::filesystem::path summary;
};

/// Merges two runs with identical schedules into out_dir/merged.csv and
/// out_dir/summary.csv; throws on a schedule mismatch.
CompareReport compare(const std::filesystem::path& run_a, const std::filesystem::path& run_b,
                      const std::filesystem::path& out_dir);

}  // namespace xmesh1d
