#pragma once

#include <array>
#include <string>
#include <vector>

namespace roadrl {

struct Series {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
};

/// Multi-series line chart as a standalone SVG document.
std::string line_chart_svg(const std::string& title, const std::string& xlabel,
                           const std::string& ylabel, const std::vector<Series>& series);

/// Grouped bar chart over the four reward bins; one group of bars per run,
/// values given as percentages.
struct HistogramGroup {
  std::string label;
  std::array<double, 4> pct{0, 0, 0, 0};
};
std::string histogram_svg(const std::string& title, const std::vector<HistogramGroup>& groups);

/// Reads metrics.csv / steps.csv / updates.csv / eval.csv from each run
/// directory and writes reward.svg, epsilon.svg, loss_diff.svg,
/// reward_hist.svg and reward_hist.csv into out_dir. Never mutates run data.
void cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir);

}  // namespace roadrl
