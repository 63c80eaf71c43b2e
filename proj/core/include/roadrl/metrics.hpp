#pragma once

#include <array>
#include <string>
#include <vector>

namespace roadrl {

/// Deterministic CSV formatting: %.17g for reals so files round-trip and
/// byte-compare across identical runs.
std::string csv_num(double v);

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

Csv read_csv(const std::string& path);

/// One evaluation episode, with its per-step reward histogram over the four
/// bins [0,0.25) [0.25,0.5) [0.5,0.75) [0.75,1].
struct EvalEpisode {
  int start_index = 0;
  int trial = 0;
  int steps = 0;
  double cum_reward = 0.0;
  double mean_reward = 0.0;
  bool collided = false;
  std::array<long, 4> bins{0, 0, 0, 0};
};

int reward_bin(double reward);

struct EvalReport {
  std::vector<EvalEpisode> episodes;
  double avg_len = 0.0;
  double std_len = 0.0;  // population standard deviation
  long min_len = 0;
  double cfr_pct = 0.0;  // % of episodes reaching the step cap collision-free
  std::array<long, 4> reward_bins{0, 0, 0, 0};
  long total_steps = 0;

  void aggregate(int step_cap);
  std::string table(const std::string& label) const;
};

void write_eval_csv(const std::string& path, const EvalReport& report);
void write_eval_summary_csv(const std::string& path, const EvalReport& report);

/// Simple moving average with window w (trailing); ys shorter than w average
/// what is available.
std::vector<double> moving_average(const std::vector<double>& ys, int w);

/// Centered moving average with an odd window, shrinking at the edges.
std::vector<double> centered_moving_average(const std::vector<double>& ys, int w);

}  // namespace roadrl
