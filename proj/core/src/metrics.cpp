#include "roadrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "roadrl/error.hpp"

namespace roadrl {

std::string csv_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int Csv::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

Csv read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open csv: " + path);
  Csv csv;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) fields.push_back(tok);
    if (line.back() == ',') fields.push_back("");
    if (first) {
      csv.header = std::move(fields);
      first = false;
    } else {
      csv.rows.push_back(std::move(fields));
    }
  }
  return csv;
}

int reward_bin(double reward) {
  if (reward < 0.25) return 0;
  if (reward < 0.5) return 1;
  if (reward < 0.75) return 2;
  return 3;  // right-closed last bin [0.75, 1]
}

void EvalReport::aggregate(int step_cap) {
  reward_bins = {0, 0, 0, 0};
  total_steps = 0;
  if (episodes.empty()) {
    avg_len = std_len = cfr_pct = 0.0;
    min_len = 0;
    return;
  }
  double sum = 0.0;
  min_len = episodes[0].steps;
  long survived = 0;
  for (const EvalEpisode& e : episodes) {
    sum += e.steps;
    min_len = std::min(min_len, static_cast<long>(e.steps));
    if (!e.collided && e.steps >= step_cap) ++survived;
    for (int k = 0; k < 4; ++k) reward_bins[static_cast<std::size_t>(k)] += e.bins[static_cast<std::size_t>(k)];
    total_steps += e.steps;
  }
  avg_len = sum / static_cast<double>(episodes.size());
  double var = 0.0;
  for (const EvalEpisode& e : episodes) {
    const double d = e.steps - avg_len;
    var += d * d;
  }
  std_len = std::sqrt(var / static_cast<double>(episodes.size()));
  cfr_pct = 100.0 * static_cast<double>(survived) / static_cast<double>(episodes.size());
}

std::string EvalReport::table(const std::string& label) const {
  char buf[256];
  std::string out;
  out += "Strategy                     | Average | Std Dev | Min  | CFR\n";
  out += "-----------------------------+---------+---------+------+--------\n";
  std::snprintf(buf, sizeof(buf), "%-29s| %7.2f | %7.2f | %4ld | %.2f%%\n", label.c_str(), avg_len,
                std_len, min_len, cfr_pct);
  out += buf;
  return out;
}

void write_eval_csv(const std::string& path, const EvalReport& report) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write eval csv: " + path);
  f << "start_index,trial,steps,cum_reward,mean_reward,collided,bin0,bin1,bin2,bin3\n";
  for (const EvalEpisode& e : report.episodes) {
    f << e.start_index << ',' << e.trial << ',' << e.steps << ',' << csv_num(e.cum_reward) << ','
      << csv_num(e.mean_reward) << ',' << (e.collided ? 1 : 0) << ',' << e.bins[0] << ','
      << e.bins[1] << ',' << e.bins[2] << ',' << e.bins[3] << '\n';
  }
  if (!f) throw IoError("write failure on eval csv: " + path);
}

void write_eval_summary_csv(const std::string& path, const EvalReport& report) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write eval summary: " + path);
  f << "episodes,avg_len,std_len,min_len,cfr_pct,bin0,bin1,bin2,bin3,total_steps\n";
  f << report.episodes.size() << ',' << csv_num(report.avg_len) << ',' << csv_num(report.std_len)
    << ',' << report.min_len << ',' << csv_num(report.cfr_pct) << ',' << report.reward_bins[0]
    << ',' << report.reward_bins[1] << ',' << report.reward_bins[2] << ','
    << report.reward_bins[3] << ',' << report.total_steps << '\n';
}

std::vector<double> moving_average(const std::vector<double>& ys, int w) {
  std::vector<double> out(ys.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    acc += ys[i];
    if (i >= static_cast<std::size_t>(w)) acc -= ys[i - static_cast<std::size_t>(w)];
    const std::size_t n = std::min<std::size_t>(i + 1, static_cast<std::size_t>(w));
    out[i] = acc / static_cast<double>(n);
  }
  return out;
}

std::vector<double> centered_moving_average(const std::vector<double>& ys, int w) {
  const int half = w / 2;
  std::vector<double> out(ys.size());
  const int n = static_cast<int>(ys.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    double acc = 0.0;
    for (int k = lo; k <= hi; ++k) acc += ys[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(i)] = acc / static_cast<double>(hi - lo + 1);
  }
  return out;
}

}  // namespace roadrl
