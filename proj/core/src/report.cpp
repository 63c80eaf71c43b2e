#include "roadrl/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "roadrl/error.hpp"
#include "roadrl/metrics.hpp"

namespace roadrl {

namespace {

namespace fs = std::filesystem;

constexpr std::array<const char*, 8> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                "#9467bd", "#17becf", "#8c564b", "#7f7f7f"};

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  static constexpr double left = 72, right = 880, top = 48, bottom = 460;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;

  double px(double x) const { return left + (x - xmin) / (xmax - xmin) * (right - left); }
  double py(double y) const { return bottom - (y - ymin) / (ymax - ymin) * (bottom - top); }
};

void svg_open(std::string& svg, const std::string& title) {
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"520\" "
         "viewBox=\"0 0 900 520\">\n<rect width=\"900\" height=\"520\" fill=\"white\"/>\n";
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "<text x=\"450\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                "font-size=\"16\">%s</text>\n",
                xml_escape(title).c_str());
  svg += buf;
}

void axis_labels(std::string& svg, const Frame& f, const std::string& xlabel,
                 const std::string& ylabel) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%g\" y=\"500\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                "font-size=\"13\">%s</text>\n",
                (Frame::left + Frame::right) / 2, xml_escape(xlabel).c_str());
  svg += buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"18\" y=\"%g\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                "font-size=\"13\" transform=\"rotate(-90 18 %g)\">%s</text>\n",
                (Frame::top + Frame::bottom) / 2, (Frame::top + Frame::bottom) / 2,
                xml_escape(ylabel).c_str());
  svg += buf;
  (void)f;
}

void frame_axes(std::string& svg, const Frame& f, bool x_ticks) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", Frame::left,
                Frame::bottom, Frame::right, Frame::bottom);
  svg += buf;
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", Frame::left,
                Frame::top, Frame::left, Frame::bottom);
  svg += buf;
  for (int i = 0; i <= 5; ++i) {
    const double yv = f.ymin + (f.ymax - f.ymin) * i / 5.0;
    const double ypy = f.py(yv);
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#dddddd\"/>\n",
                  Frame::left, ypy, Frame::right, ypy);
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%g\" y=\"%g\" text-anchor=\"end\" font-family=\"sans-serif\" "
                  "font-size=\"11\">%s</text>\n",
                  Frame::left - 6, ypy + 4, num(yv).c_str());
    svg += buf;
    if (x_ticks) {
      const double xv = f.xmin + (f.xmax - f.xmin) * i / 5.0;
      const double xpx = f.px(xv);
      std::snprintf(buf, sizeof(buf),
                    "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#dddddd\"/>\n", xpx,
                    Frame::top, xpx, Frame::bottom);
      svg += buf;
      std::snprintf(buf, sizeof(buf),
                    "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                    "font-size=\"11\">%s</text>\n",
                    xpx, Frame::bottom + 16, num(xv).c_str());
      svg += buf;
    }
  }
}

void legend_entry(std::string& svg, std::size_t index, const char* color,
                  const std::string& label) {
  char buf[512];
  const double ly = 60 + 18 * static_cast<double>(index);
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"700\" y1=\"%g\" x2=\"730\" y2=\"%g\" stroke=\"%s\" "
                "stroke-width=\"2\"/><text x=\"736\" y=\"%g\" font-family=\"sans-serif\" "
                "font-size=\"12\">%s</text>\n",
                ly, ly, color, ly + 4, xml_escape(label).c_str());
  svg += buf;
}

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& xlabel,
                           const std::string& ylabel, const std::vector<Series>& series) {
  Frame f;
  f.xmin = f.ymin = std::numeric_limits<double>::infinity();
  f.xmax = f.ymax = -std::numeric_limits<double>::infinity();
  for (const Series& s : series) {
    for (double x : s.xs) {
      f.xmin = std::min(f.xmin, x);
      f.xmax = std::max(f.xmax, x);
    }
    for (double y : s.ys) {
      f.ymin = std::min(f.ymin, y);
      f.ymax = std::max(f.ymax, y);
    }
  }
  if (!std::isfinite(f.xmin)) f = Frame{};
  if (f.xmax == f.xmin) f.xmax = f.xmin + 1;
  if (f.ymax == f.ymin) {
    f.ymax += 0.5;
    f.ymin -= 0.5;
  } else {
    const double pad = 0.05 * (f.ymax - f.ymin);
    f.ymax += pad;
    f.ymin -= pad;
  }

  std::string svg;
  svg_open(svg, title);
  frame_axes(svg, f, true);
  axis_labels(svg, f, xlabel, ylabel);
  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    const char* color = kColors[si % kColors.size()];
    const std::size_t n = std::min(s.xs.size(), s.ys.size());
    const std::size_t stride = std::max<std::size_t>(1, n / 4000);
    std::string pts;
    for (std::size_t i = 0; i < n; i += stride) {
      pts += num(f.px(s.xs[i]));
      pts += ',';
      pts += num(f.py(s.ys[i]));
      pts += ' ';
    }
    if (n > 0 && (n - 1) % stride != 0) {
      pts += num(f.px(s.xs[n - 1]));
      pts += ',';
      pts += num(f.py(s.ys[n - 1]));
    }
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += color;
    svg += "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    legend_entry(svg, si, color, s.label);
  }
  svg += "</svg>\n";
  return svg;
}

std::string histogram_svg(const std::string& title, const std::vector<HistogramGroup>& groups) {
  const std::array<const char*, 4> bin_labels = {"[0,0.25)", "[0.25,0.5)", "[0.5,0.75)",
                                                 "[0.75,1]"};
  Frame f;
  f.xmin = 0;
  f.xmax = 4;
  f.ymin = 0;
  double top = 0.0;
  for (const HistogramGroup& g : groups)
    for (double v : g.pct) top = std::max(top, v);
  f.ymax = std::max(10.0, top * 1.1);

  std::string svg;
  svg_open(svg, title);
  frame_axes(svg, f, false);
  axis_labels(svg, f, "reward range", "% of steps");
  char buf[512];
  const double bin_width = (Frame::right - Frame::left) / 4.0;
  const std::size_t ngroups = std::max<std::size_t>(1, groups.size());
  const double bar_w = bin_width * 0.8 / static_cast<double>(ngroups);
  for (int bin = 0; bin < 4; ++bin) {
    const double x0 = Frame::left + bin * bin_width;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                  "font-size=\"12\">%s</text>\n",
                  x0 + bin_width / 2, Frame::bottom + 18, bin_labels[static_cast<std::size_t>(bin)]);
    svg += buf;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      const double v = groups[gi].pct[static_cast<std::size_t>(bin)];
      const double bx = x0 + bin_width * 0.1 + bar_w * static_cast<double>(gi);
      const double by = f.py(v);
      std::snprintf(buf, sizeof(buf),
                    "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"%s\"/>\n", bx, by,
                    bar_w * 0.92, Frame::bottom - by, kColors[gi % kColors.size()]);
      svg += buf;
    }
  }
  for (std::size_t gi = 0; gi < groups.size(); ++gi)
    legend_entry(svg, gi, kColors[gi % kColors.size()], groups[gi].label);
  svg += "</svg>\n";
  return svg;
}

namespace {

double to_double(const std::string& s, const std::string& file) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw ConfigError(file + ": malformed numeric field '" + s + "'");
  }
}

int need_column(const Csv& csv, const std::string& name, const std::string& file) {
  const int c = csv.column(name);
  if (c < 0) throw ConfigError(file + ": missing column '" + name + "'");
  return c;
}

std::string run_label(const std::string& dir) {
  fs::path p(dir);
  if (p.filename().string().empty()) p = p.parent_path();
  return p.filename().string();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << content;
}

}  // namespace

void cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir) {
  if (run_dirs.empty()) throw ConfigError("report needs at least one run directory");
  fs::create_directories(out_dir);

  std::vector<Series> reward_series, eps_series, loss_series;
  std::vector<HistogramGroup> hist_groups;
  std::vector<std::array<long, 4>> hist_counts;

  for (const std::string& dir : run_dirs) {
    const std::string label = run_label(dir);
    const fs::path metrics_path = fs::path(dir) / "metrics.csv";
    if (!fs::exists(metrics_path))
      throw IoError("no metrics.csv in run directory: " + dir);
    {
      const Csv csv = read_csv(metrics_path.string());
      const int c_ep = need_column(csv, "episode", metrics_path.string());
      const int c_rw = need_column(csv, "cum_reward", metrics_path.string());
      Series s;
      s.label = label;
      std::vector<double> raw;
      for (const auto& row : csv.rows) {
        s.xs.push_back(to_double(row[static_cast<std::size_t>(c_ep)], metrics_path.string()));
        raw.push_back(to_double(row[static_cast<std::size_t>(c_rw)], metrics_path.string()));
      }
      s.ys = moving_average(raw, 100);
      reward_series.push_back(std::move(s));
    }
    const fs::path steps_path = fs::path(dir) / "steps.csv";
    if (fs::exists(steps_path)) {
      const Csv csv = read_csv(steps_path.string());
      const int c_st = need_column(csv, "step", steps_path.string());
      const int c_eps = need_column(csv, "epsilon", steps_path.string());
      Series s;
      s.label = label;
      for (const auto& row : csv.rows) {
        s.xs.push_back(to_double(row[static_cast<std::size_t>(c_st)], steps_path.string()));
        s.ys.push_back(to_double(row[static_cast<std::size_t>(c_eps)], steps_path.string()));
      }
      eps_series.push_back(std::move(s));
    }
    const fs::path updates_path = fs::path(dir) / "updates.csv";
    if (fs::exists(updates_path)) {
      const Csv csv = read_csv(updates_path.string());
      const int c_up = need_column(csv, "update", updates_path.string());
      const int c_loss = need_column(csv, "loss", updates_path.string());
      std::vector<double> diffs, xs;
      double prev = 0.0;
      bool have_prev = false;
      for (const auto& row : csv.rows) {
        const double loss = to_double(row[static_cast<std::size_t>(c_loss)], updates_path.string());
        const double upd = to_double(row[static_cast<std::size_t>(c_up)], updates_path.string());
        if (have_prev) {
          diffs.push_back(std::abs(loss - prev));
          xs.push_back(upd);
        }
        prev = loss;
        have_prev = true;
      }
      Series s;
      s.label = label;
      s.xs = std::move(xs);
      s.ys = centered_moving_average(diffs, 51);
      loss_series.push_back(std::move(s));
    }
    const fs::path eval_path = fs::path(dir) / "eval.csv";
    if (fs::exists(eval_path)) {
      const Csv csv = read_csv(eval_path.string());
      std::array<int, 4> cols{};
      for (int k = 0; k < 4; ++k)
        cols[static_cast<std::size_t>(k)] =
            need_column(csv, "bin" + std::to_string(k), eval_path.string());
      std::array<long, 4> counts{0, 0, 0, 0};
      for (const auto& row : csv.rows)
        for (int k = 0; k < 4; ++k)
          counts[static_cast<std::size_t>(k)] += static_cast<long>(
              to_double(row[static_cast<std::size_t>(cols[static_cast<std::size_t>(k)])],
                        eval_path.string()));
      const double total = static_cast<double>(counts[0] + counts[1] + counts[2] + counts[3]);
      HistogramGroup g;
      g.label = label;
      if (total > 0)
        for (int k = 0; k < 4; ++k)
          g.pct[static_cast<std::size_t>(k)] =
              100.0 * static_cast<double>(counts[static_cast<std::size_t>(k)]) / total;
      hist_groups.push_back(g);
      hist_counts.push_back(counts);
    }
  }

  write_file(fs::path(out_dir) / "reward.svg",
             line_chart_svg("Reward per episode (moving average, window 100)", "episode",
                            "episode reward", reward_series));
  if (!eps_series.empty())
    write_file(fs::path(out_dir) / "epsilon.svg",
               line_chart_svg("Exploration rate per step", "step", "epsilon", eps_series));
  if (!loss_series.empty())
    write_file(fs::path(out_dir) / "loss_diff.svg",
               line_chart_svg("Absolute loss difference per update (centered average, window 51)",
                              "update", "|loss delta|", loss_series));
  if (!hist_groups.empty()) {
    write_file(fs::path(out_dir) / "reward_hist.svg",
               histogram_svg("Share of evaluation rewards per range", hist_groups));
    std::string csv = "run,bin0,bin1,bin2,bin3,pct0,pct1,pct2,pct3\n";
    for (std::size_t i = 0; i < hist_groups.size(); ++i) {
      csv += hist_groups[i].label;
      for (int k = 0; k < 4; ++k) csv += "," + std::to_string(hist_counts[i][static_cast<std::size_t>(k)]);
      for (int k = 0; k < 4; ++k) csv += "," + csv_num(hist_groups[i].pct[static_cast<std::size_t>(k)]);
      csv += '\n';
    }
    write_file(fs::path(out_dir) / "reward_hist.csv", csv);
  }
}

}  // namespace roadrl
