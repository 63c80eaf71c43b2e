#include "roadrl/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "roadrl/error.hpp"

namespace roadrl {

double point_segment_distance(double px, double py, const Segment& s) {
  const double dx = s.x1 - s.x0;
  const double dy = s.y1 - s.y0;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) {
    t = ((px - s.x0) * dx + (py - s.y0) * dy) / len2;
    t = std::clamp(t, 0.0, 1.0);
  }
  const double cx = s.x0 + t * dx;
  const double cy = s.y0 + t * dy;
  return std::hypot(px - cx, py - cy);
}

double distance_to_center(double px, double py, std::span<const Segment> center) {
  if (center.empty()) throw ConfigError("track has no center line");
  double best = point_segment_distance(px, py, center[0]);
  for (std::size_t i = 1; i < center.size(); ++i)
    best = std::min(best, point_segment_distance(px, py, center[i]));
  return best;
}

Cell Track::at_world(double x, double y) const {
  if (x < 0.0 || y < 0.0) return Cell::OffRoad;
  return at(static_cast<int>(y / cell), static_cast<int>(x / cell));
}

namespace {

void build_center_segments(Track& t, const std::vector<std::pair<int, int>>& c_cells) {
  const double link = 1.5 * t.cell;
  for (std::size_t i = 0; i < c_cells.size(); ++i) {
    const double xi = (c_cells[i].second + 0.5) * t.cell;
    const double yi = (c_cells[i].first + 0.5) * t.cell;
    for (std::size_t j = i + 1; j < c_cells.size(); ++j) {
      const double xj = (c_cells[j].second + 0.5) * t.cell;
      const double yj = (c_cells[j].first + 0.5) * t.cell;
      if (std::hypot(xi - xj, yi - yj) <= link) t.center.push_back(Segment{xi, yi, xj, yj});
    }
  }
}

}  // namespace

Track Track::parse(const std::string& text) {
  Track t;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool in_grid = false;
  std::vector<std::string> grid_lines;
  while (std::getline(in, line)) {
    ++lineno;
    if (in_grid) {
      grid_lines.push_back(line);
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "cell_size") {
      ls >> t.cell;
    } else if (key == "rows") {
      ls >> t.rows;
    } else if (key == "cols") {
      ls >> t.cols;
    } else if (key == "start") {
      std::string set;
      Pose p;
      ls >> set >> p.x >> p.y >> p.heading;
      if (!ls) throw ConfigError("track line " + std::to_string(lineno) + ": bad start pose");
      if (set == "train") t.train_starts.push_back(p);
      else if (set == "test") t.test_starts.push_back(p);
      else throw ConfigError("track line " + std::to_string(lineno) + ": unknown start set");
    } else if (key == "grid") {
      in_grid = true;
    } else {
      throw ConfigError("track line " + std::to_string(lineno) + ": unknown key " + key);
    }
  }
  if (t.rows < 1 || t.cols < 1 || !(t.cell > 0.0))
    throw ConfigError("track header must set positive rows, cols and cell_size");
  if (static_cast<int>(grid_lines.size()) != t.rows)
    throw ConfigError("track grid has " + std::to_string(grid_lines.size()) + " rows, expected " +
                      std::to_string(t.rows));

  t.grid.assign(static_cast<std::size_t>(t.rows) * t.cols, Cell::OffRoad);
  std::vector<std::pair<int, int>> c_cells;
  for (int r = 0; r < t.rows; ++r) {
    const std::string& row = grid_lines[static_cast<std::size_t>(r)];
    if (static_cast<int>(row.size()) != t.cols)
      throw ConfigError("track grid row " + std::to_string(r) + " has wrong length");
    for (int c = 0; c < t.cols; ++c) {
      Cell cell = Cell::OffRoad;
      switch (row[static_cast<std::size_t>(c)]) {
        case '.': cell = Cell::Road; break;
        case '#': cell = Cell::OffRoad; break;
        case 'O': cell = Cell::Obstacle; break;
        case 'C':
          cell = Cell::Road;
          c_cells.emplace_back(r, c);
          break;
        default:
          throw ConfigError("track grid row " + std::to_string(r) + ": bad cell character '" +
                            row[static_cast<std::size_t>(c)] + "'");
      }
      t.grid[static_cast<std::size_t>(r) * t.cols + c] = cell;
    }
  }
  if (c_cells.empty()) throw ConfigError("track has no center-line ('C') cells");
  build_center_segments(t, c_cells);
  for (const Pose& p : t.train_starts)
    if (t.at_world(p.x, p.y) != Cell::Road)
      throw ConfigError("train start pose off the road");
  for (const Pose& p : t.test_starts)
    if (t.at_world(p.x, p.y) != Cell::Road)
      throw ConfigError("test start pose off the road");
  return t;
}

Track Track::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open track file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::string Track::builtin_loop_text() {
  const int rows = 40;
  const int cols = 60;
  std::vector<std::string> g(rows, std::string(cols, '#'));
  auto paint = [&](int r0, int r1, int c0, int c1, char ch) {
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c) g[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = ch;
  };
  // Rectangular ring, band five cells wide.
  paint(3, 7, 3, 56, '.');
  paint(32, 36, 3, 56, '.');
  paint(3, 36, 3, 7, '.');
  paint(3, 36, 52, 56, '.');
  // Cross street through the middle.
  paint(8, 31, 27, 31, '.');
  // Center line: loop perimeter plus the cross street spine.
  paint(5, 5, 5, 54, 'C');
  paint(34, 34, 5, 54, 'C');
  paint(6, 33, 5, 5, 'C');
  paint(6, 33, 54, 54, 'C');
  paint(6, 33, 29, 29, 'C');
  // Parked cars on the outer edges.
  paint(3, 3, 14, 15, 'O');
  paint(3, 3, 40, 41, 'O');
  paint(36, 36, 20, 21, 'O');
  paint(16, 17, 3, 3, 'O');
  paint(22, 23, 56, 56, 'O');

  auto pose_line = [](const char* set, double x, double y, double h) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "start %s %.17g %.17g %.17g\n", set, x, y, h);
    return std::string(buf);
  };
  const double pi = 3.14159265358979323846;
  std::string text;
  text += "# roadrl default track: rectangular loop, one cross street, parked cars\n";
  text += "cell_size 0.5\n";
  text += "rows 40\n";
  text += "cols 60\n";
  text += pose_line("train", 5.25, 2.75, 0.0);
  text += pose_line("train", 20.25, 2.75, 0.0);
  text += pose_line("train", 27.25, 6.25, pi / 2);
  text += pose_line("train", 27.25, 12.75, pi / 2);
  text += pose_line("train", 25.25, 17.25, pi);
  text += pose_line("train", 10.25, 17.25, pi);
  text += pose_line("train", 2.75, 13.75, -pi / 2);
  text += pose_line("train", 2.75, 7.25, -pi / 2);
  text += pose_line("train", 14.75, 5.25, pi / 2);
  text += pose_line("train", 14.75, 14.25, -pi / 2);
  text += pose_line("test", 7.75, 2.75, 0.0);
  text += pose_line("test", 22.75, 2.75, 0.0);
  text += pose_line("test", 27.25, 8.75, pi / 2);
  text += pose_line("test", 27.25, 15.25, pi / 2);
  text += pose_line("test", 22.75, 17.25, pi);
  text += pose_line("test", 7.75, 17.25, pi);
  text += pose_line("test", 2.75, 11.25, -pi / 2);
  text += pose_line("test", 2.75, 5.25, -pi / 2);
  text += pose_line("test", 14.75, 7.25, pi / 2);
  text += pose_line("test", 14.75, 12.25, -pi / 2);
  text += "grid\n";
  for (int r = 0; r < rows; ++r) {
    text += g[static_cast<std::size_t>(r)];
    text += '\n';
  }
  return text;
}

Track Track::builtin_loop() { return parse(builtin_loop_text()); }

void EnvConfig::validate() const {
  if (!(beta > 0.0)) throw ConfigError("env beta must be > 0");
  if (!(dt > 0.0)) throw ConfigError("env dt must be > 0");
  if (!(speed > 0.0)) throw ConfigError("env speed must be > 0");
  if (steer_gain < 0.0) throw ConfigError("env steer gain must be >= 0");
  if (step_cap < 1) throw ConfigError("env step cap must be >= 1");
  if (window_depth < 1 || window_width < 1)
    throw ConfigError("observation window must be at least 1x1");
}

RoadEnv::RoadEnv(Track track, EnvConfig cfg) : track_(std::move(track)), cfg_(std::move(cfg)) {
  cfg_.validate();
  if (track_.train_starts.empty()) throw ConfigError("track has no train start poses");
  car_.speed = cfg_.speed;
}

Tensor RoadEnv::reset(int start_index, bool test_set) {
  const std::vector<Pose>& set = test_set ? track_.test_starts : track_.train_starts;
  if (start_index < 0 || start_index >= static_cast<int>(set.size()))
    throw ConfigError("start index out of range");
  const Pose& p = set[static_cast<std::size_t>(start_index)];
  car_.x = p.x;
  car_.y = p.y;
  car_.heading = p.heading;
  car_.speed = cfg_.speed;
  steps_ = 0;
  terminal_ = false;
  return observe();
}

StepResult RoadEnv::step(int action_index) {
  if (action_index < 0 || action_index >= action_count())
    throw ConfigError("action index out of range");
  return step_steer(kSteering[static_cast<std::size_t>(action_index)]);
}

StepResult RoadEnv::step_steer(double steer) {
  if (terminal_) throw std::logic_error("step() called on a terminal episode");
  car_.heading += steer * cfg_.steer_gain * cfg_.dt;
  car_.x += car_.speed * cfg_.dt * std::cos(car_.heading);
  car_.y += car_.speed * cfg_.dt * std::sin(car_.heading);
  steps_ += 1;

  StepResult res;
  const Cell cls = track_.at_world(car_.x, car_.y);
  if (cls != Cell::Road) {
    terminal_ = true;
    res.collided = true;
    res.reward = 0.0;  // collision step; the reward law never reaches 0 otherwise
  } else {
    res.reward = reward_at(car_.x, car_.y);
    if (steps_ >= cfg_.step_cap) terminal_ = true;
  }
  res.terminal = terminal_;
  res.obs = observe();
  return res;
}

Tensor RoadEnv::observe() const {
  Tensor obs({cfg_.window_depth, cfg_.window_width});
  const double ch = std::cos(car_.heading);
  const double sh = std::sin(car_.heading);
  const double half = (cfg_.window_width - 1) / 2.0;
  for (int i = 0; i < cfg_.window_depth; ++i) {
    const double fx = (i + 1) * track_.cell;
    for (int j = 0; j < cfg_.window_width; ++j) {
      const double fy = (j - half) * track_.cell;
      const double wx = car_.x + fx * ch - fy * sh;
      const double wy = car_.y + fx * sh + fy * ch;
      double v = 0.5;
      switch (track_.at_world(wx, wy)) {
        case Cell::Road: v = 0.0; break;
        case Cell::OffRoad: v = 0.5; break;
        case Cell::Obstacle: v = 1.0; break;
      }
      obs.at(i, j) = v;
    }
  }
  return obs;
}

double RoadEnv::reward_at(double x, double y) const {
  return std::exp(-cfg_.beta * distance_to_center(x, y, track_.center));
}

}  // namespace roadrl
