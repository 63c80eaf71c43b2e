#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "roadrl/tensor.hpp"

namespace roadrl {

enum class Cell : std::uint8_t { Road, OffRoad, Obstacle };

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

struct Segment {
  double x0, y0, x1, y1;
};

double point_segment_distance(double px, double py, const Segment& s);

/// Shortest Euclidean distance from a point to the center-line segment set.
double distance_to_center(double px, double py, std::span<const Segment> center);

/// Occupancy grid plus center-line geometry and start pose sets.
/// Text format: header lines (cell_size, rows, cols, "start train|test x y heading"),
/// a "grid" line, then `rows` lines of `cols` characters:
/// '.' road, '#' off-road, 'O' obstacle, 'C' road cell on the center line.
struct Track {
  int rows = 0;
  int cols = 0;
  double cell = 0.5;
  std::vector<Cell> grid;
  std::vector<Segment> center;
  std::vector<Pose> train_starts;
  std::vector<Pose> test_starts;

  Cell at(int r, int c) const {
    if (r < 0 || c < 0 || r >= rows || c >= cols) return Cell::OffRoad;
    return grid[static_cast<std::size_t>(r) * cols + c];
  }
  Cell at_world(double x, double y) const;
  double width_m() const { return cols * cell; }
  double height_m() const { return rows * cell; }

  static Track parse(const std::string& text);
  static Track load(const std::string& path);

  /// Default track: rectangular loop with a cross street and a few parked-car
  /// obstacle cells, 40x60 cells at 0.5 m.
  static Track builtin_loop();
  static std::string builtin_loop_text();
};

struct CarState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 2.0;  // constant for the whole run
};

struct EnvConfig {
  double beta = 1.0;        // reward distance decay
  double dt = 0.1;          // seconds per step
  double speed = 2.0;       // m/s
  double steer_gain = 1.2;  // rad/s at full steering action
  int step_cap = 2000;
  int window_depth = 12;
  int window_width = 8;
  std::string track_path;  // empty selects the builtin track

  void validate() const;
};

struct StepResult {
  Tensor obs;
  double reward = 0.0;
  bool terminal = false;
  bool collided = false;
};

/// Minimal environment surface the agent trains against.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual Tensor reset(int start_index, bool test_set) = 0;
  virtual StepResult step(int action_index) = 0;
  virtual int action_count() const = 0;
  virtual int start_count(bool test_set) const = 0;
  virtual int step_cap() const = 0;
};

/// Constant-speed car on a Track. Steering is the only control; the episode
/// ends on the step that moves the car into a non-road cell (reward 0) or
/// when the step cap is reached.
class RoadEnv final : public Environment {
 public:
  static constexpr std::array<double, 5> kSteering{-1.0, -0.5, 0.0, 0.5, 1.0};

  RoadEnv(Track track, EnvConfig cfg);

  Tensor reset(int start_index, bool test_set) override;
  StepResult step(int action_index) override;
  int action_count() const override { return static_cast<int>(kSteering.size()); }
  int start_count(bool test_set) const override {
    return static_cast<int>((test_set ? track_.test_starts : track_.train_starts).size());
  }
  int step_cap() const override { return cfg_.step_cap; }

  /// Kinematics step with a raw steering value in [-1, 1].
  StepResult step_steer(double steer);

  /// Forward-facing occupancy window in the car frame, depth x width,
  /// encoded road 0, off-road 0.5, obstacle 1. Cells outside the grid read
  /// as off-road.
  Tensor observe() const;

  double reward_at(double x, double y) const;
  double center_distance() const { return distance_to_center(car_.x, car_.y, track_.center); }

  const CarState& car() const { return car_; }
  const Track& track() const { return track_; }
  const EnvConfig& config() const { return cfg_; }
  int steps() const { return steps_; }
  bool terminal() const { return terminal_; }

 private:
  Track track_;
  EnvConfig cfg_;
  CarState car_;
  int steps_ = 0;
  bool terminal_ = true;
};

}  // namespace roadrl
