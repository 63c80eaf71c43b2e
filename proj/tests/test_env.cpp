#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "roadrl/env.hpp"
#include "roadrl/error.hpp"
#include "roadrl/rng.hpp"

using namespace roadrl;

namespace {

// Straight corridor: road rows 3..5, center line on row 4, left to right.
std::string corridor_text(int cols, const std::string& extra_starts = "") {
  std::ostringstream os;
  os << "cell_size 0.5\nrows 9\ncols " << cols << "\n";
  os << "start train 1.25 2.25 0\n";
  if (!extra_starts.empty()) os << extra_starts;
  os << "grid\n";
  for (int r = 0; r < 9; ++r) {
    for (int c = 0; c < cols; ++c) {
      char ch = '#';
      if (r >= 3 && r <= 5) ch = (r == 4) ? 'C' : '.';
      os << ch;
    }
    os << "\n";
  }
  return os.str();
}

EnvConfig small_cfg() {
  EnvConfig cfg;
  cfg.beta = 1.0;
  cfg.dt = 0.1;
  cfg.speed = 2.0;
  cfg.steer_gain = 1.2;
  cfg.step_cap = 100;
  cfg.window_depth = 4;
  cfg.window_width = 3;
  return cfg;
}

}  // namespace

TEST_SUITE("envsim") {

TEST_CASE("center distance") {
  const std::vector<Segment> segs = {{0, 0, 4, 0}, {4, 0, 4, 3}};
  SUBCASE("zero on the line") {
    CHECK(distance_to_center(2.0, 0.0, segs) == 0.0);
    CHECK(distance_to_center(4.0, 1.5, segs) == 0.0);
  }
  SUBCASE("perpendicular offset from a long segment") {
    CHECK(distance_to_center(2.0, 0.7, segs) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(distance_to_center(3.0, -1.3, segs) == doctest::Approx(1.3).epsilon(1e-12));
  }
  SUBCASE("beyond an endpoint the distance is to the endpoint") {
    CHECK(distance_to_center(-3.0, 4.0, segs) == doctest::Approx(5.0).epsilon(1e-12));
  }
  SUBCASE("matches a dense-sampling oracle") {
    Rng rng(42);
    for (int rep = 0; rep < 30; ++rep) {
      const double px = rng.uniform(-1.0, 6.0);
      const double py = rng.uniform(-2.0, 4.0);
      const double direct = distance_to_center(px, py, segs);
      if (direct < 0.1) continue;
      double brute = 1e30;
      for (const Segment& s : segs) {
        const double len = std::hypot(s.x1 - s.x0, s.y1 - s.y0);
        const int n = static_cast<int>(len / 1e-3) + 1;
        for (int i = 0; i <= n; ++i) {
          const double t = static_cast<double>(i) / n;
          brute = std::min(brute, std::hypot(px - (s.x0 + t * (s.x1 - s.x0)),
                                             py - (s.y0 + t * (s.y1 - s.y0))));
        }
      }
      CHECK(std::abs(direct - brute) < 1e-6);
    }
  }
}

TEST_CASE("reward law") {
  Track track = Track::parse(corridor_text(20));
  EnvConfig cfg = small_cfg();
  RoadEnv env(track, cfg);
  SUBCASE("distance zero gives reward one") {
    CHECK(env.reward_at(2.0, 2.25) == 1.0);  // on the center line exactly
  }
  SUBCASE("log-two distance halves the reward") {
    CHECK(env.reward_at(2.0, 2.25 + std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("strictly decreasing in the distance") {
    double prev = 2.0;
    for (double d = 0.0; d < 2.0; d += 0.1) {
      const double r = env.reward_at(2.0, 2.25 + d);
      CHECK(r < prev);
      CHECK(r > 0.0);
      CHECK(r <= 1.0);
      prev = r;
    }
  }
}

TEST_CASE("reset") {
  Track track = Track::builtin_loop();
  EnvConfig cfg;
  RoadEnv env(track, cfg);
  SUBCASE("builtin start sets hold ten poses each, all on the road, near center") {
    CHECK(env.start_count(false) == 10);
    CHECK(env.start_count(true) == 10);
    for (int mode = 0; mode < 2; ++mode) {
      for (int i = 0; i < 10; ++i) {
        env.reset(i, mode == 1);
        CHECK(env.center_distance() <= 1.25);  // half the road band width
      }
    }
  }
  SUBCASE("train and test poses are disjoint") {
    for (const Pose& a : track.train_starts)
      for (const Pose& b : track.test_starts)
        CHECK((a.x != b.x || a.y != b.y || a.heading != b.heading));
  }
  SUBCASE("same index gives the identical initial observation") {
    const Tensor o1 = env.reset(3, false);
    const Tensor o2 = env.reset(3, false);
    REQUIRE(o1.size() == o2.size());
    for (std::size_t i = 0; i < o1.size(); ++i) CHECK(o1[i] == o2[i]);
  }
  SUBCASE("bad index is rejected") {
    CHECK_THROWS_AS(env.reset(10, false), ConfigError);
    CHECK_THROWS_AS(env.reset(-1, true), ConfigError);
  }
}

TEST_CASE("kinematics") {
  Track track = Track::parse(corridor_text(40));
  EnvConfig cfg = small_cfg();
  SUBCASE("straight driving on an aligned road keeps the reward constant") {
    RoadEnv env(track, cfg);
    env.reset(0, false);
    for (int k = 0; k < 60; ++k) {
      const StepResult res = env.step_steer(0.0);
      REQUIRE_FALSE(res.terminal);
      CHECK(res.reward == 1.0);  // stays exactly on the center line
    }
  }
  SUBCASE("heading toward off-road terminates within distance/speed/dt steps") {
    // Car pointing straight down from y = 2.25; the road ends at y = 3.0 and
    // each step moves 0.2 m, so the fourth step crosses.
    const std::string base = corridor_text(40);
    Track t3 = Track::parse(
        "cell_size 0.5\nrows 9\ncols 40\nstart train 1.25 2.25 1.5707963267948966\ngrid\n" +
        base.substr(base.find("grid\n") + 5));
    RoadEnv down(t3, small_cfg());
    down.reset(0, false);
    StepResult res;
    int steps = 0;
    do {
      res = down.step_steer(0.0);
      ++steps;
    } while (!res.terminal && steps < 50);
    CHECK(res.terminal);
    CHECK(res.collided);
    CHECK(res.reward == 0.0);
    CHECK(steps == 4);
  }
  SUBCASE("opposite steering cancels") {
    RoadEnv env(track, cfg);
    env.reset(0, false);
    const double h0 = env.car().heading;
    env.step_steer(1.0);
    env.step_steer(-1.0);
    CHECK(env.car().heading == doctest::Approx(h0).epsilon(1e-12));
  }
  SUBCASE("episode length is capped") {
    EnvConfig capped = small_cfg();
    capped.step_cap = 25;
    RoadEnv env(track, capped);
    env.reset(0, false);
    int steps = 0;
    StepResult res;
    do {
      res = env.step_steer(0.0);
      ++steps;
    } while (!res.terminal);
    CHECK(steps == 25);
    CHECK_FALSE(res.collided);
  }
  SUBCASE("stepping a terminal episode is a contract violation") {
    EnvConfig capped = small_cfg();
    capped.step_cap = 2;
    RoadEnv env(track, capped);
    env.reset(0, false);
    env.step_steer(0.0);
    env.step_steer(0.0);
    CHECK_THROWS_AS(env.step_steer(0.0), std::logic_error);
  }
  SUBCASE("rewards on non-terminal steps stay in (0, 1]") {
    RoadEnv env(Track::builtin_loop(), EnvConfig{});
    Rng rng(9);
    for (int ep = 0; ep < 5; ++ep) {
      env.reset(rng.pick(10), false);
      while (true) {
        const StepResult res = env.step(rng.pick(5));
        if (res.terminal) {
          if (res.collided) CHECK(res.reward == 0.0);
          break;
        }
        CHECK(res.reward > 0.0);
        CHECK(res.reward <= 1.0);
      }
    }
  }
}

TEST_CASE("observation rendering") {
  SUBCASE("window shape follows the config") {
    EnvConfig cfg = small_cfg();
    cfg.window_depth = 7;
    cfg.window_width = 5;
    RoadEnv env(Track::parse(corridor_text(30)), cfg);
    const Tensor obs = env.reset(0, false);
    REQUIRE(obs.shape.size() == 2);
    CHECK(obs.dim(0) == 7);
    CHECK(obs.dim(1) == 5);
  }
  SUBCASE("distinct world states can alias to one observation") {
    EnvConfig cfg = small_cfg();
    Track track = Track::parse(corridor_text(40, "start train 3.25 2.25 0\n"));
    RoadEnv env(track, cfg);
    const Tensor o1 = env.reset(0, false);  // x = 1.25
    const Tensor o2 = env.reset(1, false);  // x = 3.25, same corridor view
    REQUIRE(o1.size() == o2.size());
    for (std::size_t i = 0; i < o1.size(); ++i) CHECK(o1[i] == o2[i]);
  }
  SUBCASE("window content rotates with the car") {
    // 9x9 all-road patch, one obstacle 1.5 m east of the car.
    std::ostringstream os;
    os << "cell_size 0.5\nrows 9\ncols 9\n";
    os << "start train 2.25 2.25 0\n";
    os << "start train 2.25 2.25 1.5707963267948966\n";
    os << "grid\n";
    for (int r = 0; r < 9; ++r) {
      for (int c = 0; c < 9; ++c) {
        if (r == 4 && c == 4) os << 'C';
        else if (r == 4 && c == 7) os << 'O';
        else os << '.';
      }
      os << "\n";
    }
    Track track = Track::parse(os.str());
    EnvConfig cfg = small_cfg();  // depth 4, width 3
    RoadEnv env(track, cfg);

    const Tensor east = env.reset(0, false);
    // Facing east the obstacle sits 1.5 m ahead, centered: row 2, col 1.
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(east.at(i, j) == ((i == 2 && j == 1) ? 1.0 : 0.0));

    const Tensor south = env.reset(1, false);
    // Facing south the window ahead is clear road.
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 3; ++j) CHECK(south.at(i, j) == 0.0);
  }
  SUBCASE("cells beyond the grid read as off-road") {
    std::ostringstream os;
    os << "cell_size 0.5\nrows 3\ncols 6\nstart train 2.25 0.75 0\ngrid\n";
    os << "CCCCCC\n";
    os << "......\n";
    os << "......\n";
    Track track = Track::parse(os.str());
    EnvConfig cfg = small_cfg();
    cfg.window_depth = 6;  // reaches past the right edge
    RoadEnv env(track, cfg);
    const Tensor obs = env.reset(0, false);
    CHECK(obs.at(5, 1) == 0.5);
  }
}

TEST_CASE("mirror symmetry") {
  // The corridor is symmetric about the center row. Mirroring the start pose
  // and negating every steering action must mirror the trajectory.
  Track track2 = Track::parse(corridor_text(
      60, "start train 1.25 1.75 0.3\nstart train 1.25 2.75 -0.3\n"));
  EnvConfig cfg = small_cfg();
  cfg.step_cap = 500;
  RoadEnv a(track2, cfg), b(track2, cfg);
  a.reset(1, false);
  b.reset(2, false);
  Rng rng(11);
  const double height = 9 * 0.5;
  while (true) {
    const double steer = RoadEnv::kSteering[static_cast<std::size_t>(rng.pick(5))];
    const StepResult ra = a.step_steer(steer);
    const StepResult rb = b.step_steer(-steer);
    CHECK(a.car().x == doctest::Approx(b.car().x).epsilon(1e-12));
    CHECK(a.car().y == doctest::Approx(height - b.car().y).epsilon(1e-12));
    CHECK(a.car().heading == doctest::Approx(-b.car().heading).epsilon(1e-12));
    CHECK(ra.reward == doctest::Approx(rb.reward).epsilon(1e-12));
    CHECK(ra.terminal == rb.terminal);
    if (ra.terminal) break;
  }
}

TEST_CASE("trajectories are deterministic") {
  Track track = Track::builtin_loop();
  EnvConfig cfg;
  RoadEnv e1(track, cfg), e2(track, cfg);
  Rng r1(77), r2(77);
  e1.reset(4, false);
  e2.reset(4, false);
  for (int k = 0; k < 200; ++k) {
    const int action = r1.pick(5);
    CHECK(action == r2.pick(5));
    const StepResult a = e1.step(action);
    const StepResult b = e2.step(action);
    CHECK(a.reward == b.reward);
    CHECK(a.terminal == b.terminal);
    for (std::size_t i = 0; i < a.obs.size(); ++i) CHECK(a.obs[i] == b.obs[i]);
    if (a.terminal) break;
  }
}

TEST_CASE("track parsing errors") {
  CHECK_THROWS_AS(Track::parse("rows 2\ncols 2\ngrid\n..\n..\n"), ConfigError);  // no C cells
  CHECK_THROWS_AS(Track::parse("cell_size 0.5\nrows 2\ncols 2\ngrid\nC.\n"), ConfigError);
  CHECK_THROWS_AS(Track::parse("cell_size 0.5\nrows 1\ncols 2\ngrid\nCX\n"), ConfigError);
  CHECK_THROWS_AS(
      Track::parse("cell_size 0.5\nrows 1\ncols 2\nstart train 0.25 0.25 0\nbogus 1\ngrid\nC.\n"),
      ConfigError);
  // start pose off the road
  CHECK_THROWS_AS(
      Track::parse("cell_size 0.5\nrows 2\ncols 2\nstart train 0.25 0.75 0\ngrid\nC.\n##\n"),
      ConfigError);
}

TEST_CASE("bundled default track matches the builtin definition") {
  std::ifstream f(std::string(ROADRL_REPO_DIR) + "/assets/tracks/default_loop.track");
  REQUIRE(static_cast<bool>(f));
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(ss.str() == Track::builtin_loop_text());
}

}  // TEST_SUITE
