#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "roadrl/checkpoint.hpp"
#include "roadrl/config.hpp"
#include "roadrl/error.hpp"
#include "roadrl/metrics.hpp"
#include "roadrl/report.hpp"
#include "roadrl/run.hpp"

using namespace roadrl;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("roadrl_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(static_cast<bool>(f));
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// metrics.csv with the trailing wall_ms field removed from every row
std::string strip_wall_ms(const std::string& csv) {
  std::istringstream in(csv);
  std::string out, line;
  while (std::getline(in, line)) {
    const std::size_t cut = line.rfind(',');
    out += line.substr(0, cut);
    out += '\n';
  }
  return out;
}

// Small fast config on the builtin track.
RunConfig tiny_run(const fs::path& out) {
  RunConfig cfg;
  cfg.total_steps = 600;
  cfg.seed = 5;
  cfg.out_dir = out.string();
  cfg.checkpoint_every = 0;
  cfg.env.window_depth = 6;
  cfg.env.window_width = 4;
  cfg.env.step_cap = 120;
  cfg.net.encoder_widths = {8};
  cfg.net.lstm_width = 8;
  cfg.agent.trace_len = 4;
  cfg.agent.n_err = 1;
  cfg.agent.batch = 2;
  cfg.agent.update_rate = 8;
  cfg.agent.start_episodes = 3;
  cfg.agent.replay_capacity = 50;
  cfg.agent.lr = 1e-3;
  cfg.strategy.kind = StrategyKind::ConstantEps;
  cfg.strategy.epsilon = 0.1;
  return cfg;
}

// Corridor long enough that a straight driver always reaches the cap.
std::string straight_track_text() {
  std::ostringstream os;
  os << "cell_size 0.5\nrows 9\ncols 200\n";
  for (int i = 0; i < 10; ++i) os << "start train " << (1.25 + 0.1 * i) << " 2.25 0\n";
  for (int i = 0; i < 10; ++i) os << "start test " << (3.25 + 0.1 * i) << " 2.25 0\n";
  os << "grid\n";
  for (int r = 0; r < 9; ++r) {
    for (int c = 0; c < 200; ++c) os << (r == 4 ? 'C' : (r >= 3 && r <= 5 ? '.' : '#'));
    os << "\n";
  }
  return os.str();
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config parsing") {
  SUBCASE("empty text yields the documented defaults") {
    const RunConfig cfg = RunConfig::from_text("", "test", false);
    CHECK(cfg.total_steps == 50000);
    CHECK(cfg.agent.gamma == 0.99);
    CHECK(cfg.agent.eta == 0.001);
    CHECK(cfg.agent.update_rate == 4);
    CHECK(cfg.agent.trace_len == 10);
    CHECK(cfg.agent.n_err == 7);
    CHECK(cfg.agent.batch == 10);
    CHECK(cfg.agent.start_episodes == 999);
    CHECK(cfg.agent.replay_capacity == 1000);
    CHECK(cfg.strategy.epsilon == 0.05);
    CHECK(cfg.strategy.temperature == 0.1);
    CHECK(cfg.env.beta == 1.0);
    CHECK(cfg.env.step_cap == 2000);
    CHECK(cfg.env.window_depth == 12);
    CHECK(cfg.env.window_width == 8);
    CHECK(cfg.net.obs_rows == 12);  // derived from the window
    CHECK(cfg.net.actions == 5);
  }
  SUBCASE("unknown keys are rejected with their line number") {
    try {
      RunConfig::from_text("agent.gamma = 0.9\nagent.gama = 0.5\n", "cfg", false);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("cfg:2") != std::string::npos);
      CHECK(msg.find("agent.gama") != std::string::npos);
    }
  }
  SUBCASE("malformed numbers are rejected with their line number") {
    try {
      RunConfig::from_text("agent.lr = fast\n", "cfg", false);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("cfg:1") != std::string::npos);
    }
  }
  SUBCASE("cross-field constraints are validated") {
    CHECK_THROWS_AS(
        RunConfig::from_text("agent.n_err = 12\nagent.trace_len = 10\n", "cfg", false),
        ConfigError);
    CHECK_THROWS_AS(RunConfig::from_text("strategy.kind = decreasing\nstrategy.n_start = 60000\n"
                                         "run.total_steps = 50000\n",
                                         "cfg", false),
                    ConfigError);
  }
  SUBCASE("bmc settings round-trip through dump") {
    const std::string text =
        "strategy.kind = bmc\nstrategy.alpha0 = 25\nstrategy.beta0 = 25\n"
        "strategy.a0 = 250\nstrategy.b0 = 250\nstrategy.mu0 = 0\nstrategy.tau0 = 1\n";
    const RunConfig cfg = RunConfig::from_text(text, "test", false);
    const std::string dumped = cfg.dump();
    const RunConfig cfg2 = RunConfig::from_text(dumped, "dump", false);
    CHECK(cfg2.strategy.kind == StrategyKind::Bmc);
    CHECK(cfg2.strategy.bmc_alpha0 == 25.0);
    CHECK(cfg2.strategy.bmc_a0 == 250.0);
    CHECK(cfg2.dump() == dumped);  // dump is a fixpoint
  }
  SUBCASE("environment variables override file values") {
    setenv("APP_AGENT_GAMMA", "0.5", 1);
    setenv("APP_STRATEGY_KIND", "softmax", 1);
    const RunConfig cfg = RunConfig::from_text("agent.gamma = 0.9\n", "test", true);
    unsetenv("APP_AGENT_GAMMA");
    unsetenv("APP_STRATEGY_KIND");
    CHECK(cfg.agent.gamma == 0.5);
    CHECK(cfg.strategy.kind == StrategyKind::Softmax);
  }
}

TEST_CASE("cmd_train writes the documented artifacts") {
  const fs::path out = fresh_dir("train_smoke");
  RunConfig cfg = tiny_run(out);
  cfg.agent.lr = 0.0;                 // zero-learning smoke
  cfg.agent.start_episodes = 999;    // gate never opens
  const TrainResult res = cmd_train(cfg);
  CHECK(res.steps >= 600);
  CHECK(res.updates == 0);
  CHECK(fs::exists(out / "config.resolved"));
  CHECK(fs::exists(out / "checkpoint_final.ck"));

  const Csv metrics = read_csv((out / "metrics.csv").string());
  CHECK(metrics.header ==
        std::vector<std::string>{"episode", "steps", "cum_reward", "mean_reward", "epsilon",
                                 "loss_ma", "wall_ms"});
  CHECK(static_cast<long>(metrics.rows.size()) == res.episodes);
  // one steps.csv row per environment step at the default cadence
  const Csv steps = read_csv((out / "steps.csv").string());
  CHECK(static_cast<long>(steps.rows.size()) == res.steps);
  // epsilon pinned at 1 through warmup
  CHECK(steps.rows[0][1] == "1");
  auto [net_cfg, params] = load_checkpoint(res.final_checkpoint);
  CHECK(net_cfg.lstm_width == 8);
  fs::remove_all(out);
}

TEST_CASE("identical seeds reproduce a run byte-for-byte") {
  const fs::path out1 = fresh_dir("det1");
  const fs::path out2 = fresh_dir("det2");
  RunConfig c1 = tiny_run(out1);
  RunConfig c2 = tiny_run(out2);
  cmd_train(c1);
  cmd_train(c2);
  CHECK(strip_wall_ms(file_bytes(out1 / "metrics.csv")) ==
        strip_wall_ms(file_bytes(out2 / "metrics.csv")));
  CHECK(file_bytes(out1 / "steps.csv") == file_bytes(out2 / "steps.csv"));
  CHECK(file_bytes(out1 / "updates.csv") == file_bytes(out2 / "updates.csv"));
  CHECK(file_bytes(out1 / "checkpoint_final.ck") == file_bytes(out2 / "checkpoint_final.ck"));
  fs::remove_all(out1);
  fs::remove_all(out2);
}

TEST_CASE("evaluation protocol") {
  const fs::path dir = fresh_dir("eval");
  const fs::path track_path = dir / "straight.track";
  {
    std::ofstream f(track_path);
    f << straight_track_text();
  }
  EnvConfig env_cfg;
  env_cfg.track_path = track_path.string();
  env_cfg.step_cap = 40;
  env_cfg.window_depth = 6;
  env_cfg.window_width = 4;
  const Track track = Track::load(track_path.string());

  NetworkConfig net;
  net.obs_rows = 6;
  net.obs_cols = 4;
  net.encoder_widths = {4};
  net.lstm_width = 4;
  net.seed = 9;

  SUBCASE("an agent that always survives reaches CFR 100 with min at the cap") {
    // pin the greedy action to straight
    ParamSet p = zeros_like(net);
    p.adv_b[2] = 1.0;
    const EvalReport rep = evaluate_params(track, env_cfg, net, p, false, 30, 4);
    CHECK(rep.episodes.size() == 300);  // 30 trials x 10 start poses
    CHECK(rep.cfr_pct == 100.0);
    CHECK(rep.min_len == 40);
    CHECK(rep.avg_len == 40.0);
    CHECK(rep.std_len == 0.0);
  }
  SUBCASE("an agent that always collides at step k scores average k, std 0, CFR 0") {
    // hard right steering from identical starts collides deterministically
    ParamSet p = zeros_like(net);
    p.adv_b[4] = 1.0;
    std::ostringstream os;
    os << "cell_size 0.5\nrows 9\ncols 200\n";
    for (int i = 0; i < 10; ++i) os << "start train 1.25 2.25 0\n";  // one shared pose
    os << "grid\n";
    std::string base = straight_track_text();
    os << base.substr(base.find("grid\n") + 5);
    const Track same_start = Track::parse(os.str());
    const EvalReport rep = evaluate_params(same_start, env_cfg, net, p, false, 3, 2);
    CHECK(rep.cfr_pct == 0.0);
    CHECK(rep.std_len == 0.0);
    CHECK(rep.avg_len == doctest::Approx(static_cast<double>(rep.min_len)));
    for (const EvalEpisode& e : rep.episodes) {
      CHECK(e.collided);
      CHECK(e.steps == rep.min_len);
    }
  }
  SUBCASE("histogram counts sum to the total step count") {
    ParamSet p = zeros_like(net);
    p.adv_b[2] = 1.0;
    const EvalReport rep = evaluate_params(track, env_cfg, net, p, false, 5, 3);
    long total = 0;
    for (const EvalEpisode& e : rep.episodes)
      for (long b : e.bins) total += b;
    CHECK(total == rep.total_steps);
    long steps = 0;
    for (const EvalEpisode& e : rep.episodes) steps += e.steps;
    CHECK(rep.total_steps == steps);
  }
  SUBCASE("random baseline is reproducible") {
    const EvalReport r1 = evaluate_random(track, env_cfg, false, 5, 77, 4);
    const EvalReport r2 = evaluate_random(track, env_cfg, false, 5, 77, 1);
    REQUIRE(r1.episodes.size() == r2.episodes.size());
    for (std::size_t k = 0; k < r1.episodes.size(); ++k)
      CHECK(r1.episodes[k].steps == r2.episodes[k].steps);
  }
  fs::remove_all(dir);
}

TEST_CASE("cmd_eval reads checkpoints and writes eval csv files") {
  const fs::path out = fresh_dir("cmd_eval");
  RunConfig cfg = tiny_run(out);
  cfg.total_steps = 300;
  const TrainResult res = cmd_train(cfg);

  const std::string ckpt_before = file_bytes(res.final_checkpoint);
  EvalRequest req;
  req.checkpoint = res.final_checkpoint;
  req.trials = 3;
  req.threads = 2;
  const EvalReport rep = cmd_eval(req);
  CHECK(rep.episodes.size() == 30);
  CHECK(file_bytes(res.final_checkpoint) == ckpt_before);  // eval never trains
  REQUIRE(fs::exists(out / "eval.csv"));
  REQUIRE(fs::exists(out / "eval_report.csv"));

  // counting oracle over eval.csv reproduces the report histogram
  const Csv csv = read_csv((out / "eval.csv").string());
  REQUIRE(csv.rows.size() == 30);
  std::array<long, 4> counts{0, 0, 0, 0};
  const int b0 = csv.column("bin0");
  REQUIRE(b0 >= 0);
  for (const auto& row : csv.rows)
    for (int k = 0; k < 4; ++k)
      counts[static_cast<std::size_t>(k)] += std::stol(row[static_cast<std::size_t>(b0 + k)]);
  for (int k = 0; k < 4; ++k)
    CHECK(counts[static_cast<std::size_t>(k)] == rep.reward_bins[static_cast<std::size_t>(k)]);

  SUBCASE("mismatched environment window is rejected") {
    EvalRequest bad = req;
    const fs::path cfg_path = out / "bad.cfg";
    std::ofstream f(cfg_path);
    f << "env.window_depth = 9\n";
    f.close();
    bad.config_path = cfg_path.string();
    CHECK_THROWS_AS(cmd_eval(bad), ConfigError);
  }
  fs::remove_all(out);
}

TEST_CASE("reward histogram bins partition [0,1]") {
  CHECK(reward_bin(0.0) == 0);
  CHECK(reward_bin(0.2499999) == 0);
  CHECK(reward_bin(0.25) == 1);
  CHECK(reward_bin(0.4999) == 1);
  CHECK(reward_bin(0.5) == 2);
  CHECK(reward_bin(0.74999) == 2);
  CHECK(reward_bin(0.75) == 3);
  CHECK(reward_bin(1.0) == 3);  // right-closed last bin
}

TEST_CASE("moving averages") {
  const std::vector<double> ys = {1, 2, 3, 4, 5};
  SUBCASE("trailing window") {
    const std::vector<double> ma = moving_average(ys, 3);
    CHECK(ma[0] == 1.0);
    CHECK(ma[1] == 1.5);
    CHECK(ma[2] == 2.0);
    CHECK(ma[3] == 3.0);
    CHECK(ma[4] == 4.0);
  }
  SUBCASE("constant input is a fixed point") {
    const std::vector<double> flat(200, 0.7);
    for (double v : moving_average(flat, 100)) CHECK(v == doctest::Approx(0.7).epsilon(1e-15));
    for (double v : centered_moving_average(flat, 51))
      CHECK(v == doctest::Approx(0.7).epsilon(1e-15));
  }
  SUBCASE("centered window shrinks at the edges") {
    const std::vector<double> ma = centered_moving_average(ys, 3);
    CHECK(ma[0] == 1.5);
    CHECK(ma[1] == 2.0);
    CHECK(ma[4] == 4.5);
  }
}

TEST_CASE("cmd_report renders figures from run directories") {
  const fs::path out = fresh_dir("report_run");
  RunConfig cfg = tiny_run(out);
  cfg.total_steps = 400;
  const TrainResult res = cmd_train(cfg);
  EvalRequest req;
  req.checkpoint = res.final_checkpoint;
  req.trials = 2;
  req.threads = 1;
  cmd_eval(req);

  const fs::path figs = fresh_dir("report_figs");
  const std::string metrics_before = file_bytes(out / "metrics.csv");
  const std::string eval_before = file_bytes(out / "eval.csv");
  cmd_report({out.string()}, figs.string());
  CHECK(file_bytes(out / "metrics.csv") == metrics_before);  // report never mutates run data
  CHECK(file_bytes(out / "eval.csv") == eval_before);
  CHECK(fs::exists(figs / "reward.svg"));
  CHECK(fs::exists(figs / "epsilon.svg"));
  CHECK(fs::exists(figs / "loss_diff.svg"));
  CHECK(fs::exists(figs / "reward_hist.svg"));
  CHECK(fs::exists(figs / "reward_hist.csv"));
  CHECK(file_bytes(figs / "reward.svg").find("<svg") != std::string::npos);
  CHECK(file_bytes(figs / "reward.svg").find("polyline") != std::string::npos);

  // reward_hist.csv counts equal a direct recount of eval.csv
  const Csv eval_csv = read_csv((out / "eval.csv").string());
  std::array<long, 4> counts{0, 0, 0, 0};
  const int b0 = eval_csv.column("bin0");
  for (const auto& row : eval_csv.rows)
    for (int k = 0; k < 4; ++k)
      counts[static_cast<std::size_t>(k)] += std::stol(row[static_cast<std::size_t>(b0 + k)]);
  const Csv hist = read_csv((figs / "reward_hist.csv").string());
  REQUIRE(hist.rows.size() == 1);
  for (int k = 0; k < 4; ++k)
    CHECK(std::stol(hist.rows[0][static_cast<std::size_t>(1 + k)]) ==
          counts[static_cast<std::size_t>(k)]);

  SUBCASE("missing columns are reported with the file name") {
    const fs::path broken = fresh_dir("report_broken");
    std::ofstream f(broken / "metrics.csv");
    f << "episode,steps\n0,5\n";
    f.close();
    try {
      cmd_report({broken.string()}, (broken / "figs").string());
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("metrics.csv") != std::string::npos);
      CHECK(std::string(e.what()).find("cum_reward") != std::string::npos);
    }
    fs::remove_all(broken);
  }
  fs::remove_all(out);
  fs::remove_all(figs);
}

TEST_CASE("decreasing-epsilon run reproduces the two-slope trajectory") {
  const fs::path out = fresh_dir("dec_run");
  RunConfig cfg = tiny_run(out);
  cfg.total_steps = 2000;
  cfg.strategy.kind = StrategyKind::DecreasingEps;
  cfg.strategy.schedule.eps_start = 1.0;
  cfg.strategy.schedule.eps_last = 0.1;
  cfg.strategy.schedule.eps_end = 0.01;
  cfg.strategy.schedule.n_start = 200;
  cfg.strategy.schedule.eps_ann = 800;
  cfg.strategy.schedule.n_max = 2000;
  cfg.agent.start_episodes = 2;
  cmd_train(cfg);
  const Csv steps = read_csv((out / "steps.csv").string());
  REQUIRE(static_cast<long>(steps.rows.size()) == 2000);
  auto eps_at = [&](long step) { return std::stod(steps.rows[static_cast<std::size_t>(step - 1)][1]); };
  DecreasingSchedule sched = cfg.strategy.schedule;
  CHECK(eps_at(1000) == doctest::Approx(eps_decreasing(1000, sched)).epsilon(1e-12));
  CHECK(eps_at(1001) == doctest::Approx(eps_decreasing(1001, sched)).epsilon(1e-12));
  CHECK(eps_at(2000) == doctest::Approx(0.01).epsilon(1e-12));
  // steep then shallow: slope magnitudes drop across the breakpoint
  const double steep = eps_at(600) - eps_at(601);
  const double shallow = eps_at(1500) - eps_at(1501);
  CHECK(steep > shallow);
  CHECK(shallow > 0.0);
  fs::remove_all(out);
}

}  // TEST_SUITE
