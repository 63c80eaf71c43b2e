#include "roadrl/run.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <filesystem>
#include <memory>
#include <fstream>
#include <thread>

#include "roadrl/checkpoint.hpp"
#include "roadrl/error.hpp"

namespace roadrl {

namespace fs = std::filesystem;

Track resolve_track(const EnvConfig& cfg) {
  if (cfg.track_path.empty()) return Track::builtin_loop();
  return Track::load(cfg.track_path);
}

TrainResult cmd_train(RunConfig cfg) {
  cfg.finalize();
  cfg.validate();
  fs::create_directories(cfg.out_dir);

  {
    std::ofstream f(fs::path(cfg.out_dir) / "config.resolved", std::ios::binary);
    if (!f) throw IoError("cannot write config.resolved in " + cfg.out_dir);
    f << cfg.dump();
  }

  Track track = resolve_track(cfg.env);
  RoadEnv env(std::move(track), cfg.env);
  Agent agent(cfg.net, cfg.agent, cfg.strategy, cfg.seed);
  Rng start_rng = Rng(cfg.seed).child(0x5741);

  std::ofstream metrics(fs::path(cfg.out_dir) / "metrics.csv", std::ios::binary);
  std::ofstream steps(fs::path(cfg.out_dir) / "steps.csv", std::ios::binary);
  std::ofstream updates(fs::path(cfg.out_dir) / "updates.csv", std::ios::binary);
  if (!metrics || !steps || !updates) throw IoError("cannot open csv outputs in " + cfg.out_dir);
  metrics << "episode,steps,cum_reward,mean_reward,epsilon,loss_ma,wall_ms\n";
  steps << "step,epsilon,exploring\n";
  updates << "update,step,episode,loss,epsilon\n";

  std::deque<double> recent_losses;
  TrainSinks sinks;
  sinks.on_step = [&](long step, double eps, bool exploring) {
    if (step % cfg.log_every == 0)
      steps << step << ',' << csv_num(eps) << ',' << (exploring ? 1 : 0) << '\n';
  };
  sinks.on_update = [&](long update, long step, long episode, double loss, double eps) {
    updates << update << ',' << step << ',' << episode << ',' << csv_num(loss) << ','
            << csv_num(eps) << '\n';
    recent_losses.push_back(loss);
    if (recent_losses.size() > 100) recent_losses.pop_front();
  };

  long next_checkpoint = cfg.checkpoint_every > 0 ? cfg.checkpoint_every : 0;
  TrainResult result;
  result.out_dir = cfg.out_dir;
  while (agent.global_step() < cfg.total_steps) {
    const int start = start_rng.pick(env.start_count(false));
    const long remaining = cfg.total_steps - agent.global_step();
    const auto ep0 = std::chrono::steady_clock::now();
    const EpisodeStats st = agent.run_episode(env, start, RunMode::Train, &sinks, remaining);
    const auto ep1 = std::chrono::steady_clock::now();
    double loss_ma = 0.0;
    for (double l : recent_losses) loss_ma += l;
    if (!recent_losses.empty()) loss_ma /= static_cast<double>(recent_losses.size());
    const long wall_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(ep1 - ep0).count();
    metrics << st.episode << ',' << st.length << ',' << csv_num(st.cum_reward) << ','
            << csv_num(st.mean_reward) << ',' << csv_num(st.epsilon) << ',' << csv_num(loss_ma)
            << ',' << wall_ms << '\n';
    while (next_checkpoint > 0 && agent.global_step() >= next_checkpoint) {
      save_checkpoint((fs::path(cfg.out_dir) / ("checkpoint_" + std::to_string(next_checkpoint) +
                                                ".ck")).string(),
                      cfg.net, agent.main_params());
      next_checkpoint += cfg.checkpoint_every;
    }
  }
  const std::string final_path = (fs::path(cfg.out_dir) / "checkpoint_final.ck").string();
  save_checkpoint(final_path, cfg.net, agent.main_params());

  result.episodes = agent.episode_count();
  result.steps = agent.global_step();
  result.updates = agent.update_count();
  result.final_checkpoint = final_path;
  return result;
}

namespace {

EvalEpisode rollout(RoadEnv& env, const EpisodePolicy& policy, int start, int trial,
                    bool test_set) {
  EvalEpisode e;
  e.start_index = start;
  e.trial = trial;
  Tensor obs = env.reset(start, test_set);
  while (true) {
    const int action = policy(obs);
    StepResult res = env.step(action);
    e.steps += 1;
    e.cum_reward += res.reward;
    e.bins[static_cast<std::size_t>(reward_bin(res.reward))] += 1;
    obs = std::move(res.obs);
    if (res.terminal) {
      e.collided = res.collided;
      break;
    }
  }
  e.mean_reward = e.cum_reward / std::max(1, e.steps);
  return e;
}

}  // namespace

EvalReport evaluate_policy(const Track& track, const EnvConfig& env_cfg,
                           const PolicyFactory& factory, bool test_set, int trials, int threads) {
  if (trials < 1) throw ConfigError("eval trials must be >= 1");
  RoadEnv probe(track, env_cfg);
  const int starts = probe.start_count(test_set);
  if (starts < 1) throw ConfigError("track has no start poses for the requested set");

  EvalReport report;
  report.episodes.resize(static_cast<std::size_t>(starts) * trials);
  std::atomic<std::size_t> next{0};
  const int nthreads = std::max(1, std::min(threads, starts * trials));
  auto worker = [&]() {
    RoadEnv env(track, env_cfg);
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= report.episodes.size()) break;
      const int start = static_cast<int>(k) / trials;
      const int trial = static_cast<int>(k) % trials;
      EpisodePolicy policy = factory(start, trial);
      report.episodes[k] = rollout(env, policy, start, trial, test_set);
    }
  };
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  report.aggregate(env_cfg.step_cap);
  return report;
}

EvalReport evaluate_params(const Track& track, const EnvConfig& env_cfg,
                           const NetworkConfig& net_cfg, const ParamSet& params, bool test_set,
                           int trials, int threads) {
  PolicyFactory factory = [&net_cfg, &params](int, int) -> EpisodePolicy {
    auto state = std::make_shared<RecurrentState>(RecurrentState::zeros(net_cfg.lstm_width));
    return [&net_cfg, &params, state](const Tensor& obs) {
      const StepOutput out = forward_one(params, net_cfg, obs, *state);
      int best = 0;
      for (int a = 1; a < net_cfg.actions; ++a)
        if (out.q[a] > out.q[best]) best = a;
      return best;
    };
  };
  return evaluate_policy(track, env_cfg, factory, test_set, trials, threads);
}

EvalReport evaluate_random(const Track& track, const EnvConfig& env_cfg, bool test_set, int trials,
                           std::uint64_t seed, int threads) {
  constexpr int actions = static_cast<int>(RoadEnv::kSteering.size());
  PolicyFactory factory = [seed, trials](int start, int trial) -> EpisodePolicy {
    auto rng = std::make_shared<Rng>(
        Rng(seed).child(static_cast<std::uint64_t>(start) * static_cast<std::uint64_t>(trials) +
                        static_cast<std::uint64_t>(trial)));
    return [rng](const Tensor&) { return rng->pick(actions); };
  };
  return evaluate_policy(track, env_cfg, factory, test_set, trials, threads);
}

EvalReport cmd_eval(const EvalRequest& req) {
  auto [net_cfg, params] = load_checkpoint(req.checkpoint);

  RunConfig run_cfg;
  const fs::path ckpt_dir = fs::path(req.checkpoint).parent_path();
  if (!req.config_path.empty()) {
    run_cfg = RunConfig::from_file(req.config_path);
  } else if (fs::exists(ckpt_dir / "config.resolved")) {
    run_cfg = RunConfig::from_file((ckpt_dir / "config.resolved").string(),
                                   /*env_overrides=*/false);
  } else {
    run_cfg.finalize();
  }
  const EnvConfig& env_cfg = run_cfg.env;
  if (env_cfg.window_depth != net_cfg.obs_rows || env_cfg.window_width != net_cfg.obs_cols)
    throw ConfigError("checkpoint observation shape does not match the environment window");

  Track track = resolve_track(env_cfg);
  EvalReport report =
      evaluate_params(track, env_cfg, net_cfg, params, req.test_set, req.trials, req.threads);

  fs::path out = req.out_dir.empty() ? (ckpt_dir.empty() ? fs::path(".") : ckpt_dir)
                                     : fs::path(req.out_dir);
  fs::create_directories(out);
  write_eval_csv((out / "eval.csv").string(), report);
  write_eval_summary_csv((out / "eval_report.csv").string(), report);
  return report;
}

}  // namespace roadrl
