#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "roadrl/config.hpp"
#include "roadrl/metrics.hpp"
#include "roadrl/report.hpp"

namespace roadrl {

struct TrainResult {
  std::string out_dir;
  long episodes = 0;
  long steps = 0;
  long updates = 0;
  std::string final_checkpoint;
};

/// Full training run: writes config.resolved, metrics.csv (one row per
/// episode), steps.csv, updates.csv, periodic and final checkpoints into
/// cfg.out_dir. Deterministic per seed except the wall_ms column.
TrainResult cmd_train(RunConfig cfg);

/// Per-episode policy: returns the action index for the current observation.
/// A fresh policy instance is created per evaluation episode.
using EpisodePolicy = std::function<int(const Tensor& obs)>;
using PolicyFactory = std::function<EpisodePolicy(int start_index, int trial)>;

/// Runs `trials` episodes from every start pose of the chosen set, fanning
/// out across threads; episode order in the report is (start, trial).
EvalReport evaluate_policy(const Track& track, const EnvConfig& env_cfg,
                           const PolicyFactory& factory, bool test_set, int trials, int threads);

/// Greedy evaluation of a trained network.
EvalReport evaluate_params(const Track& track, const EnvConfig& env_cfg,
                           const NetworkConfig& net_cfg, const ParamSet& params, bool test_set,
                           int trials, int threads);

/// Uniform-random action baseline under the same protocol.
EvalReport evaluate_random(const Track& track, const EnvConfig& env_cfg, bool test_set, int trials,
                           std::uint64_t seed, int threads);

struct EvalRequest {
  std::string checkpoint;
  bool test_set = false;
  int trials = 30;
  int threads = 4;
  std::string out_dir;      // defaults to the checkpoint's directory
  std::string config_path;  // optional; else <ckpt dir>/config.resolved, else defaults
};

/// Loads the checkpoint, resolves the environment, evaluates greedily and
/// writes eval.csv plus eval_report.csv; returns the aggregated report.
EvalReport cmd_eval(const EvalRequest& req);

/// Resolves a track path against the builtin default.
Track resolve_track(const EnvConfig& cfg);

}  // namespace roadrl
