#pragma once

#include <functional>
#include <optional>

#include "roadrl/env.hpp"
#include "roadrl/explore.hpp"
#include "roadrl/nnet.hpp"
#include "roadrl/replay.hpp"

namespace roadrl {

struct AgentConfig {
  double gamma = 0.99;
  double eta = 0.001;  // soft target update rate
  double lr = 1e-4;
  int update_rate = 4;  // environment steps between agent updates
  int trace_len = 10;
  int n_err = 7;
  int batch = 10;
  int start_episodes = 999;
  bool start_half_capacity = false;  // gate on episodes >= capacity/2 instead
  int replay_capacity = 1000;

  void validate() const;
};

enum class RunMode { Train, Eval };

struct EpisodeStats {
  long episode = 0;
  int length = 0;
  double cum_reward = 0.0;
  double mean_reward = 0.0;
  double epsilon = 0.0;  // at episode end
  bool collided = false;
};

/// Logging hooks the training loop feeds; both are optional.
struct TrainSinks {
  std::function<void(long step, double epsilon, bool exploring)> on_step;
  std::function<void(long update, long step, long episode, double loss, double epsilon)> on_update;
};

/// Double dueling recurrent Q agent: strategy-driven action selection,
/// double-estimator targets over sampled traces, masked-loss updates and a
/// softly tracked target network.
class Agent {
 public:
  Agent(const NetworkConfig& net_cfg, const AgentConfig& cfg, const StrategyParams& strategy,
        std::uint64_t seed);

  /// One-step action selection. Advances `state` through the main network.
  /// Greedy mode bypasses the exploration strategy entirely.
  std::pair<int, ActionChoice> act(const Tensor& obs, RecurrentState& state, bool greedy);

  /// Double-estimator targets for a batch of traces, shape {b, t}. Both
  /// networks run over the next observations from a zero recurrent state.
  Tensor compute_targets(const std::vector<Trace>& traces) const;

  /// One agent update: sample, target, masked-loss gradient step, soft
  /// target update. Returns the batch loss.
  double train_step();

  /// Runs one episode to termination or the step budget, training on the
  /// configured schedule when mode is Train; greedy and side-effect free on
  /// the learner when mode is Eval. max_len <= 0 means no extra limit beyond
  /// the environment's own cap. test_starts selects the start pose set.
  EpisodeStats run_episode(Environment& env, int start_index, RunMode mode,
                           const TrainSinks* sinks = nullptr, long max_len = 0,
                           bool test_starts = false);

  const NetworkConfig& net_config() const { return net_cfg_; }
  const AgentConfig& config() const { return cfg_; }
  ParamSet& main_params() { return main_; }
  const ParamSet& main_params() const { return main_; }
  ParamSet& target_params() { return target_; }
  const ParamSet& target_params() const { return target_; }
  ReplayBuffer& buffer() { return buffer_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  Strategy& strategy() { return strategy_; }
  const Strategy& strategy() const { return strategy_; }
  long global_step() const { return global_step_; }
  long episode_count() const { return episodes_done_; }
  long update_count() const { return updates_done_; }
  Rng& rng() { return rng_; }

  bool update_gate_open() const;

 private:
  int start_threshold() const;

  NetworkConfig net_cfg_;
  AgentConfig cfg_;
  ParamSet main_;
  ParamSet target_;
  AdamState adam_;
  ReplayBuffer buffer_;
  Strategy strategy_;
  Rng rng_;
  long global_step_ = 0;
  long episodes_done_ = 0;
  long updates_done_ = 0;

  // Latest observation and held recurrent state, recorded so VDBE can
  // difference the greedy Q-value across an update.
  Tensor last_obs_;
  RecurrentState last_state_;
  bool have_last_ = false;
};

}  // namespace roadrl
