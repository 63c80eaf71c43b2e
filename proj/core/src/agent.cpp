#include "roadrl/agent.hpp"

#include <algorithm>
#include <cmath>

#include "roadrl/error.hpp"

namespace roadrl {

void AgentConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in (0, 1)");
  if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("eta must be in (0, 1]");
  if (lr < 0.0) throw ConfigError("learning rate must be >= 0");
  if (update_rate < 1) throw ConfigError("update rate must be >= 1");
  if (trace_len < 1) throw ConfigError("trace length must be >= 1");
  if (n_err < 0 || n_err >= trace_len)
    throw ConfigError("error mask length must satisfy 0 <= n_err < trace length");
  if (batch < 1) throw ConfigError("batch size must be >= 1");
  if (start_episodes < 1) throw ConfigError("start threshold must be >= 1");
  if (replay_capacity < 1) throw ConfigError("replay capacity must be >= 1");
}

Agent::Agent(const NetworkConfig& net_cfg, const AgentConfig& cfg, const StrategyParams& strategy,
             std::uint64_t seed)
    : net_cfg_(net_cfg),
      cfg_(cfg),
      main_(init_params(net_cfg)),
      target_(main_),  // target starts as an exact copy
      adam_(AdamState::zeros(net_cfg)),
      buffer_(cfg.replay_capacity),
      strategy_(strategy),
      rng_(seed) {
  cfg_.validate();
}

int Agent::start_threshold() const {
  return cfg_.start_half_capacity ? std::max(1, cfg_.replay_capacity / 2) : cfg_.start_episodes;
}

bool Agent::update_gate_open() const { return buffer_.ready(start_threshold()); }

namespace {
int argmax(std::span<const double> q) {
  int best = 0;
  for (int a = 1; a < static_cast<int>(q.size()); ++a)
    if (q[a] > q[best]) best = a;
  return best;
}
}  // namespace

std::pair<int, ActionChoice> Agent::act(const Tensor& obs, RecurrentState& state, bool greedy) {
  const StepOutput out = forward_one(main_, net_cfg_, obs, state);
  ActionChoice c;
  if (greedy) {
    c.action = argmax(out.q);
    c.exploring = false;
  } else {
    c = strategy_.select(out.q, rng_);
  }
  return {c.action, c};
}

Tensor Agent::compute_targets(const std::vector<Trace>& traces) const {
  const int b = static_cast<int>(traces.size());
  if (b < 1) throw ConfigError("compute_targets needs at least one trace");
  const int t = traces[0].length();
  Tensor y({b, t});
  const std::size_t per = static_cast<std::size_t>(net_cfg_.obs_size());
  Tensor next_obs({t, net_cfg_.obs_rows, net_cfg_.obs_cols});
  for (int j = 0; j < b; ++j) {
    const Trace& tr = traces[static_cast<std::size_t>(j)];
    if (tr.length() != t) throw ConfigError("traces in a batch must share one length");
    for (int i = 0; i < t; ++i) {
      const Tensor& o = tr[i].next_obs;
      if (o.size() != per) throw ConfigError("transition observation size mismatch");
      std::copy(o.data.begin(), o.data.end(), next_obs.data.begin() + per * i);
    }
    const Tensor main_q =
        forward_trace(main_, net_cfg_, next_obs, RecurrentState::zeros(net_cfg_.lstm_width)).first;
    const Tensor target_q =
        forward_trace(target_, net_cfg_, next_obs, RecurrentState::zeros(net_cfg_.lstm_width))
            .first;
    for (int i = 0; i < t; ++i) {
      int best = 0;
      for (int a = 1; a < net_cfg_.actions; ++a)
        if (main_q.at(i, a) > main_q.at(i, best)) best = a;
      const double bootstrap = tr[i].terminal ? 0.0 : target_q.at(i, best);
      y.at(j, i) = tr[i].reward + cfg_.gamma * bootstrap;
    }
  }
  return y;
}

double Agent::train_step() {
  const int b = cfg_.batch;
  const int t = cfg_.trace_len;
  const std::vector<Trace> traces = buffer_.sample_traces(b, t, rng_);
  const Tensor targets = compute_targets(traces);

  // Observed returns feed the BMC posterior. Masked steps carry unreliable
  // hidden state and are skipped, matching the loss semantics. The observed
  // return is the double-estimator target; the greedy model's mean is that
  // same expression and the uniform model's mean swaps the chosen action
  // value for the mean action value under the target network. Mixing value
  // sources here (main-network means against target-generated returns) lets
  // the target's lag masquerade as uniform-model evidence and pushes epsilon
  // toward 1 instead of 0.
  if (strategy_.needs_returns()) {
    Tensor next_obs({t, net_cfg_.obs_rows, net_cfg_.obs_cols});
    const std::size_t per = static_cast<std::size_t>(net_cfg_.obs_size());
    for (int j = 0; j < b; ++j) {
      const Trace& tr = traces[static_cast<std::size_t>(j)];
      for (int i = 0; i < t; ++i)
        std::copy(tr[i].next_obs.data.begin(), tr[i].next_obs.data.end(),
                  next_obs.data.begin() + per * i);
      const Tensor target_q =
          forward_trace(target_, net_cfg_, next_obs, RecurrentState::zeros(net_cfg_.lstm_width))
              .first;
      for (int i = cfg_.n_err; i < t; ++i) {
        double qsum = 0.0;
        for (int a = 0; a < net_cfg_.actions; ++a) qsum += target_q.at(i, a);
        const double live = tr[i].terminal ? 0.0 : 1.0;
        const double g_q = targets.at(j, i);
        const double g_u = tr[i].reward + cfg_.gamma * (qsum / net_cfg_.actions) * live;
        strategy_.on_return(g_q, g_u, targets.at(j, i));
      }
    }
  }

  // Pre-update greedy Q at the latest held state, for VDBE differencing.
  std::vector<double> q_before;
  int a_star = 0;
  const bool want_qdiff = strategy_.needs_qdiff() && have_last_;
  if (want_qdiff) {
    RecurrentState held = last_state_;
    q_before = forward_one(main_, net_cfg_, last_obs_, held).q;
    a_star = argmax(q_before);
  }

  Tensor obs_traces({b, t, net_cfg_.obs_rows, net_cfg_.obs_cols});
  std::vector<std::vector<int>> actions(static_cast<std::size_t>(b));
  const std::size_t per = static_cast<std::size_t>(net_cfg_.obs_size());
  for (int j = 0; j < b; ++j) {
    const Trace& tr = traces[static_cast<std::size_t>(j)];
    actions[static_cast<std::size_t>(j)].resize(static_cast<std::size_t>(t));
    for (int i = 0; i < t; ++i) {
      std::copy(tr[i].obs.data.begin(), tr[i].obs.data.end(),
                obs_traces.data.begin() + (static_cast<std::size_t>(j) * t + i) * per);
      actions[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = tr[i].action;
    }
  }
  BackwardResult back = backward(main_, net_cfg_, obs_traces, actions, targets, cfg_.n_err);
  optimize_step(main_, back.grads, adam_, cfg_.lr);
  soft_update(main_, target_, cfg_.eta);
  updates_done_ += 1;

  if (want_qdiff) {
    RecurrentState held = last_state_;
    const std::vector<double> q_after = forward_one(main_, net_cfg_, last_obs_, held).q;
    strategy_.on_agent_update(delta_err(q_after, q_before, a_star));
  }
  return back.loss;
}

EpisodeStats Agent::run_episode(Environment& env, int start_index, RunMode mode,
                                const TrainSinks* sinks, long max_len, bool test_starts) {
  const bool train = mode == RunMode::Train;
  EpisodeStats stats;
  stats.episode = episodes_done_;
  RecurrentState state = RecurrentState::zeros(net_cfg_.lstm_width);
  Tensor obs = env.reset(start_index, test_starts);
  while (true) {
    if (train) {
      strategy_.set_warmup(!update_gate_open());
      last_obs_ = obs;
      last_state_ = state;
      have_last_ = true;
    }
    auto [action, choice] = act(obs, state, !train);
    StepResult res = env.step(action);
    stats.length += 1;
    stats.cum_reward += res.reward;
    if (train) {
      buffer_.push(Transition{std::move(obs), action, res.reward, res.obs, res.terminal});
      global_step_ += 1;
      strategy_.on_env_step(global_step_);
      if (sinks && sinks->on_step)
        sinks->on_step(global_step_, strategy_.epsilon(), choice.exploring);
      if (global_step_ % cfg_.update_rate == 0 && update_gate_open() &&
          buffer_.any_episode_at_least(cfg_.trace_len)) {
        const double loss = train_step();
        if (sinks && sinks->on_update)
          sinks->on_update(updates_done_, global_step_, episodes_done_, loss,
                           strategy_.epsilon());
      }
    }
    obs = std::move(res.obs);
    if (res.terminal || (max_len > 0 && stats.length >= max_len)) {
      stats.collided = res.collided;
      break;
    }
  }
  if (train) {
    buffer_.end_episode();
    episodes_done_ += 1;
  }
  stats.mean_reward = stats.cum_reward / std::max(1, stats.length);
  stats.epsilon = strategy_.epsilon();
  return stats;
}

}  // namespace roadrl
