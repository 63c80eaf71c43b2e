#pragma once

#include <cstdint>
#include <string>

#include "roadrl/agent.hpp"
#include "roadrl/env.hpp"
#include "roadrl/explore.hpp"
#include "roadrl/nnet.hpp"

namespace roadrl {

/// Full description of one training run. Parsed from a flat dotted-key text
/// file ("section.name = value", '#' comments, UTF-8); unknown keys are
/// errors. Environment variables with the APP_ prefix override file values:
/// APP_<SECTION>_<NAME> maps to section.name (APP_AGENT_TRACE_LEN, ...).
struct RunConfig {
  long total_steps = 50000;
  std::uint64_t seed = 1;
  std::string out_dir = "run";
  long log_every = 1;          // cadence of per-step diagnostics rows
  long checkpoint_every = 10000;  // steps between periodic checkpoints, 0 = off
  int eval_threads = 4;

  NetworkConfig net;
  AgentConfig agent;
  EnvConfig env;
  StrategyParams strategy;

  /// Derives the network input shape from the environment window and the
  /// network seed from the run seed when not set explicitly.
  void finalize();
  void validate() const;
  std::string dump() const;

  static RunConfig from_text(const std::string& text, const std::string& origin,
                             bool env_overrides = true);
  static RunConfig from_file(const std::string& path, bool env_overrides = true);
};

}  // namespace roadrl
