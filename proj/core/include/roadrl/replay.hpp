#pragma once

#include <deque>
#include <span>
#include <string>
#include <vector>

#include "roadrl/rng.hpp"
#include "roadrl/tensor.hpp"

namespace roadrl {

struct Transition {
  Tensor obs;
  int action = 0;
  double reward = 0.0;
  Tensor next_obs;
  bool terminal = false;
};

using Episode = std::vector<Transition>;

/// Contiguous window of transitions inside one stored episode.
struct Trace {
  std::span<const Transition> steps;
  int length() const { return static_cast<int>(steps.size()); }
  const Transition& operator[](int i) const { return steps[static_cast<std::size_t>(i)]; }
};

/// Episodic FIFO replay memory. Transitions accumulate into an in-progress
/// episode that becomes sampleable only once end_episode() seals it.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity_episodes);

  void push(Transition tr);
  void end_episode();

  /// True once the completed-episode count reaches the start threshold.
  bool ready(int start_episodes) const;

  /// True if any completed episode holds at least t transitions.
  bool any_episode_at_least(int t) const;

  /// b traces of t consecutive transitions each. Episodes are drawn uniformly
  /// with replacement; episodes shorter than t are rejected and redrawn; the
  /// start index is uniform over the valid range. Never mutates the buffer.
  std::vector<Trace> sample_traces(int b, int t, Rng& rng) const;

  int episode_count() const { return static_cast<int>(episodes_.size()); }
  int capacity() const { return capacity_; }
  const Episode& episode(int i) const { return episodes_[static_cast<std::size_t>(i)]; }
  std::size_t transition_count() const;
  int in_progress_length() const { return static_cast<int>(pending_.size()); }

  /// Debug dump, one fixed-size binary record per stored transition; layout
  /// documented in replay.cpp next to the writer.
  void dump(const std::string& path) const;

 private:
  int capacity_;
  std::deque<Episode> episodes_;
  Episode pending_;
};

}  // namespace roadrl
