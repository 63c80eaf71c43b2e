#include "roadrl/replay.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "roadrl/error.hpp"

namespace roadrl {

ReplayBuffer::ReplayBuffer(int capacity_episodes) : capacity_(capacity_episodes) {
  if (capacity_ < 1) throw ConfigError("replay capacity must be >= 1 episode");
}

void ReplayBuffer::push(Transition tr) {
  if (!pending_.empty() && pending_.back().terminal)
    throw ConfigError("transition pushed after a terminal one within the same episode");
  if (!(tr.reward >= 0.0 && tr.reward <= 1.0))
    throw ConfigError("transition reward outside [0, 1]");
  pending_.push_back(std::move(tr));
}

void ReplayBuffer::end_episode() {
  if (pending_.empty()) return;  // no-op on an empty in-progress episode
  episodes_.push_back(std::move(pending_));
  pending_.clear();
  while (static_cast<int>(episodes_.size()) > capacity_) episodes_.pop_front();
}

bool ReplayBuffer::ready(int start_episodes) const {
  return static_cast<int>(episodes_.size()) >= start_episodes;
}

bool ReplayBuffer::any_episode_at_least(int t) const {
  for (const Episode& ep : episodes_)
    if (static_cast<int>(ep.size()) >= t) return true;
  return false;
}

std::vector<Trace> ReplayBuffer::sample_traces(int b, int t, Rng& rng) const {
  if (b < 1 || t < 1) throw ConfigError("batch and trace length must be >= 1");
  if (episodes_.empty()) throw SamplingError("replay buffer holds no completed episodes");
  bool any_long_enough = false;
  for (const Episode& ep : episodes_) {
    if (static_cast<int>(ep.size()) >= t) {
      any_long_enough = true;
      break;
    }
  }
  if (!any_long_enough)
    throw SamplingError("no stored episode is at least " + std::to_string(t) + " steps long");

  std::vector<Trace> out;
  out.reserve(static_cast<std::size_t>(b));
  const int max_retries = 10000;
  int retries = 0;
  while (static_cast<int>(out.size()) < b) {
    const Episode& ep = episodes_[static_cast<std::size_t>(rng.pick(episode_count()))];
    const int len = static_cast<int>(ep.size());
    if (len < t) {
      if (++retries > max_retries)
        throw SamplingError("trace sampling exceeded retry budget");
      continue;
    }
    const int start = rng.pick(len - t + 1);
    out.push_back(Trace{std::span<const Transition>(ep.data() + start, static_cast<std::size_t>(t))});
  }
  return out;
}

std::size_t ReplayBuffer::transition_count() const {
  std::size_t n = 0;
  for (const Episode& ep : episodes_) n += ep.size();
  return n;
}

// Dump record layout (all little-endian):
//   u32 episode index, u32 step index, u32 action, u8 terminal,
//   f64 reward, u32 obs length, f64[obs], u32 next_obs length, f64[next_obs].
// File starts with the line "roadrl-replay-dump 1" followed by "<count>\n".
void ReplayBuffer::dump(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write replay dump: " + path);
  f << "roadrl-replay-dump 1\n" << transition_count() << "\n";
  auto put_u32 = [&](std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap32(v);
    f.write(reinterpret_cast<const char*>(&v), sizeof(v));
  };
  auto put_f64 = [&](double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof(bits));
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    f.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
  };
  for (std::size_t e = 0; e < episodes_.size(); ++e) {
    const Episode& ep = episodes_[e];
    for (std::size_t s = 0; s < ep.size(); ++s) {
      const Transition& tr = ep[s];
      put_u32(static_cast<std::uint32_t>(e));
      put_u32(static_cast<std::uint32_t>(s));
      put_u32(static_cast<std::uint32_t>(tr.action));
      const std::uint8_t term = tr.terminal ? 1 : 0;
      f.write(reinterpret_cast<const char*>(&term), 1);
      put_f64(tr.reward);
      put_u32(static_cast<std::uint32_t>(tr.obs.size()));
      for (double v : tr.obs.data) put_f64(v);
      put_u32(static_cast<std::uint32_t>(tr.next_obs.size()));
      for (double v : tr.next_obs.data) put_f64(v);
    }
  }
  if (!f) throw IoError("write failure on replay dump: " + path);
}

}  // namespace roadrl
