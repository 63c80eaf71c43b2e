#pragma once

#include <string>
#include <utility>

#include "roadrl/nnet.hpp"

namespace roadrl {

/// Checkpoint file layout, version 1:
///   text header (one "key value" pair per line, terminated by "params <N>"),
///   then N raw little-endian IEEE-754 doubles in the canonical ParamSet
///   visit order. Round-trips bit-exactly.
void save_checkpoint(const std::string& path, const NetworkConfig& cfg, const ParamSet& params);

std::pair<NetworkConfig, ParamSet> load_checkpoint(const std::string& path);

}  // namespace roadrl
