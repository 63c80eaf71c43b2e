#include "roadrl/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "roadrl/error.hpp"

namespace roadrl {

static_assert(std::numeric_limits<double>::is_iec559, "IEEE-754 doubles required");

namespace {

constexpr const char* kMagic = "roadrl-checkpoint";
constexpr int kVersion = 1;

std::uint64_t to_le_bits(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return bits;
}

double from_le_bits(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

std::string widths_to_string(const std::vector<int>& ws) {
  std::string s;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(ws[i]);
  }
  return s;
}

std::vector<int> widths_from_string(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stoi(tok));
  }
  return out;
}

}  // namespace

void save_checkpoint(const std::string& path, const NetworkConfig& cfg, const ParamSet& params) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write checkpoint: " + path);
  f << kMagic << ' ' << kVersion << '\n';
  f << "obs_rows " << cfg.obs_rows << '\n';
  f << "obs_cols " << cfg.obs_cols << '\n';
  f << "use_conv " << (cfg.use_conv ? 1 : 0) << '\n';
  f << "conv_channels " << cfg.conv_channels << '\n';
  f << "conv_kernel " << cfg.conv_kernel << '\n';
  f << "encoder_widths " << widths_to_string(cfg.encoder_widths) << '\n';
  f << "encoder_act " << activation_name(cfg.encoder_act) << '\n';
  f << "lstm_width " << cfg.lstm_width << '\n';
  f << "actions " << cfg.actions << '\n';
  f << "seed " << cfg.seed << '\n';
  f << "params " << params.parameter_count() << '\n';
  params.visit([&](const char*, const Tensor& t) {
    for (double v : t.data) {
      const std::uint64_t bits = to_le_bits(v);
      f.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
    }
  });
  if (!f) throw IoError("write failure on checkpoint: " + path);
}

std::pair<NetworkConfig, ParamSet> load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint: " + path);
  std::string magic;
  int version = 0;
  f >> magic >> version;
  if (magic != kMagic) throw ConfigError("not a checkpoint file: " + path);
  if (version != kVersion)
    throw ConfigError("unsupported checkpoint version " + std::to_string(version));

  NetworkConfig cfg;
  std::size_t n_params = 0;
  std::string key;
  while (f >> key) {
    if (key == "params") {
      f >> n_params;
      break;
    }
    std::string value;
    f >> value;
    if (key == "obs_rows") cfg.obs_rows = std::stoi(value);
    else if (key == "obs_cols") cfg.obs_cols = std::stoi(value);
    else if (key == "use_conv") cfg.use_conv = value != "0";
    else if (key == "conv_channels") cfg.conv_channels = std::stoi(value);
    else if (key == "conv_kernel") cfg.conv_kernel = std::stoi(value);
    else if (key == "encoder_widths") cfg.encoder_widths = widths_from_string(value);
    else if (key == "encoder_act") cfg.encoder_act = activation_from_name(value);
    else if (key == "lstm_width") cfg.lstm_width = std::stoi(value);
    else if (key == "actions") cfg.actions = std::stoi(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else throw ConfigError("unknown checkpoint header key: " + key);
  }
  if (!f) throw ConfigError("truncated checkpoint header: " + path);
  f.get();  // newline after the params count

  ParamSet params = zeros_like(cfg);
  if (params.parameter_count() != n_params)
    throw ConfigError("checkpoint parameter count does not match its config");
  params.visit([&](const char*, Tensor& t) {
    for (double& v : t.data) {
      std::uint64_t bits;
      f.read(reinterpret_cast<char*>(&bits), sizeof(bits));
      v = from_le_bits(bits);
    }
  });
  if (!f) throw ConfigError("truncated checkpoint payload: " + path);
  return {cfg, std::move(params)};
}

}  // namespace roadrl
