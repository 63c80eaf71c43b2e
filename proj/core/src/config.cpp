#include "roadrl/config.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "roadrl/error.hpp"

namespace roadrl {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  std::string where = origin;
  if (line > 0) where += ":" + std::to_string(line);
  throw ConfigError(where + ": " + msg);
}

double parse_double(const std::string& v, const std::string& origin, int line) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    fail(origin, line, "expected a real number, got '" + v + "'");
  }
}

long parse_long(const std::string& v, const std::string& origin, int line) {
  try {
    std::size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    fail(origin, line, "expected an integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& v, const std::string& origin, int line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(origin, line, "expected a boolean, got '" + v + "'");
}

std::vector<int> parse_widths(const std::string& v, const std::string& origin, int line) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    out.push_back(static_cast<int>(parse_long(tok, origin, line)));
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Key {
  const char* name;
  std::function<void(RunConfig&, const std::string&, const std::string&, int)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<Key>& key_table() {
  static const std::vector<Key> keys = {
      {"run.total_steps",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.total_steps = parse_long(v, o, l);
       },
       [](const RunConfig& c) { return std::to_string(c.total_steps); }},
      {"run.seed",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.seed = static_cast<std::uint64_t>(parse_long(v, o, l));
       },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      {"run.out_dir",
       [](RunConfig& c, const std::string& v, const std::string&, int) { c.out_dir = v; },
       [](const RunConfig& c) { return c.out_dir; }},
      {"run.log_every",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.log_every = parse_long(v, o, l);
       },
       [](const RunConfig& c) { return std::to_string(c.log_every); }},
      {"run.checkpoint_every",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.checkpoint_every = parse_long(v, o, l);
       },
       [](const RunConfig& c) { return std::to_string(c.checkpoint_every); }},
      {"run.eval_threads",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.eval_threads = static_cast<int>(parse_long(v, o, l));
       },
       [](const RunConfig& c) { return std::to_string(c.eval_threads); }},

      {"net.encoder_widths",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.net.encoder_widths = parse_widths(v, o, l);
       },
       [](const RunConfig& c) {
         std::string s;
         for (std::size_t i = 0; i < c.net.encoder_widths.size(); ++i) {
           if (i) s += ',';
           s += std::to_string(c.net.encoder_widths[i]);
         }
         return s;
       }},
      {"net.encoder_act",
       [](RunConfig& c, const std::string& v, const std::string&, int) {
         c.net.encoder_act = activation_from_name(v);
       },
       [](const RunConfig& c) { return activation_name(c.net.encoder_act); }},
      {"net.use_conv",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.net.use_conv = parse_bool(v, o, l);
       },
       [](const RunConfig& c) { return c.net.use_conv ? std::string("true") : std::string("false"); }},
      {"net.conv_channels",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.net.conv_channels = static_cast<int>(parse_long(v, o, l));
       },
       [](const RunConfig& c) { return std::to_string(c.net.conv_channels); }},
      {"net.conv_kernel",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.net.conv_kernel = static_cast<int>(parse_long(v, o, l));
       },
       [](const RunConfig& c) { return std::to_string(c.net.conv_kernel); }},
      {"net.lstm_width",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.net.lstm_width = static_cast<int>(parse_long(v, o, l));
       },
       [](const RunConfig& c) { return std::to_string(c.net.lstm_width); }},
      {"net.seed",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.net.seed = static_cast<std::uint64_t>(parse_long(v, o, l));
       },
       [](const RunConfig& c) { return std::to_string(c.net.seed); }},

      {"agent.gamma",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.agent.gamma = parse_double(v, o, l);
       },
       [](const RunConfig& c) { return fmt(c.agent.gamma); }},
      {"agent.eta",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.agent.eta = parse_double(v, o, l);
       },
       [](const RunConfig& c) { return fmt(c.agent.eta); }},
      {"agent.lr",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.agent.lr = parse_double(v, o, l);
       },
       [](const RunConfig& c) { return fmt(c.agent.lr); }},
      {"agent.update_rate",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.agent.update_rate = static_cast<int>(parse_long(v, o, l));
       },
       [](const RunConfig& c) { return std::to_string(c.agent.update_rate); }},
      {"agent.trace_len",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.agent.trace_len = static_cast<int>(parse_long(v, o, l));
       },
       [](const RunConfig& c) { return std::to_string(c.agent.trace_len); }},
      {"agent.n_err",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.agent.n_err = static_cast<int>(parse_long(v, o, l));
       },
       [](const RunConfig& c) { return std::to_string(c.agent.n_err); }},
      {"agent.batch",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.agent.batch = static_cast<int>(parse_long(v, o, l));
       },
       [](const RunConfig& c) { return std::to_string(c.agent.batch); }},
      {"agent.start_episodes",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.agent.start_episodes = static_cast<int>(parse_long(v, o, l));
       },
       [](const RunConfig& c) { return std::to_string(c.agent.start_episodes); }},
      {"agent.start_rule",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         if (v == "episodes") c.agent.start_half_capacity = false;
         else if (v == "half_capacity") c.agent.start_half_capacity = true;
         else fail(o, l, "start_rule must be 'episodes' or 'half_capacity'");
       },
       [](const RunConfig& c) {
         return c.agent.start_half_capacity ? std::string("half_capacity")
                                            : std::string("episodes");
       }},
      {"replay.capacity",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.agent.replay_capacity = static_cast<int>(parse_long(v, o, l));
       },
       [](const RunConfig& c) { return std::to_string(c.agent.replay_capacity); }},

      {"strategy.kind",
       [](RunConfig& c, const std::string& v, const std::string&, int) {
         c.strategy.kind = strategy_kind_from_name(v);
       },
       [](const RunConfig& c) { return strategy_kind_name(c.strategy.kind); }},
      {"strategy.epsilon",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.strategy.epsilon = parse_double(v, o, l);
       },
       [](const RunConfig& c) { return fmt(c.strategy.epsilon); }},
      {"strategy.temperature",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.strategy.temperature = parse_double(v, o, l);
       },
       [](const RunConfig& c) { return fmt(c.strategy.temperature); }},
      {"strategy.eps_start",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.strategy.schedule.eps_start = parse_double(v, o, l);
       },
       [](const RunConfig& c) { return fmt(c.strategy.schedule.eps_start); }},
      {"strategy.eps_last",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.strategy.schedule.eps_last = parse_double(v, o, l);
       },
       [](const RunConfig& c) { return fmt(c.strategy.schedule.eps_last); }},
      {"strategy.eps_end",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.strategy.schedule.eps_end = parse_double(v, o, l);
       },
       [](const RunConfig& c) { return fmt(c.strategy.schedule.eps_end); }},
      {"strategy.n_start",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.strategy.schedule.n_start = parse_long(v, o, l);
       },
       [](const RunConfig& c) { return std::to_string(c.strategy.schedule.n_start); }},
      {"strategy.eps_ann",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.strategy.schedule.eps_ann = parse_long(v, o, l);
       },
       [](const RunConfig& c) { return std::to_string(c.strategy.schedule.eps_ann); }},
      {"strategy.n_max",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.strategy.schedule.n_max = parse_long(v, o, l);
       },
       [](const RunConfig& c) { return std::to_string(c.strategy.schedule.n_max); }},
      {"strategy.lambda",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.strategy.lambda = parse_double(v, o, l);
       },
       [](const RunConfig& c) { return fmt(c.strategy.lambda); }},
      {"strategy.nu",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.strategy.nu = parse_double(v, o, l);
       },
       [](const RunConfig& c) { return fmt(c.strategy.nu); }},
      {"strategy.alpha0",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.strategy.bmc_alpha0 = parse_double(v, o, l);
       },
       [](const RunConfig& c) { return fmt(c.strategy.bmc_alpha0); }},
      {"strategy.beta0",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.strategy.bmc_beta0 = parse_double(v, o, l);
       },
       [](const RunConfig& c) { return fmt(c.strategy.bmc_beta0); }},
      {"strategy.a0",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.strategy.bmc_a0 = parse_double(v, o, l);
       },
       [](const RunConfig& c) { return fmt(c.strategy.bmc_a0); }},
      {"strategy.b0",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.strategy.bmc_b0 = parse_double(v, o, l);
       },
       [](const RunConfig& c) { return fmt(c.strategy.bmc_b0); }},
      {"strategy.mu0",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.strategy.bmc_mu0 = parse_double(v, o, l);
       },
       [](const RunConfig& c) { return fmt(c.strategy.bmc_mu0); }},
      {"strategy.tau0",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.strategy.bmc_tau0 = parse_double(v, o, l);
       },
       [](const RunConfig& c) { return fmt(c.strategy.bmc_tau0); }},

      {"env.track",
       [](RunConfig& c, const std::string& v, const std::string&, int) { c.env.track_path = v; },
       [](const RunConfig& c) { return c.env.track_path; }},
      {"env.beta",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.env.beta = parse_double(v, o, l);
       },
       [](const RunConfig& c) { return fmt(c.env.beta); }},
      {"env.dt",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.env.dt = parse_double(v, o, l);
       },
       [](const RunConfig& c) { return fmt(c.env.dt); }},
      {"env.speed",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.env.speed = parse_double(v, o, l);
       },
       [](const RunConfig& c) { return fmt(c.env.speed); }},
      {"env.steer_gain",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.env.steer_gain = parse_double(v, o, l);
       },
       [](const RunConfig& c) { return fmt(c.env.steer_gain); }},
      {"env.step_cap",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.env.step_cap = static_cast<int>(parse_long(v, o, l));
       },
       [](const RunConfig& c) { return std::to_string(c.env.step_cap); }},
      {"env.window_depth",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.env.window_depth = static_cast<int>(parse_long(v, o, l));
       },
       [](const RunConfig& c) { return std::to_string(c.env.window_depth); }},
      {"env.window_width",
       [](RunConfig& c, const std::string& v, const std::string& o, int l) {
         c.env.window_width = static_cast<int>(parse_long(v, o, l));
       },
       [](const RunConfig& c) { return std::to_string(c.env.window_width); }},
  };
  return keys;
}

const Key* find_key(const std::string& name) {
  for (const Key& k : key_table())
    if (name == k.name) return &k;
  return nullptr;
}

std::string env_var_name(const std::string& key) {
  std::string v = "APP_";
  for (char ch : key) {
    if (ch == '.') v += '_';
    else v += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  }
  return v;
}

}  // namespace

void RunConfig::finalize() {
  net.obs_rows = env.window_depth;
  net.obs_cols = env.window_width;
  net.actions = static_cast<int>(RoadEnv::kSteering.size());
  if (net.seed == 0) net.seed = splitmix64(seed ^ 0x6e657477ULL);
}

void RunConfig::validate() const {
  if (total_steps < 1) throw ConfigError("run.total_steps must be >= 1");
  if (log_every < 1) throw ConfigError("run.log_every must be >= 1");
  if (checkpoint_every < 0) throw ConfigError("run.checkpoint_every must be >= 0");
  if (eval_threads < 1) throw ConfigError("run.eval_threads must be >= 1");
  net.validate();
  agent.validate();
  env.validate();
  strategy.validate();
  if (strategy.kind == StrategyKind::DecreasingEps &&
      strategy.schedule.n_start >= total_steps)
    throw ConfigError("decreasing schedule warmup (strategy.n_start) must be < run.total_steps");
}

std::string RunConfig::dump() const {
  std::string out;
  for (const Key& k : key_table()) {
    out += k.name;
    out += " = ";
    out += k.get(*this);
    out += '\n';
  }
  return out;
}

RunConfig RunConfig::from_text(const std::string& text, const std::string& origin,
                               bool env_overrides) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) fail(origin, lineno, "expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const Key* k = find_key(key);
    if (!k) fail(origin, lineno, "unknown key '" + key + "'");
    k->set(cfg, value, origin, lineno);
  }
  if (env_overrides) {
    for (const Key& k : key_table()) {
      const char* v = std::getenv(env_var_name(k.name).c_str());
      if (v) k.set(cfg, v, "environment " + env_var_name(k.name), 0);
    }
  }
  cfg.finalize();
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path, bool env_overrides) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_text(ss.str(), path, env_overrides);
}

}  // namespace roadrl
