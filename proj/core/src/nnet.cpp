#include "roadrl/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "roadrl/error.hpp"

namespace roadrl {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double activate(Activation a, double x) {
  switch (a) {
    case Activation::Relu: return x > 0.0 ? x : 0.0;
    case Activation::Tanh: return std::tanh(x);
    case Activation::Identity: return x;
  }
  return x;
}

// Derivative expressed through the post-activation value.
double activate_grad(Activation a, double post) {
  switch (a) {
    case Activation::Relu: return post > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: return 1.0 - post * post;
    case Activation::Identity: return 1.0;
  }
  return 1.0;
}

void check_finite(std::span<const double> xs, const char* layer) {
  for (double x : xs) {
    if (!std::isfinite(x)) {
      throw NumericError(std::string("non-finite activation in layer: ") + layer);
    }
  }
}

// out += W x for a {rows, cols} weight tensor.
void matvec_acc(const Tensor& w, const double* x, double* out) {
  const int rows = w.shape[0];
  const int cols = w.shape[1];
  const double* wd = w.data.data();
  for (int r = 0; r < rows; ++r) {
    double acc = 0.0;
    const double* row = wd + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) acc += row[c] * x[c];
    out[r] += acc;
  }
}

struct EncCache {
  std::vector<double> conv_pre;
  std::vector<double> conv_act;
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> act;
};

struct LstmCache {
  std::vector<double> h_prev, c_prev;
  std::vector<double> i, f, g, o;
  std::vector<double> c, tanh_c, h;
};

struct StepCache {
  EncCache enc;
  LstmCache ls;
  std::vector<double> adv;
  double v = 0.0;
  std::vector<double> q;
};

// Encoder output; fills cache when given.
std::vector<double> encode(const ParamSet& p, const NetworkConfig& cfg, const double* obs,
                           EncCache* cache) {
  std::vector<double> cur;
  if (cfg.use_conv) {
    const ConvLayer& cl = *p.conv;
    const int k = cfg.conv_kernel;
    const int orows = cfg.obs_rows - k + 1;
    const int ocols = cfg.obs_cols - k + 1;
    std::vector<double> pre(static_cast<std::size_t>(cfg.conv_channels) * orows * ocols);
    for (int ch = 0; ch < cfg.conv_channels; ++ch) {
      const double* kw = cl.w.data.data() + static_cast<std::size_t>(ch) * k * k;
      for (int r = 0; r < orows; ++r) {
        for (int c = 0; c < ocols; ++c) {
          double acc = cl.b[ch];
          for (int u = 0; u < k; ++u) {
            const double* in_row = obs + static_cast<std::size_t>(r + u) * cfg.obs_cols + c;
            const double* krow = kw + static_cast<std::size_t>(u) * k;
            for (int v = 0; v < k; ++v) acc += krow[v] * in_row[v];
          }
          pre[(static_cast<std::size_t>(ch) * orows + r) * ocols + c] = acc;
        }
      }
    }
    cur.resize(pre.size());
    for (std::size_t i = 0; i < pre.size(); ++i) cur[i] = activate(cfg.encoder_act, pre[i]);
    check_finite(cur, "conv");
    if (cache) {
      cache->conv_pre = pre;
      cache->conv_act = cur;
    }
  } else {
    cur.assign(obs, obs + cfg.obs_size());
  }

  if (cache) {
    cache->pre.resize(p.dense.size());
    cache->act.resize(p.dense.size());
  }
  for (std::size_t l = 0; l < p.dense.size(); ++l) {
    const DenseLayer& dl = p.dense[l];
    std::vector<double> z(dl.b.data);
    matvec_acc(dl.w, cur.data(), z.data());
    std::vector<double> a(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) a[i] = activate(dl.act, z[i]);
    check_finite(a, ("encoder dense " + std::to_string(l)).c_str());
    if (cache) {
      cache->pre[l] = z;
      cache->act[l] = a;
    }
    cur = std::move(a);
  }
  return cur;
}

void lstm_forward(const LstmParams& p, std::span<const double> x, RecurrentState& state,
                  LstmCache* cache) {
  const int hw = static_cast<int>(p.bi.size());
  std::vector<double> zi(p.bi.data), zf(p.bf.data), zg(p.bg.data), zo(p.bo.data);
  matvec_acc(p.wi, x.data(), zi.data());
  matvec_acc(p.ui, state.h.data(), zi.data());
  matvec_acc(p.wf, x.data(), zf.data());
  matvec_acc(p.uf, state.h.data(), zf.data());
  matvec_acc(p.wg, x.data(), zg.data());
  matvec_acc(p.ug, state.h.data(), zg.data());
  matvec_acc(p.wo, x.data(), zo.data());
  matvec_acc(p.uo, state.h.data(), zo.data());

  std::vector<double> gi(hw), gf(hw), gg(hw), go(hw), c_new(hw), tanh_c(hw), h_new(hw);
  for (int r = 0; r < hw; ++r) {
    gi[r] = sigmoid(zi[r]);
    gf[r] = sigmoid(zf[r]);
    gg[r] = std::tanh(zg[r]);
    go[r] = sigmoid(zo[r]);
    c_new[r] = gf[r] * state.c[r] + gi[r] * gg[r];
    tanh_c[r] = std::tanh(c_new[r]);
    h_new[r] = go[r] * tanh_c[r];
  }
  check_finite(h_new, "lstm");
  if (cache) {
    cache->h_prev = state.h;
    cache->c_prev = state.c;
    cache->i = gi;
    cache->f = gf;
    cache->g = gg;
    cache->o = go;
    cache->c = c_new;
    cache->tanh_c = tanh_c;
    cache->h = h_new;
  }
  state.h = std::move(h_new);
  state.c = std::move(c_new);
}

StepOutput dueling_heads(const ParamSet& p, const NetworkConfig& cfg,
                         std::span<const double> h) {
  StepOutput out;
  double v = p.value_b[0];
  {
    const double* row = p.value_w.data.data();
    for (int c = 0; c < cfg.lstm_width; ++c) v += row[c] * h[c];
  }
  out.v = v;
  out.adv.assign(p.adv_b.data.begin(), p.adv_b.data.end());
  matvec_acc(p.adv_w, h.data(), out.adv.data());
  double mean = 0.0;
  for (double a : out.adv) mean += a;
  mean /= static_cast<double>(cfg.actions);
  out.q.resize(cfg.actions);
  for (int a = 0; a < cfg.actions; ++a) out.q[a] = v + (out.adv[a] - mean);
  check_finite(out.q, "heads");
  return out;
}

StepOutput forward_step(const ParamSet& p, const NetworkConfig& cfg, const double* obs,
                        RecurrentState& state, StepCache* cache) {
  std::vector<double> x = encode(p, cfg, obs, cache ? &cache->enc : nullptr);
  lstm_forward(p.lstm, x, state, cache ? &cache->ls : nullptr);
  StepOutput out = dueling_heads(p, cfg, state.h);
  if (cache) {
    cache->adv = out.adv;
    cache->v = out.v;
    cache->q = out.q;
  }
  return out;
}

void check_obs_trace_shape(const NetworkConfig& cfg, const Tensor& obs_trace, int expect_lead) {
  if (obs_trace.shape.empty())
    throw ConfigError("observation trace must have at least one dimension");
  std::size_t per = obs_trace.size() / static_cast<std::size_t>(obs_trace.shape[0]);
  if (per != static_cast<std::size_t>(cfg.obs_size()))
    throw ConfigError("observation size does not match network config");
  if (expect_lead >= 0 && obs_trace.shape[0] != expect_lead)
    throw ConfigError("observation trace has unexpected leading dimension");
}

}  // namespace

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "identity") return Activation::Identity;
  throw ConfigError("unknown activation: " + name);
}

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
  }
  return "relu";
}

int NetworkConfig::conv_out_size() const {
  if (!use_conv) return obs_size();
  const int orows = obs_rows - conv_kernel + 1;
  const int ocols = obs_cols - conv_kernel + 1;
  return conv_channels * orows * ocols;
}

void NetworkConfig::validate() const {
  if (obs_rows < 1 || obs_cols < 1) throw ConfigError("observation window must be at least 1x1");
  if (lstm_width < 1) throw ConfigError("lstm width must be >= 1");
  if (actions < 2) throw ConfigError("action count must be >= 2");
  for (int w : encoder_widths)
    if (w < 1) throw ConfigError("encoder widths must be >= 1");
  if (use_conv) {
    if (conv_kernel < 1 || conv_kernel > std::min(obs_rows, obs_cols))
      throw ConfigError("conv kernel does not fit the observation window");
    if (conv_channels < 1) throw ConfigError("conv channels must be >= 1");
  }
}

ParamSet zeros_like(const NetworkConfig& cfg) {
  cfg.validate();
  ParamSet p;
  if (cfg.use_conv) {
    p.conv = ConvLayer{Tensor({cfg.conv_channels, cfg.conv_kernel, cfg.conv_kernel}),
                       Tensor({cfg.conv_channels})};
  }
  int in = cfg.conv_out_size();
  for (int w : cfg.encoder_widths) {
    p.dense.push_back(DenseLayer{Tensor({w, in}), Tensor({w}), cfg.encoder_act});
    in = w;
  }
  const int hw = cfg.lstm_width;
  p.lstm.wi = Tensor({hw, in}); p.lstm.ui = Tensor({hw, hw}); p.lstm.bi = Tensor({hw});
  p.lstm.wf = Tensor({hw, in}); p.lstm.uf = Tensor({hw, hw}); p.lstm.bf = Tensor({hw});
  p.lstm.wg = Tensor({hw, in}); p.lstm.ug = Tensor({hw, hw}); p.lstm.bg = Tensor({hw});
  p.lstm.wo = Tensor({hw, in}); p.lstm.uo = Tensor({hw, hw}); p.lstm.bo = Tensor({hw});
  p.value_w = Tensor({1, hw});
  p.value_b = Tensor({1});
  p.adv_w = Tensor({cfg.actions, hw});
  p.adv_b = Tensor({cfg.actions});
  return p;
}

ParamSet init_params(const NetworkConfig& cfg) {
  ParamSet p = zeros_like(cfg);
  Rng rng(cfg.seed);
  p.visit([&](const char* name, Tensor& t) {
    if (t.shape.size() == 1) {
      if (std::strcmp(name, "lstm.bf") == 0) std::fill(t.data.begin(), t.data.end(), 1.0);
      return;
    }
    std::size_t fan_in = 1;
    for (std::size_t k = 1; k < t.shape.size(); ++k) fan_in *= static_cast<std::size_t>(t.shape[k]);
    const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : t.data) v = rng.uniform(-s, s);
  });
  return p;
}

std::size_t ParamSet::parameter_count() const {
  std::size_t n = 0;
  visit([&](const char*, const Tensor& t) { n += t.size(); });
  return n;
}

void ParamSet::fill(double v) {
  visit([&](const char*, Tensor& t) { std::fill(t.data.begin(), t.data.end(), v); });
}

bool ParamSet::all_finite() const {
  bool ok = true;
  visit([&](const char*, const Tensor& t) { ok = ok && t.all_finite(); });
  return ok;
}

std::vector<double> lstm_step(const LstmParams& p, std::span<const double> input,
                              RecurrentState& state) {
  if (static_cast<int>(input.size()) != p.wi.shape[1])
    throw ConfigError("lstm input width mismatch");
  if (static_cast<int>(state.h.size()) != p.bi.shape[0] || state.h.size() != state.c.size())
    throw ConfigError("recurrent state width mismatch");
  lstm_forward(p, input, state, nullptr);
  return state.h;
}

StepOutput forward_one(const ParamSet& params, const NetworkConfig& cfg, const Tensor& obs,
                       RecurrentState& state) {
  if (obs.size() != static_cast<std::size_t>(cfg.obs_size()))
    throw ConfigError("observation size does not match network config");
  if (state.width() != cfg.lstm_width) throw ConfigError("recurrent state width mismatch");
  return forward_step(params, cfg, obs.data.data(), state, nullptr);
}

std::pair<Tensor, RecurrentState> forward_trace(const ParamSet& params, const NetworkConfig& cfg,
                                                const Tensor& obs_trace,
                                                const RecurrentState& init) {
  check_obs_trace_shape(cfg, obs_trace, -1);
  if (init.width() != cfg.lstm_width) throw ConfigError("recurrent state width mismatch");
  const int t = obs_trace.shape[0];
  if (t < 1) throw ConfigError("trace length must be >= 1");
  RecurrentState state = init;
  Tensor q({t, cfg.actions});
  const std::size_t per = static_cast<std::size_t>(cfg.obs_size());
  for (int i = 0; i < t; ++i) {
    StepOutput out = forward_step(params, cfg, obs_trace.data.data() + per * i, state, nullptr);
    std::copy(out.q.begin(), out.q.end(), q.data.begin() + static_cast<std::size_t>(i) * cfg.actions);
  }
  return {std::move(q), std::move(state)};
}

double masked_loss(const Tensor& q_pred, const Tensor& targets, int n_err) {
  if (q_pred.shape.size() != 2 || !q_pred.same_shape(targets))
    throw ConfigError("masked_loss expects matching {batch, trace} tensors");
  const int b = q_pred.shape[0];
  const int t = q_pred.shape[1];
  if (n_err < 0 || n_err >= t)
    throw ConfigError("error mask length must satisfy 0 <= n_err < trace length");
  double total = 0.0;
  for (int j = 0; j < b; ++j) {
    double trace_loss = 0.0;
    for (int i = n_err; i < t; ++i) {
      const double r = targets.at(j, i) - q_pred.at(j, i);
      trace_loss += r * r;
    }
    total += trace_loss / static_cast<double>(t);
  }
  return total / static_cast<double>(b);
}

BackwardResult backward(const ParamSet& params, const NetworkConfig& cfg, const Tensor& obs_traces,
                        const std::vector<std::vector<int>>& actions, const Tensor& targets,
                        int n_err) {
  if (obs_traces.shape.size() < 2) throw ConfigError("obs_traces must be {b, t, ...}");
  const int b = obs_traces.shape[0];
  const int t = obs_traces.shape[1];
  if (targets.shape.size() != 2 || targets.shape[0] != b || targets.shape[1] != t)
    throw ConfigError("targets shape mismatch");
  if (static_cast<int>(actions.size()) != b) throw ConfigError("actions shape mismatch");
  if (n_err < 0 || n_err >= t)
    throw ConfigError("error mask length must satisfy 0 <= n_err < trace length");
  const std::size_t per = obs_traces.size() / (static_cast<std::size_t>(b) * t);
  if (per != static_cast<std::size_t>(cfg.obs_size()))
    throw ConfigError("observation size does not match network config");

  BackwardResult res;
  res.grads = zeros_like(cfg);
  ParamSet& g = res.grads;
  const int hw = cfg.lstm_width;
  const int na = cfg.actions;
  const double scale = 1.0 / (static_cast<double>(t) * b);

  std::vector<StepCache> caches(t);
  for (int j = 0; j < b; ++j) {
    if (static_cast<int>(actions[j].size()) != t) throw ConfigError("actions shape mismatch");
    RecurrentState state = RecurrentState::zeros(hw);
    const double* trace_obs = obs_traces.data.data() + static_cast<std::size_t>(j) * t * per;
    for (int i = 0; i < t; ++i) forward_step(params, cfg, trace_obs + per * i, state, &caches[i]);

    // Loss and dL/dq at the taken actions.
    std::vector<double> dldq(t, 0.0);
    for (int i = n_err; i < t; ++i) {
      const int a = actions[j][i];
      if (a < 0 || a >= na) throw ConfigError("action index out of range");
      const double resid = caches[i].q[a] - targets.at(j, i);
      res.loss += resid * resid * scale;
      dldq[i] = 2.0 * resid * scale;
    }

    std::vector<double> dh_next(hw, 0.0), dc_next(hw, 0.0);
    std::vector<double> dh(hw), dc(hw), dadv(na);
    std::vector<double> gate_pre(hw), dx;
    for (int i = t - 1; i >= 0; --i) {
      const StepCache& sc = caches[i];
      const LstmCache& lc = sc.ls;
      // Heads. Only the taken action's Q enters the loss.
      std::fill(dh.begin(), dh.end(), 0.0);
      if (dldq[i] != 0.0) {
        const double dq = dldq[i];
        const int a = actions[j][i];
        const double dv = dq;  // dQ_a/dV = 1
        g.value_b[0] += dv;
        for (int m = 0; m < hw; ++m) {
          g.value_w.at(0, m) += dv * lc.h[m];
          dh[m] += params.value_w.at(0, m) * dv;
        }
        const double mean_share = dq / static_cast<double>(na);
        for (int k = 0; k < na; ++k) {
          dadv[k] = (k == a ? dq : 0.0) - mean_share;
          g.adv_b[k] += dadv[k];
          for (int m = 0; m < hw; ++m) {
            g.adv_w.at(k, m) += dadv[k] * lc.h[m];
            dh[m] += params.adv_w.at(k, m) * dadv[k];
          }
        }
      }
      for (int m = 0; m < hw; ++m) dh[m] += dh_next[m];
      dc = dc_next;

      // LSTM cell backward.
      for (int m = 0; m < hw; ++m) dc[m] += dh[m] * lc.o[m] * (1.0 - lc.tanh_c[m] * lc.tanh_c[m]);
      const double* xin = trace_obs + per * i;
      if (!sc.enc.act.empty()) xin = sc.enc.act.back().data();
      else if (cfg.use_conv) xin = sc.enc.conv_act.data();
      const int xw = params.lstm.wi.shape[1];
      dx.assign(xw, 0.0);
      std::fill(dh_next.begin(), dh_next.end(), 0.0);
      std::fill(dc_next.begin(), dc_next.end(), 0.0);

      auto gate_backward = [&](const std::vector<double>& pre_grad, const Tensor& w,
                               const Tensor& u, Tensor& gw, Tensor& gu, Tensor& gb) {
        for (int r = 0; r < hw; ++r) {
          const double pg = pre_grad[r];
          if (pg == 0.0) continue;
          gb[r] += pg;
          double* gwr = gw.data.data() + static_cast<std::size_t>(r) * xw;
          const double* wr = w.data.data() + static_cast<std::size_t>(r) * xw;
          for (int cidx = 0; cidx < xw; ++cidx) {
            gwr[cidx] += pg * xin[cidx];
            dx[cidx] += wr[cidx] * pg;
          }
          double* gur = gu.data.data() + static_cast<std::size_t>(r) * hw;
          const double* ur = u.data.data() + static_cast<std::size_t>(r) * hw;
          for (int cidx = 0; cidx < hw; ++cidx) {
            gur[cidx] += pg * lc.h_prev[cidx];
            dh_next[cidx] += ur[cidx] * pg;
          }
        }
      };

      // output gate
      for (int m = 0; m < hw; ++m)
        gate_pre[m] = dh[m] * lc.tanh_c[m] * lc.o[m] * (1.0 - lc.o[m]);
      gate_backward(gate_pre, params.lstm.wo, params.lstm.uo, g.lstm.wo, g.lstm.uo, g.lstm.bo);
      // input gate
      for (int m = 0; m < hw; ++m) gate_pre[m] = dc[m] * lc.g[m] * lc.i[m] * (1.0 - lc.i[m]);
      gate_backward(gate_pre, params.lstm.wi, params.lstm.ui, g.lstm.wi, g.lstm.ui, g.lstm.bi);
      // forget gate
      for (int m = 0; m < hw; ++m) gate_pre[m] = dc[m] * lc.c_prev[m] * lc.f[m] * (1.0 - lc.f[m]);
      gate_backward(gate_pre, params.lstm.wf, params.lstm.uf, g.lstm.wf, g.lstm.uf, g.lstm.bf);
      // candidate
      for (int m = 0; m < hw; ++m) gate_pre[m] = dc[m] * lc.i[m] * (1.0 - lc.g[m] * lc.g[m]);
      gate_backward(gate_pre, params.lstm.wg, params.lstm.ug, g.lstm.wg, g.lstm.ug, g.lstm.bg);
      for (int m = 0; m < hw; ++m) dc_next[m] = dc[m] * lc.f[m];

      // Encoder backward.
      std::vector<double> da = dx;
      for (int l = static_cast<int>(params.dense.size()) - 1; l >= 0; --l) {
        const DenseLayer& dl = params.dense[l];
        const std::vector<double>& post = sc.enc.act[l];
        const int rows = dl.w.shape[0];
        const int cols = dl.w.shape[1];
        const double* below = (l > 0) ? sc.enc.act[l - 1].data()
                                      : (cfg.use_conv ? sc.enc.conv_act.data()
                                                      : trace_obs + per * i);
        std::vector<double> da_prev(cols, 0.0);
        DenseLayer& gl = g.dense[l];
        for (int r = 0; r < rows; ++r) {
          const double dz = da[r] * activate_grad(dl.act, post[r]);
          if (dz == 0.0) continue;
          gl.b[r] += dz;
          double* gwr = gl.w.data.data() + static_cast<std::size_t>(r) * cols;
          const double* wr = dl.w.data.data() + static_cast<std::size_t>(r) * cols;
          for (int cidx = 0; cidx < cols; ++cidx) {
            gwr[cidx] += dz * below[cidx];
            da_prev[cidx] += wr[cidx] * dz;
          }
        }
        da = std::move(da_prev);
      }
      if (cfg.use_conv) {
        const int k = cfg.conv_kernel;
        const int orows = cfg.obs_rows - k + 1;
        const int ocols = cfg.obs_cols - k + 1;
        ConvLayer& gc = *g.conv;
        const double* obs = trace_obs + per * i;
        for (int ch = 0; ch < cfg.conv_channels; ++ch) {
          double* gkw = gc.w.data.data() + static_cast<std::size_t>(ch) * k * k;
          for (int r = 0; r < orows; ++r) {
            for (int cidx = 0; cidx < ocols; ++cidx) {
              const std::size_t idx = (static_cast<std::size_t>(ch) * orows + r) * ocols + cidx;
              const double dz = da[idx] * activate_grad(cfg.encoder_act, sc.enc.conv_act[idx]);
              if (dz == 0.0) continue;
              gc.b[ch] += dz;
              for (int u = 0; u < k; ++u) {
                const double* in_row = obs + static_cast<std::size_t>(r + u) * cfg.obs_cols + cidx;
                double* krow = gkw + static_cast<std::size_t>(u) * k;
                for (int v = 0; v < k; ++v) krow[v] += dz * in_row[v];
              }
            }
          }
        }
      }
    }
  }

  if (!g.all_finite()) throw NumericError("non-finite gradient");
  return res;
}

namespace {
std::vector<Tensor*> tensor_list(ParamSet& p) {
  std::vector<Tensor*> v;
  p.visit([&](const char*, Tensor& t) { v.push_back(&t); });
  return v;
}
}  // namespace

void optimize_step(ParamSet& params, const ParamSet& grads, AdamState& state, double lr,
                   const AdamConfig& cfg) {
  if (lr < 0.0) throw ConfigError("learning rate must be >= 0");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  auto pt = tensor_list(params);
  auto gt = tensor_list(const_cast<ParamSet&>(grads));
  auto mt = tensor_list(state.m);
  auto vt = tensor_list(state.v);
  if (pt.size() != gt.size() || pt.size() != mt.size())
    throw ConfigError("optimizer state does not match parameter shapes");
  for (std::size_t k = 0; k < pt.size(); ++k) {
    Tensor& p = *pt[k];
    const Tensor& gr = *gt[k];
    Tensor& m = *mt[k];
    Tensor& v = *vt[k];
    if (!p.same_shape(gr) || !p.same_shape(m) || !p.same_shape(v))
      throw ConfigError("optimizer state does not match parameter shapes");
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gr[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gr[i] * gr[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

void soft_update(const ParamSet& main, ParamSet& target, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("soft update rate must be in (0, 1]");
  auto mt = tensor_list(const_cast<ParamSet&>(main));
  auto tt = tensor_list(target);
  if (mt.size() != tt.size()) throw ConfigError("parameter sets have different shapes");
  for (std::size_t k = 0; k < mt.size(); ++k) {
    if (!mt[k]->same_shape(*tt[k])) throw ConfigError("parameter sets have different shapes");
    for (std::size_t i = 0; i < mt[k]->size(); ++i)
      (*tt[k])[i] = (*mt[k])[i] * eta + (*tt[k])[i] * (1.0 - eta);
  }
}

}  // namespace roadrl
