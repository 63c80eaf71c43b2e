#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roadrl/rng.hpp"
#include "roadrl/tensor.hpp"

namespace roadrl {

enum class Activation { Relu, Tanh, Identity };

Activation activation_from_name(const std::string& name);
std::string activation_name(Activation a);

/// Shape of the Q-network: dense (optionally conv-fronted) encoder, one LSTM
/// layer, dueling value/advantage heads.
struct NetworkConfig {
  int obs_rows = 12;
  int obs_cols = 8;
  bool use_conv = false;
  int conv_channels = 4;
  int conv_kernel = 3;
  std::vector<int> encoder_widths = {32, 32};
  Activation encoder_act = Activation::Relu;
  int lstm_width = 32;
  int actions = 5;
  std::uint64_t seed = 1;

  int obs_size() const { return obs_rows * obs_cols; }
  /// Flattened size of the encoder input after the optional conv stage.
  int conv_out_size() const;
  void validate() const;
  bool operator==(const NetworkConfig&) const = default;
};

struct DenseLayer {
  Tensor w;  // out x in
  Tensor b;  // out
  Activation act = Activation::Relu;
};

struct ConvLayer {
  Tensor w;  // channels x kernel x kernel, single input channel
  Tensor b;  // channels
};

struct LstmParams {
  // Gate order throughout: input, forget, candidate, output.
  Tensor wi, wf, wg, wo;  // hidden x in
  Tensor ui, uf, ug, uo;  // hidden x hidden
  Tensor bi, bf, bg, bo;  // hidden
};

/// Every learnable weight of the network. Value-copyable; a copy is an
/// independent parameter vector (used for the target network).
struct ParamSet {
  std::optional<ConvLayer> conv;
  std::vector<DenseLayer> dense;
  LstmParams lstm;
  Tensor value_w, value_b;  // 1 x hidden, 1
  Tensor adv_w, adv_b;      // actions x hidden, actions

  /// Visits all tensors in the canonical (checkpoint) order:
  /// conv.w, conv.b, dense[k].w, dense[k].b, ...,
  /// lstm wi ui bi wf uf bf wg ug bg wo uo bo,
  /// value_w, value_b, adv_w, adv_b.
  template <class F>
  void visit(F&& f) {
    if (conv) {
      f("conv.w", conv->w);
      f("conv.b", conv->b);
    }
    for (std::size_t k = 0; k < dense.size(); ++k) {
      const std::string tag = "dense" + std::to_string(k);
      f((tag + ".w").c_str(), dense[k].w);
      f((tag + ".b").c_str(), dense[k].b);
    }
    f("lstm.wi", lstm.wi); f("lstm.ui", lstm.ui); f("lstm.bi", lstm.bi);
    f("lstm.wf", lstm.wf); f("lstm.uf", lstm.uf); f("lstm.bf", lstm.bf);
    f("lstm.wg", lstm.wg); f("lstm.ug", lstm.ug); f("lstm.bg", lstm.bg);
    f("lstm.wo", lstm.wo); f("lstm.uo", lstm.uo); f("lstm.bo", lstm.bo);
    f("value.w", value_w); f("value.b", value_b);
    f("adv.w", adv_w); f("adv.b", adv_b);
  }
  template <class F>
  void visit(F&& f) const {
    const_cast<ParamSet*>(this)->visit(
        [&f](const char* name, Tensor& t) { f(name, static_cast<const Tensor&>(t)); });
  }

  std::size_t parameter_count() const;
  void fill(double v);
  bool all_finite() const;
};

/// Uniform fan-in initialization, deterministic in cfg.seed. Biases start at
/// zero except the LSTM forget gate, which starts at one.
ParamSet init_params(const NetworkConfig& cfg);

/// Zero-filled parameter set with the same shapes as cfg describes.
ParamSet zeros_like(const NetworkConfig& cfg);

struct RecurrentState {
  std::vector<double> h;
  std::vector<double> c;

  static RecurrentState zeros(int width) {
    return RecurrentState{std::vector<double>(width, 0.0), std::vector<double>(width, 0.0)};
  }
  int width() const { return static_cast<int>(h.size()); }
};

/// One evaluation step: Q-values plus the dueling decomposition it was built
/// from. Advantages are reported raw (before mean subtraction).
struct StepOutput {
  std::vector<double> q;
  double v = 0.0;
  std::vector<double> adv;
};

/// Single LSTM cell application. Returns the new hidden vector; `state` is
/// advanced in place.
std::vector<double> lstm_step(const LstmParams& p, std::span<const double> input,
                              RecurrentState& state);

/// Encoder + LSTM + dueling heads on one observation, threading the
/// recurrent state.
StepOutput forward_one(const ParamSet& params, const NetworkConfig& cfg, const Tensor& obs,
                       RecurrentState& state);

/// Forward over a trace of observations. obs_trace has shape {t, rows, cols}
/// (or {t, obs_size}). Returns Q-values of shape {t, actions} and the final
/// recurrent state.
std::pair<Tensor, RecurrentState> forward_trace(const ParamSet& params, const NetworkConfig& cfg,
                                                const Tensor& obs_trace,
                                                const RecurrentState& init);

/// Masked quadratic trace loss. q_pred and targets have shape {b, t} and hold
/// the Q-values of the actions actually taken. The first n_err steps of each
/// trace contribute exactly zero; the divisor is the full trace length t.
double masked_loss(const Tensor& q_pred, const Tensor& targets, int n_err);

/// Exact gradient of the batch masked loss with respect to every parameter,
/// backpropagated through the heads, the LSTM (full-trace horizon) and the
/// encoder. Initial recurrent state is zero for every trace.
/// obs_traces: {b, t, rows, cols}; actions: {b, t} indices; targets: {b, t}.
struct BackwardResult {
  double loss = 0.0;
  ParamSet grads;
};
BackwardResult backward(const ParamSet& params, const NetworkConfig& cfg, const Tensor& obs_traces,
                        const std::vector<std::vector<int>>& actions, const Tensor& targets,
                        int n_err);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  ParamSet m;
  ParamSet v;
  long step = 0;

  static AdamState zeros(const NetworkConfig& cfg) {
    return AdamState{zeros_like(cfg), zeros_like(cfg), 0};
  }
};

/// One Adam update of params from grads. lr must be positive (zero is allowed
/// for dry runs).
void optimize_step(ParamSet& params, const ParamSet& grads, AdamState& state, double lr,
                   const AdamConfig& cfg = {});

/// target <- main * eta + target * (1 - eta), elementwise. eta in (0, 1].
void soft_update(const ParamSet& main, ParamSet& target, double eta);

}  // namespace roadrl
