#pragma once

#include <span>
#include <string>
#include <vector>

#include "roadrl/rng.hpp"

namespace roadrl {

enum class StrategyKind {
  ConstantEps,
  DecreasingEps,
  Vdbe,
  Bmc,
  Softmax,
  Mbe,
  VdbeSoftmax,
};

StrategyKind strategy_kind_from_name(const std::string& name);
std::string strategy_kind_name(StrategyKind k);

struct ActionChoice {
  int action = 0;
  bool exploring = false;
  std::vector<double> probs;  // sampling distribution when the choice was stochastic
};

/// Greedy with probability 1-eps, uniform over all actions otherwise.
/// Greedy ties break to the lowest index.
ActionChoice select_eps_greedy(std::span<const double> q, double eps, Rng& rng);

/// Boltzmann sampling, p(a) proportional to exp(q[a]/temperature).
/// Computed with max subtraction; the probabilities used are reported.
ActionChoice select_softmax(std::span<const double> q, double temperature, Rng& rng);

/// Greedy with probability 1-eps, Boltzmann draw otherwise.
ActionChoice select_mbe(std::span<const double> q, double eps, double temperature, Rng& rng);

/// Two-slope epsilon schedule: flat 1 until n_start, a steep line over the
/// annealing window, then a shallow line ending at eps_end at n_max.
struct DecreasingSchedule {
  double eps_start = 1.0;
  double eps_last = 0.1;
  double eps_end = 0.01;
  long n_start = 50000;
  long eps_ann = 400000;
  long n_max = 1000000;

  void validate() const;
  double pi0() const;     // steep-line intercept
  double pi1() const;     // steep-line slope
  double delta0() const;  // shallow-line intercept
  double delta1() const;  // shallow-line slope
};

double eps_decreasing(long step, const DecreasingSchedule& sched);

/// Location-precision Student-t density with dof degrees of freedom.
double student_t_pdf(double x, double location, double precision, double dof);

/// Difference of the greedy-action value under post- and pre-update weights.
inline double delta_err(std::span<const double> q_after, std::span<const double> q_before,
                        int a_star) {
  return q_after[static_cast<std::size_t>(a_star)] - q_before[static_cast<std::size_t>(a_star)];
}

/// Normal-Gamma posterior over return noise plus the Beta mixing posterior
/// whose mean is epsilon.
struct BmcState {
  double alpha = 25.0;
  double beta = 25.0;
  double a0 = 250.0;
  double b0 = 250.0;
  double mu0 = 0.0;
  double tau0 = 1.0;
  long count = 0;     // observed returns so far
  double mean = 0.0;  // running mean of observed returns
  double m2 = 0.0;    // running sum of squared deviations

  double a_t() const { return a0 + static_cast<double>(count) / 2.0; }
  double b_t() const;
  double epsilon() const { return alpha / (alpha + beta); }
};

struct StrategyParams {
  StrategyKind kind = StrategyKind::ConstantEps;
  double epsilon = 0.05;      // constant and MBE initial value
  double temperature = 0.1;   // softmax family
  DecreasingSchedule schedule;
  double lambda = 0.2;        // VDBE mixing weight
  double nu = 1.0;            // VDBE inverse sensitivity
  double bmc_alpha0 = 25.0;
  double bmc_beta0 = 25.0;
  double bmc_a0 = 250.0;
  double bmc_b0 = 250.0;
  double bmc_mu0 = 0.0;
  double bmc_tau0 = 1.0;

  void validate() const;
};

struct StrategyState {
  StrategyKind kind = StrategyKind::ConstantEps;
  double epsilon = 0.05;
  double temperature = 0.1;
  DecreasingSchedule schedule;
  double lambda = 0.2;
  double nu = 1.0;
  BmcState bmc;
  bool warmup = true;  // forces epsilon = 1 until the update gate opens
};

/// f = (1 - e^(-|d|/nu)) / (1 + e^(-|d|/nu)); eps <- lambda*f + (1-lambda)*eps.
void vdbe_update(StrategyState& st, double delta);

/// One return observation: advances the running moments and the Normal-Gamma
/// posterior, evaluates Student-t evidences of the observed return under the
/// greedy and uniform models, and moment-matches the Beta posterior.
void bmc_observe(StrategyState& st, double greedy_return, double uniform_return,
                 double observed_return);

/// Dispatcher owned by one agent. Selection, per-step and per-update hooks
/// route to whichever mechanics the configured kind uses.
class Strategy {
 public:
  explicit Strategy(const StrategyParams& params);

  ActionChoice select(std::span<const double> q, Rng& rng);

  /// Per environment step; drives the decreasing schedule.
  void on_env_step(long global_step);

  /// Per agent update; drives VDBE-family epsilon adaptation.
  void on_agent_update(double delta);

  /// Per observed return during an update; drives the BMC posterior.
  void on_return(double greedy_return, double uniform_return, double observed_return);

  void set_warmup(bool warmup) { state_.warmup = warmup; }

  /// True if the agent must evaluate Q before and after each update.
  bool needs_qdiff() const {
    return state_.kind == StrategyKind::Vdbe || state_.kind == StrategyKind::VdbeSoftmax;
  }
  bool needs_returns() const { return state_.kind == StrategyKind::Bmc; }

  /// Effective exploration probability (1 during warmup).
  double epsilon() const { return state_.warmup ? 1.0 : state_.epsilon; }

  StrategyKind kind() const { return state_.kind; }
  const StrategyState& state() const { return state_; }
  StrategyState& state() { return state_; }

 private:
  StrategyState state_;
};

}  // namespace roadrl
