#include "roadrl/explore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roadrl/error.hpp"

namespace roadrl {

namespace {

int argmax_lowest(std::span<const double> q) {
  int best = 0;
  for (int a = 1; a < static_cast<int>(q.size()); ++a)
    if (q[a] > q[best]) best = a;
  return best;
}

std::vector<double> softmax_probs(std::span<const double> q, double temperature) {
  if (!(temperature > 0.0)) throw ConfigError("softmax temperature must be > 0");
  const double qmax = *std::max_element(q.begin(), q.end());
  std::vector<double> p(q.size());
  double z = 0.0;
  for (std::size_t a = 0; a < q.size(); ++a) {
    p[a] = std::exp((q[a] - qmax) / temperature);
    z += p[a];
  }
  for (double& v : p) v /= z;
  return p;
}

int sample_from(const std::vector<double>& probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t a = 0; a + 1 < probs.size(); ++a) {
    acc += probs[a];
    if (u < acc) return static_cast<int>(a);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

StrategyKind strategy_kind_from_name(const std::string& name) {
  if (name == "constant") return StrategyKind::ConstantEps;
  if (name == "decreasing") return StrategyKind::DecreasingEps;
  if (name == "vdbe") return StrategyKind::Vdbe;
  if (name == "bmc") return StrategyKind::Bmc;
  if (name == "softmax") return StrategyKind::Softmax;
  if (name == "mbe") return StrategyKind::Mbe;
  if (name == "vdbe_softmax") return StrategyKind::VdbeSoftmax;
  throw ConfigError("unknown strategy kind: " + name);
}

std::string strategy_kind_name(StrategyKind k) {
  switch (k) {
    case StrategyKind::ConstantEps: return "constant";
    case StrategyKind::DecreasingEps: return "decreasing";
    case StrategyKind::Vdbe: return "vdbe";
    case StrategyKind::Bmc: return "bmc";
    case StrategyKind::Softmax: return "softmax";
    case StrategyKind::Mbe: return "mbe";
    case StrategyKind::VdbeSoftmax: return "vdbe_softmax";
  }
  return "constant";
}

ActionChoice select_eps_greedy(std::span<const double> q, double eps, Rng& rng) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw ConfigError("epsilon must be in [0, 1]");
  ActionChoice c;
  if (eps > 0.0 && rng.uniform() < eps) {
    c.action = rng.pick(static_cast<int>(q.size()));
    c.exploring = true;
    c.probs.assign(q.size(), 1.0 / static_cast<double>(q.size()));
  } else {
    c.action = argmax_lowest(q);
    c.exploring = false;
  }
  return c;
}

ActionChoice select_softmax(std::span<const double> q, double temperature, Rng& rng) {
  ActionChoice c;
  c.probs = softmax_probs(q, temperature);
  c.action = sample_from(c.probs, rng);
  c.exploring = c.action != argmax_lowest(q);
  return c;
}

ActionChoice select_mbe(std::span<const double> q, double eps, double temperature, Rng& rng) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw ConfigError("epsilon must be in [0, 1]");
  if (eps > 0.0 && rng.uniform() < eps) {
    ActionChoice c = select_softmax(q, temperature, rng);
    c.exploring = true;
    return c;
  }
  ActionChoice c;
  c.action = argmax_lowest(q);
  c.exploring = false;
  return c;
}

void DecreasingSchedule::validate() const {
  if (n_start < 0 || eps_ann <= 0 || n_max <= 0)
    throw ConfigError("decreasing schedule step counts must be positive");
  if (n_start + eps_ann >= n_max)
    throw ConfigError("decreasing schedule requires n_start + eps_ann < n_max");
  if (!(eps_start >= eps_last && eps_last >= eps_end && eps_end >= 0.0 && eps_start <= 1.0))
    throw ConfigError("decreasing schedule requires eps_start >= eps_last >= eps_end >= 0");
}

double DecreasingSchedule::pi1() const {
  return -(eps_start - eps_last) / static_cast<double>(eps_ann);
}
double DecreasingSchedule::pi0() const { return eps_start - pi1() * static_cast<double>(n_start); }
double DecreasingSchedule::delta1() const {
  return -(eps_last - eps_end) / static_cast<double>(n_max - eps_ann - n_start);
}
double DecreasingSchedule::delta0() const {
  return eps_end - delta1() * static_cast<double>(n_max);
}

double eps_decreasing(long step, const DecreasingSchedule& sched) {
  sched.validate();
  if (step <= sched.n_start) return 1.0;
  if (step > sched.n_start + sched.eps_ann)
    return sched.delta0() + sched.delta1() * static_cast<double>(step);
  return sched.pi0() + sched.pi1() * static_cast<double>(step);
}

double student_t_pdf(double x, double location, double precision, double dof) {
  if (!(precision > 0.0)) throw ConfigError("student-t precision must be > 0");
  if (!(dof > 0.0)) throw ConfigError("student-t dof must be > 0");
  const double z = precision * (x - location) * (x - location) / dof;
  const double log_pdf = std::lgamma((dof + 1.0) / 2.0) - std::lgamma(dof / 2.0) +
                         0.5 * std::log(precision / (std::numbers::pi * dof)) -
                         (dof + 1.0) / 2.0 * std::log1p(z);
  return std::exp(log_pdf);
}

void vdbe_update(StrategyState& st, double delta) {
  if (!(st.lambda > 0.0 && st.lambda < 1.0)) throw ConfigError("vdbe lambda must be in (0, 1)");
  if (!(st.nu > 0.0)) throw ConfigError("vdbe nu must be > 0");
  const double e = std::exp(-std::abs(delta) / st.nu);
  const double f = (1.0 - e) / (1.0 + e);
  st.epsilon = st.lambda * f + (1.0 - st.lambda) * st.epsilon;
}

double BmcState::b_t() const {
  const double t = static_cast<double>(count);
  if (count == 0) return b0;
  const double sigma2 = m2 / t;  // population variance of observed returns
  return b0 + t / 2.0 * (sigma2 + tau0 / (tau0 + t) * (mean - mu0) * (mean - mu0));
}

void bmc_observe(StrategyState& st, double greedy_return, double uniform_return,
                 double observed_return) {
  BmcState& b = st.bmc;
  if (!(b.alpha > 0.0 && b.beta > 0.0 && b.a0 > 0.0 && b.b0 > 0.0 && b.tau0 > 0.0))
    throw ConfigError("bmc posterior parameters must be positive");

  // Streaming mean and squared-deviation sum over observed returns.
  b.count += 1;
  const double d = observed_return - b.mean;
  b.mean += d / static_cast<double>(b.count);
  b.m2 += d * (observed_return - b.mean);

  const double a_t = b.a_t();
  const double b_t = b.b_t();
  const double precision = a_t / b_t;
  const double dof = 2.0 * a_t;
  const double e_q = student_t_pdf(observed_return, greedy_return, precision, dof);
  const double e_u = student_t_pdf(observed_return, uniform_return, precision, dof);

  const double alpha = b.alpha;
  const double beta = b.beta;
  const double denom = e_u * alpha + e_q * beta;
  if (!(denom > 0.0) || !std::isfinite(denom)) return;  // evidence underflow, keep posterior
  const double m = alpha / (alpha + beta + 1.0) * (e_u * (alpha + 1.0) + e_q * beta) / denom;
  const double v = alpha / (alpha + beta + 1.0) * (alpha + 1.0) / (alpha + beta + 2.0) *
                   (e_u * (alpha + 2.0) + e_q * beta) / denom;
  const double spread = v - m * m;
  if (spread <= 1e-12 || m - v <= 0.0) {
    st.epsilon = b.epsilon();
    return;  // moment-matching degeneracy, skip the Beta update
  }
  const double r = (m - v) / spread;
  b.alpha = m * r;
  b.beta = (1.0 - m) * r;
  st.epsilon = b.epsilon();
}

void StrategyParams::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("strategy epsilon must be in [0, 1]");
  if (!(temperature > 0.0)) throw ConfigError("strategy temperature must be > 0");
  if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("vdbe lambda must be in (0, 1)");
  if (!(nu > 0.0)) throw ConfigError("vdbe nu must be > 0");
  if (!(bmc_alpha0 > 0.0 && bmc_beta0 > 0.0 && bmc_a0 > 0.0 && bmc_b0 > 0.0 && bmc_tau0 > 0.0))
    throw ConfigError("bmc priors must be positive");
  if (kind == StrategyKind::DecreasingEps) schedule.validate();
}

Strategy::Strategy(const StrategyParams& params) {
  params.validate();
  state_.kind = params.kind;
  state_.temperature = params.temperature;
  state_.schedule = params.schedule;
  state_.lambda = params.lambda;
  state_.nu = params.nu;
  state_.bmc = BmcState{params.bmc_alpha0, params.bmc_beta0, params.bmc_a0,
                        params.bmc_b0,     params.bmc_mu0,   params.bmc_tau0,
                        0,                 0.0,              0.0};
  switch (params.kind) {
    case StrategyKind::ConstantEps:
    case StrategyKind::Mbe:
      state_.epsilon = params.epsilon;
      break;
    case StrategyKind::DecreasingEps:
    case StrategyKind::Vdbe:
    case StrategyKind::VdbeSoftmax:
      state_.epsilon = 1.0;
      break;
    case StrategyKind::Bmc:
      state_.epsilon = state_.bmc.epsilon();
      break;
    case StrategyKind::Softmax:
      state_.epsilon = 0.0;  // never consulted
      break;
  }
}

ActionChoice Strategy::select(std::span<const double> q, Rng& rng) {
  const double eps = epsilon();
  switch (state_.kind) {
    case StrategyKind::ConstantEps:
    case StrategyKind::DecreasingEps:
    case StrategyKind::Vdbe:
    case StrategyKind::Bmc:
      return select_eps_greedy(q, eps, rng);
    case StrategyKind::Softmax:
      return select_softmax(q, state_.temperature, rng);
    case StrategyKind::Mbe:
    case StrategyKind::VdbeSoftmax:
      return select_mbe(q, eps, state_.temperature, rng);
  }
  throw ConfigError("unknown strategy kind");
}

void Strategy::on_env_step(long global_step) {
  if (state_.kind == StrategyKind::DecreasingEps)
    state_.epsilon = eps_decreasing(global_step, state_.schedule);
}

void Strategy::on_agent_update(double delta) {
  if (needs_qdiff()) vdbe_update(state_, delta);
}

void Strategy::on_return(double greedy_return, double uniform_return, double observed_return) {
  if (needs_returns()) bmc_observe(state_, greedy_return, uniform_return, observed_return);
}

}  // namespace roadrl
