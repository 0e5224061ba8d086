#include "yoto/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "yoto/errors.hpp"

namespace yoto {

namespace {

void check_finite(std::span<const double> xs, std::int64_t t, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw DivergenceError(t, std::string("non-finite ") + what);
  }
}

void check_shapes(const ParamState& params, const HPState& hps, std::span<const double> g,
                  std::span<const double> h) {
  if (g.size() != params.w.size()) {
    throw std::invalid_argument("parameter gradient has " + std::to_string(g.size()) +
                                " entries, expected " + std::to_string(params.w.size()));
  }
  if (h.size() != hps.mu.size()) {
    throw std::invalid_argument("hp gradient has " + std::to_string(h.size()) +
                                " entries, expected " + std::to_string(hps.mu.size()));
  }
  if (h[0] != 0.0) {
    throw std::invalid_argument("hp gradient must be zero at the frozen index");
  }
}

double clip(double x, double limit) {
  if (limit <= 0.0) return x;
  return std::clamp(x, -limit, limit);
}

// Applies mu <- base - eta*alpha*rho*reg_grad(mu_prev) and rebuilds the
// exponent vector with index 0 kept at zero.
HPExponents finish_hp_update(std::vector<double> mu, const HPExponents& mu_prev, double lr,
                             double rho, std::int64_t t) {
  if (rho > 0.0) {
    const std::vector<double> reg = regularizer_gradient(mu_prev);
    for (std::size_t i = 1; i < mu.size(); ++i) mu[i] -= lr * rho * reg[i];
  }
  mu[0] = 0.0;
  check_finite(mu, t, "loss exponents");
  return HPExponents(std::move(mu));
}

}  // namespace

void OptimizerConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw std::invalid_argument("beta1 must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("beta2 must be in [0, 1)");
  if (!(adam_epsilon > 0.0)) throw std::invalid_argument("adam_epsilon must be > 0");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight_decay must be >= 0");
  if (!(hp_decay >= 0.0)) throw std::invalid_argument("hp_decay must be >= 0");
  if (!(init_epsilon > 0.0)) throw std::invalid_argument("init_epsilon must be > 0");
  if (!(grad_clip >= 0.0)) throw std::invalid_argument("grad_clip must be >= 0");
  if (total_steps < 1) throw std::invalid_argument("total_steps must be >= 1");
  if (schedule.kind == ScheduleKind::kStep && !(schedule.factor > 0.0)) {
    throw std::invalid_argument("step schedule factor must be > 0");
  }
}

ParamState::ParamState(std::vector<double> params)
    : w(std::move(params)), m(w.size(), 0.0), v(w.size(), 0.0) {}

HPState::HPState(HPExponents exponents)
    : mu(std::move(exponents)), n(mu.size(), 0.0), s(mu.size(), 0.0) {}

HPState init_hp_state(std::size_t aux_count, double epsilon) {
  if (aux_count == 0) throw std::invalid_argument("need at least one auxiliary loss");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("init epsilon must be > 0");
  }
  std::vector<double> aux(aux_count, std::log(epsilon));
  return HPState(HPExponents::from_auxiliary(aux));
}

double schedule_multiplier(std::int64_t t, const OptimizerConfig& config) {
  if (t < 1 || t > config.total_steps) {
    throw std::invalid_argument("step " + std::to_string(t) + " outside [1, " +
                                std::to_string(config.total_steps) + "]");
  }
  switch (config.schedule.kind) {
    case ScheduleKind::kConstant:
      return 1.0;
    case ScheduleKind::kCosine:
      return 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(t) /
                                   static_cast<double>(config.total_steps)));
    case ScheduleKind::kStep: {
      const auto passed = std::count_if(config.schedule.milestones.begin(),
                                        config.schedule.milestones.end(),
                                        [t](std::int64_t m) { return t > m; });
      return std::pow(config.schedule.factor, static_cast<double>(passed));
    }
  }
  return 1.0;
}

std::pair<ParamState, HPState> sgdw_yoto_step(const ParamState& params, const HPState& hps,
                                              std::span<const double> g,
                                              std::span<const double> h, std::int64_t t,
                                              const OptimizerConfig& config) {
  check_shapes(params, hps, g, h);
  check_finite(g, t, "parameter gradient");
  check_finite(h, t, "hp gradient");

  const double lr = schedule_multiplier(t, config) * config.alpha;
  const double b1 = config.beta1;

  ParamState next_params = params;
  for (std::size_t k = 0; k < params.w.size(); ++k) {
    next_params.m[k] = b1 * params.m[k] + lr * clip(g[k], config.grad_clip);
    next_params.w[k] = params.w[k] - next_params.m[k] - lr * config.weight_decay * params.w[k];
  }
  next_params.step = params.step + 1;
  check_finite(next_params.w, t, "parameters");

  std::vector<double> n(hps.n.size());
  std::vector<double> mu = hps.mu.values();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    n[i] = b1 * hps.n[i] + lr * clip(h[i], config.grad_clip);
    mu[i] -= n[i];
  }
  HPState next_hps(finish_hp_update(std::move(mu), hps.mu, lr, config.hp_decay, t));
  next_hps.n = std::move(n);
  next_hps.s = hps.s;
  next_hps.step = hps.step + 1;
  return {std::move(next_params), std::move(next_hps)};
}

std::pair<ParamState, HPState> adamw_yoto_step(const ParamState& params, const HPState& hps,
                                               std::span<const double> g,
                                               std::span<const double> h, std::int64_t t,
                                               const OptimizerConfig& config) {
  check_shapes(params, hps, g, h);
  check_finite(g, t, "parameter gradient");
  check_finite(h, t, "hp gradient");

  const double lr = schedule_multiplier(t, config) * config.alpha;
  const double b1 = config.beta1;
  const double b2 = config.beta2;

  ParamState next_params = params;
  next_params.step = params.step + 1;
  const double p_corr1 = 1.0 - std::pow(b1, static_cast<double>(next_params.step));
  const double p_corr2 = 1.0 - std::pow(b2, static_cast<double>(next_params.step));
  for (std::size_t k = 0; k < params.w.size(); ++k) {
    const double gk = clip(g[k], config.grad_clip);
    next_params.m[k] = b1 * params.m[k] + (1.0 - b1) * gk;
    next_params.v[k] = b2 * params.v[k] + (1.0 - b2) * gk * gk;
    const double m_hat = next_params.m[k] / p_corr1;
    const double v_hat = next_params.v[k] / p_corr2;
    next_params.w[k] = params.w[k] - lr * m_hat / (std::sqrt(v_hat) + config.adam_epsilon) -
                       lr * config.weight_decay * params.w[k];
  }
  check_finite(next_params.w, t, "parameters");

  const std::int64_t hp_step = hps.step + 1;
  const double h_corr1 = 1.0 - std::pow(b1, static_cast<double>(hp_step));
  const double h_corr2 = 1.0 - std::pow(b2, static_cast<double>(hp_step));
  std::vector<double> n(hps.n.size());
  std::vector<double> s(hps.s.size());
  std::vector<double> mu = hps.mu.values();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double hi = clip(h[i], config.grad_clip);
    n[i] = b1 * hps.n[i] + (1.0 - b1) * hi;
    s[i] = b2 * hps.s[i] + (1.0 - b2) * hi * hi;
    mu[i] -= lr * (n[i] / h_corr1) / (std::sqrt(s[i] / h_corr2) + config.adam_epsilon);
  }
  HPState next_hps(finish_hp_update(std::move(mu), hps.mu, lr, config.hp_decay, t));
  next_hps.n = std::move(n);
  next_hps.s = std::move(s);
  next_hps.step = hp_step;
  return {std::move(next_params), std::move(next_hps)};
}

std::pair<ParamState, HPState> yoto_step(const ParamState& params, const HPState& hps,
                                         std::span<const double> g, std::span<const double> h,
                                         std::int64_t t, const OptimizerConfig& config) {
  if (config.kind == OptimizerKind::kAdamw) {
    return adamw_yoto_step(params, hps, g, h, t, config);
  }
  return sgdw_yoto_step(params, hps, g, h, t, config);
}

}  // namespace yoto
