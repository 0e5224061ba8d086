#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "yoto/loss_layer.hpp"

namespace yoto {

enum class ScheduleKind { kConstant, kCosine, kStep };

struct Schedule {
  ScheduleKind kind = ScheduleKind::kConstant;
  std::vector<std::int64_t> milestones;  // kStep only
  double factor = 0.1;                   // kStep only
};

enum class OptimizerKind { kSgdw, kAdamw };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kSgdw;
  double alpha = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;  // AdamW only
  double adam_epsilon = 1e-8;
  double weight_decay = 0.0;
  // rho. Zero is accepted and disables the hyperparameter regularizer.
  double hp_decay = 1.0;
  double init_epsilon = 0.1;
  // Elementwise clip on g and h when > 0; off by default.
  double grad_clip = 0.0;
  Schedule schedule;
  std::int64_t total_steps = 5000;

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

/// Regular parameters and their moment buffers. v is only used by AdamW.
struct ParamState {
  std::vector<double> w;
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;

  explicit ParamState(std::vector<double> params);
};

/// Loss-HP exponents and their moment buffers. n[0] and s[0] stay zero.
struct HPState {
  HPExponents mu;
  std::vector<double> n;
  std::vector<double> s;  // AdamW second moment
  std::int64_t step = 0;

  explicit HPState(HPExponents exponents);
};

/// mu = (0, log eps, ..., log eps) with zeroed moments.
HPState init_hp_state(std::size_t aux_count, double epsilon);

/// Learning-rate multiplier eta_t for 1 <= t <= total_steps.
double schedule_multiplier(std::int64_t t, const OptimizerConfig& config);

/// One SGDW-with-momentum step over (w, mu):
///   m <- b1 m + eta a g
///   n <- b1 n + eta a h
///   w <- w - m - eta a lambda_wd w
///   mu <- mu - n - eta a rho r(mu_prev),  r = regularizer_gradient
/// The regularizer bypasses n. Throws DivergenceError on non-finite input or
/// output, std::invalid_argument on shape errors or h[0] != 0.
std::pair<ParamState, HPState> sgdw_yoto_step(const ParamState& params, const HPState& hps,
                                              std::span<const double> g,
                                              std::span<const double> h, std::int64_t t,
                                              const OptimizerConfig& config);

/// AdamW on w and on mu with bias-corrected moments, decoupled weight decay
/// on w and the decoupled regularizer term on mu as in the SGDW step.
std::pair<ParamState, HPState> adamw_yoto_step(const ParamState& params, const HPState& hps,
                                               std::span<const double> g,
                                               std::span<const double> h, std::int64_t t,
                                               const OptimizerConfig& config);

/// Dispatches on config.kind.
std::pair<ParamState, HPState> yoto_step(const ParamState& params, const HPState& hps,
                                         std::span<const double> g, std::span<const double> h,
                                         std::int64_t t, const OptimizerConfig& config);

}  // namespace yoto
