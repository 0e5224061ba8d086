#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "yoto/models.hpp"

namespace yoto {

/// Worst-case agreement between an analytic gradient and central finite
/// differences over a batch of random trials.
///
/// The error of one trial is max_k |a_k - f_k| / max(|a|_inf, |f|_inf, floor):
/// entries are compared against the scale of the whole gradient, so a tiny
/// entry next to large ones is not judged by its own magnitude. When both
/// gradients are below the floor the absolute error decides.
struct GradCheckReport {
  std::string name;
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::size_t worst_trial = 0;
  std::size_t worst_index = 0;
  std::size_t n_trials = 0;
  double tolerance = 0.0;
  bool pass = true;

  std::string to_json() const;
};

inline constexpr double kDefaultFdStep = 1e-6;
inline constexpr double kErrorFloor = 1e-8;

using ScalarFn = std::function<double(std::span<const double>)>;

/// (fn(x + h e_i) - fn(x - h e_i)) / 2h for every i. Throws NumericalError if
/// fn returns a non-finite value, std::invalid_argument if h <= 0.
std::vector<double> central_fd(const ScalarFn& fn, std::span<const double> x,
                               double h = kDefaultFdStep);

/// Accumulates one trial's comparison into a report.
void accumulate(GradCheckReport& report, std::size_t trial, std::span<const double> analytic,
                std::span<const double> numeric);

struct HpCheckOptions {
  std::size_t n_trials = 100;
  std::size_t k_min = 1;
  std::size_t k_max = 5;
  double tolerance = 1e-6;
  double h = kDefaultFdStep;
  double mu_sigma = 2.0;
  std::uint64_t seed = 0;
};

/// Empirical HP gradient vs FD of composite_loss(softmax(mu), l) over the
/// learnable exponents. mu ~ N(0, sigma^2) with mu_0 = 0, l ~ |N(0,1)| + 0.1.
GradCheckReport check_hp_gradients(const HpCheckOptions& options = {});

/// Regularizer gradient vs FD of regularizer_value(mu, 1).
GradCheckReport check_reg_gradients(const HpCheckOptions& options = {});

struct ModelCheckOptions {
  std::size_t n_trials = 50;
  double tolerance = 1e-5;
  double h = kDefaultFdStep;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
};

/// eval_param_gradient vs FD of lambda^T eval_losses at random (w, lambda,
/// batch). Each trial draws a fresh dataset of batch_size rows.
GradCheckReport check_model_gradients(const Model& model, const ModelCheckOptions& options = {});

}  // namespace yoto
