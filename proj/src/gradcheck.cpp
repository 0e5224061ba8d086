#include "yoto/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "yoto/errors.hpp"
#include "yoto/loss_layer.hpp"

namespace yoto {

namespace {

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Evaluates a scalar function of the auxiliary exponents mu_1..mu_K; the
// frozen mu_0 is not a coordinate of the finite-difference problem.
template <typename F>
std::vector<double> fd_over_aux(F&& scalar_of_mu, std::span<const double> mu, double h) {
  const std::vector<double> aux(mu.begin() + 1, mu.end());
  auto fn = [&](std::span<const double> a) {
    std::vector<double> full(1, 0.0);
    full.insert(full.end(), a.begin(), a.end());
    return scalar_of_mu(full);
  };
  std::vector<double> grad = central_fd(fn, aux, h);
  grad.insert(grad.begin(), 0.0);
  return grad;
}

template <typename Analytic, typename Scalar>
GradCheckReport run_hp_check(const char* name, const HpCheckOptions& options,
                             Analytic&& analytic, Scalar&& scalar) {
  if (options.k_min < 1 || options.k_max < options.k_min) {
    throw std::invalid_argument("K range must satisfy 1 <= k_min <= k_max");
  }
  GradCheckReport report;
  report.name = name;
  report.tolerance = options.tolerance;
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick_k(options.k_min, options.k_max);
  std::normal_distribution<double> mu_dist(0.0, options.mu_sigma);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t trial = 0; trial < options.n_trials; ++trial) {
    const std::size_t k = pick_k(rng);
    std::vector<double> mu(k + 1, 0.0);
    std::vector<double> losses(k + 1);
    for (std::size_t i = 1; i <= k; ++i) mu[i] = mu_dist(rng);
    for (double& l : losses) l = std::abs(normal(rng)) + 0.1;
    const std::vector<double> a = analytic(mu, losses);
    const std::vector<double> f =
        fd_over_aux([&](std::span<const double> m) { return scalar(m, losses); }, mu, options.h);
    accumulate(report, trial, a, f);
  }
  report.n_trials = options.n_trials;
  report.pass = report.max_relative_error < report.tolerance;
  return report;
}

}  // namespace

std::string GradCheckReport::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["max_relative_error"] = max_relative_error;
  j["max_absolute_error"] = max_absolute_error;
  j["worst_trial"] = worst_trial;
  j["worst_index"] = worst_index;
  j["n_trials"] = n_trials;
  j["tolerance"] = tolerance;
  j["pass"] = pass;
  return j.dump();
}

std::vector<double> central_fd(const ScalarFn& fn, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be > 0");
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = fn(probe);
    probe[i] = x[i] - h;
    const double down = fn(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericalError("non-finite function value while differencing coordinate " +
                           std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

void accumulate(GradCheckReport& report, std::size_t trial, std::span<const double> analytic,
                std::span<const double> numeric) {
  if (analytic.size() != numeric.size()) {
    throw std::invalid_argument("gradient size mismatch in comparison");
  }
  const double scale = std::max({inf_norm(analytic), inf_norm(numeric), kErrorFloor});
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    const double abs_err = std::abs(analytic[k] - numeric[k]);
    // Below the floor the relative error equals abs_err / floor, so the
    // pass criterion degrades gracefully to an absolute one.
    const double rel_err = abs_err / scale;
    report.max_absolute_error = std::max(report.max_absolute_error, abs_err);
    if (rel_err > report.max_relative_error) {
      report.max_relative_error = rel_err;
      report.worst_trial = trial;
      report.worst_index = k;
    }
  }
}

GradCheckReport check_hp_gradients(const HpCheckOptions& options) {
  return run_hp_check(
      "hp_gradient_empirical", options,
      [](const std::vector<double>& mu, const std::vector<double>& l) {
        return hp_gradient_empirical(HPExponents(mu), l);
      },
      // Oracle path: plain softmax and dot product. Differencing L_e - l_0
      // (same gradient, since the weights sum to one) keeps the function value
      // small when the gradient is small, so rounding in the returned double
      // does not swamp the difference quotient.
      [](std::span<const double> mu, const std::vector<double>& l) {
        const std::vector<double> lambda = softmax(mu);
        double total = 0.0;
        for (std::size_t i = 1; i < l.size(); ++i) total += lambda[i] * (l[i] - l[0]);
        return total;
      });
}

GradCheckReport check_reg_gradients(const HpCheckOptions& options) {
  return run_hp_check(
      "regularizer_gradient", options,
      [](const std::vector<double>& mu, const std::vector<double>&) {
        return regularizer_gradient(HPExponents(mu));
      },
      [](std::span<const double> mu, const std::vector<double>&) {
        return regularizer_value(HPExponents(std::vector<double>(mu.begin(), mu.end())), 1.0);
      });
}

GradCheckReport check_model_gradients(const Model& model, const ModelCheckOptions& options) {
  GradCheckReport report;
  report.name = std::string("model_gradient:") + to_string(model.spec().kind);
  report.tolerance = options.tolerance;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.05, 1.0);
  for (std::size_t trial = 0; trial < options.n_trials; ++trial) {
    const SyntheticTask task =
        make_synthetic_dataset(model.spec(), rng(), options.batch_size, 1);
    const BatchView batch(task.train);
    std::vector<double> w = model.init_parameters(rng);
    for (double& x : w) x += 0.3 * normal(rng);
    std::vector<double> raw(model.loss_count());
    for (double& r : raw) r = uniform(rng);
    const LossWeights lambda = LossWeights::normalized(raw);

    const std::vector<double> a = model.eval_param_gradient(w, batch, lambda);
    const std::vector<double> f = central_fd(
        [&](std::span<const double> p) {
          return composite_loss(lambda, model.eval_losses(p, batch));
        },
        w, options.h);
    accumulate(report, trial, a, f);
  }
  report.n_trials = options.n_trials;
  report.pass = report.max_relative_error < report.tolerance;
  return report;
}

}  // namespace yoto
