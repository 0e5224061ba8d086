#include "yoto/loss_layer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "yoto/errors.hpp"

namespace yoto {

namespace {

void require_finite(std::span<const double> xs, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument(std::string(what) + " contains a non-finite entry");
    }
  }
}

void require_same_length(std::size_t a, std::size_t b) {
  if (a != b) {
    throw std::invalid_argument("length mismatch: " + std::to_string(a) + " weights vs " +
                                std::to_string(b) + " losses");
  }
}

double log_sum_exp(std::span<const double> mu) {
  const double top = *std::max_element(mu.begin(), mu.end());
  double sum = 0.0;
  for (double m : mu) sum += std::exp(m - top);
  return top + std::log(sum);
}

}  // namespace

HPExponents::HPExponents(std::vector<double> mu) : mu_(std::move(mu)) {
  if (mu_.size() < 2) {
    throw std::invalid_argument("need one basic and at least one auxiliary exponent");
  }
  require_finite(mu_, "mu");
  if (mu_[0] != 0.0) {
    throw std::invalid_argument("mu[0] is frozen and must be 0");
  }
}

HPExponents HPExponents::from_auxiliary(std::span<const double> aux) {
  std::vector<double> mu;
  mu.reserve(aux.size() + 1);
  mu.push_back(0.0);
  mu.insert(mu.end(), aux.begin(), aux.end());
  return HPExponents(std::move(mu));
}

LossWeights::LossWeights(std::vector<double> lambda) : lambda_(std::move(lambda)) {
  if (lambda_.empty()) throw std::invalid_argument("empty weight vector");
  double sum = 0.0;
  for (double l : lambda_) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw std::invalid_argument("loss weights must be finite and strictly positive");
    }
    sum += l;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("loss weights must sum to 1");
  }
}

LossWeights LossWeights::normalized(std::span<const double> raw) {
  if (raw.empty()) throw std::invalid_argument("empty weight vector");
  double sum = 0.0;
  for (double r : raw) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw std::invalid_argument("raw loss weights must be finite and strictly positive");
    }
    sum += r;
  }
  LossWeights w;
  w.lambda_.reserve(raw.size());
  for (double r : raw) w.lambda_.push_back(r / sum);
  return w;
}

std::vector<double> softmax(std::span<const double> mu) {
  require_finite(mu, "mu");
  const double top = *std::max_element(mu.begin(), mu.end());
  std::vector<double> out(mu.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    out[i] = std::exp(mu[i] - top);
    sum += out[i];
  }
  for (double& o : out) o /= sum;
  return out;
}

LossWeights softmax_weights(const HPExponents& mu) {
  return LossWeights::normalized(softmax(mu.values()));
}

double composite_loss(const LossWeights& lambda, std::span<const double> losses) {
  require_same_length(lambda.size(), losses.size());
  double total = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) total += lambda[i] * losses[i];
  return total;
}

double composite_loss(const LossWeights& lambda, const LossVector& losses) {
  return composite_loss(lambda, std::span<const double>(losses.values));
}

std::vector<double> hp_gradient_empirical(const HPExponents& mu, std::span<const double> losses) {
  require_same_length(mu.size(), losses.size());
  require_finite(losses, "losses");
  const std::vector<double> lambda = softmax(mu.values());
  std::vector<double> grad(mu.size(), 0.0);
  for (std::size_t i = 1; i < mu.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < mu.size(); ++j) {
      if (j != i) acc += (losses[i] - losses[j]) * lambda[j];
    }
    grad[i] = lambda[i] * acc;
  }
  return grad;
}

std::vector<double> naive_exp_gradient(const HPExponents& mu, std::span<const double> losses) {
  require_same_length(mu.size(), losses.size());
  std::vector<double> grad(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(losses[i] > 0.0)) {
      throw PreconditionError("naive_exp_gradient requires strictly positive losses");
    }
    grad[i] = std::exp(mu[i]) * losses[i];
  }
  return grad;
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double regularizer_value(const HPExponents& mu, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("hyperparameter decay rho must be positive");
  }
  const double lse = log_sum_exp(mu.values());
  double neg_entropy = 0.0;
  double penalty = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double log_lambda = mu[i] - lse;
    neg_entropy += std::exp(log_lambda) * log_lambda;
    if (i > 0) penalty += softplus(mu[i]);
  }
  return rho * (neg_entropy + penalty);
}

std::vector<double> regularizer_gradient(const HPExponents& mu) {
  const std::vector<double> lambda = softmax(mu.values());
  std::vector<double> grad(mu.size(), 0.0);
  for (std::size_t i = 1; i < mu.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < mu.size(); ++j) {
      if (j != i) acc += lambda[j] * (mu[i] - mu[j]);
    }
    grad[i] = lambda[i] * acc + sigmoid(mu[i]);
  }
  return grad;
}

}  // namespace yoto
