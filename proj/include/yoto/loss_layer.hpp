#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace yoto {

/// Learnable loss-weight exponents mu_0..mu_K. Index 0 belongs to the basic
/// loss and is pinned to zero; only the K auxiliary exponents are learned.
class HPExponents {
 public:
  /// Throws std::invalid_argument unless size >= 2, mu[0] == 0 and all
  /// entries are finite.
  explicit HPExponents(std::vector<double> mu);

  /// Builds (0, aux...) from the K auxiliary exponents.
  static HPExponents from_auxiliary(std::span<const double> aux);

  std::size_t size() const noexcept { return mu_.size(); }
  std::size_t aux_count() const noexcept { return mu_.size() - 1; }
  double operator[](std::size_t i) const { return mu_[i]; }
  const std::vector<double>& values() const noexcept { return mu_; }

 private:
  std::vector<double> mu_;
};

/// Convex loss weights: strictly positive, summing to one.
class LossWeights {
 public:
  /// Normalizes nothing; checks positivity and |sum - 1| <= 1e-12.
  explicit LossWeights(std::vector<double> lambda);

  /// Normalizes positive raw weights (e.g. grid values exp(mu_i)) to sum one.
  static LossWeights normalized(std::span<const double> raw);

  std::size_t size() const noexcept { return lambda_.size(); }
  double operator[](std::size_t i) const { return lambda_[i]; }
  const std::vector<double>& values() const noexcept { return lambda_; }

 private:
  LossWeights() = default;
  std::vector<double> lambda_;
};

/// Batch-level values of the loss terms; entry 0 is the basic loss.
struct LossVector {
  std::vector<double> values;
  std::vector<std::string> names;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// lambda = softmax(mu), evaluated with max-subtraction.
LossWeights softmax_weights(const HPExponents& mu);

/// Raw softmax without the LossWeights checks. Used where weights may
/// underflow to zero for extreme exponents (e.g. inside finite differences).
std::vector<double> softmax(std::span<const double> mu);

/// lambda^T l.
double composite_loss(const LossWeights& lambda, std::span<const double> losses);
double composite_loss(const LossWeights& lambda, const LossVector& losses);

/// dL_e/dmu_i for L_e = softmax(mu)^T l. Entry 0 is exactly zero.
///
/// Evaluated as lambda_i * sum_{j != i} (l_i - l_j) lambda_j, which is the
/// closed form exp(mu_i) sum_{j != i} (l_i - l_j) exp(mu_j) / (sum_j exp(mu_j))^2
/// with the shared max factored out of every exponential. The pairwise form
/// keeps the result exactly zero when all losses coincide.
std::vector<double> hp_gradient_empirical(const HPExponents& mu, std::span<const double> losses);

/// Gradient exp(mu_i) l_i of the un-normalized exponential parameterization.
/// Every entry is positive for positive losses, so any descent step shrinks
/// all weights. Throws PreconditionError if some l_i <= 0.
std::vector<double> naive_exp_gradient(const HPExponents& mu, std::span<const double> losses);

/// rho * (sum_{i=0..K} lambda_i log lambda_i + sum_{i=1..K} softplus(mu_i)).
double regularizer_value(const HPExponents& mu, double rho);

/// (1/rho) dL_r/dmu_i; entry 0 is exactly zero. The caller applies rho.
std::vector<double> regularizer_gradient(const HPExponents& mu);

/// log(1 + exp(x)) without overflow.
double softplus(double x);
/// 1 / (1 + exp(-x)) without overflow.
double sigmoid(double x);

}  // namespace yoto
