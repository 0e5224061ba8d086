#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "yoto/loss_layer.hpp"

namespace yoto {

enum class ModelKind { kLinearRegression, kTinyMlp };

/// Auxiliary loss terms a toy model can carry. Term 0 is always the basic
/// loss of the model kind (MSE or cross-entropy).
enum class AuxTerm {
  kConsistency,  // clean vs jittered predictions (or hidden features)
  kNoiseFit,     // regression onto fixed random targets
};

struct ToyModelSpec {
  ModelKind kind = ModelKind::kLinearRegression;
  std::size_t input_dim = 8;
  std::size_t hidden_units = 16;  // MLP only, at most 64
  std::vector<AuxTerm> aux_terms = {AuxTerm::kConsistency, AuxTerm::kNoiseFit};
  // Regression: std of the additive label noise. MLP: label flip probability.
  double label_noise = 0.5;
  double jitter_scale = 0.1;
  double random_target_scale = 1.0;

  std::size_t loss_count() const noexcept { return aux_terms.size() + 1; }
  std::size_t parameter_count() const;
  std::vector<std::string> loss_names() const;
  void validate() const;
};

/// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool operator==(const Matrix&) const = default;
};

enum class Split { kTrain, kValidation };

/// One split of a synthetic task. `augmented` holds the jittered copy of
/// `inputs`; `random_targets` is the target channel of the noise-fit term and
/// shares nothing with the true targets: unit noise, plus a random linear
/// teacher for the regression kind. For the MLP kind `targets` holds class
/// labels 0/1.
struct Dataset {
  Split split = Split::kTrain;
  std::uint64_t seed = 0;
  Matrix inputs;
  Matrix augmented;
  Matrix targets;
  Matrix random_targets;

  std::size_t size() const noexcept { return inputs.rows; }
  bool operator==(const Dataset&) const = default;
};

struct SyntheticTask {
  Dataset train;
  Dataset validation;
  // Ground-truth parameters in model layout (regression only; empty for MLP).
  std::vector<double> true_parameters;
};

/// Deterministic in (spec, seed, n_train, n_val). Throws std::invalid_argument
/// when a split size is zero.
SyntheticTask make_synthetic_dataset(const ToyModelSpec& spec, std::uint64_t seed,
                                     std::size_t n_train, std::size_t n_val);

/// CSV with header x_*, xa_*, y_*, r_*; values printed round-trip exact.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path, Split split, std::uint64_t seed);

/// Rows of a dataset used for one loss/gradient evaluation.
class BatchView {
 public:
  /// All rows.
  explicit BatchView(const Dataset& data) : data_(&data), all_(true) {}
  BatchView(const Dataset& data, std::span<const std::size_t> rows)
      : data_(&data), rows_(rows), all_(false) {}

  const Dataset& data() const noexcept { return *data_; }
  std::size_t size() const noexcept { return all_ ? data_->size() : rows_.size(); }
  std::size_t index(std::size_t k) const { return all_ ? k : rows_[k]; }

 private:
  const Dataset* data_;
  std::span<const std::size_t> rows_;
  bool all_;
};

/// A differentiable toy mapping with one basic and K auxiliary losses.
class Model {
 public:
  virtual ~Model() = default;

  const ToyModelSpec& spec() const noexcept { return spec_; }
  std::size_t parameter_count() const { return spec_.parameter_count(); }
  std::size_t loss_count() const noexcept { return spec_.loss_count(); }

  virtual std::vector<double> init_parameters(std::mt19937_64& rng) const = 0;

  /// Batch-mean loss terms. Throws NumericalError on non-finite values and
  /// std::invalid_argument for empty batches or wrong parameter counts.
  virtual LossVector eval_losses(std::span<const double> w, const BatchView& batch) const = 0;

  /// d(lambda^T l)/dw, linear in lambda. Takes a raw span so callers may
  /// pass one-hot or unnormalized weightings.
  virtual std::vector<double> eval_param_gradient(std::span<const double> w,
                                                  const BatchView& batch,
                                                  std::span<const double> lambda) const = 0;

  std::vector<double> eval_param_gradient(std::span<const double> w, const BatchView& batch,
                                          const LossWeights& lambda) const {
    return eval_param_gradient(w, batch, std::span<const double>(lambda.values()));
  }

 protected:
  explicit Model(ToyModelSpec spec);
  void check_call(std::span<const double> w, const BatchView& batch) const;
  void check_weights(std::span<const double> lambda) const;

 private:
  ToyModelSpec spec_;
};

std::unique_ptr<Model> make_model(const ToyModelSpec& spec);

const char* to_string(ModelKind kind);
const char* to_string(AuxTerm term);
ModelKind parse_model_kind(const std::string& text);
AuxTerm parse_aux_term(const std::string& text);

}  // namespace yoto
