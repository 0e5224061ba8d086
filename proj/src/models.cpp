#include "yoto/models.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "yoto/errors.hpp"
#include "yoto/text_io.hpp"

namespace yoto {

namespace {

constexpr std::size_t kClasses = 2;
constexpr std::size_t kMaxHidden = 64;

void require_finite_losses(const LossVector& l) {
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (!std::isfinite(l[i])) {
      throw NumericalError("loss term " + std::to_string(i) + " (" + l.names[i] +
                           ") is not finite");
    }
  }
}

void require_finite_gradient(const std::vector<double>& g) {
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!std::isfinite(g[k])) {
      throw NumericalError("parameter gradient entry " + std::to_string(k) + " is not finite");
    }
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// -- multiloss linear regression ------------------------------------------
// Layout: w[0..d) weights, w[d] bias.

class LinearRegressionModel final : public Model {
 public:
  explicit LinearRegressionModel(ToyModelSpec spec) : Model(std::move(spec)) {}

  std::vector<double> init_parameters(std::mt19937_64& rng) const override {
    std::normal_distribution<double> normal(0.0, 0.1);
    std::vector<double> w(parameter_count());
    for (double& x : w) x = normal(rng);
    return w;
  }

  LossVector eval_losses(std::span<const double> w, const BatchView& batch) const override {
    check_call(w, batch);
    const std::size_t d = spec().input_dim;
    const auto weights = w.first(d);
    const double bias = w[d];
    const Dataset& data = batch.data();

    double fit = 0.0;
    double consistency = 0.0;
    double noise = 0.0;
    for (std::size_t k = 0; k < batch.size(); ++k) {
      const std::size_t r = batch.index(k);
      const double pred = dot(weights, data.inputs.row(r)) + bias;
      const double pred_aug = dot(weights, data.augmented.row(r)) + bias;
      fit += (pred - data.targets(r, 0)) * (pred - data.targets(r, 0));
      consistency += (pred - pred_aug) * (pred - pred_aug);
      noise += (pred - data.random_targets(r, 0)) * (pred - data.random_targets(r, 0));
    }
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    LossVector out;
    out.names = spec().loss_names();
    out.values.push_back(fit * inv_b);
    for (AuxTerm term : spec().aux_terms) {
      out.values.push_back(term == AuxTerm::kConsistency ? consistency * inv_b : noise * inv_b);
    }
    require_finite_losses(out);
    return out;
  }

  std::vector<double> eval_param_gradient(std::span<const double> w, const BatchView& batch,
                                          std::span<const double> lambda) const override {
    check_call(w, batch);
    check_weights(lambda);
    const std::size_t d = spec().input_dim;
    const auto weights = w.first(d);
    const double bias = w[d];
    const Dataset& data = batch.data();

    double lam_consistency = 0.0;
    double lam_noise = 0.0;
    for (std::size_t i = 0; i < spec().aux_terms.size(); ++i) {
      (spec().aux_terms[i] == AuxTerm::kConsistency ? lam_consistency : lam_noise) +=
          lambda[i + 1];
    }

    std::vector<double> grad(parameter_count(), 0.0);
    const double scale = 2.0 / static_cast<double>(batch.size());
    for (std::size_t k = 0; k < batch.size(); ++k) {
      const std::size_t r = batch.index(k);
      const auto x = data.inputs.row(r);
      const auto xa = data.augmented.row(r);
      const double pred = dot(weights, x) + bias;
      const double pred_aug = dot(weights, xa) + bias;
      // Residuals of the terms that act on the clean prediction.
      const double clean = lambda[0] * (pred - data.targets(r, 0)) +
                           lam_noise * (pred - data.random_targets(r, 0));
      const double gap = lam_consistency * (pred - pred_aug);
      for (std::size_t j = 0; j < d; ++j) {
        grad[j] += scale * (clean * x[j] + gap * (x[j] - xa[j]));
      }
      grad[d] += scale * clean;
    }
    require_finite_gradient(grad);
    return grad;
  }
};

// -- tiny MLP with consistency term -----------------------------------------
// Layout: W1 (H x d), b1 (H), W2 (2 x H), b2 (2), v (H), c.
// hidden = tanh(W1 x + b1); logits = W2 hidden + b2; aux head = v . hidden + c.

class TinyMlpModel final : public Model {
 public:
  explicit TinyMlpModel(ToyModelSpec spec) : Model(std::move(spec)) {
    const std::size_t d = this->spec().input_dim;
    const std::size_t h = this->spec().hidden_units;
    off_b1_ = h * d;
    off_w2_ = off_b1_ + h;
    off_b2_ = off_w2_ + kClasses * h;
    off_v_ = off_b2_ + kClasses;
    off_c_ = off_v_ + h;
  }

  std::vector<double> init_parameters(std::mt19937_64& rng) const override {
    const std::size_t d = spec().input_dim;
    const std::size_t h = spec().hidden_units;
    std::normal_distribution<double> first(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
    std::normal_distribution<double> second(0.0, 1.0 / std::sqrt(static_cast<double>(h)));
    std::vector<double> w(parameter_count(), 0.0);
    for (std::size_t k = 0; k < off_b1_; ++k) w[k] = first(rng);
    for (std::size_t k = off_w2_; k < off_b2_; ++k) w[k] = second(rng);
    for (std::size_t k = off_v_; k < off_c_; ++k) w[k] = second(rng);
    return w;
  }

  LossVector eval_losses(std::span<const double> w, const BatchView& batch) const override {
    check_call(w, batch);
    const std::size_t h = spec().hidden_units;
    const Dataset& data = batch.data();
    std::vector<double> hid(h);
    std::vector<double> hid_aug(h);

    double ce = 0.0;
    double consistency = 0.0;
    double noise = 0.0;
    for (std::size_t k = 0; k < batch.size(); ++k) {
      const std::size_t r = batch.index(k);
      hidden(w, data.inputs.row(r), hid);
      hidden(w, data.augmented.row(r), hid_aug);
      const auto logits = output(w, hid);
      const double top = std::max(logits[0], logits[1]);
      const double lse = top + std::log(std::exp(logits[0] - top) + std::exp(logits[1] - top));
      const auto label = static_cast<std::size_t>(data.targets(r, 0));
      ce += lse - logits[label];
      double gap = 0.0;
      for (std::size_t u = 0; u < h; ++u) gap += (hid[u] - hid_aug[u]) * (hid[u] - hid_aug[u]);
      consistency += gap / static_cast<double>(h);
      const double q = aux_head(w, hid);
      noise += (q - data.random_targets(r, 0)) * (q - data.random_targets(r, 0));
    }
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    LossVector out;
    out.names = spec().loss_names();
    out.values.push_back(ce * inv_b);
    for (AuxTerm term : spec().aux_terms) {
      out.values.push_back(term == AuxTerm::kConsistency ? consistency * inv_b : noise * inv_b);
    }
    require_finite_losses(out);
    return out;
  }

  std::vector<double> eval_param_gradient(std::span<const double> w, const BatchView& batch,
                                          std::span<const double> lambda) const override {
    check_call(w, batch);
    check_weights(lambda);
    const std::size_t d = spec().input_dim;
    const std::size_t h = spec().hidden_units;
    const Dataset& data = batch.data();

    double lam_consistency = 0.0;
    double lam_noise = 0.0;
    for (std::size_t i = 0; i < spec().aux_terms.size(); ++i) {
      (spec().aux_terms[i] == AuxTerm::kConsistency ? lam_consistency : lam_noise) +=
          lambda[i + 1];
    }

    const double inv_b = 1.0 / static_cast<double>(batch.size());
    std::vector<double> grad(parameter_count(), 0.0);
    std::vector<double> hid(h);
    std::vector<double> hid_aug(h);
    std::vector<double> d_hid(h);
    std::vector<double> d_hid_aug(h);

    for (std::size_t k = 0; k < batch.size(); ++k) {
      const std::size_t r = batch.index(k);
      const auto x = data.inputs.row(r);
      const auto xa = data.augmented.row(r);
      hidden(w, x, hid);
      hidden(w, xa, hid_aug);
      std::fill(d_hid.begin(), d_hid.end(), 0.0);
      std::fill(d_hid_aug.begin(), d_hid_aug.end(), 0.0);

      // cross-entropy: dL/dz = softmax(z) - onehot
      const auto logits = output(w, hid);
      const double top = std::max(logits[0], logits[1]);
      const double e0 = std::exp(logits[0] - top);
      const double e1 = std::exp(logits[1] - top);
      const auto label = static_cast<std::size_t>(data.targets(r, 0));
      std::array<double, kClasses> dz = {e0 / (e0 + e1), e1 / (e0 + e1)};
      dz[label] -= 1.0;
      for (std::size_t c = 0; c < kClasses; ++c) {
        dz[c] *= lambda[0] * inv_b;
        for (std::size_t u = 0; u < h; ++u) {
          grad[off_w2_ + c * h + u] += dz[c] * hid[u];
          d_hid[u] += dz[c] * w[off_w2_ + c * h + u];
        }
        grad[off_b2_ + c] += dz[c];
      }

      // noise-fit head
      const double dq = lam_noise * 2.0 * inv_b * (aux_head(w, hid) - data.random_targets(r, 0));
      for (std::size_t u = 0; u < h; ++u) {
        grad[off_v_ + u] += dq * hid[u];
        d_hid[u] += dq * w[off_v_ + u];
      }
      grad[off_c_] += dq;

      // feature consistency
      const double dc = lam_consistency * 2.0 * inv_b / static_cast<double>(h);
      for (std::size_t u = 0; u < h; ++u) {
        d_hid[u] += dc * (hid[u] - hid_aug[u]);
        d_hid_aug[u] -= dc * (hid[u] - hid_aug[u]);
      }

      // back through tanh for both passes
      for (std::size_t u = 0; u < h; ++u) {
        const double da = d_hid[u] * (1.0 - hid[u] * hid[u]);
        const double da_aug = d_hid_aug[u] * (1.0 - hid_aug[u] * hid_aug[u]);
        for (std::size_t j = 0; j < d; ++j) grad[u * d + j] += da * x[j] + da_aug * xa[j];
        grad[off_b1_ + u] += da + da_aug;
      }
    }
    require_finite_gradient(grad);
    return grad;
  }

 private:
  void hidden(std::span<const double> w, std::span<const double> x,
              std::vector<double>& out) const {
    const std::size_t d = spec().input_dim;
    for (std::size_t u = 0; u < out.size(); ++u) {
      out[u] = std::tanh(dot(w.subspan(u * d, d), x) + w[off_b1_ + u]);
    }
  }

  std::array<double, kClasses> output(std::span<const double> w,
                                      const std::vector<double>& hid) const {
    const std::size_t h = hid.size();
    std::array<double, kClasses> z{};
    for (std::size_t c = 0; c < kClasses; ++c) {
      z[c] = dot(w.subspan(off_w2_ + c * h, h), hid) + w[off_b2_ + c];
    }
    return z;
  }

  double aux_head(std::span<const double> w, const std::vector<double>& hid) const {
    return dot(w.subspan(off_v_, hid.size()), hid) + w[off_c_];
  }

  std::size_t off_b1_ = 0;
  std::size_t off_w2_ = 0;
  std::size_t off_b2_ = 0;
  std::size_t off_v_ = 0;
  std::size_t off_c_ = 0;
};

Matrix read_block(const std::vector<std::vector<double>>& rows, std::size_t first,
                  std::size_t count) {
  Matrix m(rows.size(), count);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < count; ++j) m(i, j) = rows[i][first + j];
  }
  return m;
}

}  // namespace

std::size_t ToyModelSpec::parameter_count() const {
  if (kind == ModelKind::kLinearRegression) return input_dim + 1;
  const std::size_t h = hidden_units;
  return h * input_dim + h + kClasses * h + kClasses + h + 1;
}

std::vector<std::string> ToyModelSpec::loss_names() const {
  std::vector<std::string> names;
  names.emplace_back(kind == ModelKind::kLinearRegression ? "mse" : "cross_entropy");
  for (AuxTerm term : aux_terms) names.emplace_back(to_string(term));
  return names;
}

void ToyModelSpec::validate() const {
  if (aux_terms.empty()) throw std::invalid_argument("a toy model needs at least one auxiliary loss");
  if (input_dim == 0) throw std::invalid_argument("input_dim must be >= 1");
  if (kind == ModelKind::kTinyMlp && (hidden_units == 0 || hidden_units > kMaxHidden)) {
    throw std::invalid_argument("hidden_units must be in [1, 64]");
  }
  if (!(label_noise >= 0.0)) throw std::invalid_argument("label_noise must be >= 0");
  if (kind == ModelKind::kTinyMlp && label_noise > 0.5) {
    throw std::invalid_argument("label flip probability must be <= 0.5");
  }
  if (!(jitter_scale >= 0.0)) throw std::invalid_argument("jitter_scale must be >= 0");
  if (!(random_target_scale >= 0.0)) {
    throw std::invalid_argument("random_target_scale must be >= 0");
  }
}

Model::Model(ToyModelSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

void Model::check_call(std::span<const double> w, const BatchView& batch) const {
  if (w.size() != parameter_count()) {
    throw std::invalid_argument("expected " + std::to_string(parameter_count()) +
                                " parameters, got " + std::to_string(w.size()));
  }
  if (batch.size() == 0) throw std::invalid_argument("empty batch");
  if (batch.data().inputs.cols != spec_.input_dim) {
    throw std::invalid_argument("dataset input width does not match the model");
  }
  for (double x : w) {
    if (!std::isfinite(x)) throw NumericalError("non-finite model parameter");
  }
}

void Model::check_weights(std::span<const double> lambda) const {
  if (lambda.size() != loss_count()) {
    throw std::invalid_argument("expected " + std::to_string(loss_count()) +
                                " loss weights, got " + std::to_string(lambda.size()));
  }
}

std::unique_ptr<Model> make_model(const ToyModelSpec& spec) {
  if (spec.kind == ModelKind::kTinyMlp) return std::make_unique<TinyMlpModel>(spec);
  return std::make_unique<LinearRegressionModel>(spec);
}

SyntheticTask make_synthetic_dataset(const ToyModelSpec& spec, std::uint64_t seed,
                                     std::size_t n_train, std::size_t n_val) {
  spec.validate();
  if (n_train == 0 || n_val == 0) {
    throw std::invalid_argument("n_train and n_val must be >= 1");
  }
  const std::size_t d = spec.input_dim;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  SyntheticTask task;
  // Random teacher behind the noise-fit channel, independent of the truth.
  std::vector<double> decoy(d);
  for (double& v : decoy) v = normal(rng) / std::sqrt(static_cast<double>(d));
  // Regression truth: weights scaled so the signal has unit variance.
  std::vector<double> dir1(d);
  std::vector<double> dir2(d);
  if (spec.kind == ModelKind::kLinearRegression) {
    task.true_parameters.resize(d + 1);
    for (std::size_t j = 0; j < d; ++j) {
      task.true_parameters[j] = normal(rng) / std::sqrt(static_cast<double>(d));
    }
    task.true_parameters[d] = normal(rng);
  } else {
    double n1 = 0.0;
    double n2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      dir1[j] = normal(rng);
      dir2[j] = normal(rng);
      n1 += dir1[j] * dir1[j];
      n2 += dir2[j] * dir2[j];
    }
    for (std::size_t j = 0; j < d; ++j) {
      dir1[j] /= std::sqrt(n1);
      dir2[j] /= std::sqrt(n2);
    }
  }

  auto fill = [&](Dataset& out, Split split, std::size_t n) {
    out.split = split;
    out.seed = seed;
    out.inputs = Matrix(n, d);
    out.augmented = Matrix(n, d);
    out.targets = Matrix(n, 1);
    out.random_targets = Matrix(n, 1);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t j = 0; j < d; ++j) {
        out.inputs(r, j) = normal(rng);
        out.augmented(r, j) = out.inputs(r, j) + spec.jitter_scale * normal(rng);
      }
      const auto x = out.inputs.row(r);
      if (spec.kind == ModelKind::kLinearRegression) {
        out.targets(r, 0) = dot(std::span<const double>(task.true_parameters).first(d), x) +
                            task.true_parameters[d] + spec.label_noise * normal(rng);
      } else {
        const double a = dot(dir1, x);
        const double b = dot(dir2, x);
        bool label = a + 0.5 * (b * b - 1.0) > 0.0;
        if (uniform(rng) < spec.label_noise) label = !label;
        out.targets(r, 0) = label ? 1.0 : 0.0;
      }
      // The linear model has no shared features to corrupt, so pure noise
      // would act as shrinkage; a decoy teacher pulls it away from the truth.
      const double signal = spec.kind == ModelKind::kLinearRegression ? dot(decoy, x) : 0.0;
      out.random_targets(r, 0) = spec.random_target_scale * (signal + normal(rng));
    }
  };
  fill(task.train, Split::kTrain, n_train);
  fill(task.validation, Split::kValidation, n_val);
  return task;
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  std::vector<std::string> header;
  for (std::size_t j = 0; j < data.inputs.cols; ++j) header.push_back("x_" + std::to_string(j));
  for (std::size_t j = 0; j < data.augmented.cols; ++j) header.push_back("xa_" + std::to_string(j));
  for (std::size_t j = 0; j < data.targets.cols; ++j) header.push_back("y_" + std::to_string(j));
  for (std::size_t j = 0; j < data.random_targets.cols; ++j) {
    header.push_back("r_" + std::to_string(j));
  }
  out << join(header, ",") << '\n';
  for (std::size_t r = 0; r < data.size(); ++r) {
    std::vector<double> row;
    for (const Matrix* m : {&data.inputs, &data.augmented, &data.targets, &data.random_targets}) {
      row.insert(row.end(), m->row(r).begin(), m->row(r).end());
    }
    out << join_numbers(row) << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Dataset read_dataset_csv(const std::filesystem::path& path, Split split, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": missing header");
  const auto header = split_csv(line);
  std::size_t nx = 0, nxa = 0, ny = 0, nr = 0;
  for (const auto& h : header) {
    if (h.starts_with("xa_")) ++nxa;
    else if (h.starts_with("x_")) ++nx;
    else if (h.starts_with("y_")) ++ny;
    else if (h.starts_with("r_")) ++nr;
    else throw std::runtime_error(path.string() + ": unexpected column '" + h + "'");
  }
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": wrong number of fields");
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f));
    rows.push_back(std::move(row));
  }
  Dataset data;
  data.split = split;
  data.seed = seed;
  data.inputs = read_block(rows, 0, nx);
  data.augmented = read_block(rows, nx, nxa);
  data.targets = read_block(rows, nx + nxa, ny);
  data.random_targets = read_block(rows, nx + nxa + ny, nr);
  return data;
}

const char* to_string(ModelKind kind) {
  return kind == ModelKind::kLinearRegression ? "multiloss_linear_regression"
                                              : "tiny_mlp_consistency";
}

const char* to_string(AuxTerm term) {
  return term == AuxTerm::kConsistency ? "consistency" : "noise_fit";
}

ModelKind parse_model_kind(const std::string& text) {
  if (text == "multiloss_linear_regression") return ModelKind::kLinearRegression;
  if (text == "tiny_mlp_consistency") return ModelKind::kTinyMlp;
  throw std::invalid_argument("unknown model kind '" + text + "'");
}

AuxTerm parse_aux_term(const std::string& text) {
  if (text == "consistency") return AuxTerm::kConsistency;
  if (text == "noise_fit") return AuxTerm::kNoiseFit;
  throw std::invalid_argument("unknown auxiliary term '" + text + "'");
}

}  // namespace yoto
