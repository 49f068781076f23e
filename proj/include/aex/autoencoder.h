#ifndef AEX_AUTOENCODER_H_
#define AEX_AUTOENCODER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aex/dataset.h"
#include "json.hpp"

namespace aex {

enum class Activation { kIdentity, kRelu, kSigmoid };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

// One fully connected layer: out = act(weights * in + bias). `weights` is
// (out x in).
struct DenseLayer {
  Matrix weights;
  Vector bias;
  Activation activation = Activation::kIdentity;

  std::size_t in_width() const { return static_cast<std::size_t>(weights.cols()); }
  std::size_t out_width() const { return static_cast<std::size_t>(weights.rows()); }
};

struct TrainConfig {
  std::vector<std::size_t> hidden_sizes{16, 8, 16};
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 0.01;
  // Heavy-ball momentum. 0 gives plain mini-batch gradient descent.
  double momentum = 0.9;
  std::uint64_t seed = 0;
  Activation hidden_activation = Activation::kRelu;
  Activation output_activation = Activation::kIdentity;

  void validate() const;
};

struct TrainReport {
  std::vector<double> epoch_loss;  // mean squared error per epoch
};

// Dense feedforward autoencoder. Read-only methods are safe to call
// concurrently; training needs exclusive access.
class Autoencoder {
 public:
  explicit Autoencoder(std::vector<DenseLayer> layers);

  std::size_t n_features() const { return layers_.front().in_width(); }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  Vector forward(const Vector& x) const;
  // Row-wise forward pass over a batch.
  Matrix forward_batch(const Matrix& rows) const;
  double predict_feature(const Vector& x, std::size_t i) const;

 private:
  std::vector<DenseLayer> layers_;
};

// Symmetric network n -> hidden... -> n with seeded Xavier-style init.
Autoencoder build_autoencoder(std::size_t n_features, const TrainConfig& cfg);

// Mini-batch gradient descent on mean squared reconstruction error.
// Throws NumericalError if the loss becomes non-finite.
TrainReport train(Autoencoder& model, const Matrix& rows, const TrainConfig& cfg);

// Gradients of the batch mean squared error with respect to each layer.
struct LayerGradient {
  Matrix weights;
  Vector bias;
};
struct Gradients {
  double loss = 0;
  std::vector<LayerGradient> layers;
};
Gradients compute_gradients(const Autoencoder& model, const Matrix& batch);

struct ErrorEntry {
  std::size_t feature = 0;
  double signed_error = 0;  // x_i - x'_i
  double abs_error = 0;
};

// Per-feature reconstruction errors sorted by |error| descending, ties by
// ascending feature index. `total` is the sum of squared errors.
struct ErrorList {
  std::vector<ErrorEntry> entries;
  double total = 0;
};

ErrorList per_feature_errors(const Vector& x, const Vector& x_hat);
double anomaly_score(const Autoencoder& m, const Vector& x);
// Sum of squared reconstruction errors for every row.
Vector anomaly_scores(const Autoencoder& m, const Matrix& rows);

// Hand-weighted autoencoders over the six-feature linear dataset.
//   1: X5 = X1 + X2, X6 = X3 + X4
//   2: X2 = X5 - X1, X4 = X6 - X3
//   3: X1 = X5 - X2, X3 = X6 - X4
Autoencoder perfect_linear_ae(int model_id);

// Output feature a perfect model reconstructs from others when `anomaly`
// (X5 or X6, zero-based 4 or 5) is corrupted.
std::size_t perfect_dependent_feature(int model_id, std::size_t anomaly);

inline constexpr int kModelSchemaVersion = 1;

void to_json(nlohmann::json& j, const Autoencoder& m);
Autoencoder autoencoder_from_json(const nlohmann::json& j);

// The sidecar path is recorded in the model document when given.
void save_model(const Autoencoder& m, const std::filesystem::path& path,
                const std::optional<std::string>& norm_sidecar = std::nullopt);
Autoencoder load_model(const std::filesystem::path& path);
std::optional<std::string> model_norm_sidecar(const std::filesystem::path& path);

}  // namespace aex

#endif  // AEX_AUTOENCODER_H_
