#include "aex/autoencoder.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "aex/errors.h"

namespace aex {

namespace {

void apply_activation(Activation a, Matrix& z) {
  switch (a) {
    case Activation::kIdentity:
      break;
    case Activation::kRelu:
      z = z.cwiseMax(0.0);
      break;
    case Activation::kSigmoid:
      z = (1.0 + (-z.array()).exp()).inverse().matrix();
      break;
  }
}

// Derivative of the activation expressed through its output.
Matrix activation_slope(Activation a, const Matrix& out) {
  switch (a) {
    case Activation::kIdentity:
      return Matrix::Ones(out.rows(), out.cols());
    case Activation::kRelu:
      return (out.array() > 0.0).cast<double>().matrix();
    case Activation::kSigmoid:
      return (out.array() * (1.0 - out.array())).matrix();
  }
  return Matrix();
}

// Activations of every layer, input included.
std::vector<Matrix> forward_trace(const std::vector<DenseLayer>& layers, const Matrix& batch) {
  std::vector<Matrix> trace;
  trace.reserve(layers.size() + 1);
  trace.push_back(batch);
  for (const auto& layer : layers) {
    Matrix z = trace.back() * layer.weights.transpose();
    z.rowwise() += layer.bias.transpose();
    apply_activation(layer.activation, z);
    trace.push_back(std::move(z));
  }
  return trace;
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kRelu:
      return "relu";
    case Activation::kSigmoid:
      return "sigmoid";
  }
  return "identity";
}

Activation parse_activation(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "relu") return Activation::kRelu;
  if (name == "sigmoid") return Activation::kSigmoid;
  throw ValidationError("unknown activation '" + name + "'");
}

void TrainConfig::validate() const {
  for (std::size_t h : hidden_sizes) Require(h >= 1, "train config: hidden sizes must be >= 1");
  Require(batch_size >= 1, "train config: batch_size must be >= 1");
  Require(learning_rate > 0, "train config: learning_rate must be > 0");
  Require(momentum >= 0 && momentum < 1, "train config: momentum must be in [0, 1)");
}

Autoencoder::Autoencoder(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  Require(!layers_.empty(), "autoencoder: at least one layer required");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    Require(static_cast<std::size_t>(layer.bias.size()) == layer.out_width(),
            "autoencoder: layer " + std::to_string(l) + " bias width mismatch");
    if (l > 0) {
      Require(layers_[l - 1].out_width() == layer.in_width(),
              "autoencoder: layer " + std::to_string(l) + " input width does not chain");
    }
  }
  Require(layers_.front().in_width() == layers_.back().out_width(),
          "autoencoder: output width must equal input width");
}

Vector Autoencoder::forward(const Vector& x) const {
  Require(static_cast<std::size_t>(x.size()) == n_features(),
          "forward: expected " + std::to_string(n_features()) + " features, got " +
              std::to_string(x.size()));
  Vector a = x;
  for (const auto& layer : layers_) {
    Vector z = layer.weights * a + layer.bias;
    switch (layer.activation) {
      case Activation::kIdentity:
        break;
      case Activation::kRelu:
        z = z.cwiseMax(0.0);
        break;
      case Activation::kSigmoid:
        z = (1.0 + (-z.array()).exp()).inverse().matrix();
        break;
    }
    a = std::move(z);
  }
  return a;
}

Matrix Autoencoder::forward_batch(const Matrix& rows) const {
  Require(static_cast<std::size_t>(rows.cols()) == n_features(),
          "forward: expected " + std::to_string(n_features()) + " features, got " +
              std::to_string(rows.cols()));
  Matrix a = rows;
  for (const auto& layer : layers_) {
    Matrix z = a * layer.weights.transpose();
    z.rowwise() += layer.bias.transpose();
    apply_activation(layer.activation, z);
    a = std::move(z);
  }
  return a;
}

double Autoencoder::predict_feature(const Vector& x, std::size_t i) const {
  Require(i < n_features(), "predict_feature: index " + std::to_string(i) + " out of range");
  return forward(x)[static_cast<Eigen::Index>(i)];
}

Autoencoder build_autoencoder(std::size_t n_features, const TrainConfig& cfg) {
  cfg.validate();
  Require(n_features >= 1, "build: n_features must be >= 1");
  std::vector<std::size_t> widths{n_features};
  widths.insert(widths.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
  widths.push_back(n_features);

  std::mt19937_64 rng(cfg.seed);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(widths[l]);
    const auto out = static_cast<Eigen::Index>(widths[l + 1]);
    const bool last = l + 2 == widths.size();
    DenseLayer layer;
    layer.activation = last ? cfg.output_activation : cfg.hidden_activation;
    const double fan = layer.activation == Activation::kRelu
                           ? std::sqrt(6.0 / static_cast<double>(in))
                           : std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> init(-fan, fan);
    layer.weights.resize(out, in);
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) layer.weights(r, c) = init(rng);
    }
    layer.bias = Vector::Zero(out);
    layers.push_back(std::move(layer));
  }
  return Autoencoder(std::move(layers));
}

Gradients compute_gradients(const Autoencoder& model, const Matrix& batch) {
  const auto& layers = model.layers();
  const auto trace = forward_trace(layers, batch);
  const Matrix diff = trace.back() - batch;
  const double scale = 1.0 / static_cast<double>(batch.rows() * batch.cols());

  Gradients g;
  g.loss = diff.squaredNorm() * scale;
  g.layers.resize(layers.size());
  Matrix delta = (2.0 * scale) * diff;  // dL/d(output)
  for (std::size_t l = layers.size(); l-- > 0;) {
    delta = delta.cwiseProduct(activation_slope(layers[l].activation, trace[l + 1]));
    g.layers[l].weights = delta.transpose() * trace[l];
    g.layers[l].bias = delta.colwise().sum().transpose();
    if (l > 0) delta = delta * layers[l].weights;
  }
  return g;
}

TrainReport train(Autoencoder& model, const Matrix& rows, const TrainConfig& cfg) {
  cfg.validate();
  Require(static_cast<std::size_t>(rows.cols()) == model.n_features(),
          "train: data width does not match model");
  TrainReport report;
  const auto n = static_cast<std::size_t>(rows.rows());
  if (n == 0 || cfg.epochs == 0) return report;

  auto& layers = model.mutable_layers();
  std::vector<LayerGradient> velocity(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    velocity[l].weights = Matrix::Zero(layers[l].weights.rows(), layers[l].weights.cols());
    velocity[l].bias = Vector::Zero(layers[l].bias.size());
  }

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Matrix batch;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      batch.resize(static_cast<Eigen::Index>(stop - start), rows.cols());
      for (std::size_t i = start; i < stop; ++i) {
        batch.row(static_cast<Eigen::Index>(i - start)) = rows.row(static_cast<Eigen::Index>(order[i]));
      }
      const Gradients g = compute_gradients(model, batch);
      if (!std::isfinite(g.loss)) {
        throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch + 1) +
                             "; lower the learning rate");
      }
      loss_sum += g.loss * static_cast<double>(stop - start);
      for (std::size_t l = 0; l < layers.size(); ++l) {
        velocity[l].weights = cfg.momentum * velocity[l].weights - cfg.learning_rate * g.layers[l].weights;
        velocity[l].bias = cfg.momentum * velocity[l].bias - cfg.learning_rate * g.layers[l].bias;
        layers[l].weights += velocity[l].weights;
        layers[l].bias += velocity[l].bias;
      }
    }
    report.epoch_loss.push_back(loss_sum / static_cast<double>(n));
  }
  return report;
}

ErrorList per_feature_errors(const Vector& x, const Vector& x_hat) {
  Require(x.size() == x_hat.size(), "per_feature_errors: width mismatch");
  ErrorList out;
  out.entries.reserve(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double e = x[i] - x_hat[i];
    out.entries.push_back({static_cast<std::size_t>(i), e, std::abs(e)});
    out.total += e * e;
  }
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const ErrorEntry& a, const ErrorEntry& b) { return a.abs_error > b.abs_error; });
  return out;
}

double anomaly_score(const Autoencoder& m, const Vector& x) {
  return per_feature_errors(x, m.forward(x)).total;
}

Vector anomaly_scores(const Autoencoder& m, const Matrix& rows) {
  const Matrix out = m.forward_batch(rows);
  Vector scores(rows.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    double total = 0;
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      const double e = rows(i, j) - out(i, j);
      total += e * e;
    }
    scores[i] = total;
  }
  return scores;
}

namespace {

struct LinearRelation {
  std::size_t target;
  std::size_t plus;
  std::size_t other;
  double other_sign;
};

std::vector<LinearRelation> perfect_relations(int model_id) {
  switch (model_id) {
    case 1:
      return {{4, 0, 1, 1.0}, {5, 2, 3, 1.0}};
    case 2:
      return {{1, 4, 0, -1.0}, {3, 5, 2, -1.0}};
    case 3:
      return {{0, 4, 1, -1.0}, {2, 5, 3, -1.0}};
    default:
      throw ValidationError("perfect_linear_ae: model id must be 1, 2 or 3, got " +
                            std::to_string(model_id));
  }
}

}  // namespace

Autoencoder perfect_linear_ae(int model_id) {
  const auto relations = perfect_relations(model_id);
  std::vector<std::size_t> independent;
  for (std::size_t f = 0; f < 6; ++f) {
    const bool dependent = std::any_of(relations.begin(), relations.end(),
                                       [f](const LinearRelation& r) { return r.target == f; });
    if (!dependent) independent.push_back(f);
  }
  const auto inner = static_cast<Eigen::Index>(independent.size());
  auto neuron_of = [&](std::size_t feature) {
    return static_cast<Eigen::Index>(
        std::find(independent.begin(), independent.end(), feature) - independent.begin());
  };

  DenseLayer encode;
  encode.weights = Matrix::Zero(inner, 6);
  encode.bias = Vector::Zero(inner);
  for (Eigen::Index k = 0; k < inner; ++k) {
    encode.weights(k, static_cast<Eigen::Index>(independent[static_cast<std::size_t>(k)])) = 1.0;
  }

  DenseLayer decode;
  decode.weights = Matrix::Zero(6, inner);
  decode.bias = Vector::Zero(6);
  for (std::size_t f : independent) decode.weights(static_cast<Eigen::Index>(f), neuron_of(f)) = 1.0;
  for (const auto& r : relations) {
    decode.weights(static_cast<Eigen::Index>(r.target), neuron_of(r.plus)) = 1.0;
    decode.weights(static_cast<Eigen::Index>(r.target), neuron_of(r.other)) = r.other_sign;
  }
  return Autoencoder({std::move(encode), std::move(decode)});
}

std::size_t perfect_dependent_feature(int model_id, std::size_t anomaly) {
  Require(anomaly == 4 || anomaly == 5, "perfect_dependent_feature: anomaly must be X5 or X6");
  for (const auto& r : perfect_relations(model_id)) {
    const bool uses = r.target == anomaly || r.plus == anomaly || r.other == anomaly;
    if (uses) return r.target;
  }
  throw ValidationError("perfect_dependent_feature: no relation covers the anomaly");
}

void to_json(nlohmann::json& j, const Autoencoder& m) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : m.layers()) {
    std::vector<double> w(layer.weights.data(), layer.weights.data() + layer.weights.size());
    std::vector<double> b(layer.bias.data(), layer.bias.data() + layer.bias.size());
    layers.push_back({{"in", layer.in_width()},
                      {"out", layer.out_width()},
                      {"activation", to_string(layer.activation)},
                      {"weights", std::move(w)},
                      {"bias", std::move(b)}});
  }
  j = nlohmann::json{{"schema", "aex.model"},
                     {"version", kModelSchemaVersion},
                     {"n_features", m.n_features()},
                     {"layers", std::move(layers)}};
}

Autoencoder autoencoder_from_json(const nlohmann::json& j) {
  try {
    Require(j.at("schema").get<std::string>() == "aex.model", "model: wrong schema tag");
    Require(j.at("version").get<int>() == kModelSchemaVersion, "model: unsupported version");
    std::vector<DenseLayer> layers;
    for (const auto& jl : j.at("layers")) {
      const auto in = jl.at("in").get<Eigen::Index>();
      const auto out = jl.at("out").get<Eigen::Index>();
      const auto w = jl.at("weights").get<std::vector<double>>();
      const auto b = jl.at("bias").get<std::vector<double>>();
      Require(static_cast<Eigen::Index>(w.size()) == in * out, "model: weight count mismatch");
      Require(static_cast<Eigen::Index>(b.size()) == out, "model: bias count mismatch");
      DenseLayer layer;
      layer.weights = Eigen::Map<const Matrix>(w.data(), out, in);
      layer.bias = Eigen::Map<const Vector>(b.data(), out);
      layer.activation = parse_activation(jl.at("activation").get<std::string>());
      layers.push_back(std::move(layer));
    }
    Autoencoder m(std::move(layers));
    Require(m.n_features() == j.at("n_features").get<std::size_t>(), "model: n_features mismatch");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model: malformed document: ") + e.what());
  }
}

void save_model(const Autoencoder& m, const std::filesystem::path& path,
                const std::optional<std::string>& norm_sidecar) {
  nlohmann::json j = m;
  j["norm_stats"] = norm_sidecar ? nlohmann::json(*norm_sidecar) : nlohmann::json(nullptr);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

namespace {

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

Autoencoder load_model(const std::filesystem::path& path) {
  return autoencoder_from_json(read_json(path));
}

std::optional<std::string> model_norm_sidecar(const std::filesystem::path& path) {
  const auto j = read_json(path);
  if (!j.contains("norm_stats") || j["norm_stats"].is_null()) return std::nullopt;
  return j["norm_stats"].get<std::string>();
}

}  // namespace aex
