#ifndef AEX_DATASET_H_
#define AEX_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace aex {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Rectangular table of named numeric features with optional 0/1 anomaly
// labels. Immutable once constructed.
class Dataset {
 public:
  Dataset(std::vector<std::string> feature_names, Matrix rows,
          std::optional<std::vector<int>> labels = std::nullopt);

  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const Matrix& rows() const { return rows_; }
  const std::optional<std::vector<int>>& labels() const { return labels_; }

  std::size_t n_rows() const { return static_cast<std::size_t>(rows_.rows()); }
  std::size_t n_features() const { return static_cast<std::size_t>(rows_.cols()); }
  Vector row(std::size_t i) const { return rows_.row(static_cast<Eigen::Index>(i)).transpose(); }

  // Rows with the given label. Without labels every row counts as label 0.
  std::vector<std::size_t> rows_with_label(int label) const;

  // Copy restricted to `indices`, labels carried along.
  Dataset select_rows(std::span<const std::size_t> indices) const;

  // Per-feature arithmetic mean over all rows.
  Vector column_means() const;

  bool operator==(const Dataset& other) const;

 private:
  std::vector<std::string> feature_names_;
  Matrix rows_;
  std::optional<std::vector<int>> labels_;
};

// Per-feature min/max used for min-max scaling.
struct NormStats {
  Vector min;
  Vector max;

  Vector apply(const Vector& x) const;
  Vector invert(const Vector& x) const;
  Matrix apply(const Matrix& rows) const;
  Matrix invert(const Matrix& rows) const;
  Dataset apply(const Dataset& d) const;
};

void to_json(nlohmann::json& j, const NormStats& s);
void from_json(const nlohmann::json& j, NormStats& s);

struct BackgroundSet {
  Matrix rows;
  std::uint64_t source_seed = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows.rows()); }
  std::size_t n_features() const { return static_cast<std::size_t>(rows.cols()); }
};

// X1..X4 ~ U(0,1), X5 = X1 + X2, X6 = X3 + X4. `n_anomalies` random rows get
// X5 or X6 (coin flip) overwritten with a fresh U(0,1) draw and label 1.
Dataset gen_linear_artificial(std::size_t n, std::size_t n_anomalies, std::uint64_t seed);

// Column index (4 for X5, 5 for X6) whose identity the row violates, or
// nullopt when both X5 = X1 + X2 and X6 = X3 + X4 hold exactly.
std::optional<std::size_t> linear_violation(const Vector& row);

// X1..X4 ~ Bernoulli(0.5), X5 = X1 AND X2, X6 = X3 OR X4, plus `n_extra`
// independent Bernoulli(0.5) columns. `n_noisy` rows get X5 or X6 flipped.
Dataset gen_binary_logic(std::size_t n, std::size_t n_noisy, std::size_t n_extra,
                         std::uint64_t seed);

// Same as linear_violation for the AND/OR identities.
std::optional<std::size_t> logic_violation(const Vector& row);

// Replaces column `feature` with i.i.d. U(min, max) of the original column.
Dataset inject_noise_feature(const Dataset& d, std::size_t feature, std::uint64_t seed);

// Comma-separated, header row first. A last column named "class" becomes the
// label vector.
Dataset load_csv(const std::filesystem::path& path);
Dataset parse_csv(std::string_view text);
void save_csv(const Dataset& d, const std::filesystem::path& path);
std::string format_csv(const Dataset& d);

struct Normalized {
  Dataset data;
  NormStats stats;
};

// Non-constant features map to [0, 1]; constant features map to 0.
Normalized minmax_normalize(const Dataset& d);
NormStats compute_norm_stats(const Matrix& rows);

// Q3 + 1.5 * (Q3 - Q1) with linearly interpolated quartiles.
double iqr_threshold(std::span<const double> scores);
// Linear-interpolation quantile of an unsorted sample, q in [0, 1].
double quantile(std::span<const double> values, double q);

// k rows drawn uniformly without replacement.
BackgroundSet sample_background(const Dataset& d, std::size_t k, std::uint64_t seed);
BackgroundSet sample_background(const Matrix& rows, std::size_t k, std::uint64_t seed);

// Independent seed for sub-stream `stream` of a run seeded with `base`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

// k distinct indices from [0, n), uniformly, in draw order.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed);

// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

}  // namespace aex

#endif  // AEX_DATASET_H_
