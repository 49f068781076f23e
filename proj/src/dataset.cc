#include "aex/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "aex/errors.h"

namespace aex {

namespace {

constexpr const char* kLabelColumn = "class";

std::string default_name(std::size_t i) { return "X" + std::to_string(i + 1); }

std::vector<std::string> default_names(std::size_t n) {
  std::vector<std::string> names;
  names.reserve(n);
  for (std::size_t i = 0; i < n; ++i) names.push_back(default_name(i));
  return names;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

}  // namespace

Dataset::Dataset(std::vector<std::string> feature_names, Matrix rows,
                 std::optional<std::vector<int>> labels)
    : feature_names_(std::move(feature_names)), rows_(std::move(rows)), labels_(std::move(labels)) {
  Require(feature_names_.size() == static_cast<std::size_t>(rows_.cols()),
          "dataset: " + std::to_string(feature_names_.size()) + " names for " +
              std::to_string(rows_.cols()) + " columns");
  std::unordered_set<std::string> seen;
  for (const auto& name : feature_names_) {
    Require(!name.empty(), "dataset: empty feature name");
    Require(seen.insert(name).second, "dataset: duplicate feature name '" + name + "'");
  }
  if (labels_) {
    Require(labels_->size() == n_rows(), "dataset: label count does not match row count");
    for (int label : *labels_) Require(label == 0 || label == 1, "dataset: labels must be 0 or 1");
  }
}

std::vector<std::size_t> Dataset::rows_with_label(int label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n_rows(); ++i) {
    const int l = labels_ ? (*labels_)[i] : 0;
    if (l == label) out.push_back(i);
  }
  return out;
}

Dataset Dataset::select_rows(std::span<const std::size_t> indices) const {
  Matrix sub(static_cast<Eigen::Index>(indices.size()), rows_.cols());
  std::optional<std::vector<int>> sub_labels;
  if (labels_) sub_labels.emplace();
  for (std::size_t r = 0; r < indices.size(); ++r) {
    Require(indices[r] < n_rows(), "select_rows: row index out of range");
    sub.row(static_cast<Eigen::Index>(r)) = rows_.row(static_cast<Eigen::Index>(indices[r]));
    if (labels_) sub_labels->push_back((*labels_)[indices[r]]);
  }
  return Dataset(feature_names_, std::move(sub), std::move(sub_labels));
}

Vector Dataset::column_means() const {
  if (rows_.rows() == 0) return Vector::Zero(rows_.cols());
  return rows_.colwise().mean().transpose();
}

bool Dataset::operator==(const Dataset& other) const {
  return feature_names_ == other.feature_names_ && rows_.rows() == other.rows_.rows() &&
         rows_.cols() == other.rows_.cols() && rows_ == other.rows_ && labels_ == other.labels_;
}

Vector NormStats::apply(const Vector& x) const {
  Require(x.size() == min.size(), "normalize: width mismatch");
  Vector out(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double range = max[j] - min[j];
    out[j] = range > 0 ? (x[j] - min[j]) / range : 0.0;
  }
  return out;
}

Vector NormStats::invert(const Vector& x) const {
  Require(x.size() == min.size(), "denormalize: width mismatch");
  Vector out(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) out[j] = min[j] + x[j] * (max[j] - min[j]);
  return out;
}

Matrix NormStats::apply(const Matrix& rows) const {
  Matrix out(rows.rows(), rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) out.row(i) = apply(Vector(rows.row(i).transpose())).transpose();
  return out;
}

Matrix NormStats::invert(const Matrix& rows) const {
  Matrix out(rows.rows(), rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) out.row(i) = invert(Vector(rows.row(i).transpose())).transpose();
  return out;
}

Dataset NormStats::apply(const Dataset& d) const {
  return Dataset(d.feature_names(), apply(d.rows()), d.labels());
}

void to_json(nlohmann::json& j, const NormStats& s) {
  j = nlohmann::json{{"min", std::vector<double>(s.min.data(), s.min.data() + s.min.size())},
                     {"max", std::vector<double>(s.max.data(), s.max.data() + s.max.size())}};
}

void from_json(const nlohmann::json& j, NormStats& s) {
  const auto lo = j.at("min").get<std::vector<double>>();
  const auto hi = j.at("max").get<std::vector<double>>();
  Require(lo.size() == hi.size(), "norm stats: min/max length mismatch");
  s.min = Eigen::Map<const Vector>(lo.data(), static_cast<Eigen::Index>(lo.size()));
  s.max = Eigen::Map<const Vector>(hi.data(), static_cast<Eigen::Index>(hi.size()));
  for (Eigen::Index i = 0; i < s.min.size(); ++i) {
    Require(s.min[i] <= s.max[i], "norm stats: min exceeds max");
  }
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer over the combined words.
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  Require(k <= n, "sample: cannot draw " + std::to_string(k) + " of " + std::to_string(n));
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  return pool;
}

Dataset gen_linear_artificial(std::size_t n, std::size_t n_anomalies, std::uint64_t seed) {
  Require(n_anomalies < n, "gen_linear_artificial: n_anomalies must be below n");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix rows(static_cast<Eigen::Index>(n), 6);
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (int j = 0; j < 4; ++j) rows(i, j) = unit(rng);
    rows(i, 4) = rows(i, 0) + rows(i, 1);
    rows(i, 5) = rows(i, 2) + rows(i, 3);
  }
  std::vector<int> labels(n, 0);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t r : sample_indices(n, n_anomalies, rng())) {
    const auto i = static_cast<Eigen::Index>(r);
    const int col = coin(rng) ? 4 : 5;
    const double original = rows(i, col);
    // A draw equal to the identity value would not be an anomaly.
    do {
      rows(i, col) = unit(rng);
    } while (rows(i, col) == original);
    labels[r] = 1;
  }
  return Dataset(default_names(6), std::move(rows), std::move(labels));
}

std::optional<std::size_t> linear_violation(const Vector& row) {
  Require(row.size() >= 6, "linear_violation: need at least 6 features");
  if (row[4] != row[0] + row[1]) return 4;
  if (row[5] != row[2] + row[3]) return 5;
  return std::nullopt;
}

Dataset gen_binary_logic(std::size_t n, std::size_t n_noisy, std::size_t n_extra,
                         std::uint64_t seed) {
  Require(n_noisy < n, "gen_binary_logic: n_noisy must be below n");
  const std::size_t width = 6 + n_extra;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution bit(0.5);
  Matrix rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(width));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) rows(i, j) = bit(rng) ? 1.0 : 0.0;
    rows(i, 4) = (rows(i, 0) == 1.0 && rows(i, 1) == 1.0) ? 1.0 : 0.0;
    rows(i, 5) = (rows(i, 2) == 1.0 || rows(i, 3) == 1.0) ? 1.0 : 0.0;
  }
  std::vector<int> labels(n, 0);
  for (std::size_t r : sample_indices(n, n_noisy, rng())) {
    const auto i = static_cast<Eigen::Index>(r);
    const int col = bit(rng) ? 4 : 5;
    rows(i, col) = 1.0 - rows(i, col);
    labels[r] = 1;
  }
  return Dataset(default_names(width), std::move(rows), std::move(labels));
}

std::optional<std::size_t> logic_violation(const Vector& row) {
  Require(row.size() >= 6, "logic_violation: need at least 6 features");
  const bool and_ok = row[4] == ((row[0] == 1.0 && row[1] == 1.0) ? 1.0 : 0.0);
  if (!and_ok) return 4;
  const bool or_ok = row[5] == ((row[2] == 1.0 || row[3] == 1.0) ? 1.0 : 0.0);
  if (!or_ok) return 5;
  return std::nullopt;
}

Dataset inject_noise_feature(const Dataset& d, std::size_t feature, std::uint64_t seed) {
  Require(feature < d.n_features(), "inject_noise_feature: feature index " +
                                        std::to_string(feature) + " out of range");
  Matrix rows = d.rows();
  const auto col = static_cast<Eigen::Index>(feature);
  if (rows.rows() == 0) return d;
  const double lo = rows.col(col).minCoeff();
  const double hi = rows.col(col).maxCoeff();
  if (lo == hi) return d;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> draw(lo, hi);
  for (Eigen::Index i = 0; i < rows.rows(); ++i) rows(i, col) = draw(rng);
  return Dataset(d.feature_names(), std::move(rows), d.labels());
}

std::string format_double(double v) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

Dataset parse_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(start, end - start));
    if (!line.empty()) lines.push_back(line);
    start = end + 1;
  }
  if (lines.empty()) throw IoError("csv: missing header row");
  std::string_view header = lines.front();
  if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);

  std::vector<std::string> names;
  for (auto cell : split_commas(header)) names.emplace_back(cell);
  const bool has_labels = !names.empty() && names.back() == kLabelColumn;
  const std::size_t width = names.size();
  const std::size_t n_features = has_labels ? width - 1 : width;
  if (n_features == 0) throw IoError("csv: header has no feature columns");

  Matrix rows(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(n_features));
  std::vector<int> labels;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split_commas(lines[r]);
    if (cells.size() != width) {
      throw IoError("csv: row " + std::to_string(r) + " has " + std::to_string(cells.size()) +
                    " cells, expected " + std::to_string(width));
    }
    for (std::size_t c = 0; c < width; ++c) {
      double value = 0;
      const auto cell = cells[c];
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
        throw IoError("csv: row " + std::to_string(r) + ", column " + std::to_string(c + 1) +
                      " ('" + names[c] + "'): cannot parse '" + std::string(cell) + "'");
      }
      if (c < n_features) {
        rows(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c)) = value;
      } else {
        if (value != 0.0 && value != 1.0) {
          throw IoError("csv: row " + std::to_string(r) + ": class must be 0 or 1");
        }
        labels.push_back(static_cast<int>(value));
      }
    }
  }
  names.resize(n_features);
  try {
    return Dataset(std::move(names), std::move(rows),
                   has_labels ? std::optional<std::vector<int>>(std::move(labels)) : std::nullopt);
  } catch (const ValidationError& e) {
    throw IoError(std::string("csv: ") + e.what());
  }
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

std::string format_csv(const Dataset& d) {
  std::string out;
  for (std::size_t c = 0; c < d.n_features(); ++c) {
    if (c > 0) out += ',';
    out += d.feature_names()[c];
  }
  if (d.labels()) out += std::string(",") + kLabelColumn;
  out += '\n';
  for (std::size_t r = 0; r < d.n_rows(); ++r) {
    for (std::size_t c = 0; c < d.n_features(); ++c) {
      if (c > 0) out += ',';
      out += format_double(d.rows()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
    }
    if (d.labels()) out += ',' + std::to_string((*d.labels())[r]);
    out += '\n';
  }
  return out;
}

void save_csv(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << format_csv(d);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

NormStats compute_norm_stats(const Matrix& rows) {
  NormStats s;
  if (rows.rows() == 0) {
    s.min = Vector::Zero(rows.cols());
    s.max = Vector::Zero(rows.cols());
    return s;
  }
  s.min = rows.colwise().minCoeff().transpose();
  s.max = rows.colwise().maxCoeff().transpose();
  return s;
}

Normalized minmax_normalize(const Dataset& d) {
  NormStats stats = compute_norm_stats(d.rows());
  return Normalized{stats.apply(d), stats};
}

double quantile(std::span<const double> values, double q) {
  Require(!values.empty(), "quantile: empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double iqr_threshold(std::span<const double> scores) {
  Require(!scores.empty(), "iqr_threshold: empty score list");
  const double q1 = quantile(scores, 0.25);
  const double q3 = quantile(scores, 0.75);
  return q3 + (q3 - q1) * 1.5;
}

BackgroundSet sample_background(const Matrix& rows, std::size_t k, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(rows.rows());
  Require(k >= 1, "background: size must be at least 1");
  Require(k <= n, "background: requested " + std::to_string(k) + " rows from a dataset of " +
                      std::to_string(n));
  BackgroundSet bg;
  bg.source_seed = seed;
  bg.rows.resize(static_cast<Eigen::Index>(k), rows.cols());
  const auto picked = sample_indices(n, k, seed);
  for (std::size_t i = 0; i < k; ++i) {
    bg.rows.row(static_cast<Eigen::Index>(i)) = rows.row(static_cast<Eigen::Index>(picked[i]));
  }
  return bg;
}

BackgroundSet sample_background(const Dataset& d, std::size_t k, std::uint64_t seed) {
  return sample_background(d.rows(), k, seed);
}

}  // namespace aex
