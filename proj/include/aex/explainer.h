#ifndef AEX_EXPLAINER_H_
#define AEX_EXPLAINER_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aex/attribution.h"
#include "aex/autoencoder.h"
#include "aex/dataset.h"
#include "json.hpp"

namespace aex {

// How explainers of one reconstruction error are chosen from its
// attribution row. All criteria operate on |phi|.
struct Selection {
  enum class Kind { kAboveMean, kAboveMedian, kTopK };
  Kind kind = Kind::kTopK;
  std::size_t k = 5;

  static Selection above_mean() { return {Kind::kAboveMean, 0}; }
  static Selection above_median() { return {Kind::kAboveMedian, 0}; }
  static Selection top_k(std::size_t k) { return {Kind::kTopK, k}; }

  std::string name() const;
  static Selection parse(const std::string& text);  // "mean", "median", "top<k>"
  bool operator==(const Selection&) const = default;
};

enum class AttributionMethod { kShap, kLime };
std::string to_string(AttributionMethod m);
AttributionMethod parse_method(const std::string& name);

struct ExplainConfig {
  double error_percent = 0.8;
  Selection selection = Selection::top_k(5);
  AttributionMethod method = AttributionMethod::kShap;
  std::size_t background_size = 200;
  std::uint64_t seed = 0;
  ShapConfig shap;
  LimeConfig lime;

  void validate() const;
};

struct FeatureContribution {
  std::size_t feature = 0;
  double shap = 0;
  double true_value = 0;
};

struct ContributionSplit {
  std::vector<FeatureContribution> contributing;
  std::vector<FeatureContribution> offsetting;
};

struct FeatureExplanation {
  std::size_t explained_feature = 0;
  double true_value = 0;
  double predicted_value = 0;
  std::vector<FeatureContribution> contributing;
  std::vector<FeatureContribution> offsetting;
  Attribution attribution;
};

struct Explanation {
  std::size_t instance_id = 0;
  double anomaly_score = 0;
  std::vector<FeatureExplanation> per_feature;  // in reconstruction error order
};

struct ExplanatoryFeatureSet {
  std::vector<std::size_t> features;
  // Explained feature that introduced each entry (itself for explained ones).
  std::vector<std::size_t> introduced_by;

  bool contains(std::size_t f) const;
};

// Shortest prefix of the error list whose absolute errors reach
// `percent` of the summed absolute errors. Empty when every error is zero.
std::vector<std::size_t> top_m_features(const ErrorList& errors, double percent);

// Scalar target x -> forward(m, x)[i].
ScalarTarget feature_target(const Autoencoder& m, std::size_t i);
// Scalar target x -> sum_i (x_i - forward(m, x)_i)^2.
ScalarTarget total_error_target(const Autoencoder& m);

// One attribution per explained feature, in the order of `top`.
std::vector<Attribution> shap_for_top_features(const Autoencoder& m, const Vector& x,
                                               const BackgroundSet& bg,
                                               std::span<const std::size_t> top,
                                               const ExplainConfig& cfg);

// Splits a row's attributions by the direction they push the reconstructed
// value. When x_i > x'_i negative phi contributes to the anomaly; when
// x_i < x'_i positive phi does. Zero phi lands in neither list, nor does the
// explained feature itself. Lists are ordered by |phi| descending.
ContributionSplit split_contrib_offset(const Attribution& a, const Vector& x, double x_i, double x_hat_i);

// Explainer indices for one attribution row, |phi| descending. The
// explained feature is never a candidate.
std::vector<std::size_t> select_explainers(const Attribution& row, const Selection& method);

ExplanatoryFeatureSet build_explanatory_feature_set(const Explanation& e, const Selection& method);

Explanation explain_instance(const Autoencoder& m, const Vector& x, const BackgroundSet& bg,
                             const ExplainConfig& cfg, std::size_t instance_id = 0);

// Kernel SHAP over the total reconstruction error of x.
Attribution explain_total_error(const Autoencoder& m, const Vector& x, const BackgroundSet& bg,
                                const ExplainConfig& cfg);

void to_json(nlohmann::json& j, const FeatureContribution& c);
void to_json(nlohmann::json& j, const FeatureExplanation& f);
void to_json(nlohmann::json& j, const Explanation& e);
void to_json(nlohmann::json& j, const ExplanatoryFeatureSet& s);

}  // namespace aex

#endif  // AEX_EXPLAINER_H_
