#include "aex/explainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aex/errors.h"

namespace aex {

namespace {

// Indices ordered by magnitude descending, ties by ascending index.
void sort_by_magnitude(std::vector<std::size_t>& idx, const Vector& phi) {
  std::stable_sort(idx.begin(), idx.end(), [&phi](std::size_t a, std::size_t b) {
    return std::abs(phi[static_cast<Eigen::Index>(a)]) > std::abs(phi[static_cast<Eigen::Index>(b)]);
  });
}

bool by_magnitude(const FeatureContribution& a, const FeatureContribution& b) {
  return std::abs(a.shap) > std::abs(b.shap);
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string Selection::name() const {
  switch (kind) {
    case Kind::kAboveMean:
      return "mean";
    case Kind::kAboveMedian:
      return "median";
    case Kind::kTopK:
      return "top" + std::to_string(k);
  }
  return "";
}

Selection Selection::parse(const std::string& text) {
  if (text == "mean") return above_mean();
  if (text == "median") return above_median();
  if (text.rfind("top", 0) == 0 && text.size() > 3) {
    const std::string digits = text.substr(3);
    if (std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      const std::size_t k = std::stoul(digits);
      Require(k >= 1, "selection: top-k needs k >= 1");
      return top_k(k);
    }
  }
  throw ValidationError("selection must be 'mean', 'median' or 'top<k>', got '" + text + "'");
}

std::string to_string(AttributionMethod m) { return m == AttributionMethod::kShap ? "shap" : "lime"; }

AttributionMethod parse_method(const std::string& name) {
  if (name == "shap") return AttributionMethod::kShap;
  if (name == "lime") return AttributionMethod::kLime;
  throw ValidationError("method must be 'shap' or 'lime', got '" + name + "'");
}

void ExplainConfig::validate() const {
  Require(error_percent > 0 && error_percent <= 1, "error_percent must lie in (0, 1]");
  Require(selection.kind != Selection::Kind::kTopK || selection.k >= 1, "top-k selection needs k >= 1");
  Require(background_size >= 1, "background_size must be >= 1");
}

bool ExplanatoryFeatureSet::contains(std::size_t f) const {
  return std::find(features.begin(), features.end(), f) != features.end();
}

std::vector<std::size_t> top_m_features(const ErrorList& errors, double percent) {
  Require(percent > 0 && percent <= 1, "top_m_features: percent must lie in (0, 1]");
  // Summed in list order so the running sum ends exactly at the total.
  double total = 0;
  for (const auto& e : errors.entries) total += e.abs_error;
  std::vector<std::size_t> out;
  if (total <= 0) return out;
  const double goal = percent * total;
  double covered = 0;
  for (const auto& e : errors.entries) {
    out.push_back(e.feature);
    covered += e.abs_error;
    if (covered >= goal) break;
  }
  return out;
}

ScalarTarget feature_target(const Autoencoder& m, std::size_t i) {
  Require(i < m.n_features(), "feature_target: index out of range");
  return ScalarTarget(m.n_features(), [&m, i](const Matrix& rows) -> Vector {
    return m.forward_batch(rows).col(static_cast<Eigen::Index>(i));
  });
}

ScalarTarget total_error_target(const Autoencoder& m) {
  return ScalarTarget(m.n_features(), [&m](const Matrix& rows) { return anomaly_scores(m, rows); });
}

std::vector<Attribution> shap_for_top_features(const Autoencoder& m, const Vector& x,
                                               const BackgroundSet& bg,
                                               std::span<const std::size_t> top,
                                               const ExplainConfig& cfg) {
  Require(!top.empty(), "shap_for_top_features: no features to explain");
  for (std::size_t i : top) Require(i < m.n_features(), "shap_for_top_features: index out of range");
  std::vector<Attribution> rows;
  if (cfg.method == AttributionMethod::kShap) {
    // One coalition design serves every explained output.
    std::vector<Eigen::Index> cols(top.begin(), top.end());
    const MultiTarget target{m.n_features(), top.size(), [&m, cols](const Matrix& batch) -> Matrix {
                               return m.forward_batch(batch)(Eigen::all, cols);
                             }};
    ShapConfig shap = cfg.shap;
    shap.seed = derive_seed(cfg.seed, m.n_features() + 1);
    rows = kernel_shap_multi(target, x, bg, shap);
  } else {
    for (std::size_t i : top) {
      LimeConfig lime = cfg.lime;
      lime.seed = derive_seed(cfg.seed, i);
      rows.push_back(lime_explain(feature_target(m, i), x, bg, lime));
    }
  }
  for (std::size_t k = 0; k < top.size(); ++k) rows[k].target_feature = static_cast<std::ptrdiff_t>(top[k]);
  return rows;
}

ContributionSplit split_contrib_offset(const Attribution& a, const Vector& x, double x_i, double x_hat_i) {
  Require(a.phi.size() == x.size(), "split_contrib_offset: width mismatch");
  // Sign of phi that pushes the reconstruction away from the true value.
  const double away = x_i < x_hat_i ? 1.0 : -1.0;
  // Entries at rounding level relative to the largest attribution are dropped.
  const double floor = a.phi.size() ? 1e-12 * a.phi.cwiseAbs().maxCoeff() : 0.0;
  ContributionSplit out;
  for (Eigen::Index j = 0; j < a.phi.size(); ++j) {
    if (static_cast<std::ptrdiff_t>(j) == a.target_feature) continue;
    const double phi = a.phi[j];
    if (std::abs(phi) <= floor) continue;
    FeatureContribution c{static_cast<std::size_t>(j), phi, x[j]};
    (phi * away > 0 ? out.contributing : out.offsetting).push_back(c);
  }
  std::stable_sort(out.contributing.begin(), out.contributing.end(), by_magnitude);
  std::stable_sort(out.offsetting.begin(), out.offsetting.end(), by_magnitude);
  return out;
}

std::vector<std::size_t> select_explainers(const Attribution& row, const Selection& method) {
  std::vector<std::size_t> candidates;
  std::vector<double> magnitudes;
  for (Eigen::Index j = 0; j < row.phi.size(); ++j) {
    if (static_cast<std::ptrdiff_t>(j) == row.target_feature) continue;
    candidates.push_back(static_cast<std::size_t>(j));
    magnitudes.push_back(std::abs(row.phi[j]));
  }
  std::vector<std::size_t> out;
  if (candidates.empty()) return out;

  switch (method.kind) {
    case Selection::Kind::kAboveMean:
    case Selection::Kind::kAboveMedian: {
      const double threshold =
          method.kind == Selection::Kind::kAboveMean
              ? std::accumulate(magnitudes.begin(), magnitudes.end(), 0.0) / static_cast<double>(magnitudes.size())
              : median_of(magnitudes);
      for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (magnitudes[k] > threshold) out.push_back(candidates[k]);
      }
      sort_by_magnitude(out, row.phi);
      break;
    }
    case Selection::Kind::kTopK: {
      for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (magnitudes[k] > 0) out.push_back(candidates[k]);
      }
      sort_by_magnitude(out, row.phi);
      if (out.size() > method.k) out.resize(method.k);
      break;
    }
  }
  return out;
}

ExplanatoryFeatureSet build_explanatory_feature_set(const Explanation& e, const Selection& method) {
  ExplanatoryFeatureSet set;
  auto add = [&set](std::size_t feature, std::size_t source) {
    if (set.contains(feature)) return;
    set.features.push_back(feature);
    set.introduced_by.push_back(source);
  };
  for (const auto& fe : e.per_feature) {
    add(fe.explained_feature, fe.explained_feature);
    for (std::size_t j : select_explainers(fe.attribution, method)) add(j, fe.explained_feature);
  }
  return set;
}

Explanation explain_instance(const Autoencoder& m, const Vector& x, const BackgroundSet& bg,
                             const ExplainConfig& cfg, std::size_t instance_id) {
  cfg.validate();
  Require(static_cast<std::size_t>(x.size()) == m.n_features(), "explain_instance: width mismatch");
  Require(bg.n_features() == m.n_features(), "explain_instance: background width mismatch");
  const Vector x_hat = m.forward(x);
  const ErrorList errors = per_feature_errors(x, x_hat);

  Explanation out;
  out.instance_id = instance_id;
  out.anomaly_score = errors.total;
  const auto top = top_m_features(errors, cfg.error_percent);
  if (top.empty()) return out;

  auto rows = shap_for_top_features(m, x, bg, top, cfg);
  for (std::size_t k = 0; k < top.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(top[k]);
    FeatureExplanation fe;
    fe.explained_feature = top[k];
    fe.true_value = x[i];
    fe.predicted_value = x_hat[i];
    auto split = split_contrib_offset(rows[k], x, x[i], x_hat[i]);
    fe.contributing = std::move(split.contributing);
    fe.offsetting = std::move(split.offsetting);
    fe.attribution = std::move(rows[k]);
    out.per_feature.push_back(std::move(fe));
  }
  return out;
}

Attribution explain_total_error(const Autoencoder& m, const Vector& x, const BackgroundSet& bg,
                                const ExplainConfig& cfg) {
  cfg.validate();
  const ScalarTarget target = total_error_target(m);
  Attribution a;
  if (cfg.method == AttributionMethod::kShap) {
    ShapConfig shap = cfg.shap;
    shap.seed = derive_seed(cfg.seed, m.n_features());
    a = kernel_shap(target, x, bg, shap);
  } else {
    LimeConfig lime = cfg.lime;
    lime.seed = derive_seed(cfg.seed, m.n_features());
    a = lime_explain(target, x, bg, lime);
  }
  a.target_feature = kTotalErrorTarget;
  return a;
}

void to_json(nlohmann::json& j, const FeatureContribution& c) {
  j = nlohmann::json{{"feature", c.feature}, {"shap", c.shap}, {"true_value", c.true_value}};
}

void to_json(nlohmann::json& j, const FeatureExplanation& f) {
  j = nlohmann::json{{"explained_feature", f.explained_feature},
                     {"true_value", f.true_value},
                     {"predicted_value", f.predicted_value},
                     {"contributing", f.contributing},
                     {"offsetting", f.offsetting},
                     {"attribution", f.attribution}};
}

void to_json(nlohmann::json& j, const Explanation& e) {
  j = nlohmann::json{{"instance", e.instance_id}, {"anomaly_score", e.anomaly_score}, {"features", e.per_feature}};
}

void to_json(nlohmann::json& j, const ExplanatoryFeatureSet& s) {
  j = nlohmann::json{{"features", s.features}, {"introduced_by", s.introduced_by}};
}

}  // namespace aex
