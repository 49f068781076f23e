#ifndef AEX_EVALUATION_H_
#define AEX_EVALUATION_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aex/autoencoder.h"
#include "aex/dataset.h"
#include "aex/explainer.h"
#include "aex/stats.h"
#include "json.hpp"

namespace aex {

// ---------------------------------------------------------------------------
// Ground-truth correctness on hand-weighted autoencoders.

struct ExpectedExplanation {
  int model_id = 1;
  std::size_t anomaly_feature = 4;
  std::vector<std::size_t> expected_set;  // ascending
};

// {X1, X2, X5} for X5 anomalies and {X3, X4, X6} for X6 anomalies, whatever
// the model.
ExpectedExplanation expected_explanation_set(int model_id, std::size_t anomaly_feature);

struct CorrectnessConfig {
  double error_percent = 0.8;
  Selection selection = Selection::top_k(2);
  std::size_t background_size = 200;
  // Upper bound on explained anomalies; 0 explains every labeled anomaly.
  std::size_t max_anomalies = 500;
  std::uint64_t seed = 0;
  ShapConfig shap;
};

struct CorrectnessMismatch {
  int model_id = 0;
  std::size_t row = 0;
  std::size_t anomaly_feature = 0;
  std::vector<std::size_t> expected;
  std::vector<std::size_t> got;  // explanatory set, in set order
  std::size_t background_size = 0;
};

struct CorrectnessReport {
  std::size_t n_cases = 0;
  std::size_t n_matches = 0;
  double fraction = 1.0;
  std::size_t background_size = 0;
  std::vector<CorrectnessMismatch> mismatches;
};

// Explains every labeled anomaly of a gen_linear_artificial dataset with each
// perfect model and compares the explanatory set against the ground truth.
CorrectnessReport eval_correctness(const Dataset& d, std::span<const int> models,
                                   const CorrectnessConfig& cfg);

struct BinaryCorrectnessConfig {
  std::size_t n_rows = 50000;
  std::size_t n_anomalies = 300;
  std::size_t n_extra = 16;
  TrainConfig train;
  double error_percent = 0.8;
  Selection selection = Selection::top_k(2);
  std::size_t background_size = 200;
  ShapConfig shap;
  // Independent training runs; the lowest final loss is kept.
  std::size_t restarts = 1;
  std::uint64_t seed = 0;

  // Desk-scale defaults: sigmoid output, trained on the normal rows.
  static BinaryCorrectnessConfig defaults();
};

struct BinaryCorrectnessReport {
  std::size_t n_cases = 0;
  std::size_t n_matches = 0;
  double fraction = 1.0;
  // Share of explanatory sets containing each of the extra columns.
  std::vector<double> extra_feature_frequency;
  double final_train_loss = 0;
  std::vector<CorrectnessMismatch> mismatches;
};

// Generates AND/OR data, trains an autoencoder on the normal rows and checks
// each flipped row's explanatory set against {dependent, operand, operand}.
BinaryCorrectnessReport eval_correctness_binary(const BinaryCorrectnessConfig& cfg);

// ---------------------------------------------------------------------------
// Synthetic trained-model setup shared by the robustness and effectiveness
// harnesses.

// Ten correlated columns driven by three uniform latent factors, with a
// labeled minority of rows whose columns were overwritten by out-of-pattern
// values. `n_rows` 0 picks the default size.
Dataset synthetic_evaluation_dataset(std::size_t n_rows, std::uint64_t seed);

// Training settings used on the synthetic dataset.
TrainConfig synthetic_train_config();

// ---------------------------------------------------------------------------
// Robustness to an injected noise feature.

// 1 / position (1-based) of `feature` in the set, 0 when absent.
double mrr_of_feature(const ExplanatoryFeatureSet& s, std::size_t feature);

struct RobustnessConfig {
  std::size_t repetitions = 5;
  std::vector<double> error_percents{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<Selection> selections{Selection::above_mean(), Selection::above_median(), Selection::top_k(5)};
  std::size_t max_anomalies = 100;
  std::size_t background_size = 200;
  TrainConfig train;
  ShapConfig shap;
  LimeConfig lime;
  // Noise columns, one experiment each; empty draws `n_noise_features`
  // distinct random columns.
  std::vector<std::size_t> noise_features;
  std::size_t n_noise_features = 1;
  std::uint64_t seed = 0;

  // Settings for synthetic_evaluation_dataset.
  static RobustnessConfig synthetic_defaults();
};

struct RobustnessCell {
  std::size_t noise_feature = 0;
  double error_percent = 0;
  Selection selection;
  double mean_mrr_shap = 0;
  double mean_mrr_lime = 0;
  // Per-repetition mean MRR, and per-anomaly MRR concatenated over
  // repetitions.
  std::vector<double> repetition_mrr_shap;
  std::vector<double> repetition_mrr_lime;
  std::vector<double> mrr_shap;
  std::vector<double> mrr_lime;
  std::optional<TTestResult> test;  // SHAP vs LIME over per-anomaly MRR
};

struct RobustnessReport {
  std::vector<std::size_t> noise_features;
  std::size_t repetitions = 0;
  std::vector<std::size_t> anomalies_per_repetition;
  std::vector<RobustnessCell> cells;
  double mean_mrr_shap = 0;
  double mean_mrr_lime = 0;
  // SHAP vs LIME over the cell means.
  std::optional<TTestResult> aggregate_test;
};

RobustnessReport eval_robustness(const Dataset& d, const RobustnessConfig& cfg);

// ---------------------------------------------------------------------------
// Effectiveness: does substituting explained features lower the score?

enum class SubstitutionPolicy { kMean, kPredicted };
std::string to_string(SubstitutionPolicy p);

struct SubstitutionContext {
  Vector feature_means;                  // for kMean
  const Autoencoder* model = nullptr;    // for kPredicted
};

// Replaces the listed features by their dataset mean or by the model's
// reconstruction of the original x.
Vector substitute_values(const Vector& x, std::span<const std::size_t> features,
                         SubstitutionPolicy policy, const SubstitutionContext& ctx);

enum class SubstitutionSource { kShap, kLime, kRandom, kHighestError };
std::string to_string(SubstitutionSource s);

struct EffectivenessConfig {
  std::size_t max_anomalies = 200;
  double error_percent = 0.8;
  Selection selection = Selection::top_k(5);
  ShapConfig shap;
  LimeConfig lime;
  std::uint64_t seed = 0;
};

struct EffectivenessColumn {
  SubstitutionSource source = SubstitutionSource::kShap;
  SubstitutionPolicy policy = SubstitutionPolicy::kPredicted;
  double mean_after = 0;
  std::vector<double> scores_after;
  std::vector<std::size_t> set_sizes;
};

struct SignificanceResult {
  std::string a;
  std::string b;
  std::optional<TTestResult> test;
  std::string note;  // set when the test is undefined
};

struct EffectivenessReport {
  std::size_t n_anomalies = 0;
  double mean_before = 0;
  std::vector<double> scores_before;
  std::vector<EffectivenessColumn> columns;
  std::vector<SignificanceResult> significance;

  const EffectivenessColumn& column(SubstitutionSource s, SubstitutionPolicy p) const;
};

// `anomalies` rows are explained with both attribution methods; the
// substitution set is the first explained feature plus its selected
// explainers. RANDOM sets match the SHAP set size per instance.
EffectivenessReport eval_effectiveness(const Autoencoder& m, const Matrix& anomalies,
                                       const BackgroundSet& bg, const Vector& feature_means,
                                       const EffectivenessConfig& cfg);

struct EffectivenessSetup {
  // Dataset to train on; synthetic_evaluation_dataset when unset.
  std::optional<Dataset> data;
  // Synthetic rows; about 30% of the injected 5% are detected, so 20,000
  // rows cover the default 200 anomalies. 0 uses the generator default.
  std::size_t n_rows = 20000;
  std::size_t background_size = 200;
  TrainConfig train = synthetic_train_config();
  std::uint64_t seed = 0;
};

// Normalizes the data, trains on label-0 rows, takes the highest-scoring rows
// above the IQR threshold as anomalies and runs eval_effectiveness with a
// background drawn from the normal rows.
EffectivenessReport run_effectiveness_experiment(const EffectivenessSetup& setup, const EffectivenessConfig& cfg);

// Rows of `d` scoring above the IQR threshold, highest score first, at most
// `limit` of them (0 = all).
std::vector<std::size_t> select_anomalies(const Autoencoder& m, const Matrix& rows, std::size_t limit);

void to_json(nlohmann::json& j, const TTestResult& t);
void to_json(nlohmann::json& j, const CorrectnessReport& r);
void to_json(nlohmann::json& j, const BinaryCorrectnessReport& r);
void to_json(nlohmann::json& j, const RobustnessReport& r);
void to_json(nlohmann::json& j, const EffectivenessReport& r);

// Table-style CSV renderings of the reports.
std::string robustness_csv(const RobustnessReport& r);
std::string effectiveness_csv(const EffectivenessReport& r);

}  // namespace aex

#endif  // AEX_EVALUATION_H_
