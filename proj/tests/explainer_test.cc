#include "aex/explainer.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "aex/errors.h"
#include "aex/evaluation.h"
#include "oracles.h"

namespace aex {
namespace {

// Features F1..F5 are indices 0..4.
ErrorList worked_errors() {
  ErrorList e;
  const double abs_errors[] = {0.95, 0.83, 0.52, 0.43, 0.24};
  for (std::size_t i = 0; i < 5; ++i) {
    e.entries.push_back({i, abs_errors[i], abs_errors[i]});
    e.total += abs_errors[i] * abs_errors[i];
  }
  return e;
}

Attribution row(std::ptrdiff_t target, std::initializer_list<double> phi) {
  Attribution a;
  a.target_feature = target;
  a.phi.resize(static_cast<Eigen::Index>(phi.size()));
  Eigen::Index i = 0;
  for (double v : phi) a.phi[i++] = v;
  return a;
}

// Attribution rows for the two explained features of the worked example.
// The explained feature's own slot carries a large value to show it is
// never a candidate.
Explanation worked_explanation() {
  Explanation e;
  FeatureExplanation f1;
  f1.explained_feature = 0;
  f1.attribution = row(0, {0.99, 0.7, 0.3, -0.1, -0.5});
  FeatureExplanation f2;
  f2.explained_feature = 1;
  f2.attribution = row(1, {0.16, 0.99, -0.7, 0.25, 0.03});
  e.per_feature = {f1, f2};
  return e;
}

TEST(TopMTest, WorkedExample) {
  EXPECT_EQ(top_m_features(worked_errors(), 0.5), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(top_m_features(worked_errors(), 1.0), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(TopMTest, SingleNonzeroAndEmpty) {
  const ErrorList one = per_feature_errors(Eigen::Vector3d(0, 2, 0), Eigen::Vector3d::Zero());
  for (double p : {0.01, 0.5, 1.0}) EXPECT_EQ(top_m_features(one, p), std::vector<std::size_t>{1});
  const ErrorList none = per_feature_errors(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(1, 2, 3));
  EXPECT_TRUE(top_m_features(none, 0.8).empty());
  // Zero-error features never enter even at full coverage.
  EXPECT_EQ(top_m_features(one, 1.0).size(), 1u);
}

TEST(TopMTest, MinimalPrefixProperty) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_real_distribution<double> pct(0.05, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const Vector x = Vector::NullaryExpr(8, [&] { return u(rng); });
    const Vector y = Vector::NullaryExpr(8, [&] { return u(rng); });
    const ErrorList e = per_feature_errors(x, y);
    const double p = pct(rng);
    const auto top = top_m_features(e, p);
    double total = 0;
    for (const auto& entry : e.entries) total += entry.abs_error;
    double covered = 0;
    for (std::size_t k = 0; k < top.size(); ++k) {
      EXPECT_EQ(top[k], e.entries[k].feature);
      covered += e.entries[k].abs_error;
    }
    EXPECT_GE(covered, p * total * (1 - 1e-12));
    EXPECT_LT(covered - e.entries[top.size() - 1].abs_error, p * total);
  }
}

TEST(SelectTest, AboveMeanWorkedRows) {
  const Explanation e = worked_explanation();
  EXPECT_EQ(select_explainers(e.per_feature[0].attribution, Selection::above_mean()),
            (std::vector<std::size_t>{1, 4}));
  EXPECT_EQ(select_explainers(e.per_feature[1].attribution, Selection::above_mean()),
            (std::vector<std::size_t>{2}));
}

TEST(SelectTest, MedianAndTopK) {
  const Attribution a = row(0, {5, 0.7, 0.5, 0.3, 0.1});
  // Median of {0.7, 0.5, 0.3, 0.1} is 0.4.
  EXPECT_EQ(select_explainers(a, Selection::above_median()), (std::vector<std::size_t>{1, 2}));
  const Attribution sparse = row(1, {0.2, 9, 0, -0.6, 0, 0.1});
  EXPECT_EQ(select_explainers(sparse, Selection::top_k(5)), (std::vector<std::size_t>{3, 0, 5}));
  EXPECT_EQ(select_explainers(sparse, Selection::top_k(1)), (std::vector<std::size_t>{3}));
  // Ties resolve by index.
  EXPECT_EQ(select_explainers(row(2, {0.5, -0.5, 1, 0.5}), Selection::top_k(2)), (std::vector<std::size_t>{0, 1}));
}

TEST(SelectTest, ParseNames) {
  EXPECT_EQ(Selection::parse("mean"), Selection::above_mean());
  EXPECT_EQ(Selection::parse("median"), Selection::above_median());
  EXPECT_EQ(Selection::parse("top7"), Selection::top_k(7));
  EXPECT_EQ(Selection::top_k(3).name(), "top3");
  EXPECT_THROW(Selection::parse("top0"), ValidationError);
  EXPECT_THROW(Selection::parse("best"), ValidationError);
}

TEST(FeatureSetTest, WorkedExampleOrder) {
  const ExplanatoryFeatureSet s = build_explanatory_feature_set(worked_explanation(), Selection::above_mean());
  EXPECT_EQ(s.features, (std::vector<std::size_t>{0, 1, 4, 2}));
  EXPECT_EQ(s.introduced_by, (std::vector<std::size_t>{0, 0, 0, 1}));
}

TEST(FeatureSetTest, NoExplainerPassing) {
  Explanation e;
  FeatureExplanation f;
  f.explained_feature = 2;
  f.attribution = row(2, {0, 0, 3, 0});
  e.per_feature = {f};
  const ExplanatoryFeatureSet s = build_explanatory_feature_set(e, Selection::top_k(3));
  EXPECT_EQ(s.features, std::vector<std::size_t>{2});
}

TEST(SplitTest, SignRules) {
  // True value 1, predicted 0.01: negative phi pushed the prediction down.
  const Attribution a = row(0, {0.3, 0.4, 0, -0.2, -0.9});
  const Vector x = (Vector(5) << 1, 0.5, 0.25, 0.75, 0.125).finished();
  const ContributionSplit below = split_contrib_offset(a, x, 1.0, 0.01);
  ASSERT_EQ(below.contributing.size(), 2u);
  EXPECT_EQ(below.contributing[0].feature, 4u);
  EXPECT_EQ(below.contributing[1].feature, 3u);
  EXPECT_DOUBLE_EQ(below.contributing[0].true_value, 0.125);
  ASSERT_EQ(below.offsetting.size(), 1u);
  EXPECT_EQ(below.offsetting[0].feature, 1u);

  const ContributionSplit above = split_contrib_offset(a, x, 0.0, 0.5);
  ASSERT_EQ(above.contributing.size(), 1u);
  EXPECT_EQ(above.contributing[0].feature, 1u);
  EXPECT_EQ(above.offsetting.size(), 2u);

  const ContributionSplit equal = split_contrib_offset(a, x, 0.5, 0.5);
  EXPECT_EQ(equal.offsetting.size(), 1u);
  EXPECT_EQ(equal.offsetting[0].feature, 1u);

  const ContributionSplit zeros = split_contrib_offset(row(0, {0, 0, 0, 0, 0}), x, 1.0, 0.0);
  EXPECT_TRUE(zeros.contributing.empty());
  EXPECT_TRUE(zeros.offsetting.empty());
}

TEST(SplitTest, SignRuleProperty) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    Attribution a = row(trial % 6, {u(rng), u(rng), 0, u(rng), u(rng), u(rng)});
    const Vector x = Vector::NullaryExpr(6, [&] { return u(rng); });
    const double xi = u(rng), xh = u(rng);
    const ContributionSplit s = split_contrib_offset(a, x, xi, xh);
    std::size_t nonzero = 0;
    for (Eigen::Index j = 0; j < 6; ++j) nonzero += (a.phi[j] != 0 && j != a.target_feature) ? 1 : 0;
    EXPECT_EQ(s.contributing.size() + s.offsetting.size(), nonzero);
    for (const auto& c : s.contributing) EXPECT_GT(c.shap * (xh - xi), 0);
    for (const auto& c : s.offsetting) EXPECT_LE(c.shap * (xh - xi), 0);
    for (const auto* list : {&s.contributing, &s.offsetting}) {
      for (std::size_t k = 1; k < list->size(); ++k) {
        EXPECT_GE(std::abs((*list)[k - 1].shap), std::abs((*list)[k].shap));
      }
    }
  }
}

TEST(PipelineTest, PerfectModelExplainsLinearAnomaly) {
  const Dataset d = gen_linear_artificial(2000, 40, 3);
  const BackgroundSet bg = sample_background(d.select_rows(d.rows_with_label(0)), 100, 4);
  ExplainConfig cfg;
  cfg.selection = Selection::top_k(2);
  for (int id = 1; id <= 3; ++id) {
    const Autoencoder m = perfect_linear_ae(id);
    for (std::size_t r : d.rows_with_label(1)) {
      const Vector x = d.row(r);
      const std::size_t broken = *linear_violation(x);
      const Explanation e = explain_instance(m, x, bg, cfg, r);
      ASSERT_EQ(e.per_feature.size(), 1u);
      EXPECT_EQ(e.per_feature[0].explained_feature, perfect_dependent_feature(id, broken));
      const std::vector<std::size_t> expected = broken == 4 ? std::vector<std::size_t>{0, 1, 4}
                                                            : std::vector<std::size_t>{2, 3, 5};
      auto got = build_explanatory_feature_set(e, cfg.selection).features;
      std::sort(got.begin(), got.end());
      EXPECT_EQ(got, expected) << "model " << id << " row " << r;
      if (id == 1) {
        for (const auto* list : {&e.per_feature[0].contributing, &e.per_feature[0].offsetting}) {
          for (const auto& c : *list) EXPECT_TRUE(c.feature == expected[0] || c.feature == expected[1]) << c.feature << " " << c.shap;
        }
      }
    }
  }
}

TEST(PipelineTest, NormalRowAndConstantModel) {
  const Dataset d = gen_linear_artificial(300, 0, 5);
  const BackgroundSet bg = sample_background(d, 50, 6);
  const Explanation e = explain_instance(perfect_linear_ae(1), d.row(7), bg, ExplainConfig{});
  EXPECT_EQ(e.anomaly_score, 0.0);
  EXPECT_TRUE(e.per_feature.empty());
  // Model 2 rebuilds X1 as X5 - X2, which only round-trips up to rounding.
  EXPECT_LT(explain_instance(perfect_linear_ae(2), d.row(7), bg, ExplainConfig{}).anomaly_score, 1e-28);

  DenseLayer zero{Matrix::Zero(6, 6), Vector::Constant(6, 0.5), Activation::kIdentity};
  const Autoencoder constant({zero});
  const auto top = std::vector<std::size_t>{0, 3};
  for (const auto& a : shap_for_top_features(constant, d.row(1), bg, top, ExplainConfig{})) {
    EXPECT_EQ(a.phi.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(PipelineTest, DeterministicAndSerializable) {
  TrainConfig tc = synthetic_train_config();
  tc.epochs = 3;
  const Dataset d = minmax_normalize(synthetic_evaluation_dataset(600, 7)).data;
  Autoencoder m = build_autoencoder(d.n_features(), tc);
  train(m, d.rows(), tc);
  const BackgroundSet bg = sample_background(d, 40, 8);
  for (AttributionMethod method : {AttributionMethod::kShap, AttributionMethod::kLime}) {
    ExplainConfig cfg;
    cfg.method = method;
    cfg.seed = 99;
    cfg.lime.n_samples = 500;
    const nlohmann::json a = explain_instance(m, d.row(3), bg, cfg, 3);
    const nlohmann::json b = explain_instance(m, d.row(3), bg, cfg, 3);
    EXPECT_EQ(a.dump(), b.dump());
    EXPECT_EQ(a.at("instance"), 3);
  }
}

TEST(PipelineTest, LocalAccuracyOfEveryRow) {
  const Dataset d = minmax_normalize(synthetic_evaluation_dataset(600, 9)).data;
  TrainConfig tc = synthetic_train_config();
  tc.epochs = 2;
  Autoencoder m = build_autoencoder(d.n_features(), tc);
  train(m, d.rows(), tc);
  const BackgroundSet bg = sample_background(d, 30, 10);
  ExplainConfig cfg;
  cfg.error_percent = 1.0;
  const Explanation e = explain_instance(m, d.row(11), bg, cfg);
  ASSERT_EQ(e.per_feature.size(), d.n_features());
  for (const auto& fe : e.per_feature) {
    EXPECT_NEAR(fe.attribution.base + fe.attribution.phi.sum(), fe.predicted_value, 1e-6);
    EXPECT_EQ(fe.attribution.target_feature, static_cast<std::ptrdiff_t>(fe.explained_feature));
  }
}

TEST(TotalErrorTest, PerfectModelNormalRowIsZero) {
  const Dataset d = gen_linear_artificial(200, 0, 11);
  const BackgroundSet bg = sample_background(d, 20, 12);
  const Attribution a = explain_total_error(perfect_linear_ae(1), d.row(0), bg, ExplainConfig{});
  EXPECT_NEAR(a.target_value, 0.0, 1e-20);
  EXPECT_LT(a.phi.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(a.target_feature, kTotalErrorTarget);
}

TEST(TotalErrorTest, PerfectModelMatchesOracle) {
  const Dataset d = gen_linear_artificial(2000, 30, 13);
  const BackgroundSet bg = sample_background(d.select_rows(d.rows_with_label(0)), 25, 14);
  const Autoencoder m = perfect_linear_ae(1);
  const auto loss = [&](const Eigen::VectorXd& z) { return (z - m.forward(z)).squaredNorm(); };
  for (std::size_t r : d.rows_with_label(1)) {
    const Vector x = d.row(r);
    if (*linear_violation(x) != 4) continue;
    const Attribution a = explain_total_error(m, x, bg, ExplainConfig{});
    const Vector expected = oracle::shapley_by_permutations(loss, x, bg.rows);
    EXPECT_LT((a.phi - expected).cwiseAbs().maxCoeff(), 1e-9);
    for (Eigen::Index j : {2, 3, 5}) EXPECT_LT(std::abs(a.phi[j]), 1e-12);
  }
}

// The largest total-error attribution should usually land on one of the
// features with the largest reconstruction errors.
TEST(TotalErrorTest, AgreesWithTopErrorFeatures) {
  const Dataset raw = synthetic_evaluation_dataset(3000, 15);
  const Dataset d = minmax_normalize(raw).data;
  const Dataset normal = d.select_rows(d.rows_with_label(0));
  TrainConfig tc = synthetic_train_config();
  tc.seed = 16;
  Autoencoder m = build_autoencoder(d.n_features(), tc);
  train(m, normal.rows(), tc);
  const BackgroundSet bg = sample_background(normal, 100, 17);
  ExplainConfig cfg;
  std::size_t agree = 0, n = 0;
  for (std::size_t r : d.rows_with_label(1)) {
    const Vector x = d.row(r);
    const auto top = top_m_features(per_feature_errors(x, m.forward(x)), cfg.error_percent);
    const Attribution a = explain_total_error(m, x, bg, cfg);
    Eigen::Index best = 0;
    a.phi.cwiseAbs().maxCoeff(&best);
    agree += std::find(top.begin(), top.end(), static_cast<std::size_t>(best)) != top.end() ? 1 : 0;
    ++n;
  }
  ASSERT_GT(n, 100u);
  EXPECT_GE(static_cast<double>(agree) / static_cast<double>(n), 0.8) << agree << "/" << n;
}

TEST(ExplainConfigTest, Validation) {
  ExplainConfig cfg;
  cfg.error_percent = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg.error_percent = 1.5;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = ExplainConfig{};
  cfg.selection = Selection::top_k(0);
  EXPECT_THROW(cfg.validate(), ValidationError);
  EXPECT_EQ(parse_method("lime"), AttributionMethod::kLime);
  EXPECT_THROW(parse_method("grad"), ValidationError);
}

}  // namespace
}  // namespace aex
