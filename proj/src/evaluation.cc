#include "aex/evaluation.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "aex/errors.h"

namespace aex {

namespace {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<std::size_t> sorted_copy(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// Paired test that reports degenerate inputs instead of throwing.
SignificanceResult compare(const std::string& a_name, const std::vector<double>& a,
                           const std::string& b_name, const std::vector<double>& b) {
  SignificanceResult r{a_name, b_name, std::nullopt, ""};
  try {
    r.test = paired_t_test(a, b);
  } catch (const Error& e) {
    r.note = e.what();
  }
  return r;
}

std::optional<TTestResult> try_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  try {
    return paired_t_test(a, b);
  } catch (const Error&) {
    return std::nullopt;
  }
}

// Copy of `e` restricted to the explained features covering `percent`.
Explanation truncate_to_percent(const Explanation& e, const ErrorList& errors, double percent) {
  Explanation out;
  out.instance_id = e.instance_id;
  out.anomaly_score = e.anomaly_score;
  const std::size_t keep = std::min(top_m_features(errors, percent).size(), e.per_feature.size());
  out.per_feature.assign(e.per_feature.begin(), e.per_feature.begin() + static_cast<std::ptrdiff_t>(keep));
  return out;
}

nlohmann::json optional_test_json(const std::optional<TTestResult>& t) {
  return t ? nlohmann::json(*t) : nlohmann::json(nullptr);
}

nlohmann::json mismatch_json(const CorrectnessMismatch& m) {
  return nlohmann::json{{"model", m.model_id},
                        {"row", m.row},
                        {"anomaly_feature", m.anomaly_feature},
                        {"expected", m.expected},
                        {"got", m.got},
                        {"background_size", m.background_size}};
}

}  // namespace

ExpectedExplanation expected_explanation_set(int model_id, std::size_t anomaly_feature) {
  Require(model_id >= 1 && model_id <= 3, "expected_explanation_set: model id must be 1, 2 or 3");
  Require(anomaly_feature == 4 || anomaly_feature == 5,
          "expected_explanation_set: anomaly feature must be X5 or X6");
  ExpectedExplanation e;
  e.model_id = model_id;
  e.anomaly_feature = anomaly_feature;
  e.expected_set = anomaly_feature == 4 ? std::vector<std::size_t>{0, 1, 4} : std::vector<std::size_t>{2, 3, 5};
  return e;
}

CorrectnessReport eval_correctness(const Dataset& d, std::span<const int> models, const CorrectnessConfig& cfg) {
  Require(d.n_features() == 6, "eval_correctness: expects the six-feature linear dataset");
  CorrectnessReport report;
  report.background_size = cfg.background_size;

  auto anomalies = d.rows_with_label(1);
  if (cfg.max_anomalies > 0 && anomalies.size() > cfg.max_anomalies) anomalies.resize(cfg.max_anomalies);
  if (anomalies.empty()) return report;
  const BackgroundSet bg = sample_background(d, cfg.background_size, derive_seed(cfg.seed, 0));

  ExplainConfig ec;
  ec.error_percent = cfg.error_percent;
  ec.selection = cfg.selection;
  ec.background_size = cfg.background_size;
  ec.shap = cfg.shap;
  for (int model_id : models) {
    const Autoencoder m = perfect_linear_ae(model_id);
    for (std::size_t row : anomalies) {
      const Vector x = d.row(row);
      const auto violated = linear_violation(x);
      if (!violated) continue;
      const auto expected = expected_explanation_set(model_id, *violated).expected_set;
      ec.seed = derive_seed(cfg.seed, row + 1);
      const Explanation e = explain_instance(m, x, bg, ec, row);
      const ExplanatoryFeatureSet set = build_explanatory_feature_set(e, cfg.selection);
      ++report.n_cases;
      if (sorted_copy(set.features) == expected) {
        ++report.n_matches;
      } else {
        report.mismatches.push_back({model_id, row, *violated, expected, set.features, cfg.background_size});
      }
    }
  }
  report.fraction = report.n_cases == 0 ? 1.0
                                        : static_cast<double>(report.n_matches) / static_cast<double>(report.n_cases);
  return report;
}

BinaryCorrectnessConfig BinaryCorrectnessConfig::defaults() {
  BinaryCorrectnessConfig cfg;
  cfg.train.hidden_sizes = {128, 20, 128};
  cfg.train.epochs = 150;
  cfg.train.batch_size = 64;
  cfg.train.learning_rate = 0.05;
  cfg.train.momentum = 0.9;
  cfg.train.output_activation = Activation::kSigmoid;
  cfg.error_percent = 0.5;
  cfg.restarts = 2;
  return cfg;
}

BinaryCorrectnessReport eval_correctness_binary(const BinaryCorrectnessConfig& cfg) {
  const Dataset d = gen_binary_logic(cfg.n_rows, cfg.n_anomalies, cfg.n_extra, derive_seed(cfg.seed, 0));
  const Dataset normal = d.select_rows(d.rows_with_label(0));
  Require(cfg.restarts >= 1, "eval_correctness_binary: restarts must be >= 1");
  // Some initializations stall with bottleneck units that never recover;
  // keep the restart with the lowest final training loss.
  std::optional<Autoencoder> m;
  double best_loss = 0;
  for (std::size_t k = 0; k < cfg.restarts; ++k) {
    TrainConfig tc = cfg.train;
    tc.seed = k == 0 ? derive_seed(cfg.seed, 1) : derive_seed(cfg.seed, 1000 + k);
    Autoencoder candidate = build_autoencoder(d.n_features(), tc);
    const TrainReport tr = train(candidate, normal.rows(), tc);
    const double loss = tr.epoch_loss.empty() ? 0.0 : tr.epoch_loss.back();
    if (!m || loss < best_loss) {
      m = std::move(candidate);
      best_loss = loss;
    }
  }

  BinaryCorrectnessReport report;
  report.final_train_loss = best_loss;
  report.extra_feature_frequency.assign(cfg.n_extra, 0.0);
  const BackgroundSet bg = sample_background(normal, cfg.background_size, derive_seed(cfg.seed, 2));

  ExplainConfig ec;
  ec.error_percent = cfg.error_percent;
  ec.selection = cfg.selection;
  ec.background_size = cfg.background_size;
  ec.shap = cfg.shap;
  for (std::size_t row : d.rows_with_label(1)) {
    const Vector x = d.row(row);
    const auto violated = logic_violation(x);
    if (!violated) continue;
    const std::vector<std::size_t> expected =
        *violated == 4 ? std::vector<std::size_t>{0, 1, 4} : std::vector<std::size_t>{2, 3, 5};
    ec.seed = derive_seed(cfg.seed, 100 + row);
    const Explanation e = explain_instance(*m, x, bg, ec, row);
    const ExplanatoryFeatureSet set = build_explanatory_feature_set(e, cfg.selection);
    ++report.n_cases;
    for (std::size_t f : set.features) {
      if (f >= 6) report.extra_feature_frequency[f - 6] += 1.0;
    }
    if (sorted_copy(set.features) == expected) {
      ++report.n_matches;
    } else {
      report.mismatches.push_back({0, row, *violated, expected, set.features, cfg.background_size});
    }
  }
  if (report.n_cases > 0) {
    report.fraction = static_cast<double>(report.n_matches) / static_cast<double>(report.n_cases);
    for (double& f : report.extra_feature_frequency) f /= static_cast<double>(report.n_cases);
  }
  return report;
}

Dataset synthetic_evaluation_dataset(std::size_t n_rows, std::uint64_t seed) {
  if (n_rows == 0) n_rows = 5000;
  const std::size_t n_features = 10;
  const std::size_t n_anomalies = std::max<std::size_t>(1, n_rows / 20);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 0.02);
  Matrix rows(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_features));
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const double z1 = unit(rng), z2 = unit(rng), z3 = unit(rng);
    rows.row(r) << z1, z2, z3, z1 + z2, z2 + z3, z1 - z3, z1 * z2, z1 + z2 + z3, 0.5 * z1 + jitter(rng),
        z3 + jitter(rng);
  }
  std::vector<int> labels(n_rows, 0);
  const Vector lo = rows.colwise().minCoeff().transpose();
  const Vector hi = rows.colwise().maxCoeff().transpose();
  for (std::size_t r : sample_indices(n_rows, n_anomalies, rng())) {
    labels[r] = 1;
    // One or two columns replaced by a uniform draw over the column range.
    const std::size_t n_broken = 1 + (rng() % 2);
    for (std::size_t c : sample_indices(n_features, n_broken, rng())) {
      const auto j = static_cast<Eigen::Index>(c);
      rows(static_cast<Eigen::Index>(r), j) = lo[j] + (hi[j] - lo[j]) * unit(rng);
    }
  }
  std::vector<std::string> names;
  for (std::size_t c = 0; c < n_features; ++c) names.push_back("X" + std::to_string(c + 1));
  return Dataset(std::move(names), std::move(rows), std::move(labels));
}

TrainConfig synthetic_train_config() {
  TrainConfig cfg;
  cfg.hidden_sizes = {8, 3, 8};
  cfg.epochs = 30;
  cfg.batch_size = 32;
  cfg.learning_rate = 0.02;
  cfg.momentum = 0.9;
  return cfg;
}

RobustnessConfig RobustnessConfig::synthetic_defaults() {
  RobustnessConfig cfg;
  cfg.train = synthetic_train_config();
  return cfg;
}

double mrr_of_feature(const ExplanatoryFeatureSet& s, std::size_t feature) {
  const auto it = std::find(s.features.begin(), s.features.end(), feature);
  if (it == s.features.end()) return 0.0;
  return 1.0 / static_cast<double>(it - s.features.begin() + 1);
}

std::vector<std::size_t> select_anomalies(const Autoencoder& m, const Matrix& rows, std::size_t limit) {
  if (rows.rows() == 0) return {};
  const Vector scores = anomaly_scores(m, rows);
  const double threshold = iqr_threshold(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())));
  std::vector<std::size_t> out;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (scores[i] > threshold) out.push_back(static_cast<std::size_t>(i));
  }
  std::stable_sort(out.begin(), out.end(), [&scores](std::size_t a, std::size_t b) {
    return scores[static_cast<Eigen::Index>(a)] > scores[static_cast<Eigen::Index>(b)];
  });
  if (limit > 0 && out.size() > limit) out.resize(limit);
  return out;
}

RobustnessReport eval_robustness(const Dataset& d, const RobustnessConfig& cfg) {
  Require(cfg.repetitions >= 1, "eval_robustness: repetitions must be >= 1");
  Require(!cfg.error_percents.empty() && !cfg.selections.empty(), "eval_robustness: empty grid");
  for (double p : cfg.error_percents) Require(p > 0 && p <= 1, "eval_robustness: percent outside (0, 1]");

  RobustnessReport report;
  report.repetitions = cfg.repetitions;
  report.noise_features = cfg.noise_features;
  if (report.noise_features.empty()) {
    Require(cfg.n_noise_features <= d.n_features(), "eval_robustness: more noise features than columns");
    report.noise_features = sample_indices(d.n_features(), cfg.n_noise_features, derive_seed(cfg.seed, 0));
  }
  for (std::size_t f : report.noise_features) Require(f < d.n_features(), "eval_robustness: noise feature out of range");
  const double max_percent = *std::max_element(cfg.error_percents.begin(), cfg.error_percents.end());

  for (std::size_t noise : report.noise_features) {
    // cells[s * n_percent + p] for this noise feature
    std::vector<RobustnessCell> cells;
    for (const auto& sel : cfg.selections) {
      for (double p : cfg.error_percents) {
        RobustnessCell c;
        c.noise_feature = noise;
        c.error_percent = p;
        c.selection = sel;
        cells.push_back(std::move(c));
      }
    }
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
      const std::uint64_t rep_seed = derive_seed(cfg.seed, 1000 * (noise + 1) + rep);
      const Dataset noisy = inject_noise_feature(d, noise, derive_seed(rep_seed, 0));
      const Normalized norm = minmax_normalize(noisy);
      const Dataset normal = norm.data.select_rows(norm.data.rows_with_label(0));
      TrainConfig tc = cfg.train;
      tc.seed = derive_seed(rep_seed, 1);
      Autoencoder m = build_autoencoder(d.n_features(), tc);
      train(m, normal.rows(), tc);

      const auto anomalies = select_anomalies(m, norm.data.rows(), cfg.max_anomalies);
      report.anomalies_per_repetition.push_back(anomalies.size());
      const BackgroundSet bg = sample_background(normal, std::min(cfg.background_size, normal.n_rows()),
                                                 derive_seed(rep_seed, 2));
      std::vector<std::vector<double>> rep_shap(cells.size()), rep_lime(cells.size());
      for (std::size_t row : anomalies) {
        const Vector x = norm.data.row(row);
        const ErrorList errors = per_feature_errors(x, m.forward(x));
        for (AttributionMethod method : {AttributionMethod::kShap, AttributionMethod::kLime}) {
          ExplainConfig ec;
          ec.error_percent = max_percent;
          ec.method = method;
          ec.background_size = bg.size();
          ec.shap = cfg.shap;
          ec.lime = cfg.lime;
          // Same seed for both methods: identical data, identical stream.
          ec.seed = derive_seed(rep_seed, 10 + row);
          const Explanation full = explain_instance(m, x, bg, ec, row);
          for (std::size_t s = 0; s < cfg.selections.size(); ++s) {
            for (std::size_t p = 0; p < cfg.error_percents.size(); ++p) {
              const std::size_t c = s * cfg.error_percents.size() + p;
              const Explanation cut = truncate_to_percent(full, errors, cfg.error_percents[p]);
              const double mrr = mrr_of_feature(build_explanatory_feature_set(cut, cfg.selections[s]), noise);
              (method == AttributionMethod::kShap ? rep_shap : rep_lime)[c].push_back(mrr);
            }
          }
        }
      }
      for (std::size_t c = 0; c < cells.size(); ++c) {
        cells[c].repetition_mrr_shap.push_back(mean_of(rep_shap[c]));
        cells[c].repetition_mrr_lime.push_back(mean_of(rep_lime[c]));
        cells[c].mrr_shap.insert(cells[c].mrr_shap.end(), rep_shap[c].begin(), rep_shap[c].end());
        cells[c].mrr_lime.insert(cells[c].mrr_lime.end(), rep_lime[c].begin(), rep_lime[c].end());
      }
    }
    for (auto& c : cells) {
      c.mean_mrr_shap = mean_of(c.repetition_mrr_shap);
      c.mean_mrr_lime = mean_of(c.repetition_mrr_lime);
      c.test = try_t_test(c.mrr_shap, c.mrr_lime);
      report.cells.push_back(std::move(c));
    }
  }

  std::vector<double> shap_means, lime_means;
  for (const auto& c : report.cells) {
    shap_means.push_back(c.mean_mrr_shap);
    lime_means.push_back(c.mean_mrr_lime);
  }
  report.mean_mrr_shap = mean_of(shap_means);
  report.mean_mrr_lime = mean_of(lime_means);
  report.aggregate_test = try_t_test(shap_means, lime_means);
  return report;
}

std::string to_string(SubstitutionPolicy p) { return p == SubstitutionPolicy::kMean ? "mean" : "predicted"; }

std::string to_string(SubstitutionSource s) {
  switch (s) {
    case SubstitutionSource::kShap:
      return "shap";
    case SubstitutionSource::kLime:
      return "lime";
    case SubstitutionSource::kRandom:
      return "random";
    case SubstitutionSource::kHighestError:
      return "highest_error";
  }
  return "";
}

Vector substitute_values(const Vector& x, std::span<const std::size_t> features, SubstitutionPolicy policy,
                         const SubstitutionContext& ctx) {
  Vector out = x;
  if (features.empty()) return out;
  Vector source;
  if (policy == SubstitutionPolicy::kMean) {
    Require(ctx.feature_means.size() == x.size(), "substitute_values: feature means width mismatch");
    source = ctx.feature_means;
  } else {
    Require(ctx.model != nullptr, "substitute_values: predicted policy needs a model");
    source = ctx.model->forward(x);
  }
  for (std::size_t f : features) {
    Require(f < static_cast<std::size_t>(x.size()), "substitute_values: feature index out of range");
    out[static_cast<Eigen::Index>(f)] = source[static_cast<Eigen::Index>(f)];
  }
  return out;
}

const EffectivenessColumn& EffectivenessReport::column(SubstitutionSource s, SubstitutionPolicy p) const {
  for (const auto& c : columns) {
    if (c.source == s && c.policy == p) return c;
  }
  throw ValidationError("effectiveness report: no column " + to_string(s) + "/" + to_string(p));
}

EffectivenessReport eval_effectiveness(const Autoencoder& m, const Matrix& anomalies, const BackgroundSet& bg,
                                       const Vector& feature_means, const EffectivenessConfig& cfg) {
  Require(static_cast<std::size_t>(anomalies.cols()) == m.n_features(), "eval_effectiveness: width mismatch");
  const std::size_t n = cfg.max_anomalies > 0
                            ? std::min<std::size_t>(cfg.max_anomalies, static_cast<std::size_t>(anomalies.rows()))
                            : static_cast<std::size_t>(anomalies.rows());
  const SubstitutionContext ctx{feature_means, &m};
  const SubstitutionSource sources[] = {SubstitutionSource::kHighestError, SubstitutionSource::kShap,
                                        SubstitutionSource::kLime, SubstitutionSource::kRandom};
  const SubstitutionPolicy policies[] = {SubstitutionPolicy::kMean, SubstitutionPolicy::kPredicted};

  EffectivenessReport report;
  report.n_anomalies = n;
  for (auto s : sources) {
    for (auto p : policies) report.columns.push_back({s, p, 0.0, {}, {}});
  }
  auto column = [&report](SubstitutionSource s, SubstitutionPolicy p) -> EffectivenessColumn& {
    for (auto& c : report.columns) {
      if (c.source == s && c.policy == p) return c;
    }
    throw ValidationError("missing column");
  };

  for (std::size_t r = 0; r < n; ++r) {
    const Vector x = anomalies.row(static_cast<Eigen::Index>(r)).transpose();
    const ErrorList errors = per_feature_errors(x, m.forward(x));
    report.scores_before.push_back(errors.total);

    std::vector<std::size_t> shap_set;
    for (auto source : sources) {
      std::vector<std::size_t> set;
      if (source == SubstitutionSource::kHighestError) {
        if (errors.total > 0) set.push_back(errors.entries.front().feature);
      } else if (source == SubstitutionSource::kRandom) {
        set = sample_indices(m.n_features(), std::min(shap_set.size(), m.n_features()), derive_seed(cfg.seed, 7 * r + 3));
      } else {
        ExplainConfig ec;
        ec.error_percent = cfg.error_percent;
        ec.selection = cfg.selection;
        ec.method = source == SubstitutionSource::kShap ? AttributionMethod::kShap : AttributionMethod::kLime;
        ec.background_size = bg.size();
        ec.shap = cfg.shap;
        ec.lime = cfg.lime;
        ec.seed = derive_seed(cfg.seed, 7 * r);
        const Explanation e = explain_instance(m, x, bg, ec, r);
        if (!e.per_feature.empty()) {
          Explanation first = e;
          first.per_feature.resize(1);
          set = build_explanatory_feature_set(first, cfg.selection).features;
        }
        if (source == SubstitutionSource::kShap) shap_set = set;
      }
      for (auto policy : policies) {
        auto& col = column(source, policy);
        col.scores_after.push_back(anomaly_score(m, substitute_values(x, set, policy, ctx)));
        col.set_sizes.push_back(set.size());
      }
    }
  }
  report.mean_before = mean_of(report.scores_before);
  for (auto& c : report.columns) c.mean_after = mean_of(c.scores_after);

  auto label = [](SubstitutionSource s, SubstitutionPolicy p) { return to_string(s) + "/" + to_string(p); };
  if (n >= 2) {
    for (auto p : policies) {
      const auto& shap = column(SubstitutionSource::kShap, p).scores_after;
      report.significance.push_back(compare(label(SubstitutionSource::kShap, p), shap, "before", report.scores_before));
      for (auto other : {SubstitutionSource::kLime, SubstitutionSource::kRandom, SubstitutionSource::kHighestError}) {
        report.significance.push_back(
            compare(label(SubstitutionSource::kShap, p), shap, label(other, p), column(other, p).scores_after));
      }
    }
    report.significance.push_back(compare(label(SubstitutionSource::kShap, SubstitutionPolicy::kMean),
                                          column(SubstitutionSource::kShap, SubstitutionPolicy::kMean).scores_after,
                                          label(SubstitutionSource::kShap, SubstitutionPolicy::kPredicted),
                                          column(SubstitutionSource::kShap, SubstitutionPolicy::kPredicted).scores_after));
  }
  return report;
}

EffectivenessReport run_effectiveness_experiment(const EffectivenessSetup& setup, const EffectivenessConfig& cfg) {
  const Dataset raw = setup.data ? *setup.data : synthetic_evaluation_dataset(setup.n_rows, derive_seed(setup.seed, 0));
  const Normalized norm = minmax_normalize(raw);
  const auto normal_rows = norm.data.labels() ? norm.data.rows_with_label(0) : std::vector<std::size_t>{};
  const Dataset normal = normal_rows.empty() ? norm.data : norm.data.select_rows(normal_rows);
  TrainConfig tc = setup.train;
  tc.seed = derive_seed(setup.seed, 1);
  Autoencoder m = build_autoencoder(raw.n_features(), tc);
  train(m, normal.rows(), tc);

  const auto picked = select_anomalies(m, norm.data.rows(), cfg.max_anomalies);
  Matrix anomalies(static_cast<Eigen::Index>(picked.size()), norm.data.rows().cols());
  for (std::size_t k = 0; k < picked.size(); ++k) {
    anomalies.row(static_cast<Eigen::Index>(k)) = norm.data.rows().row(static_cast<Eigen::Index>(picked[k]));
  }
  const BackgroundSet bg =
      sample_background(normal, std::min(setup.background_size, normal.n_rows()), derive_seed(setup.seed, 2));
  return eval_effectiveness(m, anomalies, bg, norm.data.column_means(), cfg);
}

void to_json(nlohmann::json& j, const TTestResult& t) {
  j = nlohmann::json{{"t", t.t}, {"p", t.p}, {"df", t.df}, {"mean_difference", t.mean_difference}};
}

void to_json(nlohmann::json& j, const CorrectnessReport& r) {
  nlohmann::json mismatches = nlohmann::json::array();
  for (const auto& m : r.mismatches) mismatches.push_back(mismatch_json(m));
  j = nlohmann::json{{"schema", "aex.correctness"},
                     {"n_cases", r.n_cases},
                     {"n_matches", r.n_matches},
                     {"fraction", r.fraction},
                     {"background_size", r.background_size},
                     {"mismatches", std::move(mismatches)}};
}

void to_json(nlohmann::json& j, const BinaryCorrectnessReport& r) {
  nlohmann::json mismatches = nlohmann::json::array();
  for (const auto& m : r.mismatches) mismatches.push_back(mismatch_json(m));
  j = nlohmann::json{{"schema", "aex.correctness_binary"},
                     {"n_cases", r.n_cases},
                     {"n_matches", r.n_matches},
                     {"fraction", r.fraction},
                     {"extra_feature_frequency", r.extra_feature_frequency},
                     {"final_train_loss", r.final_train_loss},
                     {"mismatches", std::move(mismatches)}};
}

void to_json(nlohmann::json& j, const RobustnessReport& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"noise_feature", c.noise_feature},
                     {"error_percent", c.error_percent},
                     {"selection", c.selection.name()},
                     {"mean_mrr_shap", c.mean_mrr_shap},
                     {"mean_mrr_lime", c.mean_mrr_lime},
                     {"repetition_mrr_shap", c.repetition_mrr_shap},
                     {"repetition_mrr_lime", c.repetition_mrr_lime},
                     {"mrr_shap", c.mrr_shap},
                     {"mrr_lime", c.mrr_lime},
                     {"test", optional_test_json(c.test)}});
  }
  j = nlohmann::json{{"schema", "aex.robustness"},
                     {"noise_features", r.noise_features},
                     {"repetitions", r.repetitions},
                     {"anomalies_per_repetition", r.anomalies_per_repetition},
                     {"mean_mrr_shap", r.mean_mrr_shap},
                     {"mean_mrr_lime", r.mean_mrr_lime},
                     {"aggregate_test", optional_test_json(r.aggregate_test)},
                     {"cells", std::move(cells)}};
}

void to_json(nlohmann::json& j, const EffectivenessReport& r) {
  nlohmann::json columns = nlohmann::json::array();
  for (const auto& c : r.columns) {
    columns.push_back({{"source", to_string(c.source)},
                       {"policy", to_string(c.policy)},
                       {"mean_after", c.mean_after},
                       {"scores_after", c.scores_after},
                       {"set_sizes", c.set_sizes}});
  }
  nlohmann::json sig = nlohmann::json::array();
  for (const auto& s : r.significance) {
    sig.push_back({{"a", s.a}, {"b", s.b}, {"test", optional_test_json(s.test)}, {"note", s.note}});
  }
  j = nlohmann::json{{"schema", "aex.effectiveness"},
                     {"n_anomalies", r.n_anomalies},
                     {"mean_before", r.mean_before},
                     {"scores_before", r.scores_before},
                     {"columns", std::move(columns)},
                     {"significance", std::move(sig)}};
}

std::string robustness_csv(const RobustnessReport& r) {
  std::ostringstream os;
  os << "noise_feature,error_percent,selection,mean_mrr_shap,mean_mrr_lime,t,p\n";
  for (const auto& c : r.cells) {
    os << c.noise_feature << ',' << format_double(c.error_percent) << ',' << c.selection.name() << ','
       << format_double(c.mean_mrr_shap) << ',' << format_double(c.mean_mrr_lime) << ',';
    if (c.test) {
      os << format_double(c.test->t) << ',' << format_double(c.test->p);
    } else {
      os << ',';
    }
    os << '\n';
  }
  return os.str();
}

std::string effectiveness_csv(const EffectivenessReport& r) {
  // Single data row: score before substitution, then one column per
  // source/policy pair.
  std::ostringstream header;
  std::ostringstream row;
  header << "mean_score";
  row << format_double(r.mean_before);
  for (auto s : {SubstitutionSource::kHighestError, SubstitutionSource::kShap, SubstitutionSource::kLime,
                 SubstitutionSource::kRandom}) {
    for (auto p : {SubstitutionPolicy::kMean, SubstitutionPolicy::kPredicted}) {
      header << ',' << to_string(s) << '_' << to_string(p);
      row << ',' << format_double(r.column(s, p).mean_after);
    }
  }
  return header.str() + "\n" + row.str() + "\n";
}

}  // namespace aex
