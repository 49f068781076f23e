// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
// when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "aex/attribution.h"
#include "aex/autoencoder.h"
#include "aex/dataset.h"
#include "aex/evaluation.h"
#include "aex/explainer.h"
#include "aex/stats.h"

namespace {

using namespace aex;
namespace fs = std::filesystem;

constexpr std::uint64_t kSeed = 20240;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// Local accuracy is audited on every Kernel SHAP result of the whole run.
struct LocalAccuracyAudit {
  std::size_t n = 0;
  double worst = 0;
};
LocalAccuracyAudit g_audit;

// ---------------------------------------------------------------------------

Outcome perfect_correctness() {
  const Dataset d = gen_linear_artificial(20000, 500, derive_seed(kSeed, 1));
  const std::vector<int> models{1, 2, 3};
  CorrectnessConfig cfg;
  cfg.seed = derive_seed(kSeed, 2);
  const CorrectnessReport r200 = eval_correctness(d, models, cfg);
  cfg.background_size = 500;
  const CorrectnessReport r500 = eval_correctness(d, models, cfg);
  Outcome o;
  o.pass = r200.n_cases == 1500 && r200.fraction >= 0.99 && r500.n_cases == 1500 && r500.fraction == 1.0;
  o.detail = "background 200: " + std::to_string(r200.n_matches) + "/" + std::to_string(r200.n_cases) +
             ", background 500: " + std::to_string(r500.n_matches) + "/" + std::to_string(r500.n_cases) +
             " (need >= 99% and 100%)";
  return o;
}

Outcome binary_correctness() {
  BinaryCorrectnessConfig cfg = BinaryCorrectnessConfig::defaults();
  cfg.seed = derive_seed(kSeed, 3);
  const BinaryCorrectnessReport r = eval_correctness_binary(cfg);
  Outcome o;
  o.pass = r.n_cases >= 290 && r.fraction >= 0.9;
  o.detail = std::to_string(r.n_matches) + "/" + std::to_string(r.n_cases) + " = " + fmt(r.fraction) +
             " (need >= 0.9), final train loss " + fmt(r.final_train_loss);
  return o;
}

// Random targets: one output of a small randomly initialized autoencoder.
ScalarTarget random_ae_target(std::size_t arity, std::uint64_t seed, bool bounded, std::vector<Autoencoder>& keep) {
  TrainConfig tc;
  tc.hidden_sizes = {6, 3, 6};
  tc.seed = seed;
  tc.output_activation = bounded ? Activation::kSigmoid : Activation::kIdentity;
  Autoencoder m = build_autoencoder(arity, tc);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.5);
  for (auto& layer : m.mutable_layers()) {
    layer.bias = Vector::NullaryExpr(layer.bias.size(), [&] { return g(rng); });
    layer.weights *= 2.0;
  }
  keep.push_back(std::move(m));
  return feature_target(keep.back(), static_cast<std::size_t>(rng() % arity));
}

Matrix uniform_rows(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return Matrix::NullaryExpr(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols), [&] { return u(rng); });
}

double sampled_p95(std::size_t arity, std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Autoencoder> keep;
  keep.reserve(trials);
  std::vector<double> dev;
  for (std::size_t k = 0; k < trials; ++k) {
    const ScalarTarget t = random_ae_target(arity, derive_seed(seed, k), true, keep);
    BackgroundSet bg;
    bg.rows = uniform_rows(5, arity, rng);
    const Vector x = uniform_rows(1, arity, rng).row(0).transpose();
    ShapConfig cfg;
    cfg.n_coalitions = 2048;
    cfg.seed = derive_seed(seed, 1000 + k);
    const Attribution a = kernel_shap(t, x, bg, cfg);
    dev.push_back((a.phi - exact_shapley(t, x, bg)).cwiseAbs().maxCoeff());
  }
  std::sort(dev.begin(), dev.end());
  return dev[static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(dev.size()))) - 1];
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(derive_seed(kSeed, 4));
  std::vector<Autoencoder> keep;
  keep.reserve(200);
  double worst = 0;
  for (std::size_t k = 0; k < 200; ++k) {
    const std::size_t arity = 2 + k % 11;
    const ScalarTarget t = random_ae_target(arity, derive_seed(kSeed, 100 + k), k % 2 == 0, keep);
    BackgroundSet bg;
    bg.rows = uniform_rows(1 + k % 4, arity, rng);
    const Vector x = uniform_rows(1, arity, rng).row(0).transpose();
    ShapConfig cfg;
    cfg.exhaustive = true;
    const Attribution a = kernel_shap(t, x, bg, cfg);
    worst = std::max(worst, (a.phi - exact_shapley(t, x, bg)).cwiseAbs().maxCoeff());
  }
  // At arity 10 a 2048-coalition budget covers every subset; arity 14 runs
  // the sampler proper under the same budget.
  const double p95_10 = sampled_p95(10, 100, derive_seed(kSeed, 5));
  const double p95_14 = sampled_p95(14, 100, derive_seed(kSeed, 6));
  Outcome o;
  o.pass = worst < 1e-6 && p95_10 < 0.05 && p95_14 < 0.05;
  o.detail = "exhaustive max |diff| " + fmt(worst) + " over 200 targets (need < 1e-6); sampled p95 " + fmt(p95_10) +
             " at arity 10, " + fmt(p95_14) + " at arity 14 (need < 0.05)";
  return o;
}

Outcome robustness_direction() {
  const Dataset d = synthetic_evaluation_dataset(0, derive_seed(kSeed, 7));
  RobustnessConfig cfg = RobustnessConfig::synthetic_defaults();
  cfg.seed = derive_seed(kSeed, 8);
  const RobustnessReport r = eval_robustness(d, cfg);
  Outcome o;
  const bool tested = r.aggregate_test.has_value();
  o.pass = r.cells.size() == 27 && r.repetitions == 5 && r.mean_mrr_shap < r.mean_mrr_lime && tested &&
           r.aggregate_test->p < 0.05;
  o.detail = "noise feature X" + std::to_string(r.noise_features.front() + 1) + ", mean MRR SHAP " +
             fmt(r.mean_mrr_shap) + " vs LIME " + fmt(r.mean_mrr_lime) +
             (tested ? ", paired t " + fmt(r.aggregate_test->t) + " p " + fmt(r.aggregate_test->p) : ", t-test undefined") +
             " over " + std::to_string(r.cells.size()) + " cells (need SHAP < LIME, p < 0.05)";
  return o;
}

Outcome effectiveness_direction() {
  EffectivenessSetup setup;
  setup.seed = derive_seed(kSeed, 9);
  EffectivenessConfig cfg;
  cfg.max_anomalies = 200;
  cfg.seed = derive_seed(kSeed, 10);
  const EffectivenessReport r = run_effectiveness_experiment(setup, cfg);
  const auto& shap = r.column(SubstitutionSource::kShap, SubstitutionPolicy::kPredicted);
  Outcome o;
  o.pass = r.n_anomalies == 200 && shap.mean_after < r.mean_before;
  std::string detail = std::to_string(r.n_anomalies) + " anomalies, before " + fmt(r.mean_before) +
                       ", shap/predicted " + fmt(shap.mean_after);
  for (auto other : {SubstitutionSource::kLime, SubstitutionSource::kRandom}) {
    const double after = r.column(other, SubstitutionPolicy::kPredicted).mean_after;
    o.pass = o.pass && shap.mean_after < after;
    detail += ", " + to_string(other) + "/predicted " + fmt(after);
  }
  for (const auto& s : r.significance) {
    if (s.a != "shap/predicted") continue;
    if (s.b != "before" && s.b != "lime/predicted" && s.b != "random/predicted") continue;
    const bool ok = s.test && s.test->p < 0.05 && s.test->mean_difference < 0;
    o.pass = o.pass && ok;
    detail += "; vs " + s.b + " p " + (s.test ? fmt(s.test->p) : std::string("undefined"));
  }
  o.detail = detail + " (need lower than each, p < 0.05)";
  return o;
}

Outcome unit_exactness() {
  std::vector<std::string> failed;
  ErrorList errors;
  const double abs_errors[] = {0.95, 0.83, 0.52, 0.43, 0.24};
  for (std::size_t i = 0; i < 5; ++i) errors.entries.push_back({i, abs_errors[i], abs_errors[i]});
  if (top_m_features(errors, 0.5) != std::vector<std::size_t>{0, 1}) failed.push_back("topM");

  Explanation e;
  FeatureExplanation f1, f2;
  f1.explained_feature = 0;
  f1.attribution.target_feature = 0;
  f1.attribution.phi = (Vector(5) << 0.0, 0.7, 0.3, 0.1, 0.5).finished();
  f2.explained_feature = 1;
  f2.attribution.target_feature = 1;
  f2.attribution.phi = (Vector(5) << 0.16, 0.0, 0.7, 0.25, 0.03).finished();
  e.per_feature = {f1, f2};
  if (build_explanatory_feature_set(e, Selection::above_mean()).features != std::vector<std::size_t>{0, 1, 4, 2}) {
    failed.push_back("explanatory set");
  }
  if (shapley_kernel_weight(4, 2) != 0.125) failed.push_back("kernel weight");
  const std::vector<double> scores{1, 2, 3, 4, 5};
  if (iqr_threshold(scores) != 7.0) failed.push_back("iqr");
  ExplanatoryFeatureSet s;
  s.features = {5, 6, 7};
  if (std::abs(mrr_of_feature(s, 7) - 1.0 / 3.0) > 1e-15) failed.push_back("mrr");
  const std::vector<double> a{1, 2, 4}, b{0, 1, 2};
  if (std::abs(paired_t_test(a, b).t - 4.0) > 1e-9) failed.push_back("t-test");
  Outcome o;
  o.pass = failed.empty();
  o.detail = failed.empty() ? "topM [F1,F2], set {F1,F2,F5,F3}, weight 0.125, IQR 7, MRR 1/3, t 4" : "failed:";
  for (const auto& f : failed) o.detail += " " + f;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "aex_acceptance";
  fs::remove_all(root);
  const std::string cli = std::string("'") + AEX_CLI_PATH + "'";
  // Each run executes the whole pipeline in its own directory with the same
  // file names, so path-dependent fields match too.
  auto steps_in = [](const fs::path& dir) {
    auto q = [&](const std::string& name) { return "'" + (dir / name).string() + "'"; };
    return std::vector<std::pair<std::string, std::string>>{
        {"gen-data --kind linear --rows 2000 --anomalies 20 --seed 3 --out ", "lin.csv"},
        {"gen-data --kind binary --rows 2000 --anomalies 20 --seed 3 --out ", "bin.csv"},
        {"train --data " + q("lin.csv") + " --epochs 3 --seed 4 --out ", "model.json"},
        {"detect --model " + q("model.json") + " --data " + q("lin.csv") + " --out ", "anomalies.json"},
        {"explain --quiet --model " + q("model.json") + " --data " + q("lin.csv") +
             " --max-anomalies 3 --seed 5 --out ",
         "shap.json"},
        {"explain --quiet --method lime --model " + q("model.json") + " --data " + q("lin.csv") +
             " --max-anomalies 3 --seed 5 --out ",
         "lime.json"},
        {"explain --quiet --total-error --model " + q("model.json") + " --data " + q("lin.csv") +
             " --max-anomalies 3 --seed 5 --out ",
         "total.json"},
        {"eval-correctness --rows 2000 --anomalies 30 --background-size 50 --seed 6 --out ", "correctness.json"},
        {"eval-correctness --kind binary --rows 3000 --anomalies 10 --epochs 2 --background-size 30 --seed 6 --out ",
         "binary.json"},
        {"eval-robustness --rows 600 --repetitions 1 --max-anomalies 3 --background-size 20 --epochs 2 --seed 7 "
         "--out ",
         "robustness.json"},
        {"eval-effectiveness --rows 600 --max-anomalies 3 --background-size 20 --epochs 2 --seed 8 --out ",
         "effectiveness.json"},
        {"render --format html --in " + q("shap.json") + " --out ", "render.html"},
    };
  };
  const fs::path dirs[2] = {root / "run0", root / "run1"};
  std::set<std::string> failed_runs;
  for (const auto& dir : dirs) {
    fs::create_directories(dir);
    for (const auto& [args, file] : steps_in(dir)) {
      const std::string cmd = cli + " " + args + "'" + (dir / file).string() + "' > /dev/null 2>&1";
      const int status = std::system(cmd.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) failed_runs.insert(file);
    }
  }
  std::vector<std::string> differing;
  std::size_t compared = 0;
  for (const auto& step : steps_in(dirs[0])) {
    const std::string& file = step.second;
    ++compared;
    if (failed_runs.count(file)) {
      differing.push_back(file + " (exit)");
      continue;
    }
    const std::string a = slurp(dirs[0] / file);
    if (a.empty() || a != slurp(dirs[1] / file)) differing.push_back(file);
  }
  // The training sidecar is written implicitly and must agree as well.
  ++compared;
  if (slurp(dirs[0] / "model.norm.json") != slurp(dirs[1] / "model.norm.json")) differing.push_back("model.norm.json");
  fs::remove_all(root);
  Outcome o;
  o.pass = differing.empty();
  o.detail = std::to_string(compared) + " command outputs compared across two runs";
  if (!differing.empty()) {
    o.detail += "; differing:";
    for (const auto& d : differing) o.detail += " " + d;
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  // Optional criterion ids on the command line restrict the run.
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  set_kernel_shap_observer([](const Attribution& a) {
    ++g_audit.n;
    g_audit.worst = std::max(g_audit.worst, std::abs(a.base + a.phi.sum() - a.target_value));
  });

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "perfect-autoencoder correctness", perfect_correctness},
      {2, "binary-logic correctness", binary_correctness},
      {3, "attribution oracle equivalence", oracle_equivalence},
      {5, "robustness direction", robustness_direction},
      {6, "effectiveness direction", effectiveness_direction},
      {7, "unit-level exactness", unit_exactness},
      {8, "determinism", determinism},
  };
  std::vector<std::pair<int, std::string>> lines;
  bool all = true;
  auto report = [&](int id, const char* name, const Outcome& o, double seconds) {
    std::ostringstream line;
    line << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " " << name << ": " << o.detail << " ["
         << fmt(seconds, 3) << " s]";
    std::cout << line.str() << std::endl;
    lines.emplace_back(id, line.str());
    all = all && o.pass;
  };
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    report(c.id, c.name, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  // Criterion 4 audits everything the other criteria computed in-process.
  Outcome local;
  local.pass = g_audit.n > 0 && g_audit.worst < 1e-6;
  local.detail = "max |base + sum(phi) - f(x)| " + fmt(g_audit.worst) + " over " + std::to_string(g_audit.n) +
                 " Kernel SHAP attributions (need < 1e-6)";
  report(4, "local accuracy", local, 0.0);

  std::sort(lines.begin(), lines.end());
  std::cout << "\nSummary\n";
  for (const auto& [id, line] : lines) std::cout << line.substr(0, line.find(':')) << '\n';
  return all ? 0 : 1;
}
