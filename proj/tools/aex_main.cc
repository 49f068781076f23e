// Command-line front end: data generation, training, detection, explanation,
// evaluation harnesses and report rendering.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "aex/autoencoder.h"
#include "aex/dataset.h"
#include "aex/errors.h"
#include "aex/evaluation.h"
#include "aex/explainer.h"
#include "aex/report.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kDocVersion = 1;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("AEX_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw aex::ValidationError(std::string("AEX_SEED must be a non-negative integer, got '") + env + "'");
  }
  return 0;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw aex::IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw aex::IoError("write to '" + path + "' failed");
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw aex::IoError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw aex::IoError("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::vector<std::size_t> parse_index_list(const std::string& text, const std::string& what) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoul(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw aex::ValidationError(what + ": '" + item + "' is not a non-negative integer");
    }
  }
  return out;
}

// A trained model together with the scaling it expects on input rows.
struct LoadedModel {
  aex::Autoencoder model;
  std::optional<aex::NormStats> norm;
};

LoadedModel load_model_with_norm(const std::string& path) {
  if (!fs::exists(path)) throw aex::IoError("model file '" + path + "' does not exist");
  LoadedModel out{aex::load_model(path), std::nullopt};
  if (const auto sidecar = aex::model_norm_sidecar(path)) {
    const fs::path p = fs::path(path).parent_path() / *sidecar;
    out.norm = read_json_file(p.string()).get<aex::NormStats>();
  }
  return out;
}

aex::Dataset load_data_for(const LoadedModel& m, const std::string& path) {
  aex::Dataset d = aex::load_csv(path);
  aex::Require(d.n_features() == m.model.n_features(),
               "'" + path + "' has " + std::to_string(d.n_features()) + " features, the model expects " +
                   std::to_string(m.model.n_features()));
  return m.norm ? m.norm->apply(d) : d;
}

// Rows used as the reference distribution: label-0 rows when labels exist.
aex::Matrix reference_rows(const aex::Dataset& d) {
  if (!d.labels()) return d.rows();
  const auto normal = d.rows_with_label(0);
  return normal.empty() ? d.rows() : d.select_rows(normal).rows();
}

aex::TrainConfig train_config_from(const std::string& hidden, std::size_t epochs, std::size_t batch, double lr,
                                   double momentum, const std::string& hidden_act, const std::string& output_act,
                                   std::uint64_t seed) {
  aex::TrainConfig cfg;
  cfg.hidden_sizes = parse_index_list(hidden, "--hidden");
  cfg.epochs = epochs;
  cfg.batch_size = batch;
  cfg.learning_rate = lr;
  cfg.momentum = momentum;
  cfg.hidden_activation = aex::parse_activation(hidden_act);
  cfg.output_activation = aex::parse_activation(output_act);
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

// Flags shared by the commands that train a model.
struct TrainFlags {
  std::string hidden = "16,8,16";
  std::size_t epochs = 50;
  std::size_t batch = 32;
  double lr = aex::TrainConfig{}.learning_rate;
  double momentum = 0.9;
  std::string hidden_act = "relu";
  std::string output_act = "identity";

  void attach(CLI::App* cmd) {
    cmd->add_option("--hidden", hidden, "Comma-separated hidden layer widths")->capture_default_str();
    cmd->add_option("--epochs", epochs)->capture_default_str();
    cmd->add_option("--batch-size", batch)->capture_default_str();
    cmd->add_option("--lr", lr, "Learning rate")->capture_default_str();
    cmd->add_option("--momentum", momentum)->capture_default_str();
    cmd->add_option("--hidden-activation", hidden_act)->capture_default_str();
    cmd->add_option("--output-activation", output_act)->capture_default_str();
  }
  aex::TrainConfig config(std::uint64_t seed) const {
    return train_config_from(hidden, epochs, batch, lr, momentum, hidden_act, output_act, seed);
  }
};

// ---------------------------------------------------------------------------

struct GenDataArgs {
  std::string kind = "linear";
  std::size_t rows = 10000;
  std::size_t anomalies = 500;
  std::size_t extra = 16;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_gen_data(const GenDataArgs& a) {
  const std::uint64_t seed = resolve_seed(a.seed);
  aex::Require(a.anomalies <= a.rows, "--anomalies exceeds --rows");
  aex::Dataset d = a.kind == "linear"   ? aex::gen_linear_artificial(a.rows, a.anomalies, seed)
                   : a.kind == "binary" ? aex::gen_binary_logic(a.rows, a.anomalies, a.extra, seed)
                                        : throw aex::ValidationError("--kind must be 'linear' or 'binary'");
  write_text(a.out, aex::format_csv(d));
  return 0;
}

struct TrainArgs {
  std::string data;
  std::string out;
  std::optional<int> perfect;
  bool no_normalize = false;
  bool all_rows = false;
  TrainFlags train;
  std::optional<std::uint64_t> seed;
};

int run_train(const TrainArgs& a) {
  aex::Require(!a.out.empty(), "--out is required");
  if (a.perfect) {
    aex::save_model(aex::perfect_linear_ae(*a.perfect), a.out);
    return 0;
  }
  aex::Require(!a.data.empty(), "--data is required unless --perfect is given");
  const std::uint64_t seed = resolve_seed(a.seed);
  const aex::TrainConfig cfg = a.train.config(seed);
  aex::Dataset d = aex::load_csv(a.data);
  std::optional<std::string> sidecar;
  if (!a.no_normalize) {
    auto norm = aex::minmax_normalize(d);
    const fs::path out(a.out);
    sidecar = out.stem().string() + ".norm.json";
    write_json((out.parent_path() / *sidecar).string(), json(norm.stats));
    d = std::move(norm.data);
  }
  const aex::Matrix rows = a.all_rows ? d.rows() : reference_rows(d);
  aex::Autoencoder m = aex::build_autoencoder(d.n_features(), cfg);
  const aex::TrainReport report = aex::train(m, rows, cfg);
  aex::save_model(m, a.out, sidecar);
  std::cerr << "trained on " << rows.rows() << " rows, final loss "
            << aex::format_double(report.epoch_loss.empty() ? 0.0 : report.epoch_loss.back()) << '\n';
  return 0;
}

struct DetectArgs {
  std::string model;
  std::string data;
  std::string out;
  std::string format = "json";
};

int run_detect(const DetectArgs& a) {
  aex::Require(a.format == "json" || a.format == "csv", "--format must be 'json' or 'csv'");
  const LoadedModel m = load_model_with_norm(a.model);
  const aex::Dataset d = load_data_for(m, a.data);
  const aex::Vector scores = aex::anomaly_scores(m.model, d.rows());
  const double threshold =
      d.n_rows() == 0 ? 0.0 : aex::iqr_threshold({scores.data(), static_cast<std::size_t>(scores.size())});
  const auto rows = aex::select_anomalies(m.model, d.rows(), 0);
  if (a.format == "csv") {
    std::string text = "row,score\n";
    for (std::size_t r : rows) {
      text += std::to_string(r) + "," + aex::format_double(scores[static_cast<Eigen::Index>(r)]) + "\n";
    }
    write_text(a.out, text);
    return 0;
  }
  json list = json::array();
  for (std::size_t r : rows) list.push_back({{"row", r}, {"score", scores[static_cast<Eigen::Index>(r)]}});
  write_json(a.out, {{"schema", "aex.anomalies"},
                     {"version", kDocVersion},
                     {"threshold", threshold},
                     {"n_rows", d.n_rows()},
                     {"anomalies", std::move(list)}});
  return 0;
}

struct ExplainArgs {
  std::string model;
  std::string data;
  std::string background;
  std::string rows;
  std::size_t max_anomalies = 0;
  double error_percent = 0.8;
  std::string selection = "top5";
  std::string method = "shap";
  std::size_t background_size = 200;
  std::optional<std::uint64_t> seed;
  std::size_t display_count = 3;
  bool total_error = false;
  std::string out;
  std::string html;
  std::optional<std::string> stamp;
  bool quiet = false;
};

int run_explain(const ExplainArgs& a) {
  aex::ExplainConfig cfg;
  cfg.error_percent = a.error_percent;
  cfg.selection = aex::Selection::parse(a.selection);
  cfg.method = aex::parse_method(a.method);
  cfg.background_size = a.background_size;
  cfg.seed = resolve_seed(a.seed);
  cfg.validate();
  aex::Require(a.display_count >= 1, "--display-count must be >= 1");

  const LoadedModel m = load_model_with_norm(a.model);
  const aex::Dataset d = load_data_for(m, a.data);
  const aex::Matrix ref = a.background.empty() ? reference_rows(d) : load_data_for(m, a.background).rows();
  aex::Require(ref.rows() > 0, "background source has no rows");
  const aex::BackgroundSet bg = aex::sample_background(
      ref, std::min<std::size_t>(cfg.background_size, static_cast<std::size_t>(ref.rows())),
      aex::derive_seed(cfg.seed, 0));

  std::vector<std::size_t> rows;
  if (a.rows.empty()) {
    rows = aex::select_anomalies(m.model, d.rows(), a.max_anomalies);
  } else {
    rows = parse_index_list(a.rows, "--rows");
    for (std::size_t r : rows) aex::Require(r < d.n_rows(), "--rows: row " + std::to_string(r) + " out of range");
  }

  aex::RenderOptions ropts;
  ropts.display_count = a.display_count;
  ropts.feature_names = d.feature_names();
  ropts.stamp = a.stamp;

  json doc{{"version", kDocVersion},
           {"method", aex::to_string(cfg.method)},
           {"background_size", bg.size()},
           {"seed", cfg.seed},
           {"feature_names", d.feature_names()}};
  std::string terminal;
  if (a.total_error) {
    doc["schema"] = "aex.total_error";
    json list = json::array();
    std::vector<aex::TotalErrorItem> items;
    for (std::size_t r : rows) {
      aex::ExplainConfig row_cfg = cfg;
      row_cfg.seed = aex::derive_seed(cfg.seed, r + 1);
      aex::TotalErrorItem item{r, {}, d.row(r)};
      item.attribution = aex::explain_total_error(m.model, item.x, bg, row_cfg);
      list.push_back({{"instance", r}, {"attribution", item.attribution}});
      items.push_back(std::move(item));
    }
    doc["attributions"] = std::move(list);
    terminal = aex::render_total_errors(items, aex::Sink::kTerminal, ropts);
    if (!a.html.empty()) write_text(a.html, aex::render_total_errors(items, aex::Sink::kHtml, ropts));
  } else {
    doc["schema"] = "aex.explanation";
    doc["error_percent"] = cfg.error_percent;
    doc["selection"] = cfg.selection.name();
    json list = json::array();
    std::vector<aex::Explanation> all;
    for (std::size_t r : rows) {
      aex::ExplainConfig row_cfg = cfg;
      row_cfg.seed = aex::derive_seed(cfg.seed, r + 1);
      aex::Explanation e = aex::explain_instance(m.model, d.row(r), bg, row_cfg, r);
      json item = e;
      item["explanatory_set"] = aex::build_explanatory_feature_set(e, cfg.selection);
      list.push_back(std::move(item));
      all.push_back(std::move(e));
    }
    doc["explanations"] = std::move(list);
    terminal = aex::render_tables(all, aex::Sink::kTerminal, ropts);
    if (!a.html.empty()) write_text(a.html, aex::render_tables(all, aex::Sink::kHtml, ropts));
  }
  if (!a.out.empty()) write_json(a.out, doc);
  if (!a.quiet) {
    if (a.out.empty()) {
      std::cout << doc.dump(2) << '\n';
    } else {
      std::cout << terminal;
    }
  }
  return 0;
}

struct RenderArgs {
  std::string in;
  std::string format = "terminal";
  std::string out;
  std::size_t display_count = 3;
  std::optional<std::string> stamp;
};

int run_render(const RenderArgs& a) {
  const aex::Sink sink = aex::parse_sink(a.format);
  aex::Require(a.display_count >= 1, "--display-count must be >= 1");
  const json doc = read_json_file(a.in);
  aex::RenderOptions ropts;
  ropts.display_count = a.display_count;
  ropts.stamp = a.stamp;
  if (doc.contains("feature_names")) ropts.feature_names = doc["feature_names"].get<std::vector<std::string>>();
  const std::string schema = doc.value("schema", "");
  if (schema == "aex.explanation") {
    std::vector<aex::Explanation> es;
    for (const auto& item : doc.at("explanations")) es.push_back(aex::explanation_from_json(item));
    write_text(a.out, aex::render_tables(es, sink, ropts));
    return 0;
  }
  throw aex::ValidationError("'" + a.in + "' is not an explanation document (schema '" + schema + "')");
}

struct CorrectnessArgs {
  std::string kind = "linear";
  std::string data;
  std::size_t rows = 20000;
  std::size_t anomalies = 500;
  std::string models = "1,2,3";
  std::size_t background_size = 200;
  std::optional<double> error_percent;
  std::size_t top_k = 2;
  std::optional<std::size_t> restarts;
  TrainFlags train;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_eval_correctness(const CorrectnessArgs& a, bool train_flags_given) {
  const std::uint64_t seed = resolve_seed(a.seed);
  json report;
  if (a.kind == "linear") {
    const aex::Dataset d = a.data.empty() ? aex::gen_linear_artificial(a.rows, a.anomalies, seed) : aex::load_csv(a.data);
    std::vector<int> models;
    for (std::size_t id : parse_index_list(a.models, "--models")) models.push_back(static_cast<int>(id));
    aex::CorrectnessConfig cfg;
    cfg.background_size = a.background_size;
    cfg.error_percent = a.error_percent.value_or(cfg.error_percent);
    cfg.selection = aex::Selection::top_k(a.top_k);
    cfg.max_anomalies = a.anomalies;
    cfg.seed = seed;
    report = aex::eval_correctness(d, models, cfg);
  } else if (a.kind == "binary") {
    aex::BinaryCorrectnessConfig cfg = aex::BinaryCorrectnessConfig::defaults();
    cfg.n_rows = a.rows;
    cfg.n_anomalies = a.anomalies;
    cfg.background_size = a.background_size;
    cfg.error_percent = a.error_percent.value_or(cfg.error_percent);
    cfg.selection = aex::Selection::top_k(a.top_k);
    cfg.restarts = a.restarts.value_or(cfg.restarts);
    cfg.seed = seed;
    if (train_flags_given) cfg.train = a.train.config(seed);
    report = aex::eval_correctness_binary(cfg);
  } else {
    throw aex::ValidationError("--kind must be 'linear' or 'binary'");
  }
  report["version"] = kDocVersion;
  report["seed"] = seed;
  write_json(a.out, report);
  return 0;
}

struct RobustnessArgs {
  std::string data;
  std::size_t rows = 0;
  std::size_t repetitions = 5;
  std::size_t max_anomalies = 100;
  std::size_t background_size = 200;
  std::string noise_features;
  TrainFlags train;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string csv;
};

int run_eval_robustness(const RobustnessArgs& a, bool train_flags_given) {
  const std::uint64_t seed = resolve_seed(a.seed);
  aex::RobustnessConfig cfg = aex::RobustnessConfig::synthetic_defaults();
  cfg.repetitions = a.repetitions;
  cfg.max_anomalies = a.max_anomalies;
  cfg.background_size = a.background_size;
  cfg.seed = seed;
  if (!a.noise_features.empty()) cfg.noise_features = parse_index_list(a.noise_features, "--noise-features");
  if (train_flags_given) cfg.train = a.train.config(seed);
  const aex::Dataset d = a.data.empty() ? aex::synthetic_evaluation_dataset(a.rows, seed) : aex::load_csv(a.data);
  const aex::RobustnessReport r = aex::eval_robustness(d, cfg);
  json doc = r;
  doc["version"] = kDocVersion;
  doc["seed"] = seed;
  write_json(a.out, doc);
  if (!a.csv.empty()) write_text(a.csv, aex::robustness_csv(r));
  return 0;
}

struct EffectivenessArgs {
  std::string model;
  std::string data;
  std::size_t rows = aex::EffectivenessSetup{}.n_rows;
  std::size_t max_anomalies = 200;
  std::size_t background_size = 200;
  double error_percent = 0.8;
  std::string selection = "top5";
  TrainFlags train;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string csv;
};

int run_eval_effectiveness(const EffectivenessArgs& a, bool train_flags_given) {
  const std::uint64_t seed = resolve_seed(a.seed);
  aex::EffectivenessConfig cfg;
  cfg.max_anomalies = a.max_anomalies;
  cfg.error_percent = a.error_percent;
  cfg.selection = aex::Selection::parse(a.selection);
  cfg.seed = seed;

  aex::EffectivenessReport r;
  if (a.model.empty()) {
    aex::EffectivenessSetup setup;
    setup.n_rows = a.rows;
    setup.background_size = a.background_size;
    setup.seed = seed;
    if (train_flags_given) setup.train = a.train.config(seed);
    if (!a.data.empty()) setup.data = aex::load_csv(a.data);
    r = aex::run_effectiveness_experiment(setup, cfg);
  } else {
    aex::Require(!a.data.empty(), "--data is required with --model");
    const LoadedModel m = load_model_with_norm(a.model);
    const aex::Dataset d = load_data_for(m, a.data);
    const aex::Matrix ref = reference_rows(d);
    const auto rows = aex::select_anomalies(m.model, d.rows(), a.max_anomalies);
    aex::Matrix anomalies(static_cast<Eigen::Index>(rows.size()), d.rows().cols());
    for (std::size_t k = 0; k < rows.size(); ++k) anomalies.row(static_cast<Eigen::Index>(k)) = d.rows().row(static_cast<Eigen::Index>(rows[k]));
    const aex::BackgroundSet bg = aex::sample_background(
        ref, std::min<std::size_t>(a.background_size, static_cast<std::size_t>(ref.rows())), aex::derive_seed(seed, 0));
    r = aex::eval_effectiveness(m.model, anomalies, bg, d.column_means(), cfg);
  }
  json doc = r;
  doc["version"] = kDocVersion;
  doc["seed"] = seed;
  write_json(a.out, doc);
  if (!a.csv.empty()) write_text(a.csv, aex::effectiveness_csv(r));
  return 0;
}

bool any_given(CLI::App* cmd, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    if (cmd->count(n) > 0) return true;
  }
  return false;
}

const std::initializer_list<const char*> kTrainFlagNames{"--hidden",   "--epochs",           "--batch-size",
                                                         "--lr",       "--momentum",         "--hidden-activation",
                                                         "--output-activation"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Autoencoder anomaly explanations with Kernel SHAP"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "aex 1.0.0");

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic dataset as CSV");
  gen_cmd->add_option("--kind", gen.kind, "linear | binary")->capture_default_str();
  gen_cmd->add_option("--rows", gen.rows)->capture_default_str();
  gen_cmd->add_option("--anomalies", gen.anomalies)->capture_default_str();
  gen_cmd->add_option("--extra", gen.extra, "Extra random columns (binary kind)")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--out", gen.out, "Output CSV (stdout when omitted)");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train an autoencoder, or write a hand-weighted one");
  train_cmd->add_option("--data", tr.data, "Training CSV");
  train_cmd->add_option("--out", tr.out, "Model JSON")->required();
  train_cmd->add_option("--perfect", tr.perfect, "Write hand-weighted linear model 1, 2 or 3")
      ->check(CLI::Range(1, 3));
  train_cmd->add_flag("--no-normalize", tr.no_normalize, "Train on raw values");
  train_cmd->add_flag("--all-rows", tr.all_rows, "Train on every row, not only label-0 rows");
  train_cmd->add_option("--seed", tr.seed);
  tr.train.attach(train_cmd);

  DetectArgs det;
  auto* detect_cmd = app.add_subcommand("detect", "List rows scoring above the IQR threshold");
  detect_cmd->add_option("--model", det.model)->required();
  detect_cmd->add_option("--data", det.data)->required();
  detect_cmd->add_option("--out", det.out, "Output file (stdout when omitted)");
  detect_cmd->add_option("--format", det.format, "json | csv")->capture_default_str();

  ExplainArgs ex;
  auto* explain_cmd = app.add_subcommand("explain", "Explain anomalies with SHAP or LIME");
  explain_cmd->add_option("--model", ex.model)->required();
  explain_cmd->add_option("--data", ex.data)->required();
  explain_cmd->add_option("--background", ex.background, "CSV to sample the background from");
  explain_cmd->add_option("--rows", ex.rows, "Comma-separated rows; default: detected anomalies");
  explain_cmd->add_option("--max-anomalies", ex.max_anomalies, "Limit on detected anomalies (0 = all)");
  explain_cmd->add_option("--error-percent", ex.error_percent)->capture_default_str();
  explain_cmd->add_option("--selection", ex.selection, "mean | median | top<k>")->capture_default_str();
  explain_cmd->add_option("--method", ex.method, "shap | lime")->capture_default_str();
  explain_cmd->add_option("--background-size", ex.background_size)->capture_default_str();
  explain_cmd->add_option("--seed", ex.seed);
  explain_cmd->add_option("--display-count", ex.display_count)->capture_default_str();
  explain_cmd->add_flag("--total-error", ex.total_error, "Attribute the total reconstruction error instead");
  explain_cmd->add_option("--out", ex.out, "Explanation JSON");
  explain_cmd->add_option("--html", ex.html, "Also write an HTML report");
  explain_cmd->add_option("--stamp", ex.stamp, "Text added to the HTML footer");
  explain_cmd->add_flag("--quiet", ex.quiet, "Print nothing to stdout");

  RenderArgs rd;
  auto* render_cmd = app.add_subcommand("render", "Render an explanation JSON document");
  render_cmd->add_option("--in", rd.in)->required();
  render_cmd->add_option("--format", rd.format, "terminal | html")->capture_default_str();
  render_cmd->add_option("--out", rd.out, "Output file (stdout when omitted)");
  render_cmd->add_option("--display-count", rd.display_count)->capture_default_str();
  render_cmd->add_option("--stamp", rd.stamp, "Text added to the HTML footer");

  CorrectnessArgs cor;
  auto* cor_cmd = app.add_subcommand("eval-correctness", "Ground-truth correctness of explanatory sets");
  cor_cmd->add_option("--kind", cor.kind, "linear (hand-weighted models) | binary (trained)")->capture_default_str();
  cor_cmd->add_option("--data", cor.data, "Linear dataset CSV; generated when omitted");
  cor_cmd->add_option("--rows", cor.rows)->capture_default_str();
  cor_cmd->add_option("--anomalies", cor.anomalies)->capture_default_str();
  cor_cmd->add_option("--models", cor.models)->capture_default_str();
  cor_cmd->add_option("--background-size", cor.background_size)->capture_default_str();
  cor_cmd->add_option("--error-percent", cor.error_percent, "Default 0.8 (linear) or 0.5 (binary)");
  cor_cmd->add_option("--top-k", cor.top_k)->capture_default_str();
  cor_cmd->add_option("--restarts", cor.restarts, "Binary kind: training runs, lowest loss kept (default 2)");
  cor_cmd->add_option("--seed", cor.seed);
  cor_cmd->add_option("--out", cor.out, "Report JSON (stdout when omitted)");
  cor.train.attach(cor_cmd);

  RobustnessArgs rob;
  auto* rob_cmd = app.add_subcommand("eval-robustness", "MRR of an injected noise feature, SHAP vs LIME");
  rob_cmd->add_option("--data", rob.data, "Dataset CSV; a synthetic one is generated when omitted");
  rob_cmd->add_option("--rows", rob.rows, "Rows of the synthetic dataset (0 = default)");
  rob_cmd->add_option("--repetitions", rob.repetitions)->capture_default_str();
  rob_cmd->add_option("--max-anomalies", rob.max_anomalies)->capture_default_str();
  rob_cmd->add_option("--background-size", rob.background_size)->capture_default_str();
  rob_cmd->add_option("--noise-features", rob.noise_features, "Comma-separated columns; default: one random");
  rob_cmd->add_option("--seed", rob.seed);
  rob_cmd->add_option("--out", rob.out, "Report JSON (stdout when omitted)");
  rob_cmd->add_option("--csv", rob.csv, "Also write the grid as CSV");
  rob.train.attach(rob_cmd);

  EffectivenessArgs eff;
  auto* eff_cmd = app.add_subcommand("eval-effectiveness", "Score reduction after substituting explained features");
  eff_cmd->add_option("--model", eff.model, "Trained model; trains on --data or synthetic data when omitted");
  eff_cmd->add_option("--data", eff.data);
  eff_cmd->add_option("--rows", eff.rows, "Rows of the synthetic dataset")->capture_default_str();
  eff_cmd->add_option("--max-anomalies", eff.max_anomalies)->capture_default_str();
  eff_cmd->add_option("--background-size", eff.background_size)->capture_default_str();
  eff_cmd->add_option("--error-percent", eff.error_percent)->capture_default_str();
  eff_cmd->add_option("--selection", eff.selection)->capture_default_str();
  eff_cmd->add_option("--seed", eff.seed);
  eff_cmd->add_option("--out", eff.out, "Report JSON (stdout when omitted)");
  eff_cmd->add_option("--csv", eff.csv, "Also write the summary row as CSV");
  eff.train.attach(eff_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen_cmd) return run_gen_data(gen);
    if (*train_cmd) return run_train(tr);
    if (*detect_cmd) return run_detect(det);
    if (*explain_cmd) return run_explain(ex);
    if (*render_cmd) return run_render(rd);
    if (*cor_cmd) return run_eval_correctness(cor, any_given(cor_cmd, kTrainFlagNames));
    if (*rob_cmd) return run_eval_robustness(rob, any_given(rob_cmd, kTrainFlagNames));
    if (*eff_cmd) return run_eval_effectiveness(eff, any_given(eff_cmd, kTrainFlagNames));
  } catch (const aex::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
