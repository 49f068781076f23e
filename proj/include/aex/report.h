#ifndef AEX_REPORT_H_
#define AEX_REPORT_H_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "aex/attribution.h"
#include "aex/explainer.h"
#include "json.hpp"

namespace aex {

enum class Sink { kTerminal, kHtml };
Sink parse_sink(const std::string& name);

struct RenderOptions {
  // Contributing and offsetting entries shown per explained feature.
  std::size_t display_count = 3;
  // Column names; features are shown as "X<i+1>" when empty.
  std::vector<std::string> feature_names;
  std::string title = "Anomaly explanation";
  // Free text appended to HTML output, e.g. a timestamp. Absent by default so
  // output stays byte-stable.
  std::optional<std::string> stamp;
};

struct Rgb {
  int r = 0;
  int g = 0;
  int b = 0;
  bool operator==(const Rgb&) const = default;
};

// Shade for an entry with relative magnitude t = |phi| / max|phi| in [0, 1]:
// a linear blend from a light to a saturated anchor. Red for contributing,
// blue for offsetting.
Rgb shade(bool contributing, double t);
// Quantized shade index 0..7 used by the terminal sink.
int shade_level(double t);

// Table with one row per explained feature: the feature, its top contributing
// and offsetting features (name and phi), and the feature's true value.
std::string render_table(const Explanation& e, Sink sink, const RenderOptions& opts = {});
// Same layout for several explanations; the HTML variant is one document.
std::string render_tables(const std::vector<Explanation>& es, Sink sink, const RenderOptions& opts = {});

struct TotalErrorItem {
  std::size_t instance = 0;
  Attribution attribution;
  Vector x;
};

// One single-row table per instance: features raising the total error in
// red, features lowering it in blue.
std::string render_total_errors(const std::vector<TotalErrorItem>& items, Sink sink, const RenderOptions& opts = {});

Attribution attribution_from_json(const nlohmann::json& j);
Explanation explanation_from_json(const nlohmann::json& j);

}  // namespace aex

#endif  // AEX_REPORT_H_
