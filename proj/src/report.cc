#include "aex/report.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "aex/errors.h"

namespace aex {

namespace {

constexpr Rgb kRedLight{255, 228, 225};
constexpr Rgb kRedDark{170, 10, 20};
constexpr Rgb kBlueLight{228, 236, 255};
constexpr Rgb kBlueDark{15, 45, 165};

// xterm-256 background colors, lightest first.
constexpr std::array<int, 8> kRedAnsi{224, 217, 210, 203, 196, 160, 124, 88};
constexpr std::array<int, 8> kBlueAnsi{189, 153, 111, 75, 33, 27, 20, 18};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos) s = std::string(buf + (buf[0] == '-' ? 1 : 0));
  return s;
}

std::string signed_fixed(double v) { return (v >= 0 ? "+" : "") + fixed(v, 4); }

std::string feature_name(std::size_t f, const RenderOptions& opts) {
  if (f < opts.feature_names.size()) return opts.feature_names[f];
  return "X" + std::to_string(f + 1);
}

std::string html_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

struct Cell {
  std::string text;
  std::optional<bool> contributing;  // unset for plain cells
  double t = 0;
};

using Row = std::vector<Cell>;

std::vector<std::string> header(std::size_t display) {
  std::vector<std::string> h{"Feature"};
  for (std::size_t k = 1; k <= display; ++k) h.push_back("Contributing " + std::to_string(k));
  for (std::size_t k = 1; k <= display; ++k) h.push_back("Offsetting " + std::to_string(k));
  h.push_back("True value");
  return h;
}

void append_entries(Row& row, const std::vector<FeatureContribution>& entries, bool contributing, double scale,
                    const RenderOptions& opts) {
  for (std::size_t k = 0; k < opts.display_count; ++k) {
    if (k < entries.size()) {
      const auto& c = entries[k];
      const double t = scale > 0 ? std::abs(c.shap) / scale : 0.0;
      row.push_back({feature_name(c.feature, opts) + " " + signed_fixed(c.shap), contributing, t});
    } else {
      row.push_back({"", std::nullopt, 0});
    }
  }
}

std::vector<Row> table_rows(const Explanation& e, const RenderOptions& opts) {
  std::vector<Row> rows;
  for (const auto& fe : e.per_feature) {
    double scale = 0;
    for (const auto& c : fe.contributing) scale = std::max(scale, std::abs(c.shap));
    for (const auto& c : fe.offsetting) scale = std::max(scale, std::abs(c.shap));
    Row row{{feature_name(fe.explained_feature, opts), std::nullopt, 0}};
    append_entries(row, fe.contributing, true, scale, opts);
    append_entries(row, fe.offsetting, false, scale, opts);
    row.push_back({fixed(fe.true_value, 4), std::nullopt, 0});
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string terminal_table(const std::string& caption, const std::vector<std::string>& head,
                           const std::vector<Row>& rows) {
  std::vector<std::size_t> width(head.size());
  for (std::size_t c = 0; c < head.size(); ++c) width[c] = head[c].size();
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].text.size());
  }
  std::ostringstream os;
  os << caption << '\n';
  for (std::size_t c = 0; c < head.size(); ++c) os << (c ? " | " : "") << pad(head[c], width[c]);
  os << '\n';
  for (std::size_t c = 0; c < head.size(); ++c) os << (c ? "-+-" : "") << std::string(width[c], '-');
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) os << " | ";
      const Cell& cell = r[c];
      if (cell.contributing) {
        const int level = shade_level(cell.t);
        const int bg = (*cell.contributing ? kRedAnsi : kBlueAnsi)[static_cast<std::size_t>(level)];
        os << "\x1b[" << (level >= 4 ? "97" : "30") << ";48;5;" << bg << 'm' << pad(cell.text, width[c]) << "\x1b[0m";
      } else {
        os << pad(cell.text, width[c]);
      }
    }
    os << '\n';
  }
  return os.str();
}

std::string html_table(const std::string& caption, const std::vector<std::string>& head,
                       const std::vector<Row>& rows) {
  std::ostringstream os;
  os << "<h2 style=\"font-size:1.05em;margin:1.2em 0 0.4em\">" << html_escape(caption) << "</h2>\n";
  os << "<table style=\"border-collapse:collapse;font-family:monospace;font-size:0.95em\">\n<tr>";
  for (const auto& h : head) {
    os << "<th style=\"border:1px solid #999;padding:3px 8px;background:#eee\">" << html_escape(h) << "</th>";
  }
  os << "</tr>\n";
  for (const auto& r : rows) {
    os << "<tr>";
    for (const auto& cell : r) {
      os << "<td style=\"border:1px solid #999;padding:3px 8px";
      if (cell.contributing) {
        const Rgb c = shade(*cell.contributing, cell.t);
        os << ";background:rgb(" << c.r << ',' << c.g << ',' << c.b << ");color:" << (cell.t > 0.5 ? "#fff" : "#000");
      }
      os << "\">" << html_escape(cell.text) << "</td>";
    }
    os << "</tr>\n";
  }
  os << "</table>\n";
  return os.str();
}

std::string html_document(const std::string& body, const RenderOptions& opts) {
  std::ostringstream os;
  os << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>" << html_escape(opts.title)
     << "</title>\n</head>\n<body style=\"font-family:sans-serif;margin:1.5em\">\n<h1 style=\"font-size:1.3em\">"
     << html_escape(opts.title) << "</h1>\n"
     << body;
  if (opts.stamp) os << "<p style=\"color:#666;font-size:0.85em\">" << html_escape(*opts.stamp) << "</p>\n";
  os << "</body>\n</html>\n";
  return os.str();
}

bool by_magnitude(const FeatureContribution& l, const FeatureContribution& r) {
  return std::abs(l.shap) > std::abs(r.shap);
}

std::string caption_of(const Explanation& e) {
  return "Instance " + std::to_string(e.instance_id) + " (anomaly score " + fixed(e.anomaly_score, 6) + ")";
}

}  // namespace

Sink parse_sink(const std::string& name) {
  if (name == "terminal") return Sink::kTerminal;
  if (name == "html") return Sink::kHtml;
  throw ValidationError("output format must be 'terminal' or 'html', got '" + name + "'");
}

Rgb shade(bool contributing, double t) {
  t = std::clamp(t, 0.0, 1.0);
  const Rgb lo = contributing ? kRedLight : kBlueLight;
  const Rgb hi = contributing ? kRedDark : kBlueDark;
  auto mix = [t](int a, int b) { return static_cast<int>(std::lround(a + (b - a) * t)); };
  return {mix(lo.r, hi.r), mix(lo.g, hi.g), mix(lo.b, hi.b)};
}

int shade_level(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return std::min(7, static_cast<int>(t * 8.0));
}

std::string render_table(const Explanation& e, Sink sink, const RenderOptions& opts) {
  return render_tables({e}, sink, opts);
}

std::string render_tables(const std::vector<Explanation>& es, Sink sink, const RenderOptions& opts) {
  const auto head = header(opts.display_count);
  std::string body;
  for (const auto& e : es) {
    const auto rows = table_rows(e, opts);
    body += sink == Sink::kHtml ? html_table(caption_of(e), head, rows) : terminal_table(caption_of(e), head, rows);
  }
  if (es.empty()) {
    body = sink == Sink::kHtml ? html_table("No anomalies", head, {}) : terminal_table("No anomalies", head, {});
  }
  return sink == Sink::kHtml ? html_document(body, opts) : body;
}

std::string render_total_errors(const std::vector<TotalErrorItem>& items, Sink sink, const RenderOptions& opts) {
  auto head = header(opts.display_count);
  head.front() = "Target";
  head.back() = "Score";
  std::string body;
  for (const auto& item : items) {
    const Attribution& a = item.attribution;
    Require(a.phi.size() == item.x.size(), "render_total_errors: width mismatch");
    // Positive phi raises the total error, which is the contributing direction.
    std::vector<FeatureContribution> up, down;
    double scale = 0;
    for (Eigen::Index j = 0; j < a.phi.size(); ++j) {
      if (a.phi[j] == 0.0) continue;
      (a.phi[j] > 0 ? up : down).push_back({static_cast<std::size_t>(j), a.phi[j], item.x[j]});
      scale = std::max(scale, std::abs(a.phi[j]));
    }
    std::stable_sort(up.begin(), up.end(), by_magnitude);
    std::stable_sort(down.begin(), down.end(), by_magnitude);
    Row row{{"total error", std::nullopt, 0}};
    append_entries(row, up, true, scale, opts);
    append_entries(row, down, false, scale, opts);
    row.push_back({fixed(a.target_value, 6), std::nullopt, 0});
    const std::string caption = "Instance " + std::to_string(item.instance) + " total reconstruction error (base " +
                                fixed(a.base, 6) + ")";
    body += sink == Sink::kHtml ? html_table(caption, head, {row}) : terminal_table(caption, head, {row});
  }
  if (items.empty()) {
    body = sink == Sink::kHtml ? html_table("No anomalies", head, {}) : terminal_table("No anomalies", head, {});
  }
  return sink == Sink::kHtml ? html_document(body, opts) : body;
}

Attribution attribution_from_json(const nlohmann::json& j) {
  try {
    Attribution a;
    const auto& target = j.at("target");
    a.target_feature = target.is_string() ? kTotalErrorTarget : target.get<std::ptrdiff_t>();
    a.base = j.at("base").get<double>();
    const auto phi = j.at("phi").get<std::vector<double>>();
    a.phi = Eigen::Map<const Vector>(phi.data(), static_cast<Eigen::Index>(phi.size()));
    a.n_samples_used = j.value("n_samples", std::size_t{0});
    a.target_value = a.base + a.phi.sum();
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed attribution JSON: ") + e.what());
  }
}

Explanation explanation_from_json(const nlohmann::json& j) {
  try {
    Explanation e;
    e.instance_id = j.at("instance").get<std::size_t>();
    e.anomaly_score = j.at("anomaly_score").get<double>();
    auto contributions = [](const nlohmann::json& list) {
      std::vector<FeatureContribution> out;
      for (const auto& c : list) {
        out.push_back({c.at("feature").get<std::size_t>(), c.at("shap").get<double>(), c.at("true_value").get<double>()});
      }
      return out;
    };
    for (const auto& f : j.at("features")) {
      FeatureExplanation fe;
      fe.explained_feature = f.at("explained_feature").get<std::size_t>();
      fe.true_value = f.at("true_value").get<double>();
      fe.predicted_value = f.at("predicted_value").get<double>();
      fe.contributing = contributions(f.at("contributing"));
      fe.offsetting = contributions(f.at("offsetting"));
      if (f.contains("attribution")) fe.attribution = attribution_from_json(f.at("attribution"));
      e.per_feature.push_back(std::move(fe));
    }
    return e;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed explanation JSON: ") + e.what());
  }
}

}  // namespace aex
