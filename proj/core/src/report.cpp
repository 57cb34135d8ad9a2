#include "biasaudit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "biasaudit/embedding_store.hpp"
#include "biasaudit/errors.hpp"

namespace biasaudit {

using nlohmann::json;

namespace {

[[noreturn]] void bad_input(const std::string& what) {
  throw Error(ErrorKind::MalformedRecord, what);
}

std::string csv_number(double v) {
  return std::isfinite(v) ? format_double(v) : std::string();
}

json json_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string short_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string category_title(Category c) {
  std::string s(to_string(c));
  s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::optional<Group> parse_group(const std::string& s) {
  if (s == "male_dominated") return Group::MaleDominated;
  if (s == "female_dominated") return Group::FemaleDominated;
  if (s == "overall") return Group::Overall;
  return std::nullopt;
}

}  // namespace

json suites_to_json(std::span<const AssociationSuite> suites) {
  json out = json::array();
  for (const auto& s : suites) {
    out.push_back({{"concept", s.concept_name},
                   {"encoder", s.encoder},
                   {"ii", s.ii},
                   {"itp", s.itp},
                   {"it", s.it},
                   {"tt", s.tt}});
  }
  return out;
}

std::vector<AssociationSuite> suites_from_json(const json& doc) {
  if (!doc.is_array()) bad_input("suites file must hold a JSON array");
  std::vector<AssociationSuite> out;
  try {
    for (const auto& e : doc) {
      AssociationSuite s;
      s.concept_name = concept_key(e.at("concept").get<std::string>());
      s.encoder = e.value("encoder", std::string("mean"));
      s.ii = e.at("ii").get<double>();
      s.itp = e.at("itp").get<double>();
      s.it = e.at("it").get<double>();
      s.tt = e.at("tt").get<double>();
      out.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    bad_input(std::string("bad suite entry: ") + e.what());
  }
  return out;
}

json rows_to_json(std::span<const BiasRow> rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"concept", r.concept_name},
                   {"category", to_string(r.category)},
                   {"dominance", to_string(r.dominance)},
                   {"mcas", r.mcas},
                   {"delta", r.delta},
                   {"alpha", r.alpha ? json(*r.alpha) : json(nullptr)},
                   {"alpha_defined", r.alpha_defined()}});
  }
  return out;
}

std::vector<BiasRow> rows_from_json(const json& doc) {
  if (!doc.is_array()) bad_input("rows must be a JSON array");
  std::vector<BiasRow> out;
  try {
    for (const auto& e : doc) {
      BiasRow r;
      r.concept_name = concept_key(e.at("concept").get<std::string>());
      auto cat = parse_category(e.at("category").get<std::string>());
      auto dom = parse_dominance(e.at("dominance").get<std::string>());
      if (!cat || !dom) bad_input("row '" + r.concept_name + "': bad category or dominance");
      r.category = *cat;
      r.dominance = *dom;
      r.mcas = e.at("mcas").get<double>();
      r.delta = e.at("delta").get<double>();
      if (auto it = e.find("alpha"); it != e.end() && !it->is_null()) {
        r.alpha = it->get<double>();
      }
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    bad_input(std::string("bad row entry: ") + e.what());
  }
  return out;
}

RowFixture fixture_from_json(const json& doc) {
  RowFixture f;
  if (doc.is_array()) {
    f.rows = rows_from_json(doc);
    return f;
  }
  if (!doc.is_object() || !doc.contains("rows")) {
    bad_input("expected a rows array or an object with 'rows'");
  }
  f.model = doc.value("model", std::string());
  f.rows = rows_from_json(doc.at("rows"));
  if (auto it = doc.find("published_summary"); it != doc.end()) {
    for (const auto& entry : *it) {
      auto group = parse_group(entry.value("group", std::string()));
      if (!group) bad_input("published_summary entry without a valid group");
      for (const auto& [key, value] : entry.items()) {
        if (key == "group") continue;
        if (!value.is_number()) bad_input("published '" + key + "' is not a number");
        f.published.push_back({*group, key, value.get<double>()});
      }
    }
  }
  return f;
}

json threshold_to_json(const ThresholdReport& report) {
  auto part = [](const Partition& p) {
    return json{{"n", p.n},
                {"alpha_n", p.alpha_n},
                {"alpha_mean", json_number(p.alpha_mean)},
                {"alpha_stddev", json_number(p.alpha_stddev)},
                {"concepts", p.concepts}};
  };
  return {{"threshold", report.threshold},
          {"delta_at_or_below", part(report.low)},
          {"delta_above", part(report.high)}};
}

std::string summary_csv(std::span<const GroupSummary> summaries) {
  std::string out =
      "group,n,delta_min,delta_max,delta_mean,delta_stderr,alpha_min,"
      "alpha_max,alpha_mean,alpha_stderr,alpha_undefined_count\n";
  for (const auto& s : summaries) {
    out += std::string(to_string(s.group)) + ',' + std::to_string(s.n);
    for (double v : {s.delta_min, s.delta_max, s.delta_mean, s.delta_stderr,
                     s.alpha_min, s.alpha_max, s.alpha_mean, s.alpha_stderr}) {
      out += ',' + csv_number(v);
    }
    out += ',' + std::to_string(s.alpha_undefined_count) + '\n';
  }
  return out;
}

std::string curve_csv(const LoessFit& fit) {
  std::string out = "x,y_hat\n";
  for (const auto& p : fit.fitted) {
    out += format_double(p.x) + ',' + format_double(p.y) + '\n';
  }
  return out;
}

std::string rows_markdown(std::span<const BiasRow> rows,
                          const PromptManifest* manifest) {
  std::ostringstream out;
  out << "| Target Type | Target Keyword | MCAS | δ | α |\n";
  out << "|---|---|---:|---:|---:|\n";
  std::optional<Category> last;
  for (const auto& r : rows) {
    std::string keyword = r.concept_name;
    if (manifest) {
      if (const TextTarget* t = manifest->find_keyword(r.concept_name)) {
        keyword = t->keyword;
      }
    }
    keyword += r.dominance == Dominance::MaleDominated ? "*" : "\\#";
    const std::string type =
        last == r.category ? std::string() : category_title(r.category);
    last = r.category;
    out << "| " << type << " | " << keyword << " | " << fixed(r.mcas, 2)
        << " | " << fixed(r.delta, 2) << " | "
        << (r.alpha ? fixed(*r.alpha, 2) : std::string("undefined")) << " |\n";
  }
  out << "\nδ: diffusion bias, α: bias amplification. "
         "\\* male-dominated, \\# female-dominated.\n";
  return out.str();
}

std::string summary_markdown(std::span<const GroupSummary> summaries,
                             std::span<const Discrepancy> discrepancies,
                             const std::string& model) {
  std::ostringstream out;
  if (!model.empty()) out << "## " << model << "\n\n";
  out << "| Group | n | δ min,max | Mean δ ± s.e. | α min,max | Mean α ± s.e. "
         "| α undefined |\n";
  out << "|---|---:|---|---:|---|---:|---:|\n";
  for (const auto& s : summaries) {
    out << "| " << to_string(s.group) << " | " << s.n << " | "
        << fixed(s.delta_min, 2) << "," << fixed(s.delta_max, 2) << " | "
        << fixed(s.delta_mean, 4) << " ± " << fixed(s.delta_stderr, 4) << " | "
        << fixed(s.alpha_min, 2) << "," << fixed(s.alpha_max, 2) << " | "
        << fixed(s.alpha_mean, 4) << " ± " << fixed(s.alpha_stderr, 4)
        << " | " << s.alpha_undefined_count << " |\n";
  }
  out << "\n### Notes\n\n";
  if (discrepancies.empty()) {
    out << "All published statistics are reproduced within tolerance.\n";
  }
  for (const auto& d : discrepancies) {
    out << "- " << to_string(d.group) << " " << d.statistic << ": published "
        << format_double(d.published) << ", recomputed "
        << format_double(d.recomputed) << " (difference "
        << fixed(d.recomputed - d.published, 4) << ", tolerance "
        << format_double(d.tolerance) << ")\n";
  }
  return out.str();
}

json discrepancies_to_json(std::span<const Discrepancy> discrepancies) {
  json out = json::array();
  for (const auto& d : discrepancies) {
    out.push_back({{"group", to_string(d.group)},
                   {"statistic", d.statistic},
                   {"published", d.published},
                   {"recomputed", json_number(d.recomputed)},
                   {"tolerance", d.tolerance}});
  }
  return out;
}

std::vector<Point> regression_points(std::span<const BiasRow> rows) {
  std::vector<Point> out;
  for (const auto& r : rows) {
    if (r.alpha) out.push_back({r.delta, *r.alpha});
  }
  return out;
}

std::string scatter_svg(std::span<const BiasRow> rows, const LoessFit* fit,
                        const std::string& title) {
  constexpr double kWidth = 640, kHeight = 480;
  constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
  constexpr int kTicks = 5;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double x_max = 0.0, y_max = 0.0;
  for (const auto& r : rows) {
    x_max = std::max(x_max, r.delta);
    if (r.alpha) y_max = std::max(y_max, *r.alpha);
  }
  if (fit) {
    for (const auto& p : fit->fitted) {
      x_max = std::max(x_max, p.x);
      y_max = std::max(y_max, p.y);
    }
  }
  x_max = x_max > 0 ? x_max * 1.05 : 1.0;
  y_max = y_max > 0 ? y_max * 1.05 : 1.0;
  double y_min = 0.0;
  if (fit) {
    for (const auto& p : fit->fitted) y_min = std::min(y_min, p.y * 1.05);
  }

  auto sx = [&](double x) { return kLeft + plot_w * x / x_max; };
  auto sy = [&](double y) {
    return kTop + plot_h * (1.0 - (y - y_min) / (y_max - y_min));
  };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-size=\"15\">" << xml_escape(title) << "</text>\n";
  // axes
  out << "<line x1=\"" << kLeft << "\" y1=\"" << num(sy(y_min)) << "\" x2=\""
      << kLeft + plot_w << "\" y2=\"" << num(sy(y_min))
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= kTicks; ++i) {
    const double xv = x_max * i / kTicks;
    const double yv = y_min + (y_max - y_min) * i / kTicks;
    out << "<line x1=\"" << num(sx(xv)) << "\" y1=\"" << kTop + plot_h
        << "\" x2=\"" << num(sx(xv)) << "\" y2=\"" << kTop + plot_h + 5
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(sx(xv)) << "\" y=\"" << kTop + plot_h + 18
        << "\" text-anchor=\"middle\">" << short_number(xv) << "</text>\n";
    out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(sy(yv)) << "\" x2=\""
        << kLeft << "\" y2=\"" << num(sy(yv)) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(sy(yv) + 4)
        << "\" text-anchor=\"end\">" << short_number(yv) << "</text>\n";
  }
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15
      << "\" text-anchor=\"middle\">Diffusion Bias (δ)</text>\n";
  out << "<text x=\"18\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << kTop + plot_h / 2 << ")\">Bias Amplification (α)</text>\n";

  if (fit && !fit->fitted.empty()) {
    out << "<polyline fill=\"none\" stroke=\"#444444\" stroke-width=\"2\" "
           "points=\"";
    for (std::size_t i = 0; i < fit->fitted.size(); ++i) {
      if (i) out << ' ';
      out << num(sx(fit->fitted[i].x)) << ',' << num(sy(fit->fitted[i].y));
    }
    out << "\"/>\n";
  }
  for (const auto& r : rows) {
    if (!r.alpha) continue;
    const bool male = r.dominance == Dominance::MaleDominated;
    out << "<circle cx=\"" << num(sx(r.delta)) << "\" cy=\""
        << num(sy(*r.alpha)) << "\" r=\"4\" fill=\""
        << (male ? "#1f77b4" : "#d62728") << "\"><title>"
        << xml_escape(r.concept_name) << "</title></circle>\n";
  }
  out << "<circle cx=\"" << kLeft + plot_w - 150 << "\" cy=\"" << kTop + 10
      << "\" r=\"4\" fill=\"#1f77b4\"/><text x=\"" << kLeft + plot_w - 140
      << "\" y=\"" << kTop + 14 << "\">male-dominated</text>\n";
  out << "<circle cx=\"" << kLeft + plot_w - 150 << "\" cy=\"" << kTop + 28
      << "\" r=\"4\" fill=\"#d62728\"/><text x=\"" << kLeft + plot_w - 140
      << "\" y=\"" << kTop + 32 << "\">female-dominated</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace biasaudit
