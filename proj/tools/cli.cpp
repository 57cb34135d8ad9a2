#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "biasaudit/analysis.hpp"
#include "biasaudit/embedding_store.hpp"
#include "biasaudit/errors.hpp"
#include "biasaudit/loess.hpp"
#include "biasaudit/metrics.hpp"
#include "biasaudit/prompt_manifest.hpp"
#include "biasaudit/report.hpp"
#include "biasaudit/synthetic.hpp"

namespace biasaudit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
  std::string bundle_path;
  std::string manifest_path;
  std::string suites_path;
  std::string rows_path;
  std::string config_path;
  std::string out_dir;
  std::string svg_path;
  std::string format = "md";
  std::string aggregation = "mean-then-metrics";
  double epsilon = kDefaultAlphaEpsilon;
  double span = kDefaultLoessSpan;
  int degree = kDefaultLoessDegree;
  double threshold = 0.02;
  std::optional<std::uint64_t> seed;
};

// Files produced by one command, written together; if any write fails the
// ones already written are removed.
class OutputSet {
 public:
  void add(fs::path path, std::string content) {
    files_.emplace_back(std::move(path), std::move(content));
  }

  void commit() {
    std::vector<fs::path> written;
    try {
      for (const auto& [path, content] : files_) {
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
        written.push_back(path);
        out << content;
        out.close();
        if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
      }
    } catch (...) {
      std::error_code ec;
      for (const auto& p : written) fs::remove(p, ec);
      throw;
    }
  }

  const std::vector<std::pair<fs::path, std::string>>& files() const {
    return files_;
  }

 private:
  std::vector<std::pair<fs::path, std::string>> files_;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open " + path, path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::MalformedRecord, path + ": " + e.what(), path);
  }
}

PromptManifest resolve_manifest(const RunConfig& cfg) {
  if (!cfg.manifest_path.empty()) return load_prompt_manifest(cfg.manifest_path);
  if (!cfg.bundle_path.empty()) {
    const fs::path bundled = fs::path(cfg.bundle_path) / "prompt_manifest.toml";
    if (fs::exists(bundled)) return load_prompt_manifest(bundled);
  }
  return default_prompt_manifest();
}

std::vector<AssociationSuite> score_bundle(const std::string& dir,
                                           const PromptManifest& manifest) {
  const Bundle bundle = load_bundle(dir);
  const auto sets = partition(bundle.records, manifest);
  std::vector<AssociationSuite> suites;
  suites.reserve(sets.size());
  for (const auto& s : sets) suites.push_back(compute_suite(s));
  return suites;
}

std::optional<LoessFit> try_regress(std::span<const BiasRow> rows,
                                    const RunConfig& cfg, std::ostream& err) {
  const auto points = regression_points(rows);
  try {
    return loess_fit(points, cfg.span, cfg.degree);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientPoints &&
        e.kind() != ErrorKind::DegenerateNeighborhood) {
      throw;
    }
    err << "note: LOESS curve skipped (" << e.what() << ")\n";
    return std::nullopt;
  }
}

void add_summary_outputs(OutputSet& outputs, const fs::path& dir,
                         std::span<const BiasRow> rows,
                         std::span<const PublishedStat> published,
                         const std::string& model, const RunConfig& cfg) {
  const auto summaries = summarize_groups(rows);
  const auto discrepancies = compare_published(summaries, published);
  outputs.add(dir / "summary.csv", summary_csv(summaries));
  outputs.add(dir / "summary.md",
              summary_markdown(summaries, discrepancies, model));
  outputs.add(dir / "threshold.json",
              threshold_to_json(threshold_report(rows, cfg.threshold)).dump(2) +
                  "\n");
  if (!published.empty()) {
    outputs.add(dir / "notes.json", discrepancies_to_json(discrepancies).dump(2) + "\n");
  }
}

void add_regression_outputs(OutputSet& outputs, const fs::path& dir,
                            std::span<const BiasRow> rows, const RunConfig& cfg,
                            const std::string& title, std::ostream& err) {
  const auto fit = try_regress(rows, cfg, err);
  if (fit) outputs.add(dir / "curve.csv", curve_csv(*fit));
  if (!cfg.svg_path.empty()) {
    outputs.add(cfg.svg_path, scatter_svg(rows, fit ? &*fit : nullptr, title));
  }
}

void print_selected(const OutputSet& outputs, const std::string& filename,
                    std::ostream& out) {
  for (const auto& [path, content] : outputs.files()) {
    if (path.filename() == filename) out << content;
  }
}

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
  const PromptManifest manifest = resolve_manifest(cfg);
  const ValidationReport report = validate_bundle(cfg.bundle_path, manifest);
  if (cfg.format == "json") {
    json findings = json::array();
    for (const auto& f : report.findings) {
      findings.push_back({{"kind", to_string(f.kind)},
                          {"subject", f.subject},
                          {"line", f.line},
                          {"message", f.message}});
    }
    out << json{{"bundle", report.bundle.string()},
                {"ok", report.ok()},
                {"records", report.records_read},
                {"study_sets", report.study_sets},
                {"findings", findings}}
               .dump(2)
        << "\n";
  } else {
    for (const auto& f : report.findings) {
      out << to_string(f.kind);
      if (!f.subject.empty()) out << " [" << f.subject << "]";
      if (f.line) out << " line " << f.line;
      out << ": " << f.message << "\n";
    }
    out << (report.ok() ? "OK" : "FAILED") << ": " << report.records_read
        << " records, " << report.study_sets << " study sets, "
        << report.findings.size() << " findings\n";
  }
  return report.ok() ? kExitOk : kExitDataError;
}

int cmd_audit(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const PromptManifest manifest = resolve_manifest(cfg);
  std::vector<AssociationSuite> suites;
  if (!cfg.bundle_path.empty()) {
    suites = score_bundle(cfg.bundle_path, manifest);
  } else {
    suites = suites_from_json(read_json(cfg.suites_path));
  }
  const AggregationMode mode = *parse_aggregation_mode(cfg.aggregation);
  const auto rows = rows_from_suites(suites, manifest, cfg.epsilon, mode);

  const fs::path dir = cfg.out_dir;
  OutputSet outputs;
  outputs.add(dir / "scores.json", suites_to_json(suites).dump(2) + "\n");
  outputs.add(dir / "report.json", rows_to_json(rows).dump(2) + "\n");
  outputs.add(dir / "report.md", rows_markdown(rows, &manifest));
  add_summary_outputs(outputs, dir, rows, {}, "", cfg);
  add_regression_outputs(outputs, dir, rows, cfg,
                         "Diffusion Bias (δ) vs Bias Amplification (α)", err);
  outputs.commit();
  print_selected(outputs,
                 cfg.format == "json"  ? "report.json"
                 : cfg.format == "csv" ? "summary.csv"
                                       : "report.md",
                 out);
  return kExitOk;
}

std::vector<BiasRow> rows_input(const RunConfig& cfg, RowFixture& fixture) {
  if (!cfg.rows_path.empty()) {
    fixture = fixture_from_json(read_json(cfg.rows_path));
    return fixture.rows;
  }
  const PromptManifest manifest = resolve_manifest(cfg);
  const auto suites = suites_from_json(read_json(cfg.suites_path));
  return rows_from_suites(suites, manifest, cfg.epsilon,
                          *parse_aggregation_mode(cfg.aggregation));
}

int cmd_summarize(const RunConfig& cfg, std::ostream& out) {
  RowFixture fixture;
  const auto rows = rows_input(cfg, fixture);
  OutputSet outputs;
  add_summary_outputs(outputs, cfg.out_dir, rows, fixture.published,
                      fixture.model, cfg);
  outputs.commit();
  print_selected(outputs,
                 cfg.format == "json"  ? "threshold.json"
                 : cfg.format == "csv" ? "summary.csv"
                                       : "summary.md",
                 out);
  return kExitOk;
}

int cmd_regress(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  RowFixture fixture;
  const auto rows = rows_input(cfg, fixture);
  const auto points = regression_points(rows);
  const LoessFit fit = loess_fit(points, cfg.span, cfg.degree);
  OutputSet outputs;
  outputs.add(fs::path(cfg.out_dir) / "curve.csv", curve_csv(fit));
  if (!cfg.svg_path.empty()) {
    const std::string title =
        (fixture.model.empty() ? std::string() : fixture.model + ": ") +
        "Diffusion Bias (δ) vs Bias Amplification (α)";
    outputs.add(cfg.svg_path, scatter_svg(rows, &fit, title));
  }
  outputs.commit();
  if (rows.size() != points.size()) {
    err << "note: " << rows.size() - points.size()
        << " rows with undefined alpha excluded from the fit\n";
  }
  out << curve_csv(fit);
  return kExitOk;
}

int cmd_synth(const RunConfig& cfg, std::ostream& out) {
  SyntheticConfig config = cfg.config_path.empty()
                               ? default_synthetic_config()
                               : load_synthetic_config(cfg.config_path);
  if (cfg.seed) config.seed = *cfg.seed;
  const SyntheticBundle synthetic = generate(config);
  write_synthetic(cfg.out_dir, synthetic, config);
  out << "wrote " << synthetic.bundle.records.size() << " records for "
      << config.concepts.size() << " concepts x " << config.encoders.size()
      << " encoders to " << cfg.out_dir << "\n";
  return kExitOk;
}

const CLI::Validator kSpan(
    [](std::string& s) -> std::string {
      double v = 0;
      std::istringstream in(s);
      if (!(in >> v) || !(v > 0.0 && v <= 1.0)) {
        return "span must lie in (0, 1], got " + s;
      }
      return {};
    },
    "SPAN in (0,1]", "span");

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Gender-bias audit of text-to-image pipelines from embedding bundles",
               "biasaudit"};
  app.require_subcommand(1);

  auto add_manifest = [&](CLI::App* sub) {
    sub->add_option("--manifest", cfg.manifest_path,
                    "Prompt manifest TOML (default: bundle's "
                    "prompt_manifest.toml, else the built-in catalog)")
        ->check(CLI::ExistingFile);
  };
  auto add_metric_opts = [&](CLI::App* sub) {
    sub->add_option("--epsilon", cfg.epsilon,
                    "alpha is undefined when |TT| is below this")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--aggregation", cfg.aggregation, "Encoder aggregation order")
        ->check(CLI::IsMember({"mean-then-metrics", "metrics-then-mean"}))
        ->capture_default_str();
  };
  auto add_loess_opts = [&](CLI::App* sub) {
    sub->add_option("--span,--loess-span", cfg.span, "LOESS neighborhood fraction")
        ->check(kSpan)
        ->capture_default_str();
    sub->add_option("--degree,--loess-degree", cfg.degree, "LOESS local polynomial degree")
        ->check(CLI::IsMember({1, 2}))
        ->capture_default_str();
    sub->add_option("--svg", cfg.svg_path, "Write a delta/alpha scatter plot");
  };
  auto add_format = [&](CLI::App* sub, std::string def) {
    cfg.format = std::move(def);
    sub->add_option("--format", cfg.format, "What to print on stdout")
        ->check(CLI::IsMember({"json", "csv", "md"}))
        ->capture_default_str();
  };
  auto add_threshold = [&](CLI::App* sub) {
    sub->add_option("--threshold", cfg.threshold, "Delta threshold")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
  };

  auto* validate = app.add_subcommand("validate", "Check a bundle for errors");
  validate->add_option("--bundle", cfg.bundle_path, "Bundle directory")->required();
  add_manifest(validate);
  validate->add_option("--format", cfg.format, "json for a machine-readable report")
      ->check(CLI::IsMember({"json", "csv", "md"}));

  auto* audit = app.add_subcommand("audit", "Score a bundle end to end");
  auto* audit_bundle = audit->add_option("--bundle", cfg.bundle_path, "Bundle directory");
  auto* audit_suites =
      audit->add_option("--suites", cfg.suites_path, "Pre-computed suites JSON")
          ->check(CLI::ExistingFile);
  audit_bundle->excludes(audit_suites);
  audit->add_option("--out", cfg.out_dir, "Output directory")->required();
  add_manifest(audit);
  add_metric_opts(audit);
  add_loess_opts(audit);
  add_threshold(audit);

  auto* summarize = app.add_subcommand("summarize", "Group summaries of bias rows");
  auto* sum_rows = summarize->add_option(
      "--rows", cfg.rows_path, "report.json or a table fixture with published values")
      ->check(CLI::ExistingFile);
  auto* sum_suites = summarize->add_option("--suites", cfg.suites_path, "Suites JSON")
                         ->check(CLI::ExistingFile);
  sum_rows->excludes(sum_suites);
  summarize->add_option("--out", cfg.out_dir, "Output directory")->required();
  add_manifest(summarize);
  add_metric_opts(summarize);
  add_threshold(summarize);

  auto* regress = app.add_subcommand("regress", "LOESS fit of alpha against delta");
  auto* reg_rows = regress->add_option("--rows", cfg.rows_path, "report.json or fixture")
                       ->check(CLI::ExistingFile);
  auto* reg_suites = regress->add_option("--suites", cfg.suites_path, "Suites JSON")
                         ->check(CLI::ExistingFile);
  reg_rows->excludes(reg_suites);
  regress->add_option("--out", cfg.out_dir, "Output directory")->required();
  add_manifest(regress);
  add_metric_opts(regress);
  add_loess_opts(regress);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic bundle with known truth");
  synth->add_option("--config", cfg.config_path, "SyntheticConfig TOML")
      ->check(CLI::ExistingFile);
  synth->add_option("--seed", cfg.seed, "Override the configured seed");
  synth->add_option("--out", cfg.out_dir, "Bundle directory to write")->required();

  // --format is shared; its default depends on the subcommand.
  add_format(audit, "md");
  add_format(summarize, "md");
  cfg.format = "md";

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (audit->parsed() && cfg.bundle_path.empty() && cfg.suites_path.empty()) {
      throw CLI::ValidationError("audit", "one of --bundle or --suites is required");
    }
    if ((summarize->parsed() || regress->parsed()) && cfg.rows_path.empty() &&
        cfg.suites_path.empty()) {
      throw CLI::ValidationError("input", "one of --rows or --suites is required");
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(cfg, out);
    if (audit->parsed()) return cmd_audit(cfg, out, err);
    if (summarize->parsed()) return cmd_summarize(cfg, out);
    if (regress->parsed()) return cmd_regress(cfg, out, err);
    if (synth->parsed()) return cmd_synth(cfg, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace biasaudit::cli
