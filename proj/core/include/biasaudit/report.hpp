#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "biasaudit/analysis.hpp"
#include "biasaudit/loess.hpp"
#include "biasaudit/metrics.hpp"
#include "biasaudit/prompt_manifest.hpp"

namespace biasaudit {

// scores.json: array of {concept, encoder, ii, itp, it, tt}.
nlohmann::json suites_to_json(std::span<const AssociationSuite> suites);
std::vector<AssociationSuite> suites_from_json(const nlohmann::json& doc);

// report.json: array of {concept, category, dominance, mcas, delta, alpha,
// alpha_defined}; alpha is null when undefined.
nlohmann::json rows_to_json(std::span<const BiasRow> rows);
std::vector<BiasRow> rows_from_json(const nlohmann::json& doc);

/// A replayable table: rows plus, optionally, the summary statistics that
/// were published alongside them. Accepts either a bare report.json array or
/// an object {"model", "rows", "published_summary": [{"group", <stat>: v}]}.
struct RowFixture {
  std::string model;
  std::vector<BiasRow> rows;
  std::vector<PublishedStat> published;
};
RowFixture fixture_from_json(const nlohmann::json& doc);

nlohmann::json threshold_to_json(const ThresholdReport& report);

/// One header line, then one line per summary:
/// group,n,delta_min,delta_max,delta_mean,delta_stderr,alpha_min,alpha_max,
/// alpha_mean,alpha_stderr,alpha_undefined_count. Undefined values are empty.
std::string summary_csv(std::span<const GroupSummary> summaries);

std::string curve_csv(const LoessFit& fit);

/// Per-keyword table with MCAS, delta and alpha columns; keywords carry '*'
/// (male-dominated) or '#' (female-dominated). Display keywords come from the
/// manifest when it names the concept.
std::string rows_markdown(std::span<const BiasRow> rows,
                          const PromptManifest* manifest);

/// Group summary table ("mean +/- standard error") followed by a Notes
/// section listing every published value the recomputation does not match.
std::string summary_markdown(std::span<const GroupSummary> summaries,
                             std::span<const Discrepancy> discrepancies,
                             const std::string& model);

nlohmann::json discrepancies_to_json(std::span<const Discrepancy> discrepancies);

/// Scatter of delta (x) against alpha (y), colored by dominance, with the
/// LOESS curve as a polyline when given.
std::string scatter_svg(std::span<const BiasRow> rows, const LoessFit* fit,
                        const std::string& title);

/// Points usable for regression: rows with a defined alpha, (delta, alpha).
std::vector<Point> regression_points(std::span<const BiasRow> rows);

}  // namespace biasaudit
