#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biasaudit/metrics.hpp"
#include "biasaudit/prompt_manifest.hpp"

namespace biasaudit {

/// Per-concept bias metrics: one row of the per-keyword table.
struct BiasRow {
  std::string concept_name;
  Category category = Category::Occupation;
  Dominance dominance = Dominance::MaleDominated;
  double mcas = 0.0;
  double delta = 0.0;
  std::optional<double> alpha;  // empty when undefined

  bool alpha_defined() const { return alpha.has_value(); }
};

/// How per-encoder suites become one row per concept.
enum class AggregationMode {
  MeanThenMetrics,  // average components across encoders, then metrics
  MetricsThenMean,  // metrics per encoder, then average the metrics
};

std::string_view to_string(AggregationMode mode);
std::optional<AggregationMode> parse_aggregation_mode(std::string_view s);

/// Componentwise mean of one concept's suites across encoders. The result's
/// encoder is "mean". Throws EmptyInput, DuplicateEncoder, or
/// InvalidArgument when the suites name different concepts.
AssociationSuite aggregate_encoders(std::span<const AssociationSuite> suites);

/// One row per manifest concept from one mean suite per concept, in catalog
/// order. Throws MissingSuite.
std::vector<BiasRow> build_bias_rows(std::span<const AssociationSuite> mean_suites,
                                     const PromptManifest& manifest,
                                     double epsilon = kDefaultAlphaEpsilon);

/// Full path from per-encoder suites (any order, any number of encoders per
/// concept) to rows, honoring the aggregation mode. With MetricsThenMean, a
/// row's alpha is the mean over encoders where it is defined, and is
/// undefined if it is undefined for every encoder.
std::vector<BiasRow> rows_from_suites(std::span<const AssociationSuite> suites,
                                      const PromptManifest& manifest,
                                      double epsilon, AggregationMode mode);

/// Groups suites by concept and averages each group; output sorted by concept.
std::vector<AssociationSuite> mean_suites_by_concept(
    std::span<const AssociationSuite> suites);

enum class Group { MaleDominated, FemaleDominated, Overall };
std::string_view to_string(Group g);

struct GroupSummary {
  Group group = Group::Overall;
  std::size_t n = 0;
  double delta_min = 0, delta_max = 0, delta_mean = 0, delta_stderr = 0;
  // alpha statistics cover rows where alpha is defined (alpha_n of them);
  // with alpha_n == 0 they are NaN.
  std::size_t alpha_n = 0;
  double alpha_min = 0, alpha_max = 0, alpha_mean = 0, alpha_stderr = 0;
  std::size_t alpha_undefined_count = 0;
};

/// Min, max, mean and standard error (sample stddev / sqrt(n)) of delta and
/// alpha for the male-dominated, female-dominated and overall groups, in
/// that order. Standard error of a single value is NaN. Throws EmptyGroup.
std::vector<GroupSummary> summarize_groups(std::span<const BiasRow> rows);

struct Partition {
  std::size_t n = 0;
  std::size_t alpha_n = 0;
  double alpha_mean = 0;    // NaN when alpha_n == 0
  double alpha_stddev = 0;  // sample stddev; NaN when alpha_n < 2
  std::vector<std::string> concepts;
};

struct ThresholdReport {
  double threshold = 0.02;
  Partition low;   // delta <= threshold
  Partition high;  // delta > threshold
};

ThresholdReport threshold_report(std::span<const BiasRow> rows,
                                 double threshold = 0.02);

/// A published summary statistic to compare against a recomputed one.
struct PublishedStat {
  Group group;
  std::string statistic;  // a GroupSummary column name, e.g. "alpha_mean"
  double value;
};

/// Published value that the recomputation does not reproduce within
/// `tolerance`. Neither number is altered; both are reported.
struct Discrepancy {
  Group group;
  std::string statistic;
  double published;
  double recomputed;
  double tolerance;
};

/// Value of a named GroupSummary column; throws InvalidArgument for an
/// unknown name.
double summary_statistic(const GroupSummary& s, std::string_view statistic);

/// Tolerance used when comparing against a published two-decimal table:
/// 0.005 for delta columns, 0.02 for alpha columns, 1e-9 for min/max.
double default_tolerance(std::string_view statistic);

std::vector<Discrepancy> compare_published(
    std::span<const GroupSummary> recomputed,
    std::span<const PublishedStat> published);

}  // namespace biasaudit
