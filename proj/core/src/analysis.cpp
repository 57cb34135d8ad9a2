#include "biasaudit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "biasaudit/errors.hpp"

namespace biasaudit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Stats {
  std::size_t n = 0;
  double min = kNaN, max = kNaN, mean = kNaN, stddev = kNaN;
};

Stats describe(const std::vector<double>& xs) {
  Stats s;
  s.n = xs.size();
  if (xs.empty()) return s;
  auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  s.min = *lo;
  s.max = *hi;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

GroupSummary summarize(Group group, const std::vector<const BiasRow*>& rows) {
  std::vector<double> deltas, alphas;
  GroupSummary out;
  out.group = group;
  for (const BiasRow* r : rows) {
    deltas.push_back(r->delta);
    if (r->alpha) {
      alphas.push_back(*r->alpha);
    } else {
      ++out.alpha_undefined_count;
    }
  }
  const Stats d = describe(deltas);
  const Stats a = describe(alphas);
  out.n = d.n;
  out.delta_min = d.min;
  out.delta_max = d.max;
  out.delta_mean = d.mean;
  out.delta_stderr = d.stddev / std::sqrt(static_cast<double>(d.n));
  out.alpha_n = a.n;
  out.alpha_min = a.min;
  out.alpha_max = a.max;
  out.alpha_mean = a.mean;
  out.alpha_stderr =
      a.n ? a.stddev / std::sqrt(static_cast<double>(a.n)) : kNaN;
  return out;
}

BiasRow make_row(const AssociationSuite& suite, const TargetPrompt& target,
                 double epsilon) {
  BiasRow row;
  row.concept_name = target.concept_name;
  row.category = target.category;
  row.dominance = target.dominance;
  row.mcas = mcas(suite);
  row.delta = diffusion_bias(suite);
  row.alpha = bias_amplification(suite, epsilon);
  return row;
}

// Catalog order, grouped by category.
std::vector<const TargetPrompt*> table_order(const PromptManifest& manifest) {
  std::vector<const TargetPrompt*> order;
  for (const auto& t : manifest.target_prompts) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    return a->category < b->category;
  });
  return order;
}

}  // namespace

std::string_view to_string(AggregationMode mode) {
  return mode == AggregationMode::MeanThenMetrics ? "mean-then-metrics"
                                                  : "metrics-then-mean";
}

std::optional<AggregationMode> parse_aggregation_mode(std::string_view s) {
  if (s == "mean-then-metrics") return AggregationMode::MeanThenMetrics;
  if (s == "metrics-then-mean") return AggregationMode::MetricsThenMean;
  return std::nullopt;
}

std::string_view to_string(Group g) {
  switch (g) {
    case Group::MaleDominated: return "male_dominated";
    case Group::FemaleDominated: return "female_dominated";
    case Group::Overall: return "overall";
  }
  return "";
}

AssociationSuite aggregate_encoders(std::span<const AssociationSuite> suites) {
  if (suites.empty()) {
    throw Error(ErrorKind::EmptyInput, "no suites to aggregate");
  }
  std::set<std::string> encoders;
  AssociationSuite out;
  out.concept_name = suites.front().concept_name;
  out.encoder = "mean";
  for (const auto& s : suites) {
    if (s.concept_name != out.concept_name) {
      throw Error(ErrorKind::InvalidArgument,
                  "cannot aggregate suites of '" + out.concept_name + "' and '" +
                      s.concept_name + "'",
                  s.concept_name);
    }
    if (!encoders.insert(s.encoder).second) {
      throw Error(ErrorKind::DuplicateEncoder,
                  "encoder '" + s.encoder + "' appears twice for concept '" +
                      s.concept_name + "'",
                  s.encoder);
    }
    out.ii += s.ii;
    out.itp += s.itp;
    out.it += s.it;
    out.tt += s.tt;
  }
  const double n = static_cast<double>(suites.size());
  out.ii /= n;
  out.itp /= n;
  out.it /= n;
  out.tt /= n;
  return out;
}

std::vector<AssociationSuite> mean_suites_by_concept(
    std::span<const AssociationSuite> suites) {
  std::map<std::string, std::vector<AssociationSuite>> grouped;
  for (const auto& s : suites) grouped[s.concept_name].push_back(s);
  std::vector<AssociationSuite> out;
  out.reserve(grouped.size());
  for (auto& [concept_name, group] : grouped) {
    std::sort(group.begin(), group.end(), [](const auto& a, const auto& b) {
      return a.encoder < b.encoder;
    });
    out.push_back(aggregate_encoders(group));
  }
  return out;
}

std::vector<BiasRow> build_bias_rows(
    std::span<const AssociationSuite> mean_suites,
    const PromptManifest& manifest, double epsilon) {
  std::map<std::string, const AssociationSuite*> by_concept;
  for (const auto& s : mean_suites) by_concept[s.concept_name] = &s;
  std::vector<BiasRow> rows;
  for (const TargetPrompt* t : table_order(manifest)) {
    auto it = by_concept.find(t->concept_name);
    if (it == by_concept.end()) {
      throw Error(ErrorKind::MissingSuite,
                  "no suite for concept '" + t->concept_name + "'", t->concept_name);
    }
    rows.push_back(make_row(*it->second, *t, epsilon));
  }
  return rows;
}

std::vector<BiasRow> rows_from_suites(std::span<const AssociationSuite> suites,
                                      const PromptManifest& manifest,
                                      double epsilon, AggregationMode mode) {
  if (mode == AggregationMode::MeanThenMetrics) {
    const auto means = mean_suites_by_concept(suites);
    return build_bias_rows(means, manifest, epsilon);
  }

  std::map<std::string, std::vector<const AssociationSuite*>> grouped;
  for (const auto& s : suites) grouped[s.concept_name].push_back(&s);
  std::vector<BiasRow> rows;
  for (const TargetPrompt* t : table_order(manifest)) {
    auto it = grouped.find(t->concept_name);
    if (it == grouped.end()) {
      throw Error(ErrorKind::MissingSuite,
                  "no suite for concept '" + t->concept_name + "'", t->concept_name);
    }
    std::set<std::string> encoders;
    BiasRow row;
    row.concept_name = t->concept_name;
    row.category = t->category;
    row.dominance = t->dominance;
    double alpha_sum = 0.0;
    std::size_t alpha_n = 0;
    for (const AssociationSuite* s : it->second) {
      if (!encoders.insert(s->encoder).second) {
        throw Error(ErrorKind::DuplicateEncoder,
                    "encoder '" + s->encoder + "' appears twice for concept '" +
                        s->concept_name + "'",
                    s->encoder);
      }
      const BiasRow per = make_row(*s, *t, epsilon);
      row.mcas += per.mcas;
      row.delta += per.delta;
      if (per.alpha) {
        alpha_sum += *per.alpha;
        ++alpha_n;
      }
    }
    const double n = static_cast<double>(it->second.size());
    row.mcas /= n;
    row.delta /= n;
    if (alpha_n) row.alpha = alpha_sum / static_cast<double>(alpha_n);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<GroupSummary> summarize_groups(std::span<const BiasRow> rows) {
  std::vector<const BiasRow*> male, female, all;
  for (const auto& r : rows) {
    (r.dominance == Dominance::MaleDominated ? male : female).push_back(&r);
    all.push_back(&r);
  }
  if (male.empty()) {
    throw Error(ErrorKind::EmptyGroup, "no male-dominated rows",
                "male_dominated");
  }
  if (female.empty()) {
    throw Error(ErrorKind::EmptyGroup, "no female-dominated rows",
                "female_dominated");
  }
  return {summarize(Group::MaleDominated, male),
          summarize(Group::FemaleDominated, female),
          summarize(Group::Overall, all)};
}

ThresholdReport threshold_report(std::span<const BiasRow> rows,
                                 double threshold) {
  if (!(threshold >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "threshold must be >= 0");
  }
  ThresholdReport report;
  report.threshold = threshold;
  std::vector<double> low_alpha, high_alpha;
  for (const auto& r : rows) {
    const bool low = r.delta <= threshold;
    Partition& p = low ? report.low : report.high;
    ++p.n;
    p.concepts.push_back(r.concept_name);
    if (r.alpha) (low ? low_alpha : high_alpha).push_back(*r.alpha);
  }
  auto finish = [](Partition& p, const std::vector<double>& alphas) {
    const Stats s = describe(alphas);
    p.alpha_n = s.n;
    p.alpha_mean = s.mean;
    p.alpha_stddev = s.stddev;
  };
  finish(report.low, low_alpha);
  finish(report.high, high_alpha);
  return report;
}

double summary_statistic(const GroupSummary& s, std::string_view name) {
  if (name == "n") return static_cast<double>(s.n);
  if (name == "delta_min") return s.delta_min;
  if (name == "delta_max") return s.delta_max;
  if (name == "delta_mean") return s.delta_mean;
  if (name == "delta_stderr") return s.delta_stderr;
  if (name == "alpha_min") return s.alpha_min;
  if (name == "alpha_max") return s.alpha_max;
  if (name == "alpha_mean") return s.alpha_mean;
  if (name == "alpha_stderr") return s.alpha_stderr;
  if (name == "alpha_undefined_count") {
    return static_cast<double>(s.alpha_undefined_count);
  }
  throw Error(ErrorKind::InvalidArgument,
              "unknown summary statistic '" + std::string(name) + "'",
              std::string(name));
}

double default_tolerance(std::string_view statistic) {
  if (statistic.ends_with("_min") || statistic.ends_with("_max") ||
      statistic == "n" || statistic == "alpha_undefined_count") {
    return 1e-9;
  }
  if (statistic.starts_with("delta")) return 0.005;
  return 0.02;
}

std::vector<Discrepancy> compare_published(
    std::span<const GroupSummary> recomputed,
    std::span<const PublishedStat> published) {
  std::vector<Discrepancy> out;
  for (const auto& p : published) {
    auto it = std::find_if(recomputed.begin(), recomputed.end(),
                           [&](const auto& s) { return s.group == p.group; });
    if (it == recomputed.end()) continue;
    const double value = summary_statistic(*it, p.statistic);
    const double tol = default_tolerance(p.statistic);
    if (!(std::abs(value - p.value) <= tol)) {
      out.push_back({p.group, p.statistic, p.value, value, tol});
    }
  }
  return out;
}

}  // namespace biasaudit
