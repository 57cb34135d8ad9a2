#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "biasaudit/analysis.hpp"
#include "biasaudit/errors.hpp"
#include "biasaudit/metrics.hpp"
#include "biasaudit/prompt_manifest.hpp"
#include "biasaudit/report.hpp"
#include "gen.hpp"
#include "tempdir.hpp"

using namespace biasaudit;

namespace {

AssociationSuite make(std::string concept_name, std::string encoder, double ii,
                      double itp, double it, double tt) {
  return {std::move(concept_name), std::move(encoder), ii, itp, it, tt};
}

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a biasaudit::Error");
  return ErrorKind::IoError;
}

RowFixture table3(const std::string& model) {
  std::ifstream in(testing::source_path("data/table3_" + model + ".json"));
  return fixture_from_json(nlohmann::json::parse(in));
}

BiasRow row(std::string name, Dominance d, double delta, std::optional<double> alpha) {
  BiasRow r;
  r.concept_name = std::move(name);
  r.dominance = d;
  r.delta = delta;
  r.alpha = alpha;
  return r;
}

constexpr auto M = Dominance::MaleDominated;
constexpr auto F = Dominance::FemaleDominated;

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("aggregate averages each component") {
    const std::vector<AssociationSuite> s{make("nurse", "RN50", 0, 0, 0, 0.02),
                                          make("nurse", "RN101", 0, 0, 0, 0.04)};
    const auto m = aggregate_encoders(s);
    CHECK(m.tt == doctest::Approx(0.03).epsilon(1e-15));
    CHECK(m.encoder == "mean");
    CHECK(m.concept_name == "nurse");
  }

  TEST_CASE("aggregate of one suite only renames the encoder") {
    const std::vector<AssociationSuite> s{make("ceo", "ViT-B/32", 0.1, -0.2, 0.3, -0.4)};
    const auto m = aggregate_encoders(s);
    CHECK(m.encoder == "mean");
    CHECK(m.ii == 0.1);
    CHECK(m.itp == -0.2);
    CHECK(m.it == 0.3);
    CHECK(m.tt == -0.4);
  }

  TEST_CASE("aggregate of six random suites matches a brute-force mean") {
    gen::Rng rng(3);
    std::vector<AssociationSuite> s;
    double sums[4] = {0, 0, 0, 0};
    for (int i = 0; i < 6; ++i) {
      s.push_back(make("x", "enc" + std::to_string(i), rng.uniform(-2, 2),
                       rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)));
      sums[0] += s.back().ii;
      sums[1] += s.back().itp;
      sums[2] += s.back().it;
      sums[3] += s.back().tt;
    }
    const auto m = aggregate_encoders(s);
    CHECK(std::fabs(m.ii - sums[0] / 6) < 1e-12);
    CHECK(std::fabs(m.itp - sums[1] / 6) < 1e-12);
    CHECK(std::fabs(m.it - sums[2] / 6) < 1e-12);
    CHECK(std::fabs(m.tt - sums[3] / 6) < 1e-12);
  }

  TEST_CASE("aggregate errors") {
    std::vector<AssociationSuite> none;
    CHECK(kind_of([&] { aggregate_encoders(none); }) == ErrorKind::EmptyInput);
    std::vector<AssociationSuite> dup{make("a", "e", 0, 0, 0, 0), make("a", "e", 0, 0, 0, 0)};
    CHECK(kind_of([&] { aggregate_encoders(dup); }) == ErrorKind::DuplicateEncoder);
    std::vector<AssociationSuite> mixed{make("a", "e", 0, 0, 0, 0), make("b", "f", 0, 0, 0, 0)};
    CHECK(kind_of([&] { aggregate_encoders(mixed); }) == ErrorKind::InvalidArgument);
  }

  TEST_CASE("mean suites by concept groups and sorts") {
    const std::vector<AssociationSuite> s{make("nurse", "a", 1, 1, 1, 1),
                                          make("ceo", "a", 2, 2, 2, 2),
                                          make("nurse", "b", 3, 3, 3, 3)};
    const auto m = mean_suites_by_concept(s);
    REQUIRE(m.size() == 2);
    CHECK(m[0].concept_name == "ceo");
    CHECK(m[1].concept_name == "nurse");
    CHECK(m[1].ii == 2.0);
  }

  TEST_CASE("bias row by hand arithmetic") {
    auto manifest = default_prompt_manifest();
    std::vector<AssociationSuite> suites;
    for (const auto& c : manifest.concepts()) suites.push_back(make(c, "mean", 0, 0, 0, 0));
    suites[0] = make(suites[0].concept_name, "mean", 0.03, 0.05, 0.04, 0.02);
    const auto rows = build_bias_rows(suites, manifest);
    REQUIRE(rows.size() == 28);
    CHECK(rows[0].mcas == doctest::Approx(0.14).epsilon(1e-14));
    CHECK(rows[0].delta == doctest::Approx(0.01).epsilon(1e-14));
    REQUIRE(rows[0].alpha_defined());
    CHECK(*rows[0].alpha == doctest::Approx(2.25).epsilon(1e-14));
    CHECK(rows[1].mcas == 0.0);
    CHECK(rows[1].delta == 0.0);
    CHECK_FALSE(rows[1].alpha_defined());
  }

  TEST_CASE("bias rows follow the catalog and split 14/14") {
    const auto manifest = default_prompt_manifest();
    std::vector<AssociationSuite> suites;
    for (const auto& c : manifest.concepts()) suites.push_back(make(c, "mean", 0.1, 0.2, 0.3, 0.4));
    const auto rows = build_bias_rows(suites, manifest);
    REQUIRE(rows.size() == 28);
    int male = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].concept_name == manifest.concepts()[i]);
      CHECK(rows[i].mcas == 0.1 + 0.2 + 0.3 + 0.4);
      male += rows[i].dominance == M;
    }
    CHECK(male == 14);
    suites.pop_back();
    CHECK(kind_of([&] { build_bias_rows(suites, manifest); }) == ErrorKind::MissingSuite);
  }

  TEST_CASE("aggregation modes differ only through the nonlinear metrics") {
    auto manifest = default_prompt_manifest();
    std::vector<AssociationSuite> suites;
    for (const auto& c : manifest.concepts()) {
      suites.push_back(make(c, "e1", 0.10, 0.2, 0.2, 0.10));
      suites.push_back(make(c, "e2", -0.02, 0.1, 0.1, 0.30));
    }
    const auto a = rows_from_suites(suites, manifest, 1e-9, AggregationMode::MeanThenMetrics);
    const auto b = rows_from_suites(suites, manifest, 1e-9, AggregationMode::MetricsThenMean);
    // mean suite (0.04, 0.15, 0.15, 0.2): delta 0.16, alpha 0.75
    CHECK(a[0].delta == doctest::Approx(0.16).epsilon(1e-14));
    CHECK(*a[0].alpha == doctest::Approx(0.75).epsilon(1e-14));
    // per encoder: delta 0 and 0.28, alpha 2 and 1/3
    CHECK(b[0].delta == doctest::Approx(0.14).epsilon(1e-14));
    CHECK(*b[0].alpha == doctest::Approx((2.0 + 1.0 / 3.0) / 2).epsilon(1e-14));
    CHECK(a[0].mcas == doctest::Approx(b[0].mcas).epsilon(1e-14));
    CHECK(parse_aggregation_mode("metrics-then-mean") == AggregationMode::MetricsThenMean);
    CHECK_FALSE(parse_aggregation_mode("median").has_value());
  }

  TEST_CASE("group summaries of the DALL-E 2 table") {
    const auto fixture = table3("dalle2");
    REQUIRE(fixture.rows.size() == 28);
    const auto s = summarize_groups(fixture.rows);
    REQUIRE(s.size() == 3);
    CHECK(s[0].group == Group::MaleDominated);
    CHECK(s[0].n == 14);
    CHECK(s[0].delta_mean == doctest::Approx(0.007857142857142858).epsilon(1e-12));
    CHECK(s[0].delta_stderr == doctest::Approx(0.002142857142857143).epsilon(1e-12));
    CHECK(s[0].alpha_mean == doctest::Approx(1.4757142857142858).epsilon(1e-12));
    CHECK(s[0].alpha_stderr == doctest::Approx(0.08504500609221266).epsilon(1e-12));
    CHECK(s[0].alpha_min == 1.00);
    CHECK(s[0].alpha_max == 2.05);
    CHECK(s[1].delta_mean == doctest::Approx(0.05142857142857143).epsilon(1e-12));
    CHECK(s[1].alpha_mean == doctest::Approx(9.984285714285715).epsilon(1e-12));
    CHECK(s[1].alpha_stderr == doctest::Approx(2.078061944281261).epsilon(1e-12));
    CHECK(s[2].n == 28);
    CHECK(s[2].delta_mean == doctest::Approx(0.02964285714285714).epsilon(1e-12));
    CHECK(s[2].alpha_mean == doctest::Approx(5.73).epsilon(1e-12));
    CHECK(s[2].alpha_max == 26.06);
  }

  TEST_CASE("overall summary is the weighted combination of the groups") {
    const auto s = summarize_groups(table3("sd2").rows);
    CHECK(s[2].n == s[0].n + s[1].n);
    const double weighted = (s[0].delta_mean * s[0].n + s[1].delta_mean * s[1].n) / s[2].n;
    CHECK(std::fabs(s[2].delta_mean - weighted) < 1e-12);
  }

  TEST_CASE("summaries with undefined alpha and single rows") {
    const std::vector<BiasRow> rows{row("a", M, 0.1, std::nullopt), row("b", F, 0.2, 3.0),
                                    row("c", F, 0.4, std::nullopt)};
    const auto s = summarize_groups(rows);
    CHECK(s[0].alpha_n == 0);
    CHECK(s[0].alpha_undefined_count == 1);
    CHECK(std::isnan(s[0].alpha_mean));
    CHECK(std::isnan(s[0].delta_stderr));
    CHECK(s[1].alpha_n == 1);
    CHECK(s[1].alpha_mean == 3.0);
    CHECK(std::isnan(s[1].alpha_stderr));
    CHECK(s[2].alpha_undefined_count == 2);
    CHECK(s[1].delta_stderr == doctest::Approx(0.1).epsilon(1e-14));
  }

  TEST_CASE("summaries need both groups") {
    const std::vector<BiasRow> rows{row("a", M, 0.1, 1.0)};
    CHECK(kind_of([&] { summarize_groups(rows); }) == ErrorKind::EmptyGroup);
  }

  TEST_CASE("threshold report on the DALL-E 2 table") {
    const auto t = threshold_report(table3("dalle2").rows, 0.02);
    CHECK(t.low.n == 16);
    CHECK(t.high.n == 12);
    CHECK(t.low.alpha_stddev == doctest::Approx(0.4143745286573488).epsilon(1e-12));
    CHECK(t.high.alpha_stddev == doctest::Approx(7.574624053077126).epsilon(1e-12));
    CHECK(t.low.alpha_mean == doctest::Approx(1.524375).epsilon(1e-12));
    const auto& c = t.low.concepts;
    CHECK(std::find(c.begin(), c.end(), "badminton") != c.end());
    CHECK(std::find(c.begin(), c.end(), "swimming") != c.end());
    CHECK(std::find(c.begin(), c.end(), "librarian") == c.end());
  }

  TEST_CASE("threshold report boundaries") {
    const std::vector<BiasRow> zeros{row("a", M, 0, 1.0), row("b", F, 0, 2.0)};
    const auto t = threshold_report(zeros, 0.02);
    CHECK(t.low.n == 2);
    CHECK(t.high.n == 0);
    CHECK(std::isnan(t.high.alpha_mean));

    const std::vector<BiasRow> straddle{row("a", M, 0.019, 1.0), row("b", F, 0.02, 2.0),
                                        row("c", F, 0.021, 3.0), row("d", M, 0.5, std::nullopt)};
    const auto u = threshold_report(straddle, 0.02);
    CHECK(u.low.n == 2);
    CHECK(u.high.n == 2);
    CHECK(u.high.alpha_n == 1);
    CHECK(kind_of([&] { threshold_report(straddle, -1.0); }) == ErrorKind::InvalidArgument);
  }

  TEST_CASE("published comparison flags only real mismatches") {
    const auto fixture = table3("sd2");
    const auto d = compare_published(summarize_groups(fixture.rows), fixture.published);
    auto flagged = [&](Group g, const std::string& stat) {
      return std::any_of(d.begin(), d.end(), [&](const Discrepancy& x) {
        return x.group == g && x.statistic == stat;
      });
    };
    CHECK(flagged(Group::MaleDominated, "alpha_mean"));
    CHECK_FALSE(flagged(Group::MaleDominated, "alpha_min"));
    CHECK_FALSE(flagged(Group::MaleDominated, "delta_mean"));
    CHECK_FALSE(flagged(Group::FemaleDominated, "alpha_max"));
    CHECK(default_tolerance("delta_mean") == 0.005);
    CHECK(default_tolerance("alpha_mean") == 0.02);
  }
}
