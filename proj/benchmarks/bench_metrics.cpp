#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <vector>

#include "biasaudit/analysis.hpp"
#include "biasaudit/loess.hpp"
#include "biasaudit/metrics.hpp"
#include "biasaudit/philox.hpp"
#include "biasaudit/prompt_manifest.hpp"

using namespace biasaudit;

namespace {

std::vector<Vector> draw(NormalStream& rng, std::size_t count, std::size_t dim) {
  std::vector<Vector> out(count, Vector(dim));
  for (auto& v : out) {
    for (auto& x : v) x = rng.next();
  }
  return out;
}

// One concept under one encoder with the default catalog's set sizes.
StudySet make_set(std::size_t dim) {
  NormalStream rng(1, 0);
  auto pool = std::make_shared<AttributePool>();
  pool->dim = static_cast<int>(dim);
  pool->a_images = draw(rng, 64, dim);
  pool->b_images = draw(rng, 64, dim);
  pool->a_texts = draw(rng, 10, dim);
  pool->b_texts = draw(rng, 10, dim);
  StudySet set;
  set.attributes = pool;
  set.target_images = draw(rng, 20, dim);
  set.target_prompt_text = draw(rng, 1, dim)[0];
  set.target_keyword_text = draw(rng, 1, dim)[0];
  return set;
}

void BM_Cosine(benchmark::State& state) {
  NormalStream rng(2, 0);
  const auto v = draw(rng, 2, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cosine(v[0], v[1]));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Cosine)->Arg(512)->Arg(768);

void BM_ComputeSuite(benchmark::State& state) {
  const auto set = make_set(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(compute_suite(set));
}
BENCHMARK(BM_ComputeSuite)->Arg(512)->Unit(benchmark::kMicrosecond);

void BM_RowsFromSuites(benchmark::State& state) {
  const auto manifest = default_prompt_manifest();
  NormalStream rng(3, 0);
  std::vector<AssociationSuite> suites;
  for (const auto& c : manifest.concepts()) {
    for (const char* enc : {"RN50", "RN101", "RN50x4", "RN50x16", "ViT-B/16", "ViT-B/32"}) {
      suites.push_back({c, enc, rng.next(), rng.next(), rng.next(), rng.next()});
    }
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rows_from_suites(suites, manifest, kDefaultAlphaEpsilon, AggregationMode::MeanThenMetrics));
  }
}
BENCHMARK(BM_RowsFromSuites)->Unit(benchmark::kMicrosecond);

void BM_Loess(benchmark::State& state) {
  NormalStream rng(4, 0);
  std::vector<Point> pts;
  for (int i = 0; i < state.range(0); ++i) {
    const double x = std::fabs(rng.next()) * 0.05;
    pts.push_back({x, 1.0 + 200.0 * x * x + rng.next()});
  }
  for (auto _ : state) benchmark::DoNotOptimize(loess_fit(pts));
}
BENCHMARK(BM_Loess)->Arg(28)->Arg(280)->Unit(benchmark::kMicrosecond);

void BM_NormalStream(benchmark::State& state) {
  NormalStream rng(5, 0);
  for (auto _ : state) benchmark::DoNotOptimize(rng.next());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_NormalStream);

}  // namespace

BENCHMARK_MAIN();
