#pragma once

// Randomized checks shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "biasaudit/metrics.hpp"
#include "gen.hpp"
#include "oracle.hpp"

namespace checks {

struct Outcome {
  std::size_t cases = 0;
  double max_error = 0.0;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
  void fail(std::size_t i, const std::string& what) {
    if (failures.size() < 20) failures.push_back("case " + std::to_string(i) + ": " + what);
  }
};

inline double component_error(const biasaudit::AssociationSuite& a,
                              const oracle::Suite& b) {
  return std::max({std::fabs(a.ii - b.ii), std::fabs(a.itp - b.itp),
                   std::fabs(a.it - b.it), std::fabs(a.tt - b.tt)});
}

// Library metrics against the naive oracle on random small instances.
inline Outcome oracle_equivalence(std::size_t cases, std::uint64_t seed,
                                  double tolerance = 1e-12) {
  gen::Rng rng(seed);
  Outcome out;
  for (std::size_t i = 0; i < cases; ++i, ++out.cases) {
    const auto in = gen::instance(rng, 10, 8);
    const auto got = biasaudit::compute_suite(gen::study_set(in));
    const auto want = oracle::suite(in);
    double err = component_error(got, want);
    err = std::max(err, std::fabs(biasaudit::mcas(got) - oracle::mcas(want)));
    err = std::max(err, std::fabs(biasaudit::diffusion_bias(got) - oracle::delta(want)));
    const auto a = biasaudit::bias_amplification(got);
    const auto b = oracle::alpha(want);
    if (a.has_value() != b.has_value()) {
      out.fail(i, "alpha definedness differs");
      continue;
    }
    // alpha is a ratio; compare relative to its size
    if (a) err = std::max(err, std::fabs(*a - *b) / std::max(1.0, std::fabs(*b)));
    out.max_error = std::max(out.max_error, err);
    if (err > tolerance) out.fail(i, "error " + std::to_string(err));
  }
  return out;
}

namespace detail {

inline std::vector<oracle::Vec> scaled(gen::Rng& rng, std::vector<oracle::Vec> v) {
  for (auto& x : v) {
    const double k = std::exp(rng.uniform(-5, 5));
    for (auto& c : x) c *= k;
  }
  return v;
}

template <typename T>
std::vector<T> shuffled(gen::Rng& rng, std::vector<T> v) {
  std::shuffle(v.begin(), v.end(), rng.engine());
  return v;
}

inline bool same(const biasaudit::AssociationSuite& a, const biasaudit::AssociationSuite& b,
                 double tol) {
  return std::fabs(a.ii - b.ii) <= tol && std::fabs(a.itp - b.itp) <= tol &&
         std::fabs(a.it - b.it) <= tol && std::fabs(a.tt - b.tt) <= tol;
}

inline bool negated(const biasaudit::AssociationSuite& a,
                    const biasaudit::AssociationSuite& b, double tol) {
  return std::fabs(a.ii + b.ii) <= tol && std::fabs(a.itp + b.itp) <= tol &&
         std::fabs(a.it + b.it) <= tol && std::fabs(a.tt + b.tt) <= tol;
}

}  // namespace detail

// Antisymmetry, positive-scale invariance, permutation invariance, range
// bounds and A = B neutrality, one random instance per case.
inline Outcome metric_properties(std::size_t cases, std::uint64_t seed) {
  using biasaudit::compute_suite;
  gen::Rng rng(seed);
  Outcome out;
  for (std::size_t i = 0; i < cases; ++i, ++out.cases) {
    const auto in = gen::instance(rng, 10, 8);
    const auto base = compute_suite(gen::study_set(in));

    auto swapped = in;
    std::swap(swapped.a_img, swapped.b_img);
    std::swap(swapped.a_txt, swapped.b_txt);
    if (!detail::negated(base, compute_suite(gen::study_set(swapped)), 1e-12)) {
      out.fail(i, "antisymmetry");
    }

    auto scaled = in;
    scaled.a_img = detail::scaled(rng, in.a_img);
    scaled.b_img = detail::scaled(rng, in.b_img);
    scaled.a_txt = detail::scaled(rng, in.a_txt);
    scaled.b_txt = detail::scaled(rng, in.b_txt);
    scaled.targets = detail::scaled(rng, in.targets);
    scaled.prompt = detail::scaled(rng, {in.prompt})[0];
    scaled.keyword = detail::scaled(rng, {in.keyword})[0];
    if (!detail::same(base, compute_suite(gen::study_set(scaled)), 1e-12)) {
      out.fail(i, "scale invariance");
    }

    auto permuted = in;
    permuted.a_img = detail::shuffled(rng, in.a_img);
    permuted.b_img = detail::shuffled(rng, in.b_img);
    permuted.a_txt = detail::shuffled(rng, in.a_txt);
    permuted.b_txt = detail::shuffled(rng, in.b_txt);
    permuted.targets = detail::shuffled(rng, in.targets);
    if (!detail::same(base, compute_suite(gen::study_set(permuted)), 0.0)) {
      out.fail(i, "permutation invariance");
    }

    for (double c : {base.ii, base.itp, base.it, base.tt}) {
      if (!(c >= -2.0 && c <= 2.0)) out.fail(i, "component out of [-2, 2]");
    }
    const double delta = biasaudit::diffusion_bias(base);
    if (!(delta >= 0.0 && delta <= 2.0)) out.fail(i, "delta out of [0, 2]");
    if (const auto alpha = biasaudit::bias_amplification(base); alpha && !(*alpha >= 0.0)) {
      out.fail(i, "negative alpha");
    }

    auto neutral = in;
    neutral.b_img = in.a_img;
    neutral.b_txt = in.a_txt;
    const auto zero = compute_suite(gen::study_set(neutral));
    if (!detail::same(zero, {}, 0.0) || biasaudit::mcas(zero) != 0.0 ||
        biasaudit::diffusion_bias(zero) != 0.0 ||
        biasaudit::bias_amplification(zero).has_value()) {
      out.fail(i, "A = B neutrality");
    }
  }
  return out;
}

}  // namespace checks
