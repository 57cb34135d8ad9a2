#include <doctest.h>

#include <cmath>
#include <vector>

#include "biasaudit/errors.hpp"
#include "biasaudit/metrics.hpp"
#include "gen.hpp"
#include "oracle.hpp"

using namespace biasaudit;

namespace {

AssociationSuite make(double ii, double itp, double it, double tt) {
  return {"c", "enc", ii, itp, it, tt};
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

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("cosine of identical vectors is one") {
    CHECK(cosine(Vector{1, 0}, Vector{1, 0}) == 1.0);
  }

  TEST_CASE("cosine of orthogonal vectors is zero") {
    CHECK(cosine(Vector{1, 0}, Vector{0, 1}) == 0.0);
  }

  TEST_CASE("cosine by hand arithmetic") {
    // dot 8, both norms 3
    CHECK(cosine(Vector{1, 2, 2}, Vector{2, 1, 2}) == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
  }

  TEST_CASE("cosine stays inside [-1, 1] for nearly parallel vectors") {
    const Vector u{0.1, 0.2, 0.3};
    const Vector v{0.1 * 3, 0.2 * 3, 0.3 * 3};
    const double c = cosine(u, v);
    CHECK(c <= 1.0);
    CHECK(c == doctest::Approx(1.0));
    CHECK(cosine(u, Vector{-0.3, -0.6, -0.9}) >= -1.0);
  }

  TEST_CASE("cosine rejects mismatched and zero vectors") {
    CHECK(kind_of([] { cosine(Vector{1, 0}, Vector{1, 0, 0}); }) ==
          ErrorKind::DimensionMismatch);
    CHECK(kind_of([] { cosine(Vector{0, 0}, Vector{1, 0}); }) == ErrorKind::ZeroVector);
    CHECK(kind_of([] { cosine(Vector{1, 0}, Vector{0, 0}); }) == ErrorKind::ZeroVector);
  }

  TEST_CASE("differential association by hand") {
    const Vector w{1, 0};
    const std::vector<Vector> a{{1, 0}, {0, 1}};
    const std::vector<Vector> b{{0, 1}};
    CHECK(differential_association(w, a, b) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(differential_association(w, b, a) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(differential_association(w, a, a) == 0.0);
  }

  TEST_CASE("differential association needs both attribute sets") {
    const std::vector<Vector> a{{1, 0}};
    const std::vector<Vector> none;
    CHECK(kind_of([&] { differential_association(Vector{1, 0}, a, none); }) ==
          ErrorKind::EmptyAttributeSet);
    CHECK(kind_of([&] { differential_association(Vector{1, 0}, none, a); }) ==
          ErrorKind::EmptyAttributeSet);
  }

  TEST_CASE("association score averages over targets") {
    const std::vector<Vector> w{{1, 0}, {0, 1}};
    const std::vector<Vector> a{{1, 0}};
    const std::vector<Vector> b{{0, 1}};
    CHECK(association_score(w, a, b) == 0.0);

    const std::vector<Vector> one{{0.3, 0.7}};
    CHECK(association_score(one, a, b) == differential_association(one[0], a, b));

    const std::vector<Vector> same{{1, 0}};
    CHECK(association_score(same, same, same) == 0.0);
  }

  TEST_CASE("association score rejects an empty target set") {
    const std::vector<Vector> a{{1, 0}};
    const std::vector<Vector> none;
    CHECK(kind_of([&] { association_score(none, a, a); }) == ErrorKind::EmptyTargetSet);
  }

  TEST_CASE("suite is zero when both attribute sides are identical") {
    gen::Rng rng(7);
    auto in = gen::instance(rng);
    in.b_img = in.a_img;
    in.b_txt = in.a_txt;
    const auto s = compute_suite(gen::study_set(in));
    CHECK(s.ii == 0.0);
    CHECK(s.itp == 0.0);
    CHECK(s.it == 0.0);
    CHECK(s.tt == 0.0);
  }

  TEST_CASE("suite from orthonormal construction is all ones") {
    oracle::Instance in;
    in.a_img = in.a_txt = {{1, 0, 0}};
    in.b_img = in.b_txt = {{0, 1, 0}};
    in.targets = {{1, 0, 0}, {2, 0, 0}};
    in.prompt = in.keyword = {1, 0, 0};
    const auto s = compute_suite(gen::study_set(in));
    CHECK(s.ii == 1.0);
    CHECK(s.itp == 1.0);
    CHECK(s.it == 1.0);
    CHECK(s.tt == 1.0);
  }

  TEST_CASE("suite matches the brute-force oracle on a random instance") {
    gen::Rng rng(11);
    const auto in = gen::instance(rng, 5, 8);
    const auto got = compute_suite(gen::study_set(in, "nurse", "ViT-B/32"));
    const auto want = oracle::suite(in);
    CHECK(got.concept_name == "nurse");
    CHECK(got.encoder == "ViT-B/32");
    CHECK(std::fabs(got.ii - want.ii) < 1e-12);
    CHECK(std::fabs(got.itp - want.itp) < 1e-12);
    CHECK(std::fabs(got.it - want.it) < 1e-12);
    CHECK(std::fabs(got.tt - want.tt) < 1e-12);
  }

  TEST_CASE("mcas sums the components") {
    CHECK(mcas(make(0.1, 0.2, 0.3, 0.4)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(mcas(make(0, 0, 0, 0)) == 0.0);
    CHECK(mcas(make(-0.04, -0.03, -0.02, -0.01)) == doctest::Approx(-0.10).epsilon(1e-15));
  }

  TEST_CASE("diffusion bias is the gap between magnitudes") {
    CHECK(diffusion_bias(make(0.05, 0, 0, 0.03)) == doctest::Approx(0.02).epsilon(1e-14));
    CHECK(diffusion_bias(make(-0.05, 0, 0, 0.03)) == doctest::Approx(0.02).epsilon(1e-14));
    CHECK(diffusion_bias(make(0.01, 0, 0, 0.04)) == doctest::Approx(0.03).epsilon(1e-14));
  }

  TEST_CASE("bias amplification") {
    CHECK(*bias_amplification(make(0, 0.06, 0.04, 0.02)) == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(*bias_amplification(make(0, -0.06, -0.04, -0.02)) ==
          doctest::Approx(2.5).epsilon(1e-14));
    CHECK_FALSE(bias_amplification(make(0.3, 0.1, 0.1, 0.0)).has_value());
  }

  TEST_CASE("bias amplification honours epsilon") {
    const auto s = make(0, 0.1, 0.1, 1e-6);
    CHECK_FALSE(bias_amplification(s, 1e-5).has_value());
    CHECK(bias_amplification(s, 1e-7).has_value());
    CHECK(kind_of([&] { bias_amplification(s, 0.0); }) == ErrorKind::InvalidArgument);
  }
}
